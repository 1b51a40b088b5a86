#include "kpo/adapter.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>

#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace kpo {

PrecomputedScorer::PrecomputedScorer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::AdapterError, "cannot open score file '" + path.string() + "'");
  io::for_each_record(in, [&](std::string_view line, std::size_t number) {
    const auto fields = io::split_tabs(line);
    if (fields.size() != 3) {
      throw Error(ErrorCode::AdapterError, "score file: expected 3 fields", number);
    }
    double value = 0;
    try {
      value = io::parse_double(fields[2]);
    } catch (const Error&) {
      throw Error(ErrorCode::AdapterError, "score file: bad log-probability", number);
    }
    scores_[{std::string(fields[0]), std::string(fields[1])}] = value;
  });
}

double PrecomputedScorer::log_prob(std::string_view seq, std::string_view context) {
  auto it = scores_.find(std::pair<std::string, std::string>(context, seq));
  if (it == scores_.end()) {
    throw Error(ErrorCode::AdapterError, "no precomputed score for sequence '" + std::string(seq) + "'");
  }
  return it->second;
}

SubprocessScorer::SubprocessScorer(const std::string& command, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  int sv[2];
  if (socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) {
    throw Error(ErrorCode::AdapterError, std::string("socketpair: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    close(sv[0]);
    close(sv[1]);
    throw Error(ErrorCode::AdapterError, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    close(sv[0]);
    dup2(sv[1], STDIN_FILENO);
    dup2(sv[1], STDOUT_FILENO);
    close(sv[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(sv[1]);
  fd_ = sv[0];
  pid_ = pid;
}

SubprocessScorer::~SubprocessScorer() {
  if (fd_ >= 0) close(fd_);
  if (pid_ > 0) {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, &status, 0);
    }
  }
}

std::string SubprocessScorer::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorCode::AdapterError, "adapter timed out");
    pollfd p{fd_, POLLIN, 0};
    const int ready = poll(&p, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) throw Error(ErrorCode::AdapterError, "adapter timed out");
    char chunk[4096];
    const ssize_t n = read(fd_, chunk, sizeof chunk);
    if (n <= 0) throw Error(ErrorCode::AdapterError, "adapter closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

double SubprocessScorer::log_prob(std::string_view seq, std::string_view context) {
  std::string request = "SCORE\t";
  request += context;
  request += '\t';
  request += seq;
  request += '\n';
  std::size_t sent = 0;
  while (sent < request.size()) {
    const ssize_t n = send(fd_, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::AdapterError, "adapter closed its input");
    sent += static_cast<std::size_t>(n);
  }
  const std::string line = read_line();
  const auto fields = io::split_tabs(line);
  if (fields.size() == 2 && fields[0] == "OK") {
    try {
      return io::parse_double(fields[1]);
    } catch (const Error&) {
      throw Error(ErrorCode::AdapterError, "adapter returned a non-numeric score '" + line + "'");
    }
  }
  if (fields.size() >= 2 && fields[0] == "ERR") {
    throw Error(ErrorCode::AdapterError, "adapter error: " + std::string(fields[1]));
  }
  throw Error(ErrorCode::AdapterError, "protocol violation: '" + line + "'");
}

std::unique_ptr<ExternalScorer> open_adapter(std::string_view spec,
                                             std::chrono::milliseconds timeout) {
  if (spec.starts_with("file:")) {
    return std::make_unique<PrecomputedScorer>(std::filesystem::path(spec.substr(5)));
  }
  if (spec.starts_with("cmd:")) {
    return std::make_unique<SubprocessScorer>(std::string(spec.substr(4)), timeout);
  }
  throw Error(ErrorCode::AdapterError,
              "adapter spec must start with 'file:' or 'cmd:', got '" + std::string(spec) + "'");
}

}  // namespace kpo
