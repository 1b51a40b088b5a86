#include <doctest.h>

#include <chrono>

#include "kpo/adapter.hpp"
#include "kpo/error.hpp"
#include "kpo/io.hpp"
#include "test_util.hpp"

using namespace kpo;
using std::chrono::milliseconds;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::NotFound;
}

}  // namespace

TEST_CASE("precomputed file adapter") {
  test::TempDir dir;
  const auto path = dir.path() / "scores.tsv";
  io::write_atomic(path, "# context\tsequence\tlogprob\n\tACD\t-12.25\nMK\tW\t-0.5\n");
  auto a = open_adapter("file:" + path.string());
  CHECK(external_log_prob(*a, "ACD", "") == -12.25);
  CHECK(external_log_prob(*a, "W", "MK") == -0.5);
  CHECK(code_of([&] { external_log_prob(*a, "ACE", ""); }) == ErrorCode::AdapterError);
  CHECK(code_of([&] { open_adapter("file:" + (dir.path() / "missing").string()); }) == ErrorCode::AdapterError);
}

TEST_CASE("subprocess adapter speaks the line protocol") {
  auto echo = open_adapter("cmd:while read -r line; do printf 'OK\\t0.0\\n'; done");
  CHECK(external_log_prob(*echo, "ACD", "") == 0.0);
  CHECK(external_log_prob(*echo, "W", "MK") == 0.0);

  auto length = open_adapter(
      "cmd:while IFS=\"$(printf '\\t')\" read -r verb ctx seq; do printf 'OK\\t-%d\\n' \"${#seq}\"; done");
  CHECK(external_log_prob(*length, "ACDE", "MK") == -4.0);

  auto err = open_adapter("cmd:while read -r line; do printf 'ERR\\tno model\\n'; done");
  CHECK(code_of([&] { external_log_prob(*err, "A", ""); }) == ErrorCode::AdapterError);

  auto junk = open_adapter("cmd:while read -r line; do echo nonsense; done");
  CHECK(code_of([&] { external_log_prob(*junk, "A", ""); }) == ErrorCode::AdapterError);

  auto dead = open_adapter("cmd:exit 0");
  CHECK(code_of([&] { external_log_prob(*dead, "A", ""); }) == ErrorCode::AdapterError);
}

TEST_CASE("subprocess adapter times out") {
  auto slow = open_adapter("cmd:sleep 5", milliseconds(200));
  const auto start = std::chrono::steady_clock::now();
  CHECK(code_of([&] { external_log_prob(*slow, "A", ""); }) == ErrorCode::AdapterError);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(3));
}

TEST_CASE("unknown adapter scheme") {
  CHECK(code_of([] { open_adapter("http://x"); }) == ErrorCode::AdapterError);
}
