#pragma once

#include <filesystem>
#include <functional>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace kpo::io {

namespace fs = std::filesystem;

// Splits on every tab; empty fields are kept.
std::vector<std::string_view> split_tabs(std::string_view line);

// Calls fn(line, line_number) for every line that is neither blank nor a
// '#' comment. A trailing '\r' is not stripped: input is Unix-newline TSV.
void for_each_record(std::istream& in,
                     const std::function<void(std::string_view, std::size_t)>& fn);

// Opens for reading or throws IoError.
std::ifstream open_input(const fs::path& path);

// Writes through a sibling temp file and renames over the target.
void write_atomic(const fs::path& path, std::string_view contents);

std::string read_file(const fs::path& path);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const fs::path& path);

}  // namespace kpo::io
