#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "spim/encoding.hpp"
#include "spim/graph.hpp"

namespace spim {

/// Malformed input file; line() is 1-based (0 when not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Edge-list text: "n m", then m lines "l k w" (1-based, l < k). Lines starting
// with '#' are comments; "# key: value" comments before the header carry metadata.
MaxCutInstance parse_instance(std::string_view text);
std::string serialize_instance(const MaxCutInstance& instance);

MaxCutInstance read_instance(const std::filesystem::path& path);
void write_instance(const std::filesystem::path& path, const MaxCutInstance& instance);

// Encoding document (JSON): alpha, beta arrays (radians), sign, permutation
// (1-based), sigma.
std::string serialize_encoding(const Rank2Encoding& enc);
Rank2Encoding parse_encoding(std::string_view text);

Rank2Encoding read_encoding(const std::filesystem::path& path);
void write_encoding(const std::filesystem::path& path, const Rank2Encoding& enc);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Writes to `path` via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace spim
