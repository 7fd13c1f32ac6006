#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dac {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(std::string_view text);

/// Line-oriented snapshot text: `key value value ...`, one record per line,
/// written in a fixed order by the caller.
class SnapshotWriter {
 public:
  explicit SnapshotWriter(std::ostream& out) : out_(out) {}

  void put(std::string_view key, std::string_view value);
  void put(std::string_view key, std::uint64_t value);
  void put(std::string_view key, double value);
  void put(std::string_view key, std::span<const double> values);
  void put_words(std::string_view key, const std::vector<std::string>& words);

 private:
  std::ostream& out_;
};

class SnapshotReader {
 public:
  explicit SnapshotReader(std::istream& in) : in_(in) {}

  /// Reads the next record and checks its key. Throws Error(snapshot) on mismatch.
  std::vector<std::string> expect(std::string_view key);
  std::string expect_word(std::string_view key);
  /// Rest of the line after the key, verbatim.
  std::string expect_line(std::string_view key);
  std::uint64_t expect_u64(std::string_view key);
  double expect_double(std::string_view key);
  std::vector<double> expect_doubles(std::string_view key, std::size_t count);

 private:
  std::istream& in_;
};

}  // namespace dac
