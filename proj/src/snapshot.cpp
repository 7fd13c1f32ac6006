#include "dac/snapshot.hpp"

#include <charconv>
#include <sstream>

#include "dac/error.hpp"

namespace dac {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::snapshot, "malformed number '" + std::string(text) + "'");
  return v;
}

void SnapshotWriter::put(std::string_view key, std::string_view value) { out_ << key << ' ' << value << '\n'; }

void SnapshotWriter::put(std::string_view key, std::uint64_t value) { out_ << key << ' ' << value << '\n'; }

void SnapshotWriter::put(std::string_view key, double value) { out_ << key << ' ' << format_double(value) << '\n'; }

void SnapshotWriter::put(std::string_view key, std::span<const double> values) {
  out_ << key;
  for (double v : values) out_ << ' ' << format_double(v);
  out_ << '\n';
}

void SnapshotWriter::put_words(std::string_view key, const std::vector<std::string>& words) {
  out_ << key;
  for (const auto& w : words) out_ << ' ' << w;
  out_ << '\n';
}

std::string SnapshotReader::expect_line(std::string_view key) {
  std::string line;
  if (!std::getline(in_, line)) throw Error(ErrorCode::snapshot, "snapshot truncated before '" + std::string(key) + "'");
  const auto space = line.find(' ');
  const std::string_view got = std::string_view(line).substr(0, space);
  if (got != key)
    throw Error(ErrorCode::snapshot, "snapshot expected '" + std::string(key) + "' but found '" + std::string(got) + "'");
  return space == std::string::npos ? std::string() : line.substr(space + 1);
}

std::vector<std::string> SnapshotReader::expect(std::string_view key) {
  std::istringstream words(expect_line(key));
  std::vector<std::string> out;
  for (std::string w; words >> w;) out.push_back(w);
  return out;
}

std::string SnapshotReader::expect_word(std::string_view key) {
  auto words = expect(key);
  if (words.size() != 1) throw Error(ErrorCode::snapshot, "snapshot field '" + std::string(key) + "' needs one value");
  return words.front();
}

std::uint64_t SnapshotReader::expect_u64(std::string_view key) {
  const std::string w = expect_word(key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
  if (res.ec != std::errc{} || res.ptr != w.data() + w.size())
    throw Error(ErrorCode::snapshot, "malformed integer for '" + std::string(key) + "'");
  return v;
}

double SnapshotReader::expect_double(std::string_view key) { return parse_double(expect_word(key)); }

std::vector<double> SnapshotReader::expect_doubles(std::string_view key, std::size_t count) {
  const auto words = expect(key);
  if (words.size() != count)
    throw Error(ErrorCode::snapshot, "snapshot field '" + std::string(key) + "' has wrong arity");
  std::vector<double> out;
  out.reserve(count);
  for (const auto& w : words) out.push_back(parse_double(w));
  return out;
}

}  // namespace dac
