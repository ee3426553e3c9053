#include "datapop/csv.hpp"

#include <array>
#include <charconv>
#include <sstream>
#include <system_error>

#include "datapop/error.hpp"

namespace datapop::csv {

Reader::Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

bool Reader::read_line() {
  while (std::getline(in_, current_)) {
    ++line_;
    if (!current_.empty() && current_.back() == '\r') fail("CRLF line endings are not accepted");
    if (current_.empty()) continue;
    if (current_.front() == '#') {
      comments_.push_back(current_);
      continue;
    }
    return true;
  }
  return false;
}

void Reader::expect_header(std::string_view expected) {
  if (!read_line()) fail("missing header, expected '" + std::string(expected) + "'");
  if (current_ != expected) {
    fail("bad header '" + current_ + "', expected '" + std::string(expected) + "'");
  }
}

std::optional<std::vector<std::string_view>> Reader::next() {
  if (!read_line()) return std::nullopt;
  std::vector<std::string_view> fields;
  std::string_view rest = current_;
  while (true) {
    const auto comma = rest.find(',');
    fields.push_back(rest.substr(0, comma));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return fields;
}

void Reader::fail(const std::string& what) const { throw ParseError(source_, line_, what); }

std::int64_t Reader::to_int(std::string_view field, std::string_view name) const {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    fail("field '" + std::string(name) + "': not an integer: '" + std::string(field) + "'");
  }
  return value;
}

double Reader::to_double(std::string_view field, std::string_view name) const {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    fail("field '" + std::string(name) + "': not a number: '" + std::string(field) + "'");
  }
  return value;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::optional<std::string> comment_value(const std::vector<std::string>& comments,
                                         std::string_view key) {
  for (const auto& line : comments) {
    std::istringstream tokens(line.substr(1));
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq != std::string::npos && std::string_view(token).substr(0, eq) == key) {
        return token.substr(eq + 1);
      }
    }
  }
  return std::nullopt;
}

}  // namespace datapop::csv
