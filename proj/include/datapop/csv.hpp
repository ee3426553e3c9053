#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace datapop::csv {

// Line-oriented reader for the simple comma-separated formats used here:
// no quoting, no embedded commas. Lines starting with '#' are comments and
// are kept available to the caller through comments().
class Reader {
 public:
  Reader(std::istream& in, std::string source);

  // Consumes the header row and checks it matches `expected` exactly.
  void expect_header(std::string_view expected);

  // Next data row split on ','; nullopt at end of input. Blank lines are skipped.
  std::optional<std::vector<std::string_view>> next();

  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }
  const std::vector<std::string>& comments() const noexcept { return comments_; }

  [[noreturn]] void fail(const std::string& what) const;

  std::int64_t to_int(std::string_view field, std::string_view name) const;
  double to_double(std::string_view field, std::string_view name) const;

 private:
  bool read_line();

  std::istream& in_;
  std::string source_;
  std::string current_;
  std::size_t line_ = 0;
  std::vector<std::string> comments_;
};

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Value of `key` in a comment like "# a=1 key=value"; nullopt if absent.
std::optional<std::string> comment_value(const std::vector<std::string>& comments,
                                         std::string_view key);

}  // namespace datapop::csv
