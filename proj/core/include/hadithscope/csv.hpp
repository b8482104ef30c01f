#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hadithscope::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
/// line breaks. Accepts LF or CRLF record ends.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Reads the next record; returns false at end of input. A record that
  /// ends inside an open quote is returned as-is and flagged via
  /// last_unterminated().
  bool next(Row& row);

  /// Physical line number where the last returned record started (1-based).
  std::size_t line() const { return record_line_; }
  bool last_unterminated() const { return unterminated_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
  bool unterminated_ = false;
};

/// Header row lookup. Leading UTF-8 BOM and surrounding blanks are ignored.
class Header {
 public:
  explicit Header(const Row& names);

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t size() const { return size_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t size_ = 0;
};

std::string escape(std::string_view field);

/// Shortest round-trip decimal form of a double.
std::string number(double value);

void write_row(std::ostream& out, const Row& row);

template <class... Fields>
void write(std::ostream& out, const Fields&... fields) {
  write_row(out, Row{std::string(fields)...});
}

}  // namespace hadithscope::csv
