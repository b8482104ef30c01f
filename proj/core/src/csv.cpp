#include "hadithscope/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace hadithscope::csv {

bool Reader::next(Row& row) {
  row.clear();
  unterminated_ = false;
  std::string line;
  if (!std::getline(in_, line)) return false;
  ++line_;
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && field.empty() && !field_started_quoted) {
        quoted = true;
        field_started_quoted = true;
      } else if (c == ',') {
        row.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
      } else if (c == '\r' && i + 1 == line.size()) {
        // CRLF record end
      } else {
        field.push_back(c);
      }
    }
    if (!quoted) break;
    // Quoted field spans a line break.
    if (!std::getline(in_, line)) {
      unterminated_ = true;
      break;
    }
    ++line_;
    field.push_back('\n');
  }
  row.push_back(std::move(field));
  return true;
}

Header::Header(const Row& names) : size_(names.size()) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::string_view name = names[i];
    if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name.remove_prefix(3);
    while (!name.empty() && (name.front() == ' ' || name.front() == '\t')) name.remove_prefix(1);
    while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.remove_suffix(1);
    index_.emplace(std::string(name), i);
  }
}

std::optional<std::size_t> Header::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.put(',');
    out << escape(row[i]);
  }
  out.put('\n');
}

}  // namespace hadithscope::csv
