#ifndef ENGAGEMENT_CSV_HPP_
#define ENGAGEMENT_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace engagement::csv {

// Splits one CSV record. Double-quoted fields may contain the delimiter and
// "" escapes. Embedded newlines are not supported.
inline std::vector<std::string> SplitLine(std::string_view line, char delimiter = ',') {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string Quote(std::string_view value) {
  if (value.find_first_of(",\"\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace engagement::csv

#endif  // ENGAGEMENT_CSV_HPP_
