#include "flowgauge/csv.hpp"

namespace flowgauge::csv {

bool split_line(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  std::string current;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
      field_was_quoted = false;
    } else if (c == '"' && current.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else {
      current.push_back(c);
    }
  }
  if (quoted) return false;
  fields.push_back(std::move(current));
  return true;
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

}  // namespace flowgauge::csv
