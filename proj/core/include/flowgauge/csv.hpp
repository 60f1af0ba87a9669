#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace flowgauge::csv {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
/// Returns false on an unterminated quote.
bool split_line(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

/// Calls fn(line) for each line of text, stripping a trailing '\r'.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

}  // namespace flowgauge::csv
