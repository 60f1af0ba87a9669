#include "flowgauge/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace flowgauge {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("FLOWGAUGE_THREADS")) {
    std::string_view text(env);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc{} && ptr == text.data() + text.size() && value > 0) return value;
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace flowgauge
