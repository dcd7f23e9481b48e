#include <string>

#include "contraforge/providers.hpp"

namespace contraforge {

std::optional<nlohmann::json> extract_json_object(std::string_view text) {
  std::size_t from = 0;
  while ((from = text.find('{', from)) != std::string_view::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t i = from; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          end = i;
          break;
        }
      }
    }
    if (end == std::string_view::npos) return std::nullopt;
    auto parsed = nlohmann::json::parse(text.substr(from, end - from + 1), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
    ++from;
  }
  return std::nullopt;
}

}  // namespace contraforge
