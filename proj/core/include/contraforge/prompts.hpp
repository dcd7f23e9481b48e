#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace contraforge {

/// Named prompt templates. Starts from the compiled-in set shipped under
/// core/prompts/; individual templates can be replaced from files.
class PromptSet {
 public:
  PromptSet();

  static const PromptSet& builtin();

  /// Throws ConfigError for an unknown name.
  const std::string& get(std::string_view name) const;

  /// Replaces `name` with the contents of `path`.
  void load_override(const std::string& name, const std::filesystem::path& path);
  void set(const std::string& name, std::string text);

  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace contraforge
