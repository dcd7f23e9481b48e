#include "contraforge/prompts.hpp"

#include <fstream>
#include <sstream>

#include "contraforge/error.hpp"

namespace contraforge {

namespace prompts::detail {
const std::map<std::string, std::string>& builtin_templates();
}

PromptSet::PromptSet() {
  for (const auto& [name, text] : prompts::detail::builtin_templates()) templates_[name] = text;
}

const PromptSet& PromptSet::builtin() {
  static const PromptSet kBuiltin;
  return kBuiltin;
}

const std::string& PromptSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw ConfigError("unknown prompt template '" + std::string(name) + "'");
  return it->second;
}

void PromptSet::load_override(const std::string& name, const std::filesystem::path& path) {
  if (!templates_.contains(name)) throw ConfigError("unknown prompt template '" + name + "'");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read prompt template " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  templates_[name] = ss.str();
}

void PromptSet::set(const std::string& name, std::string text) { templates_[name] = std::move(text); }

std::vector<std::string> PromptSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : templates_) out.push_back(name);
  return out;
}

}  // namespace contraforge
