#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>

namespace agentjudge {

using Variables = std::map<std::string, std::string>;

/// Prompt templates keyed by id, loaded from `<dir>/<template_id>.txt`.
/// Placeholders are written `{{name}}`.
class TemplateCatalog {
 public:
  static std::shared_ptr<const TemplateCatalog> load(const std::filesystem::path& dir);

  void add(std::string template_id, std::string body);

  bool has(const std::string& template_id) const;
  std::set<std::string> placeholders(const std::string& template_id) const;

  /// Throws TemplateError for an unknown id or any unbound placeholder.
  /// Variables that the template does not use are ignored.
  std::string render(const std::string& template_id, const Variables& variables) const;

  /// Digest over every (id, body) pair; changes whenever any template does.
  std::string version() const;

  std::set<std::string> ids() const;

 private:
  std::map<std::string, std::string> bodies_;
};

}  // namespace agentjudge
