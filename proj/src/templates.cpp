#include "agentjudge/templates.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "agentjudge/errors.hpp"
#include "agentjudge/hashing.hpp"

namespace agentjudge {

namespace {

struct Placeholder {
  std::size_t begin;
  std::size_t end;
  std::string name;
};

std::vector<Placeholder> scan(const std::string& body) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = body.find("{{", pos)) != std::string::npos) {
    auto close = body.find("}}", pos + 2);
    if (close == std::string::npos) break;
    std::string name = body.substr(pos + 2, close - pos - 2);
    bool valid = !name.empty();
    for (char c : name) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) valid = false;
    }
    if (valid) {
      out.push_back({pos, close + 2, std::move(name)});
      pos = close + 2;
    } else {
      pos += 2;
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<const TemplateCatalog> TemplateCatalog::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("template catalog directory not found: " + dir.string());
  }
  auto catalog = std::make_shared<TemplateCatalog>();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    catalog->add(entry.path().stem().string(), buffer.str());
  }
  return catalog;
}

void TemplateCatalog::add(std::string template_id, std::string body) {
  bodies_[std::move(template_id)] = std::move(body);
}

bool TemplateCatalog::has(const std::string& template_id) const {
  return bodies_.contains(template_id);
}

std::set<std::string> TemplateCatalog::placeholders(const std::string& template_id) const {
  auto it = bodies_.find(template_id);
  if (it == bodies_.end()) throw TemplateError("unknown template \"" + template_id + "\"");
  std::set<std::string> names;
  for (auto& p : scan(it->second)) names.insert(p.name);
  return names;
}

std::string TemplateCatalog::render(const std::string& template_id,
                                    const Variables& variables) const {
  auto it = bodies_.find(template_id);
  if (it == bodies_.end()) throw TemplateError("unknown template \"" + template_id + "\"");
  const std::string& body = it->second;
  const auto holes = scan(body);

  std::string unbound;
  for (const auto& h : holes) {
    if (!variables.contains(h.name) && unbound.find("{{" + h.name + "}}") == std::string::npos) {
      unbound += (unbound.empty() ? "" : ", ") + ("{{" + h.name + "}}");
    }
  }
  if (!unbound.empty()) {
    throw TemplateError("template \"" + template_id + "\" has unbound placeholders: " + unbound);
  }

  std::string out;
  out.reserve(body.size() * 2);
  std::size_t last = 0;
  for (const auto& h : holes) {
    out.append(body, last, h.begin - last);
    out += variables.at(h.name);
    last = h.end;
  }
  out.append(body, last, std::string::npos);
  return out;
}

std::string TemplateCatalog::version() const {
  std::string all;
  for (const auto& [id, body] : bodies_) {
    all += id;
    all += '\0';
    all += body;
    all += '\0';
  }
  return sha256_hex(all).substr(0, 16);
}

std::set<std::string> TemplateCatalog::ids() const {
  std::set<std::string> out;
  for (const auto& [id, body] : bodies_) out.insert(id);
  return out;
}

}  // namespace agentjudge
