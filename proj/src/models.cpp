// models.cpp - model table parsing

#include "diverge/models.hpp"

#include <fstream>
#include <sstream>

#include "diverge/ast.hpp"

namespace diverge {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Pure: return "pure";
    case ModelKind::Havoc: return "havoc";
    case ModelKind::Blocking: return "blocking";
    case ModelKind::Alloc: return "alloc";
    case ModelKind::NoReturn: return "noreturn";
  }
  return "?";
}

std::optional<ModelKind> model_kind_from_string(const std::string& s) {
  for (auto k : {ModelKind::Pure, ModelKind::Havoc, ModelKind::Blocking, ModelKind::Alloc,
                 ModelKind::NoReturn})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

ModelTable ModelTable::parse(const std::string& text, const std::string& origin) {
  ModelTable table;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, kind, extra;
    if (!(fields >> name)) continue;
    auto where = origin + ":" + std::to_string(lineno) + ": ";
    if (!(fields >> kind) || (fields >> extra))
      throw ModelError(where + "expected `<name> <kind>`");
    auto k = model_kind_from_string(kind);
    if (!k) throw ModelError(where + "unknown model kind '" + kind + "'");
    if (is_builtin(name)) throw ModelError(where + "cannot override builtin '" + name + "'");
    table.entries_[name] = *k;
  }
  return table;
}

ModelTable ModelTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot read models file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void ModelTable::set(const std::string& name, ModelKind kind) {
  if (is_builtin(name)) throw ModelError("cannot override builtin '" + name + "'");
  entries_[name] = kind;
}

std::optional<ModelKind> ModelTable::kind_of(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string ModelTable::to_string() const {
  std::string s;
  for (const auto& [name, kind] : entries_) s += name + " " + diverge::to_string(kind) + "\n";
  return s;
}

}  // namespace diverge
