// models.hpp - behaviour models for functions without code

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace diverge {

enum class ModelKind { Pure, Havoc, Blocking, Alloc, NoReturn };

std::string to_string(ModelKind k);
std::optional<ModelKind> model_kind_from_string(const std::string& s);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelTable {
 public:
  /// Parses `<name> <kind>` lines; `#` starts a comment. Throws ModelError
  /// on unknown kinds, malformed lines, or attempts to model a builtin.
  static ModelTable parse(const std::string& text, const std::string& origin = "<models>");
  static ModelTable load(const std::string& path);

  void set(const std::string& name, ModelKind kind);
  std::optional<ModelKind> kind_of(const std::string& name) const;
  const std::map<std::string, ModelKind>& entries() const { return entries_; }

  /// Stable text form, used when fingerprinting a configuration.
  std::string to_string() const;

 private:
  std::map<std::string, ModelKind> entries_;
};

}  // namespace diverge
