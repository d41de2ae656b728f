#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "liseq/ast.hpp"

namespace liseq {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  Pos pos;
  std::string message;

  // "file:line:col: severity: message"
  std::string render(const std::string& file) const {
    std::ostringstream os;
    os << file << ':' << pos.line << ':' << pos.col << ": "
       << (severity == Severity::Error ? "error" : "warning") << ": " << message;
    return os.str();
  }
};

struct DiagList {
  std::vector<Diagnostic> items;

  void error(Pos pos, std::string msg) {
    items.push_back({Severity::Error, pos, std::move(msg)});
  }
  bool ok() const {
    for (const auto& d : items)
      if (d.severity == Severity::Error) return false;
    return true;
  }
  std::string render(const std::string& file) const {
    std::string out;
    for (const auto& d : items) {
      out += d.render(file);
      out += '\n';
    }
    return out;
  }
};

}  // namespace liseq
