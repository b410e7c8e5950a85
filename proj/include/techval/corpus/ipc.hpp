#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "techval/core/common.hpp"

namespace techval {

enum class IpcLevel { kSection, kClass, kSubclass };

inline std::string_view to_string(IpcLevel level) {
  switch (level) {
    case IpcLevel::kSection: return "section";
    case IpcLevel::kClass: return "class";
    case IpcLevel::kSubclass: return "subclass";
  }
  return "subclass";
}

inline IpcLevel parse_ipc_level(std::string_view s) {
  if (s == "section") return IpcLevel::kSection;
  if (s == "class") return IpcLevel::kClass;
  if (s == "subclass") return IpcLevel::kSubclass;
  throw ConfigError("unknown ipc_level '" + std::string(s) + "' (expected section, class or subclass)");
}

/// An IPC symbol such as "H01L21/02", resolved as deep as the text allows.
/// Depth: 1 = section ("H"), 2 = class ("H01"), 3 = subclass ("H01L"),
/// 4 = main group ("H01L21"), 5 = full group ("H01L21/02").
class Ipc {
 public:
  /// Returns nullopt when the text does not even name a section A..H.
  static std::optional<Ipc> parse(std::string_view text) {
    std::string code;
    for (char c : text) {
      if (!std::isspace(static_cast<unsigned char>(c))) code.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (code.empty() || code[0] < 'A' || code[0] > 'H') return std::nullopt;
    Ipc ipc;
    ipc.code_ = code;
    ipc.depth_ = 1;
    if (code.size() >= 3 && std::isdigit(static_cast<unsigned char>(code[1])) &&
        std::isdigit(static_cast<unsigned char>(code[2]))) {
      ipc.depth_ = 2;
      if (code.size() >= 4 && std::isalpha(static_cast<unsigned char>(code[3]))) {
        ipc.depth_ = 3;
        std::size_t i = 4;
        while (i < code.size() && std::isdigit(static_cast<unsigned char>(code[i]))) ++i;
        if (i > 4) {
          ipc.depth_ = 4;
          if (i < code.size() && code[i] == '/' && i + 1 < code.size()) ipc.depth_ = 5;
        }
      }
    }
    return ipc;
  }

  const std::string& code() const noexcept { return code_; }
  int depth() const noexcept { return depth_; }
  char section() const noexcept { return code_[0]; }

  /// Section index 0..7 for A..H.
  int section_index() const noexcept { return code_[0] - 'A'; }

  /// The code truncated at `level`, or nullopt if the code is too shallow.
  std::optional<std::string> at(IpcLevel level) const {
    switch (level) {
      case IpcLevel::kSection: return code_.substr(0, 1);
      case IpcLevel::kClass:
        if (depth_ < 2) return std::nullopt;
        return code_.substr(0, 3);
      case IpcLevel::kSubclass:
        if (depth_ < 3) return std::nullopt;
        return code_.substr(0, 4);
    }
    return std::nullopt;
  }

  bool has_prefix(std::string_view prefix) const { return std::string_view(code_).starts_with(prefix); }

 private:
  std::string code_;
  int depth_ = 0;
};

/// Normalizes a configured field prefix such as "h01l" to "H01L"; throws if it
/// does not start with a section letter.
inline std::string normalize_ipc_prefix(std::string_view prefix) {
  auto ipc = Ipc::parse(prefix);
  if (!ipc) throw ConfigError("focal_field '" + std::string(prefix) + "' is not an IPC prefix");
  return ipc->code();
}

}  // namespace techval
