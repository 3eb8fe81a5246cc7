#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace eigenspec {

// Fault location codes: B = rolling element (ball), IR = inner race,
// OR = outer race, Normal = healthy baseline.
enum class FaultCode { B, IR, OR, Normal };

std::string_view fault_code_str(FaultCode code);

// Alphanumeric class label: fault code plus a severity suffix, e.g. "IR3"
// (amplitude level 3) or "B014" (0.014 in fault). "Normal" carries no suffix.
struct ClassLabel {
  FaultCode fault_code = FaultCode::Normal;
  std::string severity_code;

  std::string str() const;

  // Parses the alphanumeric form; returns nullopt when the prefix is unknown
  // or a fault code lacks its severity suffix.
  static std::optional<ClassLabel> try_parse(std::string_view text);

  // Throwing variant of try_parse (DataError).
  static ClassLabel parse(std::string_view text);

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;

  // Ordered by fault code (B, IR, OR, Normal), then severity string. This is
  // the canonical class order used for coding matrices and tie-breaking.
  friend auto operator<=>(const ClassLabel& a, const ClassLabel& b) {
    if (auto cmp = a.fault_code <=> b.fault_code; cmp != 0) return cmp;
    return a.severity_code <=> b.severity_code;
  }
};

}  // namespace eigenspec
