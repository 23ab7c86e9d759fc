#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace edgewear::kws {

enum class Label : uint8_t { heydotty = 0, confuse = 1, noise = 2, unknown = 3 };

inline constexpr std::size_t kNumLabels = 4;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {Label::heydotty, Label::confuse, Label::noise,
                                                             Label::unknown};

constexpr std::string_view label_name(Label l) {
  switch (l) {
    case Label::heydotty: return "heydotty";
    case Label::confuse: return "confuse";
    case Label::noise: return "noise";
    case Label::unknown: return "unknown";
  }
  return "?";
}

/// Folder / CLI spelling. "random" is accepted as an alias for unknown.
constexpr std::optional<Label> parse_label(std::string_view s) {
  for (Label l : kAllLabels) {
    if (s == label_name(l)) return l;
  }
  if (s == "random") return Label::unknown;
  return std::nullopt;
}

constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }

}  // namespace edgewear::kws
