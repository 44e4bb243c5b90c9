#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace polarity {

// Polarity classes in canonical order. Every matrix and report row uses it.
enum class Label : std::uint8_t { P = 0, N = 1, NEU = 2, NONE = 3 };

inline constexpr std::size_t kNumLabels = 4;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::P, Label::N, Label::NEU, Label::NONE};

constexpr std::size_t index_of(Label label) {
  return static_cast<std::size_t>(label);
}

std::string_view to_string(Label label);

// Case-insensitive. Returns nullopt for anything but P, N, NEU, NONE.
std::optional<Label> parse_label(std::string_view text);

// Per-label counts indexed by index_of(label).
using LabelCounts = std::array<std::size_t, kNumLabels>;

}  // namespace polarity
