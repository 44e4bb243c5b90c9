#include <iostream>
#include <limits>
#include <mutex>

#include "polarity/error.hpp"
#include "polarity/label.hpp"
#include "polarity/random.hpp"
#include "polarity/utf8.hpp"

namespace polarity {

namespace {

std::mutex& warning_mutex() {
  static std::mutex mutex;
  return mutex;
}

WarningHandler& warning_handler() {
  static WarningHandler handler;
  return handler;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  warning_handler() = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) {
    warning_handler()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view consumer, std::uint64_t index) {
  // FNV-1a over (seed, consumer, index), finished with a splitmix64 round.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_byte = [&h](unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(seed >> (8 * i)));
  for (char c : consumer) mix_byte(static_cast<unsigned char>(c));
  mix_byte(0xff);
  for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(index >> (8 * i)));

  std::uint64_t z = h + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw Error("uniform_index: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % n;
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::P: return "P";
    case Label::N: return "N";
    case Label::NEU: return "NEU";
    case Label::NONE: return "NONE";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) {
  const std::string upper = [&] {
    std::string s(text);
    for (char& c : s) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    return s;
  }();
  for (Label label : kAllLabels) {
    if (upper == to_string(label)) return label;
  }
  return std::nullopt;
}

}  // namespace polarity
