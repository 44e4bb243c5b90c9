#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polarity/corpus.hpp"
#include "polarity/error.hpp"
#include "polarity/label.hpp"

namespace polarity {

class AugmentError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Instance crossover
// ---------------------------------------------------------------------------

struct CrossoverConfig {
  std::size_t factor = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// first = tokens[0, ceil(n/2)), second = the rest.
template <typename T>
std::pair<std::span<const T>, std::span<const T>> split_halves(std::span<const T> tokens) {
  const std::size_t cut = (tokens.size() + 1) / 2;
  return {tokens.first(cut), tokens.subspan(cut)};
}

// First half of `first` followed by the second half of `second`.
template <typename T>
std::vector<T> crossover_pair(std::span<const T> first, std::span<const T> second) {
  const auto head = split_halves(first).first;
  const auto tail = split_halves(second).second;
  std::vector<T> out;
  out.reserve(head.size() + tail.size());
  out.insert(out.end(), head.begin(), head.end());
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

// A synthetic instance made of the first half of `first` and the second half
// of `second`. first == second only for single-instance classes.
struct CrossoverParents {
  std::size_t first;
  std::size_t second;
  Label label;
};

// For each class c with n_c instances, (factor - 1) * n_c ordered pairs
// (i, j), i != j, sampled uniformly with replacement. Classes are visited in
// canonical label order.
std::vector<CrossoverParents> plan_crossover(std::span<const Label> labels,
                                             const CrossoverConfig& config);

// Texts are basic-preprocessed token sequences joined by single spaces. Output
// keeps the originals and appends the synthetic instances.
Dataset crossover_augment(const Dataset& dataset, const CrossoverConfig& config);

// ---------------------------------------------------------------------------
// Two-way translation
// ---------------------------------------------------------------------------

struct TranslationConfig {
  std::vector<std::string> pivots;
  std::string source = "es";
  std::filesystem::path cache_path;

  void validate() const;
};

class TranslatorClient {
 public:
  virtual ~TranslatorClient() = default;
  virtual std::string translate(const std::string& text, const std::string& src_lang,
                                const std::string& dst_lang) = 0;
};

// Lookup tables per (src, dst); identity for missing entries.
class FixtureTranslator : public TranslatorClient {
 public:
  FixtureTranslator() = default;
  static FixtureTranslator load(const std::filesystem::path& path);
  static FixtureTranslator parse(std::string_view json);

  void add(const std::string& src, const std::string& dst, std::string text,
           std::string translation);
  std::string translate(const std::string& text, const std::string& src_lang,
                        const std::string& dst_lang) override;

 private:
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> tables_;
};

// Placeholder for a hosted translation service. This build ships no network
// backend; every call fails with AugmentError.
class RemoteTranslator : public TranslatorClient {
 public:
  explicit RemoteTranslator(std::string endpoint) : endpoint_(std::move(endpoint)) {}
  std::string translate(const std::string& text, const std::string& src_lang,
                        const std::string& dst_lang) override;

 private:
  std::string endpoint_;
};

// Append-only JSON-lines cache of {text, pivot, result} records.
class TranslationCache {
 public:
  // In-memory only.
  TranslationCache() = default;
  // Loads existing records and appends new ones to `path`.
  explicit TranslationCache(std::filesystem::path path);

  std::optional<std::string> find(const std::string& text, const std::string& pivot) const;
  void insert(const std::string& text, const std::string& pivot, const std::string& result);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  std::map<std::pair<std::string, std::string>, std::string> entries_;
  mutable std::mutex mutex_;
};

// source -> pivot -> source, served from the cache when possible.
std::string two_way_translate(TranslatorClient& client, TranslationCache& cache,
                              const std::string& text, const std::string& pivot,
                              const TranslationConfig& config);

// Originals followed by one translated copy per (pivot, tweet), pivots in
// config order.
Dataset translation_augment(const Dataset& dataset, TranslatorClient& client,
                            TranslationCache& cache, const TranslationConfig& config);

}  // namespace polarity
