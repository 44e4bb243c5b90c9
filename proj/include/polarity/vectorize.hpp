#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "polarity/error.hpp"

namespace polarity {

class FeatureError : public Error {
 public:
  using Error::Error;
};

// Sorted indices, no stored zeros (see is_canonical).
using SparseVector = Eigen::SparseVector<double>;
using FeatureMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// n-gram multiset: term -> multiplicity.
using TermCounts = std::unordered_map<std::string, std::size_t>;

struct NgramConfig {
  std::size_t n_max = 1;
  bool binarize = false;
  bool tfidf = true;

  bool operator==(const NgramConfig&) const = default;
};

// Contiguous runs of 1..n_max tokens joined by a single space.
TermCounts extract_word_ngrams(std::span<const std::string> tokens, std::size_t n_max);
// Contiguous runs of 1..n_max code points of the raw text.
TermCounts extract_char_ngrams(std::string_view raw_text, std::size_t n_max);

// Term index plus smooth idf: ln((1 + docs) / (1 + df)) + 1. Indices follow
// the byte-wise lexicographic order of terms.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary fit(std::span<const TermCounts> corpus, const NgramConfig& config);

  std::size_t size() const { return terms_.size(); }
  std::size_t doc_count() const { return doc_count_; }
  const NgramConfig& config() const { return config_; }
  std::optional<std::size_t> index(std::string_view term) const;
  const std::string& term(std::size_t index) const { return terms_.at(index); }
  double idf(std::size_t index) const { return idf_[static_cast<Eigen::Index>(index)]; }
  const Eigen::VectorXd& idf() const { return idf_; }

  SparseVector transform(const TermCounts& counts) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);
  std::string to_tsv() const;
  static Vocabulary from_tsv(std::string_view content);

  bool operator==(const Vocabulary& other) const;

 private:
  friend class VocabularyBuilder;

  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> lookup_;
  Eigen::VectorXd idf_;
  std::size_t doc_count_ = 0;
  NgramConfig config_;
};

// Accumulates document frequencies one document at a time, so corpora never
// need to be held in memory as term multisets.
class VocabularyBuilder {
 public:
  explicit VocabularyBuilder(NgramConfig config) : config_(config) {}

  void add(const TermCounts& counts);
  Vocabulary build() const;

 private:
  NgramConfig config_;
  std::unordered_map<std::string, std::size_t> document_frequency_;
  std::size_t doc_count_ = 0;
};

SparseVector transform(const TermCounts& counts, const Vocabulary& vocab);

bool is_canonical(const SparseVector& v);

struct BlockLayout {
  std::string name;
  std::size_t dim = 0;

  bool operator==(const BlockLayout&) const = default;
};

// Ordered feature blocks (BoW, BoC, embedding) agreed at fit time.
using FeatureLayout = std::vector<BlockLayout>;

std::size_t total_dim(const FeatureLayout& layout);

using FeatureBlock = std::variant<SparseVector, Eigen::VectorXd>;

std::size_t block_dim(const FeatureBlock& block);

// Index-shifted concatenation; dense blocks contribute their nonzeros.
SparseVector concat_features(std::span<const FeatureBlock> blocks);
// Same, but rejects blocks whose dims differ from the layout.
SparseVector concat_features(std::span<const FeatureBlock> blocks,
                             const FeatureLayout& layout);

// Stacks row vectors of equal dim into a row-major matrix.
FeatureMatrix stack_rows(std::span<const SparseVector> rows, std::size_t dim);

}  // namespace polarity
