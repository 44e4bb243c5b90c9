#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polarity/error.hpp"

namespace polarity {

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

struct SubwordTable {
  std::size_t min_n = 3;
  std::size_t max_n = 6;
  std::uint32_t bucket_count = 2'000'000;
  // Buckets absent from the file are zero vectors.
  std::unordered_map<std::uint32_t, Eigen::VectorXd> buckets;
};

struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, Eigen::VectorXd> words;
  std::optional<SubwordTable> subword;

  // Stored vector when known, otherwise the mean of the subword bucket
  // vectors of `<word>`, otherwise zero.
  Eigen::VectorXd word_vector(std::string_view word) const;
};

// word2vec text format: header `vocab_size dim`, then `word v1 ... v_dim`.
// The optional sidecar has header `min_n max_n bucket_count` followed by
// `bucket_index v1 ... v_dim` lines.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const std::optional<std::filesystem::path>& subword_path = {});
EmbeddingTable parse_embeddings(std::string_view content,
                                std::optional<std::string_view> subword_content = {});

std::uint32_t fnv1a32(std::string_view bytes);

// Every code-point substring of "<word>" with length in [min_n, max_n].
std::vector<std::string> subword_ngrams(std::string_view word, std::size_t min_n,
                                        std::size_t max_n);

class UnigramModel {
 public:
  UnigramModel() = default;

  void add(std::string token, std::uint64_t count);
  std::uint64_t count(std::string_view token) const;
  std::uint64_t total() const { return total_; }
  // counts(w) / total, zero for unseen tokens or an empty model.
  double probability(std::string_view token) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// `token<TAB>count` per line; duplicate tokens are summed.
UnigramModel load_unigram_counts(const std::filesystem::path& path);
UnigramModel parse_unigram_counts(std::string_view content);

struct SifConfig {
  double a = 0.1;
  bool remove_common_component = false;

  void validate() const;
};

template <typename Scalar>
Scalar sif_weight(Scalar a, Scalar probability) {
  return a / (a + probability);
}

// (1/|tokens|) * sum_t a/(a + p(t)) * vec(t); zero vector for no tokens.
Eigen::VectorXd sif_embed(std::span<const std::string> tokens, const EmbeddingTable& table,
                          const UnigramModel& unigrams, const SifConfig& config);

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// First right singular vector of the row matrix, sign fixed so its first
// nonzero coordinate is positive. Zero vector for an all-zero matrix.
template <typename Derived>
DenseVector<typename Derived::Scalar> common_component(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  DenseVector<Scalar> u = DenseVector<Scalar>::Zero(rows.cols());
  if (rows.size() == 0 || rows.cwiseAbs().maxCoeff() == Scalar(0)) return u;
  Eigen::BDCSVD<DenseMatrix<Scalar>> svd(rows.eval(), Eigen::ComputeThinV);
  u = svd.matrixV().col(0);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u[i] != Scalar(0)) {
      if (u[i] < Scalar(0)) u = -u;
      break;
    }
  }
  return u;
}

// Each row v becomes v - (u.v) u.
template <typename Derived, typename VectorDerived>
DenseMatrix<typename Derived::Scalar> project_out(const Eigen::MatrixBase<Derived>& rows,
                                                  const Eigen::MatrixBase<VectorDerived>& u) {
  DenseMatrix<typename Derived::Scalar> out = rows;
  out.noalias() -= (rows * u) * u.transpose();
  return out;
}

template <typename Derived>
DenseMatrix<typename Derived::Scalar> remove_common_component(
    const Eigen::MatrixBase<Derived>& rows) {
  if (rows.rows() < 2) {
    throw EmbeddingError("common component removal needs at least 2 rows");
  }
  const auto u = common_component(rows);
  if (u.isZero(0)) return rows;
  return project_out(rows, u);
}

}  // namespace polarity
