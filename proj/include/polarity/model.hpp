#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "polarity/error.hpp"
#include "polarity/label.hpp"
#include "polarity/vectorize.hpp"

namespace polarity {

class ModelError : public Error {
 public:
  using Error::Error;
};

enum class ClassWeightMode { none, balanced };

std::string_view to_string(ClassWeightMode mode);
ClassWeightMode parse_class_weight_mode(std::string_view text);

struct LrConfig {
  double C = 1.0;
  ClassWeightMode class_weight = ClassWeightMode::none;
  double tol = 1e-6;  // on the gradient infinity-norm
  int max_iter = 1000;

  void validate() const;
};

using ClassWeights = std::array<double, kNumLabels>;

// balanced: N / (K * n_c) over the K classes with n_c > 0; none: all ones.
ClassWeights compute_class_weights(const LabelCounts& counts, ClassWeightMode mode);

// Binary L2-regularized logistic loss over theta = [w; b]:
//   f = 0.5 |w|^2 + C * sum_i s_i log(1 + exp(-y_i (w.x_i + b)))
// The bias is not regularized.
class BinaryLogisticObjective {
 public:
  BinaryLogisticObjective(const FeatureMatrix& features, Eigen::VectorXd targets,
                          Eigen::VectorXd sample_weights, double C);

  Eigen::Index num_params() const { return features_.cols() + 1; }

  double value(const Eigen::VectorXd& theta) const;
  double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& gradient) const;
  // Per-sample second-derivative weights s_i * sigma(z_i) * (1 - sigma(z_i)).
  Eigen::VectorXd curvature(const Eigen::VectorXd& theta) const;
  // Hessian-vector product given curvature(theta).
  Eigen::VectorXd hessian_times_curvature(const Eigen::VectorXd& curvature,
                                          const Eigen::VectorXd& v) const;
  Eigen::VectorXd hessian_times(const Eigen::VectorXd& theta, const Eigen::VectorXd& v) const {
    return hessian_times_curvature(curvature(theta), v);
  }

 private:
  Eigen::VectorXd margins(const Eigen::VectorXd& theta) const;

  const FeatureMatrix& features_;
  Eigen::VectorXd targets_;
  Eigen::VectorXd sample_weights_;
  double C_;
};

struct BinaryFit {
  Eigen::VectorXd weights;
  double bias = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> objective_trace;  // value after each accepted step, starting at theta = 0
};

// Newton-CG with backtracking line search, stopped on |grad|_inf <= tol.
BinaryFit fit_binary(const BinaryLogisticObjective& objective, const LrConfig& config);

// Probability distribution over all four labels; classes unknown to a model
// get zero mass.
using Distribution = std::array<double, kNumLabels>;

// Highest probability, ties resolved by canonical label order.
Label argmax(const Distribution& distribution);

struct LinearModel {
  std::vector<Label> classes;  // present training classes, canonical order
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weights;  // classes x dim
  Eigen::VectorXd bias;
  LrConfig config;
  std::vector<bool> converged;

  std::size_t dim() const { return static_cast<std::size_t>(weights.cols()); }
};

// One-vs-rest: one binary problem per present class.
LinearModel train_lr(const FeatureMatrix& features, std::span<const Label> labels,
                     const LrConfig& config);

Eigen::VectorXd decision_scores(const LinearModel& model, const SparseVector& x);
// sigmoid(score_c) normalized to sum to one.
Distribution predict_proba(const LinearModel& model, const SparseVector& x);
Label predict(const LinearModel& model, const SparseVector& x);

struct BaggingConfig {
  std::size_t n_estimators = 40;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BaggingEnsemble {
  std::vector<LinearModel> members;

  std::size_t dim() const { return members.empty() ? 0 : members.front().dim(); }
};

// Returns the row indices of a training sample of size n for the given seed.
using BootstrapSampler = std::function<std::vector<std::size_t>(std::size_t n, std::uint64_t seed)>;

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed);

// Member k trains on a bootstrap drawn with derive_seed(seed, "bootstrap", k);
// a sample containing a single class is redrawn (up to 10 attempts).
BaggingEnsemble train_bagging(const FeatureMatrix& features, std::span<const Label> labels,
                              const LrConfig& lr_config, const BaggingConfig& bag_config,
                              const BootstrapSampler& sampler = {});

// Mean of the member distributions.
Distribution predict_proba(const BaggingEnsemble& ensemble, const SparseVector& x);
Label predict(const BaggingEnsemble& ensemble, const SparseVector& x);

class Classifier {
 public:
  Classifier() = default;
  Classifier(LinearModel model) : model_(std::move(model)) {}
  Classifier(BaggingEnsemble ensemble) : model_(std::move(ensemble)) {}

  bool is_ensemble() const { return std::holds_alternative<BaggingEnsemble>(model_); }
  const LinearModel& linear() const { return std::get<LinearModel>(model_); }
  const BaggingEnsemble& ensemble() const { return std::get<BaggingEnsemble>(model_); }

  std::size_t dim() const;
  Distribution predict_proba(const SparseVector& x) const;
  Label predict(const SparseVector& x) const { return argmax(predict_proba(x)); }

 private:
  std::variant<LinearModel, BaggingEnsemble> model_;
};

// Binary container: a magic line, one JSON header line (version, feature
// layout, config, per-member classes/biases) and the member weight matrices
// as little-endian doubles.
std::string serialize_classifier(const Classifier& classifier, const FeatureLayout& layout);
void save_classifier(const std::filesystem::path& path, const Classifier& classifier,
                     const FeatureLayout& layout);

struct LoadedClassifier {
  Classifier classifier;
  FeatureLayout layout;
};

LoadedClassifier deserialize_classifier(std::string_view json);
// Throws ModelError when `expected_layout` is given and differs.
LoadedClassifier load_classifier(const std::filesystem::path& path,
                                 const std::optional<FeatureLayout>& expected_layout = {});

}  // namespace polarity
