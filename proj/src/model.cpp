#include "polarity/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "polarity/random.hpp"

namespace polarity {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "POLARITY-MODEL\n";
constexpr int kFormatVersion = 1;
constexpr int kMaxBootstrapAttempts = 10;

// log(1 + exp(t)) without overflow.
double log1p_exp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

FeatureMatrix select_rows(const FeatureMatrix& features, std::span<const std::size_t> rows) {
  FeatureMatrix out(static_cast<Eigen::Index>(rows.size()), features.cols());
  Eigen::Index nnz = 0;
  for (auto r : rows) nnz += features.row(static_cast<Eigen::Index>(r)).nonZeros();
  out.reserve(nnz);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.startVec(static_cast<Eigen::Index>(i));
    for (FeatureMatrix::InnerIterator it(features, static_cast<Eigen::Index>(rows[i])); it; ++it) {
      out.insertBack(static_cast<Eigen::Index>(i), it.col()) = it.value();
    }
  }
  out.finalize();
  return out;
}

json config_json(const LrConfig& config) {
  return {{"C", config.C},
          {"class_weight", std::string(to_string(config.class_weight))},
          {"tol", config.tol},
          {"max_iter", config.max_iter}};
}

LrConfig config_from_json(const json& j) {
  LrConfig config;
  config.C = j.at("C").get<double>();
  config.class_weight = parse_class_weight_mode(j.at("class_weight").get<std::string>());
  config.tol = j.at("tol").get<double>();
  config.max_iter = j.at("max_iter").get<int>();
  return config;
}

}  // namespace

std::string_view to_string(ClassWeightMode mode) {
  return mode == ClassWeightMode::balanced ? "balanced" : "none";
}

ClassWeightMode parse_class_weight_mode(std::string_view raw) {
  std::string text(raw);
  for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (text == "none" || text == "no") return ClassWeightMode::none;
  if (text == "balanced") return ClassWeightMode::balanced;
  throw ModelError("unknown class_weight '" + std::string(raw) + "' (expected none or balanced)");
}

void LrConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw ModelError("C must be a positive finite number");
  if (!(tol > 0.0)) throw ModelError("tol must be positive");
  if (max_iter < 1) throw ModelError("max_iter must be >= 1");
}

void BaggingConfig::validate() const {
  if (n_estimators < 1) throw ModelError("n_estimators must be >= 1");
}

ClassWeights compute_class_weights(const LabelCounts& counts, ClassWeightMode mode) {
  ClassWeights weights;
  weights.fill(1.0);
  if (mode == ClassWeightMode::none) return weights;
  std::size_t total = 0;
  std::size_t present = 0;
  for (auto n : counts) {
    total += n;
    if (n > 0) ++present;
  }
  if (present == 0) throw ModelError("class weights: no training instances");
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    if (counts[c] > 0) {
      weights[c] = static_cast<double>(total) / (static_cast<double>(present) * static_cast<double>(counts[c]));
    }
  }
  return weights;
}

BinaryLogisticObjective::BinaryLogisticObjective(const FeatureMatrix& features, Eigen::VectorXd targets,
                                                 Eigen::VectorXd sample_weights, double C)
    : features_(features), targets_(std::move(targets)), sample_weights_(std::move(sample_weights)), C_(C) {
  if (targets_.size() != features_.rows() || sample_weights_.size() != features_.rows()) {
    throw ModelError("objective: targets/weights do not match the number of rows");
  }
}

Eigen::VectorXd BinaryLogisticObjective::margins(const Eigen::VectorXd& theta) const {
  const Eigen::Index d = features_.cols();
  Eigen::VectorXd z = features_ * theta.head(d);
  z.array() += theta[d];
  return z;
}

double BinaryLogisticObjective::value(const Eigen::VectorXd& theta) const {
  const Eigen::Index d = features_.cols();
  const Eigen::VectorXd z = margins(theta);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += sample_weights_[i] * log1p_exp(-targets_[i] * z[i]);
  return 0.5 * theta.head(d).squaredNorm() + C_ * loss;
}

double BinaryLogisticObjective::value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& gradient) const {
  const Eigen::Index d = features_.cols();
  const Eigen::VectorXd z = margins(theta);
  Eigen::VectorXd residual(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double yz = targets_[i] * z[i];
    loss += sample_weights_[i] * log1p_exp(-yz);
    residual[i] = -targets_[i] * sample_weights_[i] * sigmoid(-yz);
  }
  gradient.resize(num_params());
  gradient.head(d) = theta.head(d) + C_ * (features_.transpose() * residual);
  gradient[d] = C_ * residual.sum();
  return 0.5 * theta.head(d).squaredNorm() + C_ * loss;
}

Eigen::VectorXd BinaryLogisticObjective::curvature(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = margins(theta);
  Eigen::VectorXd weights(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = sigmoid(z[i]);
    weights[i] = sample_weights_[i] * s * (1.0 - s);
  }
  return weights;
}

Eigen::VectorXd BinaryLogisticObjective::hessian_times_curvature(const Eigen::VectorXd& curvature,
                                                                 const Eigen::VectorXd& v) const {
  const Eigen::Index d = features_.cols();
  Eigen::VectorXd u = features_ * v.head(d);
  u.array() += v[d];
  u.array() *= curvature.array();
  Eigen::VectorXd out(num_params());
  out.head(d) = v.head(d) + C_ * (features_.transpose() * u);
  out[d] = C_ * u.sum();
  return out;
}

BinaryFit fit_binary(const BinaryLogisticObjective& objective, const LrConfig& config) {
  config.validate();
  const Eigen::Index n = objective.num_params();
  const Eigen::Index d = n - 1;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  const int max_cg = static_cast<int>(std::min<Eigen::Index>(n, 500));

  BinaryFit fit;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd gradient;
  double f = objective.value_and_gradient(theta, gradient);
  fit.objective_trace.push_back(f);

  for (fit.iterations = 0; fit.iterations < config.max_iter; ++fit.iterations) {
    const double g_inf = gradient.lpNorm<Eigen::Infinity>();
    fit.gradient_norm = g_inf;
    if (g_inf <= config.tol) {
      fit.converged = true;
      break;
    }

    // Truncated conjugate gradient on H p = -g.
    const Eigen::VectorXd curvature = objective.curvature(theta);
    const double g_norm = gradient.norm();
    const double cg_tol = std::min(0.5, std::sqrt(g_norm)) * g_norm;
    Eigen::VectorXd step_dir = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd residual = -gradient;
    Eigen::VectorXd direction = residual;
    double rr = residual.squaredNorm();
    for (int k = 0; k < max_cg; ++k) {
      const Eigen::VectorXd hd = objective.hessian_times_curvature(curvature, direction);
      const double dhd = direction.dot(hd);
      if (!(dhd > 0.0)) break;
      const double alpha = rr / dhd;
      step_dir += alpha * direction;
      residual -= alpha * hd;
      const double rr_next = residual.squaredNorm();
      if (std::sqrt(rr_next) <= cg_tol) break;
      direction = residual + (rr_next / rr) * direction;
      rr = rr_next;
    }
    double slope = gradient.dot(step_dir);
    if (!(slope < 0.0)) {
      step_dir = -gradient;
      slope = -gradient.squaredNorm();
    }

    // Backtracking line search. Near the optimum the Armijo decrease can fall
    // below the rounding error of f, so a step that leaves f unchanged up to
    // rounding while shrinking the gradient is also taken.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate_grad;
    for (int h = 0; h < kMaxHalvings; ++h) {
      const Eigen::VectorXd candidate = theta + step * step_dir;
      const double fc = objective.value_and_gradient(candidate, candidate_grad);
      const bool armijo = fc <= f + kArmijo * step * slope;
      const bool rounding = fc - f <= 16.0 * std::numeric_limits<double>::epsilon() * std::abs(f) &&
                            candidate_grad.lpNorm<Eigen::Infinity>() < g_inf;
      if (std::isfinite(fc) && (armijo || rounding)) {
        theta = candidate;
        gradient = candidate_grad;
        f = fc;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    fit.objective_trace.push_back(f);
    if (!accepted) break;
  }
  fit.gradient_norm = gradient.lpNorm<Eigen::Infinity>();
  if (fit.gradient_norm <= config.tol) fit.converged = true;
  fit.weights = theta.head(d);
  fit.bias = theta[d];
  return fit;
}

Label argmax(const Distribution& distribution) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumLabels; ++c) {
    if (distribution[c] > distribution[best]) best = c;
  }
  return kAllLabels[best];
}

LinearModel train_lr(const FeatureMatrix& features, std::span<const Label> labels, const LrConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ModelError("train_lr: " + std::to_string(features.rows()) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (features.cols() == 0) throw ModelError("train_lr: feature dim is zero");
  const double* values = features.valuePtr();
  for (Eigen::Index k = 0; k < features.nonZeros(); ++k) {
    if (!std::isfinite(values[k])) throw ModelError("train_lr: non-finite feature value");
  }

  LabelCounts counts{};
  for (Label label : labels) ++counts[index_of(label)];
  LinearModel model;
  model.config = config;
  for (Label label : kAllLabels) {
    if (counts[index_of(label)] > 0) model.classes.push_back(label);
  }
  if (model.classes.size() < 2) throw ModelError("train_lr: training set contains a single class");

  const ClassWeights class_weights = compute_class_weights(counts, config.class_weight);
  const auto rows = static_cast<Eigen::Index>(labels.size());
  Eigen::VectorXd sample_weights(rows);
  for (Eigen::Index i = 0; i < rows; ++i) sample_weights[i] = class_weights[index_of(labels[static_cast<std::size_t>(i)])];

  const auto k = static_cast<Eigen::Index>(model.classes.size());
  model.weights.resize(k, features.cols());
  model.bias.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Label positive = model.classes[static_cast<std::size_t>(c)];
    Eigen::VectorXd targets(rows);
    for (Eigen::Index i = 0; i < rows; ++i) targets[i] = labels[static_cast<std::size_t>(i)] == positive ? 1.0 : -1.0;
    const BinaryLogisticObjective objective(features, std::move(targets), sample_weights, config.C);
    const BinaryFit fit = fit_binary(objective, config);
    if (!fit.converged) {
      warn("logistic regression for class " + std::string(to_string(positive)) + " stopped after " +
           std::to_string(fit.iterations) + " iterations with |grad| = " + std::to_string(fit.gradient_norm));
    }
    model.weights.row(c) = fit.weights.transpose();
    model.bias[c] = fit.bias;
    model.converged.push_back(fit.converged);
  }
  return model;
}

Eigen::VectorXd decision_scores(const LinearModel& model, const SparseVector& x) {
  if (static_cast<std::size_t>(x.size()) != model.dim()) {
    throw ModelError("feature dim " + std::to_string(x.size()) + " does not match model dim " +
                     std::to_string(model.dim()));
  }
  Eigen::VectorXd scores = model.bias;
  for (SparseVector::InnerIterator it(x); it; ++it) scores += it.value() * model.weights.col(it.index());
  return scores;
}

Distribution predict_proba(const LinearModel& model, const SparseVector& x) {
  const Eigen::VectorXd scores = decision_scores(model, x);
  // Normalized sigmoids, computed from log-sigmoids so that very negative
  // scores do not underflow to an all-zero distribution.
  Eigen::VectorXd log_p(scores.size());
  for (Eigen::Index c = 0; c < scores.size(); ++c) log_p[c] = -log1p_exp(-scores[c]);
  const double max_log = log_p.maxCoeff();
  Eigen::VectorXd p = (log_p.array() - max_log).exp();
  p /= p.sum();
  Distribution out{};
  for (Eigen::Index c = 0; c < p.size(); ++c) out[index_of(model.classes[static_cast<std::size_t>(c)])] = p[c];
  return out;
}

Label predict(const LinearModel& model, const SparseVector& x) { return argmax(predict_proba(model, x)); }

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = static_cast<std::size_t>(uniform_index(rng, n));
  return rows;
}

BaggingEnsemble train_bagging(const FeatureMatrix& features, std::span<const Label> labels,
                              const LrConfig& lr_config, const BaggingConfig& bag_config,
                              const BootstrapSampler& sampler) {
  bag_config.validate();
  lr_config.validate();
  const BootstrapSampler& draw = sampler ? sampler : BootstrapSampler(bootstrap_sample);
  const std::size_t n = labels.size();

  BaggingEnsemble ensemble;
  ensemble.members.reserve(bag_config.n_estimators);
  for (std::size_t k = 0; k < bag_config.n_estimators; ++k) {
    const std::uint64_t member_seed = derive_seed(bag_config.seed, "bootstrap", k);
    std::vector<std::size_t> rows;
    std::vector<Label> sample_labels;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxBootstrapAttempts && !ok; ++attempt) {
      rows = draw(n, attempt == 0 ? member_seed : derive_seed(member_seed, "retry", attempt));
      sample_labels.clear();
      for (auto r : rows) sample_labels.push_back(labels[r]);
      ok = std::any_of(sample_labels.begin(), sample_labels.end(),
                       [&](Label l) { return l != sample_labels.front(); });
    }
    if (!ok) {
      throw ModelError("bagging: bootstrap sample for member " + std::to_string(k) + " kept collapsing to one class");
    }
    const FeatureMatrix sample = select_rows(features, rows);
    ensemble.members.push_back(train_lr(sample, sample_labels, lr_config));
  }
  return ensemble;
}

Distribution predict_proba(const BaggingEnsemble& ensemble, const SparseVector& x) {
  if (ensemble.members.empty()) throw ModelError("empty ensemble");
  Distribution sum{};
  for (const auto& member : ensemble.members) {
    const auto p = predict_proba(member, x);
    for (std::size_t c = 0; c < kNumLabels; ++c) sum[c] += p[c];
  }
  for (auto& v : sum) v /= static_cast<double>(ensemble.members.size());
  return sum;
}

Label predict(const BaggingEnsemble& ensemble, const SparseVector& x) {
  return argmax(predict_proba(ensemble, x));
}

std::size_t Classifier::dim() const {
  return std::visit([](const auto& m) { return m.dim(); }, model_);
}

Distribution Classifier::predict_proba(const SparseVector& x) const {
  return std::visit([&](const auto& m) { return polarity::predict_proba(m, x); }, model_);
}

std::string serialize_classifier(const Classifier& classifier, const FeatureLayout& layout) {
  static_assert(std::endian::native == std::endian::little, "model container assumes little-endian doubles");
  std::vector<const LinearModel*> members;
  if (classifier.is_ensemble()) {
    for (const auto& m : classifier.ensemble().members) members.push_back(&m);
  } else {
    members.push_back(&classifier.linear());
  }

  json header;
  header["format"] = "polarity-model";
  header["version"] = kFormatVersion;
  header["kind"] = classifier.is_ensemble() ? "bagging" : "linear";
  header["layout"] = json::array();
  for (const auto& block : layout) header["layout"].push_back({{"name", block.name}, {"dim", block.dim}});
  header["config"] = config_json(members.front()->config);
  header["members"] = json::array();
  for (const auto* m : members) {
    json entry;
    entry["classes"] = json::array();
    for (Label l : m->classes) entry["classes"].push_back(std::string(to_string(l)));
    entry["dim"] = m->dim();
    entry["bias"] = std::vector<double>(m->bias.data(), m->bias.data() + m->bias.size());
    entry["converged"] = m->converged;
    header["members"].push_back(std::move(entry));
  }

  std::string out(kMagic);
  out += header.dump();
  out += '\n';
  for (const auto* m : members) {
    const auto bytes = static_cast<std::size_t>(m->weights.size()) * sizeof(double);
    const auto offset = out.size();
    out.resize(offset + bytes);
    std::memcpy(out.data() + offset, m->weights.data(), bytes);
  }
  return out;
}

void save_classifier(const std::filesystem::path& path, const Classifier& classifier, const FeatureLayout& layout) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path.string());
  out << serialize_classifier(classifier, layout);
  if (!out) throw ModelError("write failure on " + path.string());
}

LoadedClassifier deserialize_classifier(std::string_view data) {
  if (data.substr(0, kMagic.size()) != kMagic) throw ModelError("not a model container");
  const auto header_end = data.find('\n', kMagic.size());
  if (header_end == std::string_view::npos) throw ModelError("model container: truncated header");
  json header;
  try {
    header = json::parse(data.substr(kMagic.size(), header_end - kMagic.size()));
  } catch (const json::exception& e) {
    throw ModelError(std::string("model container: ") + e.what());
  }
  if (header.value("format", "") != "polarity-model") throw ModelError("model container: wrong format tag");
  if (header.value("version", 0) != kFormatVersion) {
    throw ModelError("model container: unsupported version " + header.value("version", json()).dump());
  }

  LoadedClassifier loaded;
  for (const auto& block : header.at("layout")) {
    loaded.layout.push_back({block.at("name").get<std::string>(), block.at("dim").get<std::size_t>()});
  }
  const LrConfig config = config_from_json(header.at("config"));
  std::size_t offset = header_end + 1;
  std::vector<LinearModel> members;
  for (const auto& entry : header.at("members")) {
    LinearModel m;
    m.config = config;
    for (const auto& name : entry.at("classes")) {
      const auto label = parse_label(name.get<std::string>());
      if (!label) throw ModelError("model container: unknown class " + name.dump());
      m.classes.push_back(*label);
    }
    const auto dim = entry.at("dim").get<Eigen::Index>();
    const auto bias = entry.at("bias").get<std::vector<double>>();
    m.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    m.converged = entry.at("converged").get<std::vector<bool>>();
    const auto k = static_cast<Eigen::Index>(m.classes.size());
    if (m.bias.size() != k) throw ModelError("model container: bias/classes size mismatch");
    const std::size_t bytes = static_cast<std::size_t>(k * dim) * sizeof(double);
    if (offset + bytes > data.size()) throw ModelError("model container: truncated weights");
    m.weights.resize(k, dim);
    std::memcpy(m.weights.data(), data.data() + offset, bytes);
    offset += bytes;
    members.push_back(std::move(m));
  }
  if (offset != data.size()) throw ModelError("model container: trailing bytes");
  if (members.empty()) throw ModelError("model container: no members");
  if (header.at("kind") == "bagging") {
    loaded.classifier = Classifier(BaggingEnsemble{std::move(members)});
  } else {
    if (members.size() != 1) throw ModelError("model container: linear model with several members");
    loaded.classifier = Classifier(std::move(members.front()));
  }
  if (total_dim(loaded.layout) != loaded.classifier.dim()) {
    throw ModelError("model container: layout dim does not match weights");
  }
  return loaded;
}

LoadedClassifier load_classifier(const std::filesystem::path& path, const std::optional<FeatureLayout>& expected_layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  auto loaded = deserialize_classifier(buffer.str());
  if (expected_layout && *expected_layout != loaded.layout) {
    throw ModelError("feature layout of " + path.string() + " does not match the current pipeline");
  }
  return loaded;
}

}  // namespace polarity
