#include <doctest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "polarity/model.hpp"

using namespace polarity;

namespace {

FeatureMatrix to_sparse(const Eigen::MatrixXd& dense) {
  FeatureMatrix m = dense.sparseView();
  m.makeCompressed();
  return m;
}

struct Toy {
  Eigen::MatrixXd x;
  std::vector<Label> labels;
};

// Four separated clusters, one per class.
Toy clusters(std::size_t per_class, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  const double centers[4][2] = {{2, 0}, {-2, 0}, {0, 2}, {0, -2}};
  Toy toy{Eigen::MatrixXd(4 * per_class, 2), {}};
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t k = 0; k < per_class; ++k) {
      const auto row = static_cast<Eigen::Index>(c * per_class + k);
      toy.x(row, 0) = centers[c][0] + noise(rng);
      toy.x(row, 1) = centers[c][1] + noise(rng);
      toy.labels.push_back(kAllLabels[c]);
    }
  }
  return toy;
}

}  // namespace

TEST_CASE("analytic gradient agrees with central differences") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + int(rng() % 8), d = 1 + int(rng() % 5);
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n), s(n), theta(d + 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    for (int i = 0; i < n; ++i) {
      y[i] = rng() % 2 ? 1.0 : -1.0;
      s[i] = 0.5 + double(rng() % 3);
    }
    for (int i = 0; i <= d; ++i) theta[i] = normal(rng);
    const double C = 0.1 + double(rng() % 10);
    const FeatureMatrix sx = to_sparse(x);
    const BinaryLogisticObjective objective(sx, y, s, C);

    Eigen::VectorXd grad;
    const double f = objective.value_and_gradient(theta, grad);
    CHECK(f == doctest::Approx(oracle::logistic_objective(x, y, s, C, theta)).epsilon(1e-12));
    for (int k = 0; k <= d; ++k) {
      const double h = 1e-5;
      Eigen::VectorXd up = theta, down = theta;
      up[k] += h;
      down[k] -= h;
      const double numeric = (objective.value(up) - objective.value(down)) / (2 * h);
      CHECK(std::abs(grad[k] - numeric) <= 1e-5 * std::max(1.0, std::abs(numeric)));
    }

    // Hessian-vector product against differences of gradients.
    Eigen::VectorXd v(d + 1);
    for (int i = 0; i <= d; ++i) v[i] = normal(rng);
    Eigen::VectorXd g_up, g_down;
    objective.value_and_gradient(theta + 1e-6 * v, g_up);
    objective.value_and_gradient(theta - 1e-6 * v, g_down);
    const Eigen::VectorXd hv_numeric = (g_up - g_down) / 2e-6;
    CHECK((objective.hessian_times(theta, v) - hv_numeric).norm() <= 1e-4 * std::max(1.0, hv_numeric.norm()));
  }
}

TEST_CASE("Newton-CG reaches the reference optimum on a 20-point problem") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(20, 3);
  Eigen::VectorXd y(20);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  for (int i = 0; i < 20; ++i) y[i] = (x(i, 0) - 0.5 * x(i, 2) + 0.7 * normal(rng)) > 0 ? 1.0 : -1.0;
  const Eigen::VectorXd s = Eigen::VectorXd::Ones(20);
  const FeatureMatrix sx = to_sparse(x);
  const BinaryLogisticObjective objective(sx, y, s, 2.0);

  LrConfig config;
  config.C = 2.0;
  const auto fit = fit_binary(objective, config);
  CHECK(fit.converged);
  Eigen::VectorXd theta(4);
  theta << fit.weights, fit.bias;

  const Eigen::VectorXd reference = oracle::gradient_descent(x, y, s, 2.0, 200000);
  CHECK(oracle::logistic_gradient(x, y, s, 2.0, reference).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(std::abs(objective.value(theta) - oracle::logistic_objective(x, y, s, 2.0, reference)) <= 1e-6);

  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
    CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] + 1e-12);
  }
}

TEST_CASE("tiny C shrinks the weights to zero") {
  const auto toy = clusters(10, 0.3, 1);
  LrConfig config;
  config.C = 1e-9;
  const auto model = train_lr(to_sparse(toy.x), toy.labels, config);
  CHECK(model.weights.norm() <= 1e-6);
}

TEST_CASE("separable clusters are fit perfectly with large C") {
  const auto toy = clusters(15, 0.3, 2);
  LrConfig config;
  config.C = 1e4;
  const auto x = to_sparse(toy.x);
  const auto model = train_lr(x, toy.labels, config);
  CHECK(model.classes.size() == 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const SparseVector row = x.row(i);
    CHECK(predict(model, row) == toy.labels[static_cast<std::size_t>(i)]);
    const auto p = predict_proba(model, row);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("balanced class weights") {
  const auto w = compute_class_weights({30, 10, 0, 0}, ClassWeightMode::balanced);
  CHECK(std::abs(w[0] - 0.6667) <= 1e-4);
  CHECK(w[1] == doctest::Approx(2.0));
  CHECK(w[2] == 1.0);
  const auto none = compute_class_weights({30, 10, 0, 0}, ClassWeightMode::none);
  CHECK(none == ClassWeights{1, 1, 1, 1});
  CHECK(parse_class_weight_mode("Balanced") == ClassWeightMode::balanced);
  CHECK(parse_class_weight_mode("no") == ClassWeightMode::none);
  CHECK_THROWS_AS(parse_class_weight_mode("auto"), ModelError);
}

TEST_CASE("scaling every sample weight by lambda equals scaling C by lambda") {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(15, 2);
  Eigen::VectorXd y(15);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  for (int i = 0; i < 15; ++i) y[i] = x(i, 1) + 0.5 * normal(rng) > 0 ? 1.0 : -1.0;
  const FeatureMatrix sx = to_sparse(x);
  const double lambda = 3.5, C = 0.4;
  const BinaryLogisticObjective weighted(sx, y, Eigen::VectorXd::Constant(15, lambda), C);
  const BinaryLogisticObjective scaled(sx, y, Eigen::VectorXd::Ones(15), C * lambda);
  Eigen::VectorXd theta(3);
  theta << 0.3, -1.2, 0.1;
  CHECK(weighted.value(theta) == doctest::Approx(scaled.value(theta)).epsilon(1e-13));

  LrConfig config;
  config.C = C;
  const auto a = fit_binary(weighted, config);
  config.C = C * lambda;
  const auto b = fit_binary(scaled, config);
  CHECK((a.weights - b.weights).norm() <= 1e-6);
  CHECK(a.bias == doctest::Approx(b.bias).epsilon(1e-6));
}

TEST_CASE("bagging is deterministic and one identity member equals the base model") {
  const auto toy = clusters(12, 1.2, 3);
  const auto x = to_sparse(toy.x);
  LrConfig lr;
  lr.C = 0.5;
  const auto a = train_bagging(x, toy.labels, lr, {4, 77});
  const auto b = train_bagging(x, toy.labels, lr, {4, 77});
  const FeatureLayout layout = {{"dense", 2}};
  CHECK(serialize_classifier(Classifier(a), layout) == serialize_classifier(Classifier(b), layout));
  const auto c = train_bagging(x, toy.labels, lr, {4, 78});
  CHECK(serialize_classifier(Classifier(a), layout) != serialize_classifier(Classifier(c), layout));

  const auto identity = [](std::size_t n, std::uint64_t) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
  };
  const auto single = train_bagging(x, toy.labels, lr, {1, 5}, identity);
  const auto base = train_lr(x, toy.labels, lr);
  CHECK(single.members.front().weights == base.weights);
  CHECK(single.members.front().bias == base.bias);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const SparseVector row = x.row(i);
    CHECK(predict_proba(single, row) == predict_proba(base, row));
  }
}

TEST_CASE("bootstrap redraws samples that collapse to one class") {
  const auto toy = clusters(5, 0.3, 4);
  const auto x = to_sparse(toy.x);
  int calls = 0;
  const auto sampler = [&](std::size_t n, std::uint64_t) {
    ++calls;
    std::vector<std::size_t> rows(n, 0);
    if (calls == 3) std::iota(rows.begin(), rows.end(), 0);
    return rows;
  };
  const auto ensemble = train_bagging(x, toy.labels, LrConfig{}, {1, 0}, sampler);
  CHECK(calls == 3);
  CHECK(ensemble.members.size() == 1);
  const auto always_one = [](std::size_t n, std::uint64_t) { return std::vector<std::size_t>(n, 0); };
  CHECK_THROWS_AS(train_bagging(x, toy.labels, LrConfig{}, {1, 0}, always_one), ModelError);
}

TEST_CASE("bootstrap samples are in range and reproducible") {
  const auto a = bootstrap_sample(50, 9);
  CHECK(a == bootstrap_sample(50, 9));
  CHECK(a != bootstrap_sample(50, 10));
  CHECK(a.size() == 50);
  for (auto r : a) CHECK(r < 50);
}

TEST_CASE("classes absent from training get zero probability") {
  const auto toy = clusters(6, 0.3, 5);
  std::vector<Label> labels(toy.labels.begin(), toy.labels.begin() + 12);
  const auto x = to_sparse(toy.x.topRows(12));
  const auto model = train_lr(x, labels, LrConfig{});
  CHECK(model.classes == std::vector<Label>{Label::P, Label::N});
  const SparseVector row = x.row(0);
  const auto p = predict_proba(model, row);
  CHECK(p[2] == 0.0);
  CHECK(p[3] == 0.0);
  std::vector<Label> one(12, Label::P);
  CHECK_THROWS_AS(train_lr(x, one, LrConfig{}), ModelError);
}

TEST_CASE("argmax breaks ties in canonical order") {
  CHECK(argmax({0.25, 0.25, 0.25, 0.25}) == Label::P);
  CHECK(argmax({0.1, 0.4, 0.4, 0.1}) == Label::N);
  CHECK(argmax({0.0, 0.0, 0.3, 0.7}) == Label::NONE);
}

TEST_CASE("model container round-trips bit for bit and checks the layout") {
  const auto toy = clusters(8, 0.8, 6);
  const auto x = to_sparse(toy.x);
  const FeatureLayout layout = {{"dense", 2}};
  for (const Classifier& clf : {Classifier(train_lr(x, toy.labels, LrConfig{})),
                                Classifier(train_bagging(x, toy.labels, LrConfig{}, {3, 1}))}) {
    const auto bytes = serialize_classifier(clf, layout);
    const auto loaded = deserialize_classifier(bytes);
    CHECK(loaded.layout == layout);
    CHECK(loaded.classifier.is_ensemble() == clf.is_ensemble());
    CHECK(serialize_classifier(loaded.classifier, loaded.layout) == bytes);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const SparseVector row = x.row(i);
      CHECK(loaded.classifier.predict_proba(row) == clf.predict_proba(row));
    }
    CHECK_THROWS_AS(deserialize_classifier(bytes.substr(0, bytes.size() - 3)), ModelError);
    CHECK_THROWS_AS(deserialize_classifier(bytes + "x"), ModelError);
    CHECK_THROWS_AS(deserialize_classifier("nonsense"), ModelError);
  }
}
