#pragma once

// Reference implementations used only by tests. They are written directly
// from the definitions, without sharing code with the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

inline std::uint32_t fnv1a32(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

// Splits into code points by looking only at UTF-8 continuation bytes.
inline std::vector<std::string> code_points(std::string_view s) {
  std::vector<std::string> out;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) == 0x80 && !out.empty()) {
      out.back() += c;
    } else {
      out.emplace_back(1, c);
    }
  }
  return out;
}

inline std::vector<std::string> char_ngrams(std::string_view word, std::size_t lo, std::size_t hi) {
  const auto cps = code_points("<" + std::string(word) + ">");
  std::vector<std::string> out;
  for (std::size_t n = lo; n <= hi; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      std::string g;
      for (std::size_t k = i; k < i + n; ++k) g += cps[k];
      out.push_back(g);
    }
  }
  return out;
}

inline double smooth_idf(double docs, double df) { return std::log((1.0 + docs) / (1.0 + df)) + 1.0; }

// f(w, b) = 0.5 |w|^2 + C sum s_i log(1 + exp(-y_i (w.x_i + b))), dense rows.
inline double logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                 double C, const Eigen::VectorXd& theta) {
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd w = theta.head(d);
  double f = 0.5 * w.squaredNorm();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = y[i] * (x.row(i).dot(w) + theta[d]);
    f += C * s[i] * (m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)));
  }
  return f;
}

inline Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& s, double C, const Eigen::VectorXd& theta) {
  const Eigen::Index d = x.cols();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 1);
  g.head(d) = theta.head(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = y[i] * (x.row(i).dot(theta.head(d)) + theta[d]);
    const double coef = -C * s[i] * y[i] / (1.0 + std::exp(m));
    g.head(d) += coef * x.row(i).transpose();
    g[d] += coef;
  }
  return g;
}

// Plain gradient descent with step 1/L, run long enough to reach the optimum.
inline Eigen::VectorXd gradient_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                        double C, int iterations) {
  double lipschitz = 1.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) lipschitz += 0.25 * C * s[i] * (x.row(i).squaredNorm() + 1.0);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(x.cols() + 1);
  for (int t = 0; t < iterations; ++t) theta -= logistic_gradient(x, y, s, C, theta) / lipschitz;
  return theta;
}

// Leading right singular vector by power iteration on A^T A.
inline Eigen::VectorXd leading_right_vector(const Eigen::MatrixXd& a, int iterations = 5000) {
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()).normalized();
  for (int t = 0; t < iterations; ++t) v = (gram * v).normalized();
  return v;
}

}  // namespace oracle
