#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "polarity/error.hpp"
#include "polarity/label.hpp"

namespace polarity {

class EvalError : public Error {
 public:
  using Error::Error;
};

// Rows are gold labels, columns predictions, both in canonical order.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> counts{};

  std::size_t& at(Label gold, Label predicted) {
    return counts[index_of(gold)][index_of(predicted)];
  }
  std::size_t at(Label gold, Label predicted) const {
    return counts[index_of(gold)][index_of(predicted)];
  }
  std::size_t row_sum(Label gold) const;
  std::size_t column_sum(Label predicted) const;
  std::size_t trace() const;
  std::size_t total() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const Label> golds, std::span<const Label> preds);

struct ClassMetrics {
  double precision = 0.0;  // fractions in [0, 1]
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;

  bool operator==(const ClassMetrics&) const = default;
};

struct ClassificationReport {
  std::array<ClassMetrics, kNumLabels> per_class{};
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  // Harmonic mean of macro precision and macro recall.
  double macro_f1 = 0.0;
  double accuracy = 0.0;

  bool operator==(const ClassificationReport&) const = default;
};

ClassificationReport report_from_confusion(const ConfusionMatrix& cm);

// Fraction -> percentage rounded half-up to 2 decimals (0.61097 -> 61.10).
double to_percent(double fraction);

// Aligned text: classification report, then the confusion matrix.
std::string format_report(const ClassificationReport& report, const ConfusionMatrix& cm);
std::string report_to_json(const ClassificationReport& report, const ConfusionMatrix& cm);

}  // namespace polarity
