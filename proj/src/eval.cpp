#include "polarity/eval.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace polarity {

std::size_t ConfusionMatrix::row_sum(Label gold) const {
  std::size_t sum = 0;
  for (auto v : counts[index_of(gold)]) sum += v;
  return sum;
}

std::size_t ConfusionMatrix::column_sum(Label predicted) const {
  std::size_t sum = 0;
  for (const auto& row : counts) sum += row[index_of(predicted)];
  return sum;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t sum = 0;
  for (std::size_t c = 0; c < kNumLabels; ++c) sum += counts[c][c];
  return sum;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) {
    for (auto v : row) sum += v;
  }
  return sum;
}

ConfusionMatrix confusion(std::span<const Label> golds, std::span<const Label> preds) {
  if (golds.size() != preds.size()) {
    throw EvalError("confusion: " + std::to_string(golds.size()) + " gold labels vs " +
                    std::to_string(preds.size()) + " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < golds.size(); ++i) ++cm.at(golds[i], preds[i]);
  return cm;
}

ClassificationReport report_from_confusion(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw EvalError("cannot report on an empty confusion matrix");

  ClassificationReport report;
  for (Label label : kAllLabels) {
    auto& m = report.per_class[index_of(label)];
    const double hits = static_cast<double>(cm.at(label, label));
    const std::size_t predicted = cm.column_sum(label);
    m.support = cm.row_sum(label);
    m.precision = predicted == 0 ? 0.0 : hits / static_cast<double>(predicted);
    m.recall = m.support == 0 ? 0.0 : hits / static_cast<double>(m.support);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    report.macro_precision += m.precision;
    report.macro_recall += m.recall;
  }
  report.macro_precision /= static_cast<double>(kNumLabels);
  report.macro_recall /= static_cast<double>(kNumLabels);
  const double denom = report.macro_precision + report.macro_recall;
  report.macro_f1 = denom == 0.0 ? 0.0 : 2.0 * report.macro_precision * report.macro_recall / denom;
  report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  return report;
}

double to_percent(double fraction) {
  // The epsilon keeps exact halves (e.g. 0.470050) from rounding down after
  // binary representation error.
  return std::floor(fraction * 10000.0 + 0.5 + 1e-7) / 100.0;
}

std::string format_report(const ClassificationReport& report, const ConfusionMatrix& cm) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %7s %7s %7s %8s\n", "", "Prec.", "Rec.", "F1", "Support");
  out += line;
  for (Label label : kAllLabels) {
    const auto& m = report.per_class[index_of(label)];
    std::snprintf(line, sizeof(line), "%-10s %7.2f %7.2f %7.2f %8zu\n", std::string(to_string(label)).c_str(),
                  to_percent(m.precision), to_percent(m.recall), to_percent(m.f1), m.support);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-10s %7.2f %7.2f %7.2f %8zu\n", "macro avg", to_percent(report.macro_precision),
                to_percent(report.macro_recall), to_percent(report.macro_f1), cm.total());
  out += line;
  std::snprintf(line, sizeof(line), "Accuracy: %.2f\n\n", to_percent(report.accuracy));
  out += line;

  std::snprintf(line, sizeof(line), "%-6s", "");
  out += line;
  for (Label label : kAllLabels) {
    std::snprintf(line, sizeof(line), " %6s", std::string(to_string(label)).c_str());
    out += line;
  }
  out += '\n';
  for (Label gold : kAllLabels) {
    std::snprintf(line, sizeof(line), "%-6s", std::string(to_string(gold)).c_str());
    out += line;
    for (Label pred : kAllLabels) {
      std::snprintf(line, sizeof(line), " %6zu", cm.at(gold, pred));
      out += line;
    }
    out += '\n';
  }
  return out;
}

std::string report_to_json(const ClassificationReport& report, const ConfusionMatrix& cm) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (Label label : kAllLabels) {
    const auto& m = report.per_class[index_of(label)];
    classes[std::string(to_string(label))] = {{"precision", to_percent(m.precision)},
                                              {"recall", to_percent(m.recall)},
                                              {"f1", to_percent(m.f1)},
                                              {"support", m.support}};
  }
  doc["classes"] = std::move(classes);
  doc["macro"] = {{"precision", to_percent(report.macro_precision)},
                  {"recall", to_percent(report.macro_recall)},
                  {"f1", to_percent(report.macro_f1)}};
  doc["accuracy"] = to_percent(report.accuracy);
  doc["labels"] = nlohmann::ordered_json::array();
  for (Label label : kAllLabels) doc["labels"].push_back(std::string(to_string(label)));
  doc["confusion"] = nlohmann::ordered_json::array();
  for (const auto& row : cm.counts) doc["confusion"].push_back(row);
  return doc.dump(2) + "\n";
}

}  // namespace polarity
