#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "polarity/augment.hpp"
#include "polarity/corpus.hpp"
#include "polarity/embeddings.hpp"
#include "polarity/eval.hpp"
#include "polarity/model.hpp"
#include "polarity/preprocess.hpp"
#include "polarity/vectorize.hpp"

namespace polarity {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct DataSource {
  std::string name;
  std::filesystem::path path;
};

struct PreprocessSettings {
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> negation_cues;  // default Spanish list when absent
  std::optional<std::filesystem::path> lemmas;
  std::size_t negation_scope = 3;
  std::size_t repeat_cap = 2;
};

struct NgramBlockSettings {
  bool enabled = true;
  NgramConfig ngram;
};

struct EmbeddingSettings {
  bool enabled = true;
  std::filesystem::path vectors;
  std::optional<std::filesystem::path> subwords;
  std::filesystem::path unigrams;
  SifConfig sif;
};

struct CrossoverSettings {
  std::size_t factor = 1;
};

struct TranslationSettings {
  std::vector<std::string> pivots;
  std::string source = "es";
  std::filesystem::path fixture;
  std::optional<std::filesystem::path> cache;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;

  // More than one source means the training set is their merge.
  std::vector<DataSource> train;
  std::optional<std::filesystem::path> dev;
  std::optional<std::filesystem::path> test;

  PreprocessSettings preprocess;
  NgramBlockSettings bow{true, NgramConfig{5, false, true}};
  NgramBlockSettings boc{true, NgramConfig{6, false, true}};
  EmbeddingSettings embedding;

  std::optional<TranslationSettings> translation;
  std::optional<CrossoverSettings> crossover;

  LrConfig lr;
  std::optional<std::size_t> bagging;  // number of estimators
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Relative paths in the document resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view json, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);
// Paths are written as given (absolute after parsing).
std::string config_to_json(const ExperimentConfig& config);

// Structural checks only: values in range, at least one feature block, ...
void validate(const ExperimentConfig& config);
// Every referenced input file exists.
void check_inputs(const ExperimentConfig& config);

PreprocessConfig load_preprocess_config(const PreprocessSettings& settings);

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

// One tweet as it flows through the pipeline.
struct Instance {
  std::string id;
  std::optional<Label> label;
  std::string raw;        // BoC input
  Tokens basic;           // after basic preprocessing
  std::vector<std::string> semantic;  // BoW / embedding input
};

std::vector<Instance> basic_instances(const Dataset& dataset, const PreprocessConfig& config);
void apply_semantic(std::vector<Instance>& instances, const PreprocessConfig& config);

// Appends (factor - 1) * n_c crossover instances per class.
std::vector<Instance> crossover_instances(std::span<const Instance> instances,
                                          const CrossoverConfig& config);

// Fit-time state for the BoW, BoC and embedding blocks, in that order.
class FeaturePipeline {
 public:
  FeaturePipeline(const ExperimentConfig& config);

  void fit(std::span<const Instance> train);
  SparseVector transform(const Instance& instance) const;
  FeatureMatrix transform(std::span<const Instance> instances) const;

  const FeatureLayout& layout() const { return layout_; }
  const Vocabulary* bow() const { return bow_ ? &*bow_ : nullptr; }
  const Vocabulary* boc() const { return boc_ ? &*boc_ : nullptr; }

  void save(const std::filesystem::path& dir) const;
  // Restores vocabularies and the common component written by save().
  void load(const std::filesystem::path& dir);

 private:
  Eigen::VectorXd embed(const Instance& instance) const;

  ExperimentConfig config_;
  std::optional<Vocabulary> bow_;
  std::optional<Vocabulary> boc_;
  std::shared_ptr<const EmbeddingTable> table_;
  std::shared_ptr<const UnigramModel> unigrams_;
  Eigen::VectorXd common_component_;
  FeatureLayout layout_;
};

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct Evaluation {
  ClassificationReport report;
  ConfusionMatrix confusion;
  std::vector<Label> predictions;
};

Evaluation evaluate(const Classifier& classifier, std::span<const Instance> instances,
                    const FeaturePipeline& features);

struct ExperimentResult {
  std::vector<Instance> train;  // after augmentation
  FeatureLayout layout;
  std::optional<Evaluation> dev;
  std::optional<Evaluation> test;
};

// Builds the augmented, preprocessed training set.
std::vector<Instance> prepare_training(const ExperimentConfig& config,
                                       const PreprocessConfig& preprocess);

// load -> [translation] -> basic preprocess -> [crossover] -> semantic
// preprocess -> features -> model -> evaluation. When `out_dir` is set the
// model, vocabularies, augmented corpus and reports are written there.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir = {});

enum class Removal { translation, crossover, bow, boc, bow_boc, embeddings, bagging };

inline constexpr std::array<Removal, 7> kAllRemovals = {
    Removal::translation, Removal::crossover,  Removal::bow,     Removal::boc,
    Removal::bow_boc,     Removal::embeddings, Removal::bagging};

std::string_view to_string(Removal removal);
Removal parse_removal(std::string_view text);

// nullopt when the removal does not apply (e.g. no-bagging without bagging).
std::optional<ExperimentConfig> apply_removal(const ExperimentConfig& config, Removal removal);

struct AblationRow {
  std::string variant;
  std::optional<ClassificationReport> report;  // dev split
  std::size_t feature_dim = 0;
  std::string note;
};

// Full system first, then one row per removal.
std::vector<AblationRow> run_ablation(const ExperimentConfig& config,
                                      std::span<const Removal> removals,
                                      const std::optional<std::filesystem::path>& out_dir = {});
std::string format_ablation(std::span<const AblationRow> rows);

using GridValue = std::variant<double, std::string>;

struct GridAxis {
  std::string param;  // C, class_weight, crossover_factor, bagging_n, sif_a
  std::vector<GridValue> values;
};

struct GridRow {
  std::vector<std::pair<std::string, GridValue>> params;
  ClassificationReport report;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::size_t best = 0;
  ExperimentConfig best_config;
};

// Axes sorted by parameter name; accepts aliases factor, n_estimators, a.
std::vector<GridAxis> parse_grid(std::string_view json);
ExperimentConfig apply_grid_value(const ExperimentConfig& config, const std::string& param,
                                  const GridValue& value);
// Exhaustive Cartesian search on the dev split, best by macro-F1 then
// accuracy then enumeration order.
GridResult grid_search(const ExperimentConfig& config, std::span<const GridAxis> axes,
                       const std::optional<std::filesystem::path>& out_dir = {});
std::string format_grid(const GridResult& result);

// Everything run_experiment persisted into a model directory.
struct SavedModel {
  ExperimentConfig config;
  PreprocessConfig preprocess;
  FeaturePipeline features;
  Classifier classifier;
};

SavedModel load_saved_model(const std::filesystem::path& model_dir);

// Preprocesses a dataset read from disk (no augmentation).
std::vector<Instance> prepare_instances(const Dataset& dataset, const PreprocessConfig& config);

// Reads `id<TAB>text[<TAB>label]`, writes `id<TAB>label` in input order.
std::string predict_tsv(const std::filesystem::path& model_dir, std::string_view input_tsv);

}  // namespace polarity
