#include "polarity/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polarity/random.hpp"

namespace polarity {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failure on " + path.string());
}

// Runs `body`, tagging any error with the stage name.
template <typename F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

// ----- config parsing helpers ---------------------------------------------

void reject_unknown(const json& section, std::initializer_list<std::string_view> known, const std::string& where) {
  if (!section.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : section.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

fs::path resolve(const fs::path& base, const json& value, const std::string& where) {
  if (!value.is_string()) throw ConfigError(where + " must be a path string");
  fs::path p = value.get<std::string>();
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::optional<fs::path> optional_path(const fs::path& base, const json& section, const char* key,
                                      const std::string& where) {
  if (!section.contains(key) || section.at(key).is_null()) return std::nullopt;
  return resolve(base, section.at(key), where + "." + key);
}

template <typename T>
T get_or(const json& section, const char* key, T fallback, const std::string& where) {
  if (!section.contains(key) || section.at(key).is_null()) return fallback;
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

NgramBlockSettings parse_ngram_block(const json& j, NgramBlockSettings defaults, const std::string& where) {
  reject_unknown(j, {"enabled", "n_max", "binarize", "tfidf"}, where);
  defaults.enabled = get_or(j, "enabled", defaults.enabled, where);
  defaults.ngram.n_max = get_or(j, "n_max", defaults.ngram.n_max, where);
  defaults.ngram.binarize = get_or(j, "binarize", defaults.ngram.binarize, where);
  defaults.ngram.tfidf = get_or(j, "tfidf", defaults.ngram.tfidf, where);
  return defaults;
}

ordered_json path_json(const std::optional<fs::path>& p) {
  return p ? ordered_json(p->string()) : ordered_json(nullptr);
}

ordered_json ngram_json(const NgramBlockSettings& block) {
  return {{"enabled", block.enabled},
          {"n_max", block.ngram.n_max},
          {"binarize", block.ngram.binarize},
          {"tfidf", block.ngram.tfidf}};
}

std::string sanitize_field(std::string text) {
  for (char& c : text) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

std::string instances_to_tsv(std::span<const Instance> instances) {
  std::string out;
  for (const auto& instance : instances) {
    out += instance.id;
    out += '\t';
    out += sanitize_field(join_surfaces(instance.basic));
    if (instance.label) {
      out += '\t';
      out += to_string(*instance.label);
    }
    out += '\n';
  }
  return out;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out;
  char buffer[32];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v[i]);
    if (i > 0) out += ' ';
    out.append(buffer, end);
  }
  out += '\n';
  return out;
}

Eigen::VectorXd parse_vector(std::string_view text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\n')) ++pos;
    if (pos == text.size()) break;
    auto end = text.find_first_of(" \n", pos);
    if (end == std::string_view::npos) end = text.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, value);
    if (ec != std::errc() || ptr != text.data() + end) throw Error("bad number in vector file");
    values.push_back(value);
    pos = end;
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<Label> labels_of(std::span<const Instance> instances) {
  std::vector<Label> labels;
  labels.reserve(instances.size());
  for (const auto& instance : instances) {
    if (!instance.label) throw EvalError("instance '" + instance.id + "' has no label");
    labels.push_back(*instance.label);
  }
  return labels;
}

std::string grid_value_string(const GridValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), std::get<double>(value));
  return std::string(buffer, end);
}

std::string canonical_grid_param(std::string_view name) {
  if (name == "C") return "C";
  if (name == "class_weight") return "class_weight";
  if (name == "crossover_factor" || name == "factor") return "crossover_factor";
  if (name == "bagging_n" || name == "n_estimators") return "bagging_n";
  if (name == "sif_a" || name == "a") return "sif_a";
  throw ConfigError("grid parameter '" + std::string(name) +
                    "' not supported (C, class_weight, crossover_factor, bagging_n, sif_a)");
}

std::size_t whole_number(double value, const std::string& param) {
  if (value < 0 || value != static_cast<double>(static_cast<std::size_t>(value))) {
    throw ConfigError("grid parameter " + param + " needs non-negative integers");
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"name", "seed", "data", "preprocess", "features", "augment", "model"}, "config");

  ExperimentConfig config;
  config.name = get_or<std::string>(doc, "name", config.name, "config");
  config.seed = get_or<std::uint64_t>(doc, "seed", config.seed, "config");

  if (!doc.contains("data")) throw ConfigError("config.data is required");
  const json& data = doc.at("data");
  reject_unknown(data, {"train", "dev", "test"}, "data");
  if (!data.contains("train")) throw ConfigError("data.train is required");
  const json& train = data.at("train");
  if (train.is_string()) {
    config.train.push_back({config.name, resolve(base_dir, train, "data.train")});
  } else if (train.is_array()) {
    for (const auto& source : train) {
      reject_unknown(source, {"name", "path"}, "data.train[]");
      if (!source.contains("name") || !source.contains("path")) {
        throw ConfigError("data.train entries need name and path");
      }
      config.train.push_back({source.at("name").get<std::string>(), resolve(base_dir, source.at("path"), "data.train[].path")});
    }
  } else {
    throw ConfigError("data.train must be a path or a list of {name, path}");
  }
  config.dev = optional_path(base_dir, data, "dev", "data");
  config.test = optional_path(base_dir, data, "test", "data");

  if (doc.contains("preprocess")) {
    const json& pre = doc.at("preprocess");
    reject_unknown(pre, {"stopwords", "negation_cues", "lemmas", "negation_scope", "repeat_cap"}, "preprocess");
    config.preprocess.stopwords = optional_path(base_dir, pre, "stopwords", "preprocess");
    config.preprocess.negation_cues = optional_path(base_dir, pre, "negation_cues", "preprocess");
    config.preprocess.lemmas = optional_path(base_dir, pre, "lemmas", "preprocess");
    config.preprocess.negation_scope = get_or(pre, "negation_scope", config.preprocess.negation_scope, "preprocess");
    config.preprocess.repeat_cap = get_or(pre, "repeat_cap", config.preprocess.repeat_cap, "preprocess");
  }

  if (doc.contains("features")) {
    const json& features = doc.at("features");
    reject_unknown(features, {"bow", "boc", "embedding"}, "features");
    if (features.contains("bow")) config.bow = parse_ngram_block(features.at("bow"), config.bow, "features.bow");
    if (features.contains("boc")) config.boc = parse_ngram_block(features.at("boc"), config.boc, "features.boc");
    if (features.contains("embedding")) {
      const json& emb = features.at("embedding");
      reject_unknown(emb, {"enabled", "vectors", "subwords", "unigrams", "a", "remove_common_component"},
                     "features.embedding");
      config.embedding.enabled = get_or(emb, "enabled", true, "features.embedding");
      if (const auto p = optional_path(base_dir, emb, "vectors", "features.embedding")) config.embedding.vectors = *p;
      config.embedding.subwords = optional_path(base_dir, emb, "subwords", "features.embedding");
      if (const auto p = optional_path(base_dir, emb, "unigrams", "features.embedding")) config.embedding.unigrams = *p;
      config.embedding.sif.a = get_or(emb, "a", config.embedding.sif.a, "features.embedding");
      config.embedding.sif.remove_common_component =
          get_or(emb, "remove_common_component", false, "features.embedding");
    } else {
      config.embedding.enabled = false;
    }
  } else {
    config.embedding.enabled = false;
  }

  if (doc.contains("augment")) {
    const json& augment = doc.at("augment");
    reject_unknown(augment, {"translation", "crossover"}, "augment");
    if (augment.contains("translation") && !augment.at("translation").is_null()) {
      const json& t = augment.at("translation");
      reject_unknown(t, {"pivots", "source", "fixture", "cache"}, "augment.translation");
      TranslationSettings settings;
      settings.pivots = get_or(t, "pivots", std::vector<std::string>{}, "augment.translation");
      settings.source = get_or<std::string>(t, "source", settings.source, "augment.translation");
      if (!t.contains("fixture")) throw ConfigError("augment.translation.fixture is required");
      settings.fixture = resolve(base_dir, t.at("fixture"), "augment.translation.fixture");
      settings.cache = optional_path(base_dir, t, "cache", "augment.translation");
      config.translation = std::move(settings);
    }
    if (augment.contains("crossover") && !augment.at("crossover").is_null()) {
      const json& c = augment.at("crossover");
      reject_unknown(c, {"factor"}, "augment.crossover");
      config.crossover = CrossoverSettings{get_or<std::size_t>(c, "factor", 1, "augment.crossover")};
    }
  }

  if (doc.contains("model")) {
    const json& model = doc.at("model");
    reject_unknown(model, {"C", "class_weight", "tol", "max_iter", "bagging"}, "model");
    config.lr.C = get_or(model, "C", config.lr.C, "model");
    config.lr.class_weight =
        parse_class_weight_mode(get_or<std::string>(model, "class_weight", "none", "model"));
    config.lr.tol = get_or(model, "tol", config.lr.tol, "model");
    config.lr.max_iter = get_or(model, "max_iter", config.lr.max_iter, "model");
    if (model.contains("bagging") && !model.at("bagging").is_null()) {
      const json& b = model.at("bagging");
      reject_unknown(b, {"n_estimators"}, "model.bagging");
      config.bagging = get_or<std::size_t>(b, "n_estimators", 40, "model.bagging");
    }
  }
  return config;
}

ExperimentConfig load_config(const fs::path& path) {
  const std::string text = read_text(path);
  return parse_config(text, fs::absolute(path).parent_path());
}

std::string config_to_json(const ExperimentConfig& config) {
  ordered_json doc;
  doc["name"] = config.name;
  doc["seed"] = config.seed;
  ordered_json train = ordered_json::array();
  for (const auto& source : config.train) train.push_back({{"name", source.name}, {"path", source.path.string()}});
  doc["data"] = {{"train", train}, {"dev", path_json(config.dev)}, {"test", path_json(config.test)}};
  doc["preprocess"] = {{"stopwords", path_json(config.preprocess.stopwords)},
                       {"negation_cues", path_json(config.preprocess.negation_cues)},
                       {"lemmas", path_json(config.preprocess.lemmas)},
                       {"negation_scope", config.preprocess.negation_scope},
                       {"repeat_cap", config.preprocess.repeat_cap}};
  ordered_json features;
  features["bow"] = ngram_json(config.bow);
  features["boc"] = ngram_json(config.boc);
  features["embedding"] = {{"enabled", config.embedding.enabled},
                           {"vectors", config.embedding.vectors.string()},
                           {"subwords", path_json(config.embedding.subwords)},
                           {"unigrams", config.embedding.unigrams.string()},
                           {"a", config.embedding.sif.a},
                           {"remove_common_component", config.embedding.sif.remove_common_component}};
  doc["features"] = features;
  ordered_json augment;
  if (config.translation) {
    augment["translation"] = {{"pivots", config.translation->pivots},
                              {"source", config.translation->source},
                              {"fixture", config.translation->fixture.string()},
                              {"cache", path_json(config.translation->cache)}};
  } else {
    augment["translation"] = nullptr;
  }
  augment["crossover"] = config.crossover ? ordered_json{{"factor", config.crossover->factor}} : ordered_json(nullptr);
  doc["augment"] = augment;
  ordered_json model = {{"C", config.lr.C},
                        {"class_weight", std::string(to_string(config.lr.class_weight))},
                        {"tol", config.lr.tol},
                        {"max_iter", config.lr.max_iter}};
  model["bagging"] = config.bagging ? ordered_json{{"n_estimators", *config.bagging}} : ordered_json(nullptr);
  doc["model"] = model;
  return doc.dump(2) + "\n";
}

void validate(const ExperimentConfig& config) {
  if (config.train.empty()) throw ConfigError("no training data configured");
  std::set<std::string> names;
  for (const auto& source : config.train) {
    if (!names.insert(source.name).second) throw ConfigError("training dataset '" + source.name + "' listed twice");
  }
  if (config.preprocess.repeat_cap < 1) throw ConfigError("preprocess.repeat_cap must be >= 1");
  if (!config.bow.enabled && !config.boc.enabled && !config.embedding.enabled) {
    throw ConfigError("at least one feature block must be enabled");
  }
  if (config.bow.enabled && config.bow.ngram.n_max < 1) throw ConfigError("features.bow.n_max must be >= 1");
  if (config.boc.enabled && config.boc.ngram.n_max < 1) throw ConfigError("features.boc.n_max must be >= 1");
  if (config.embedding.enabled) {
    if (config.embedding.vectors.empty()) throw ConfigError("features.embedding.vectors is required");
    if (config.embedding.unigrams.empty()) throw ConfigError("features.embedding.unigrams is required");
    try {
      config.embedding.sif.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  try {
    if (config.translation) {
      TranslationConfig{config.translation->pivots, config.translation->source, {}}.validate();
    }
    if (config.crossover) CrossoverConfig{config.crossover->factor, 0}.validate();
    config.lr.validate();
    if (config.bagging) BaggingConfig{*config.bagging, 0}.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void check_inputs(const ExperimentConfig& config) {
  std::vector<fs::path> required;
  for (const auto& source : config.train) required.push_back(source.path);
  if (config.dev) required.push_back(*config.dev);
  if (config.test) required.push_back(*config.test);
  for (const auto* p : {&config.preprocess.stopwords, &config.preprocess.negation_cues, &config.preprocess.lemmas}) {
    if (*p) required.push_back(**p);
  }
  if (config.embedding.enabled) {
    required.push_back(config.embedding.vectors);
    required.push_back(config.embedding.unigrams);
    if (config.embedding.subwords) required.push_back(*config.embedding.subwords);
  }
  if (config.translation) required.push_back(config.translation->fixture);
  for (const auto& p : required) {
    if (!fs::exists(p)) throw ConfigError("input file not found: " + p.string());
  }
}

PreprocessConfig load_preprocess_config(const PreprocessSettings& settings) {
  PreprocessConfig config;
  config.negation_words =
      settings.negation_cues ? load_word_list(*settings.negation_cues) : default_negation_words();
  if (settings.stopwords) config.stopwords = load_word_list(*settings.stopwords);
  if (settings.lemmas) config.lemma_table = load_lemma_table(*settings.lemmas);
  config.negation_scope = settings.negation_scope;
  config.repeat_cap = settings.repeat_cap;
  config.validate();
  return config;
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

std::vector<Instance> basic_instances(const Dataset& dataset, const PreprocessConfig& config) {
  std::vector<Instance> out;
  out.reserve(dataset.size());
  for (const auto& tweet : dataset.tweets) {
    out.push_back({tweet.id, tweet.label, tweet.text, basic_preprocess(tokenize(tweet.text), config), {}});
  }
  return out;
}

void apply_semantic(std::vector<Instance>& instances, const PreprocessConfig& config) {
  for (auto& instance : instances) instance.semantic = surfaces(semantic_preprocess(instance.basic, config));
}

std::vector<Instance> prepare_instances(const Dataset& dataset, const PreprocessConfig& config) {
  auto instances = basic_instances(dataset, config);
  apply_semantic(instances, config);
  return instances;
}

std::vector<Instance> crossover_instances(std::span<const Instance> instances, const CrossoverConfig& config) {
  const auto labels = labels_of(instances);
  const auto plan = plan_crossover(labels, config);
  std::vector<Instance> out(instances.begin(), instances.end());
  out.reserve(instances.size() + plan.size());
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto& first = instances[plan[k].first];
    const auto& second = instances[plan[k].second];
    Instance child;
    child.id = first.id + "+" + second.id + "#x" + std::to_string(k);
    child.label = plan[k].label;
    child.basic = crossover_pair<Token>(first.basic, second.basic);
    child.raw = join_surfaces(child.basic);
    out.push_back(std::move(child));
  }
  return out;
}

FeaturePipeline::FeaturePipeline(const ExperimentConfig& config) : config_(config) {
  if (config_.embedding.enabled) {
    table_ = std::make_shared<const EmbeddingTable>(load_embeddings(config_.embedding.vectors, config_.embedding.subwords));
    unigrams_ = std::make_shared<const UnigramModel>(load_unigram_counts(config_.embedding.unigrams));
  }
}

Eigen::VectorXd FeaturePipeline::embed(const Instance& instance) const {
  Eigen::VectorXd v = sif_embed(instance.semantic, *table_, *unigrams_, config_.embedding.sif);
  if (common_component_.size() > 0) v -= common_component_.dot(v) * common_component_;
  return v;
}

void FeaturePipeline::fit(std::span<const Instance> train) {
  if (train.empty()) throw FeatureError("cannot fit features on an empty training set");
  layout_.clear();
  if (config_.bow.enabled) {
    VocabularyBuilder builder(config_.bow.ngram);
    for (const auto& instance : train) builder.add(extract_word_ngrams(instance.semantic, config_.bow.ngram.n_max));
    bow_ = builder.build();
    layout_.push_back({"bow", bow_->size()});
  }
  if (config_.boc.enabled) {
    VocabularyBuilder builder(config_.boc.ngram);
    for (const auto& instance : train) builder.add(extract_char_ngrams(instance.raw, config_.boc.ngram.n_max));
    boc_ = builder.build();
    layout_.push_back({"boc", boc_->size()});
  }
  if (config_.embedding.enabled) {
    common_component_.resize(0);
    if (config_.embedding.sif.remove_common_component) {
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(table_->dim));
      for (std::size_t i = 0; i < train.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = embed(train[i]).transpose();
      if (rows.rows() < 2) throw FeatureError("common component removal needs at least 2 training tweets");
      common_component_ = common_component(rows);
    }
    layout_.push_back({"embedding", table_->dim});
  }
}

SparseVector FeaturePipeline::transform(const Instance& instance) const {
  std::vector<FeatureBlock> blocks;
  if (bow_) blocks.emplace_back(bow_->transform(extract_word_ngrams(instance.semantic, bow_->config().n_max)));
  if (boc_) blocks.emplace_back(boc_->transform(extract_char_ngrams(instance.raw, boc_->config().n_max)));
  if (table_) blocks.emplace_back(embed(instance));
  return concat_features(blocks, layout_);
}

FeatureMatrix FeaturePipeline::transform(std::span<const Instance> instances) const {
  std::vector<SparseVector> rows;
  rows.reserve(instances.size());
  for (const auto& instance : instances) rows.push_back(transform(instance));
  return stack_rows(rows, total_dim(layout_));
}

void FeaturePipeline::save(const fs::path& dir) const {
  if (bow_) bow_->save(dir / "bow_vocab.tsv");
  if (boc_) boc_->save(dir / "boc_vocab.tsv");
  if (common_component_.size() > 0) write_text(dir / "common_component.txt", format_vector(common_component_));
}

void FeaturePipeline::load(const fs::path& dir) {
  layout_.clear();
  if (config_.bow.enabled) {
    bow_ = Vocabulary::load(dir / "bow_vocab.tsv");
    layout_.push_back({"bow", bow_->size()});
  }
  if (config_.boc.enabled) {
    boc_ = Vocabulary::load(dir / "boc_vocab.tsv");
    layout_.push_back({"boc", boc_->size()});
  }
  if (config_.embedding.enabled) {
    common_component_.resize(0);
    if (config_.embedding.sif.remove_common_component) {
      common_component_ = parse_vector(read_text(dir / "common_component.txt"));
      if (static_cast<std::size_t>(common_component_.size()) != table_->dim) {
        throw FeatureError("common component has the wrong dimension");
      }
    }
    layout_.push_back({"embedding", table_->dim});
  }
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

Evaluation evaluate(const Classifier& classifier, std::span<const Instance> instances, const FeaturePipeline& features) {
  if (classifier.dim() != total_dim(features.layout())) {
    throw EvalError("model dim " + std::to_string(classifier.dim()) + " does not match feature dim " +
                    std::to_string(total_dim(features.layout())));
  }
  const auto golds = labels_of(instances);
  Evaluation evaluation;
  evaluation.predictions.reserve(instances.size());
  for (const auto& instance : instances) evaluation.predictions.push_back(classifier.predict(features.transform(instance)));
  evaluation.confusion = confusion(golds, evaluation.predictions);
  evaluation.report = report_from_confusion(evaluation.confusion);
  return evaluation;
}

std::vector<Instance> prepare_training(const ExperimentConfig& config, const PreprocessConfig& preprocess) {
  Dataset train = stage("load", [&] {
    std::vector<Dataset> sources;
    for (const auto& source : config.train) sources.push_back(load_tsv(source.path, source.name, Split::train));
    Dataset merged = sources.size() == 1 ? std::move(sources.front()) : merge(sources);
    require_labels(merged);
    return merged;
  });

  if (config.translation) {
    train = stage("translation", [&] {
      auto client = FixtureTranslator::load(config.translation->fixture);
      TranslationCache cache = config.translation->cache ? TranslationCache(*config.translation->cache) : TranslationCache();
      const TranslationConfig tconfig{config.translation->pivots, config.translation->source,
                                      config.translation->cache.value_or(fs::path())};
      return translation_augment(train, client, cache, tconfig);
    });
  }

  auto instances = stage("preprocess", [&] { return basic_instances(train, preprocess); });

  if (config.crossover && config.crossover->factor > 1) {
    instances = stage("crossover", [&] {
      return crossover_instances(instances, {config.crossover->factor, derive_seed(config.seed, "crossover")});
    });
  }
  stage("preprocess", [&] {
    apply_semantic(instances, preprocess);
    return 0;
  });
  return instances;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::optional<fs::path>& out_dir) {
  stage("config", [&] {
    validate(config);
    check_inputs(config);
    return 0;
  });
  const PreprocessConfig preprocess = stage("config", [&] { return load_preprocess_config(config.preprocess); });

  ExperimentResult result;
  result.train = prepare_training(config, preprocess);

  auto load_split = [&](const fs::path& path, Split split) {
    return stage("load", [&] { return prepare_instances(load_tsv(path, config.name, split), preprocess); });
  };
  std::vector<Instance> dev;
  std::vector<Instance> test;
  if (config.dev) dev = load_split(*config.dev, Split::dev);
  if (config.test) test = load_split(*config.test, Split::test);

  FeaturePipeline features = stage("features", [&] {
    FeaturePipeline pipeline(config);
    pipeline.fit(result.train);
    return pipeline;
  });
  result.layout = features.layout();

  const Classifier classifier = stage("train", [&] {
    const FeatureMatrix x = features.transform(result.train);
    const auto labels = labels_of(result.train);
    if (config.bagging) {
      return Classifier(train_bagging(x, labels, config.lr, {*config.bagging, derive_seed(config.seed, "bagging")}));
    }
    return Classifier(train_lr(x, labels, config.lr));
  });

  stage("eval", [&] {
    if (config.dev) result.dev = evaluate(classifier, dev, features);
    const bool test_labeled =
        !test.empty() && std::all_of(test.begin(), test.end(), [](const Instance& i) { return i.label.has_value(); });
    if (test_labeled) result.test = evaluate(classifier, test, features);
    return 0;
  });

  if (out_dir) {
    stage("persist", [&] {
      fs::create_directories(*out_dir);
      write_text(*out_dir / "config.json", config_to_json(config));
      write_text(*out_dir / "augmented_train.tsv", instances_to_tsv(result.train));
      features.save(*out_dir);
      save_classifier(*out_dir / "model.bin", classifier, features.layout());
      if (result.dev) {
        write_text(*out_dir / "report_dev.txt", format_report(result.dev->report, result.dev->confusion));
        write_text(*out_dir / "report_dev.json", report_to_json(result.dev->report, result.dev->confusion));
      }
      if (result.test) {
        write_text(*out_dir / "report_test.txt", format_report(result.test->report, result.test->confusion));
        write_text(*out_dir / "report_test.json", report_to_json(result.test->report, result.test->confusion));
      }
      return 0;
    });
  }
  return result;
}

std::string_view to_string(Removal removal) {
  switch (removal) {
    case Removal::translation: return "no-translation";
    case Removal::crossover: return "no-crossover";
    case Removal::bow: return "no-BoW";
    case Removal::boc: return "no-BoC";
    case Removal::bow_boc: return "no-BoW+BoC";
    case Removal::embeddings: return "no-embeddings";
    case Removal::bagging: return "no-bagging";
  }
  return "?";
}

Removal parse_removal(std::string_view text) {
  for (Removal removal : kAllRemovals) {
    if (text == to_string(removal)) return removal;
  }
  throw ConfigError("unknown ablation '" + std::string(text) + "'");
}

std::optional<ExperimentConfig> apply_removal(const ExperimentConfig& config, Removal removal) {
  ExperimentConfig out = config;
  const int blocks = int(config.bow.enabled) + int(config.boc.enabled) + int(config.embedding.enabled);
  switch (removal) {
    case Removal::translation:
      if (!config.translation) return std::nullopt;
      out.translation.reset();
      break;
    case Removal::crossover:
      if (!config.crossover || config.crossover->factor <= 1) return std::nullopt;
      out.crossover.reset();
      break;
    case Removal::bow:
      if (!config.bow.enabled || blocks < 2) return std::nullopt;
      out.bow.enabled = false;
      break;
    case Removal::boc:
      if (!config.boc.enabled || blocks < 2) return std::nullopt;
      out.boc.enabled = false;
      break;
    case Removal::bow_boc:
      if (!config.bow.enabled || !config.boc.enabled || !config.embedding.enabled) return std::nullopt;
      out.bow.enabled = false;
      out.boc.enabled = false;
      break;
    case Removal::embeddings:
      if (!config.embedding.enabled || blocks < 2) return std::nullopt;
      out.embedding.enabled = false;
      break;
    case Removal::bagging:
      if (!config.bagging) return std::nullopt;
      out.bagging.reset();
      break;
  }
  return out;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& config, std::span<const Removal> removals,
                                      const std::optional<fs::path>& out_dir) {
  if (!config.dev) throw ConfigError("ablation needs a dev split");
  auto dir_for = [&](std::string_view variant) -> std::optional<fs::path> {
    if (!out_dir) return std::nullopt;
    std::string name(variant);
    std::replace(name.begin(), name.end(), ' ', '_');
    std::replace(name.begin(), name.end(), '+', '_');
    return *out_dir / name;
  };

  std::vector<AblationRow> rows;
  const auto full = run_experiment(config, dir_for("full"));
  rows.push_back({"full system", full.dev->report, total_dim(full.layout), ""});
  for (Removal removal : removals) {
    const auto variant = apply_removal(config, removal);
    if (!variant) {
      rows.push_back({std::string(to_string(removal)), std::nullopt, 0, "skipped: component not in base config"});
      continue;
    }
    const auto result = run_experiment(*variant, dir_for(to_string(removal)));
    rows.push_back({std::string(to_string(removal)), result.dev->report, total_dim(result.layout), ""});
  }
  if (out_dir) write_text(*out_dir / "ablation.txt", format_ablation(rows));
  return rows;
}

std::string format_ablation(std::span<const AblationRow> rows) {
  std::string out;
  char line[200];
  std::snprintf(line, sizeof(line), "%-16s %7s %7s %10s\n", "variant", "Acc.", "M-F1", "dim");
  out += line;
  for (const auto& row : rows) {
    if (row.report) {
      std::snprintf(line, sizeof(line), "%-16s %7.2f %7.2f %10zu\n", row.variant.c_str(),
                    to_percent(row.report->accuracy), to_percent(row.report->macro_f1), row.feature_dim);
    } else {
      std::snprintf(line, sizeof(line), "%-16s %7s %7s %10s  %s\n", row.variant.c_str(), "-", "-", "-", row.note.c_str());
    }
    out += line;
  }
  return out;
}

std::vector<GridAxis> parse_grid(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.empty()) throw ConfigError("grid must be a non-empty object of param -> values");
  std::vector<GridAxis> axes;
  for (const auto& [name, values] : doc.items()) {
    GridAxis axis{canonical_grid_param(name), {}};
    if (!values.is_array() || values.empty()) throw ConfigError("grid values for " + name + " must be a non-empty list");
    for (const auto& value : values) {
      if (axis.param == "class_weight") {
        if (!value.is_string()) throw ConfigError("class_weight values must be strings");
        parse_class_weight_mode(value.get<std::string>());
        axis.values.emplace_back(value.get<std::string>());
      } else {
        if (!value.is_number()) throw ConfigError("grid values for " + name + " must be numbers");
        axis.values.emplace_back(value.get<double>());
      }
    }
    if (std::any_of(axes.begin(), axes.end(), [&](const GridAxis& a) { return a.param == axis.param; })) {
      throw ConfigError("grid parameter " + axis.param + " given twice");
    }
    axes.push_back(std::move(axis));
  }
  std::sort(axes.begin(), axes.end(), [](const GridAxis& a, const GridAxis& b) { return a.param < b.param; });
  return axes;
}

ExperimentConfig apply_grid_value(const ExperimentConfig& config, const std::string& param, const GridValue& value) {
  ExperimentConfig out = config;
  const std::string name = canonical_grid_param(param);
  auto number = [&] {
    if (!std::holds_alternative<double>(value)) throw ConfigError("grid parameter " + name + " needs a number");
    return std::get<double>(value);
  };
  if (name == "C") {
    out.lr.C = number();
  } else if (name == "class_weight") {
    if (!std::holds_alternative<std::string>(value)) throw ConfigError("class_weight needs a string");
    out.lr.class_weight = parse_class_weight_mode(std::get<std::string>(value));
  } else if (name == "crossover_factor") {
    const auto factor = whole_number(number(), name);
    if (factor <= 1) out.crossover.reset();
    else out.crossover = CrossoverSettings{factor};
  } else if (name == "bagging_n") {
    const auto n = whole_number(number(), name);
    if (n == 0) out.bagging.reset();
    else out.bagging = n;
  } else if (name == "sif_a") {
    out.embedding.sif.a = number();
  }
  return out;
}

GridResult grid_search(const ExperimentConfig& config, std::span<const GridAxis> axes, const std::optional<fs::path>& out_dir) {
  if (axes.empty()) throw ConfigError("empty grid");
  if (!config.dev) throw ConfigError("grid search needs a dev split");
  for (const auto& axis : axes) {
    if (axis.values.empty()) throw ConfigError("grid axis " + axis.param + " has no values");
  }

  GridResult result;
  std::vector<std::size_t> odometer(axes.size(), 0);
  std::size_t run = 0;
  bool done = false;
  while (!done) {
    ExperimentConfig variant = config;
    GridRow row;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& value = axes[a].values[odometer[a]];
      variant = apply_grid_value(variant, axes[a].param, value);
      row.params.emplace_back(axes[a].param, value);
    }
    std::optional<fs::path> run_dir;
    if (out_dir) run_dir = *out_dir / ("run_" + std::to_string(run));
    row.report = run_experiment(variant, run_dir).dev->report;

    const bool better = result.rows.empty() || [&] {
      const auto& best = result.rows[result.best].report;
      const double f1 = to_percent(row.report.macro_f1), best_f1 = to_percent(best.macro_f1);
      if (f1 != best_f1) return f1 > best_f1;
      return to_percent(row.report.accuracy) > to_percent(best.accuracy);
    }();
    result.rows.push_back(std::move(row));
    if (better) {
      result.best = result.rows.size() - 1;
      result.best_config = variant;
    }
    ++run;

    // Last axis varies fastest.
    std::size_t a = axes.size();
    while (true) {
      if (a == 0) {
        done = true;
        break;
      }
      --a;
      if (++odometer[a] < axes[a].values.size()) break;
      odometer[a] = 0;
    }
  }
  if (out_dir) {
    write_text(*out_dir / "grid.tsv", format_grid(result));
    write_text(*out_dir / "best_config.json", config_to_json(result.best_config));
  }
  return result;
}

std::string format_grid(const GridResult& result) {
  std::string out;
  if (result.rows.empty()) return out;
  out += "run";
  for (const auto& [param, value] : result.rows.front().params) out += "\t" + param;
  out += "\taccuracy\tmacro_f1\tbest\n";
  char buffer[64];
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& row = result.rows[i];
    out += std::to_string(i);
    for (const auto& [param, value] : row.params) out += "\t" + grid_value_string(value);
    std::snprintf(buffer, sizeof(buffer), "\t%.2f\t%.2f\t%s\n", to_percent(row.report.accuracy),
                  to_percent(row.report.macro_f1), i == result.best ? "*" : "");
    out += buffer;
  }
  return out;
}

SavedModel load_saved_model(const fs::path& model_dir) {
  return stage("load-model", [&] {
    ExperimentConfig config = load_config(model_dir / "config.json");
    PreprocessConfig preprocess = load_preprocess_config(config.preprocess);
    FeaturePipeline features(config);
    features.load(model_dir);
    auto loaded = load_classifier(model_dir / "model.bin", features.layout());
    return SavedModel{std::move(config), std::move(preprocess), std::move(features), std::move(loaded.classifier)};
  });
}

std::string predict_tsv(const fs::path& model_dir, std::string_view input_tsv) {
  const SavedModel saved = load_saved_model(model_dir);
  const auto instances = stage("load", [&] {
    return prepare_instances(parse_tsv(input_tsv, "input", Split::test), saved.preprocess);
  });
  return stage("predict", [&] {
    std::string out;
    for (const auto& instance : instances) {
      out += instance.id;
      out += '\t';
      out += to_string(saved.classifier.predict(saved.features.transform(instance)));
      out += '\n';
    }
    return out;
  });
}

}  // namespace polarity
