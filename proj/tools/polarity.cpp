// Command-line driver for the polarity pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "polarity/pipeline.hpp"

namespace fs = std::filesystem;
using namespace polarity;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw Error("cannot write " + path.string());
}

struct Options {
  fs::path config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  fs::path model;
  fs::path input;
  fs::path output;
  fs::path grid;
  std::vector<std::string> removals;
};

ExperimentConfig config_from(const Options& opt) {
  ExperimentConfig config = load_config(opt.config);
  if (opt.seed) config.seed = *opt.seed;
  return config;
}

std::optional<fs::path> out_dir(const Options& opt) {
  if (opt.out.empty()) return std::nullopt;
  return opt.out;
}

std::string tsv_line(const std::string& id, const std::string& text, const std::optional<Label>& label) {
  std::string clean = text;
  for (char& c : clean) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  std::string line = id + "\t" + clean;
  if (label) line += "\t" + std::string(to_string(*label));
  return line + "\n";
}

void cmd_preprocess(const Options& opt) {
  const auto config = config_from(opt);
  validate(config);
  check_inputs(config);
  const auto pre = load_preprocess_config(config.preprocess);
  fs::path dir = opt.out.empty() ? fs::path(".") : opt.out;
  auto dump = [&](const fs::path& path, Split split, const std::string& name) {
    const auto instances = prepare_instances(load_tsv(path, config.name, split), pre);
    std::string basic, semantic;
    for (const auto& i : instances) {
      basic += tsv_line(i.id, join_surfaces(i.basic), i.label);
      std::string joined;
      for (const auto& t : i.semantic) joined += (joined.empty() ? "" : " ") + t;
      semantic += tsv_line(i.id, joined, i.label);
    }
    spit(dir / (name + ".basic.tsv"), basic);
    spit(dir / (name + ".semantic.tsv"), semantic);
    std::printf("%s: %zu tweets\n", name.c_str(), instances.size());
  };
  for (std::size_t k = 0; k < config.train.size(); ++k) {
    dump(config.train[k].path, Split::train, config.train.size() == 1 ? "train" : "train_" + config.train[k].name);
  }
  if (config.dev) dump(*config.dev, Split::dev, "dev");
  if (config.test) dump(*config.test, Split::test, "test");
}

void cmd_augment(const Options& opt) {
  const auto config = config_from(opt);
  validate(config);
  check_inputs(config);
  const auto pre = load_preprocess_config(config.preprocess);
  const auto instances = prepare_training(config, pre);
  std::string out;
  for (const auto& i : instances) out += tsv_line(i.id, join_surfaces(i.basic), i.label);
  spit((opt.out.empty() ? fs::path(".") : opt.out) / "augmented_train.tsv", out);
  std::printf("augmented training set: %zu instances\n", instances.size());
}

void print_evaluation(const char* split, const Evaluation& e) {
  std::printf("== %s ==\n%s\n", split, format_report(e.report, e.confusion).c_str());
}

void cmd_train(const Options& opt) {
  const auto result = run_experiment(config_from(opt), out_dir(opt));
  std::printf("training instances: %zu, feature dim: %zu\n", result.train.size(), total_dim(result.layout));
  if (result.dev) print_evaluation("dev", *result.dev);
  if (result.test) print_evaluation("test", *result.test);
}

void cmd_eval(const Options& opt) {
  const SavedModel saved = load_saved_model(opt.model);
  const auto instances = prepare_instances(load_tsv(opt.input, "input", Split::dev), saved.preprocess);
  const auto evaluation = evaluate(saved.classifier, instances, saved.features);
  const auto text = format_report(evaluation.report, evaluation.confusion);
  std::fputs(text.c_str(), stdout);
  if (!opt.out.empty()) {
    spit(opt.out / "report.txt", text);
    spit(opt.out / "report.json", report_to_json(evaluation.report, evaluation.confusion));
  }
}

void cmd_ablate(const Options& opt) {
  std::vector<Removal> removals;
  if (opt.removals.empty()) {
    removals.assign(kAllRemovals.begin(), kAllRemovals.end());
  } else {
    for (const auto& r : opt.removals) removals.push_back(parse_removal(r));
  }
  const auto rows = run_ablation(config_from(opt), removals, out_dir(opt));
  std::fputs(format_ablation(rows).c_str(), stdout);
}

void cmd_grid(const Options& opt) {
  const auto axes = parse_grid(slurp(opt.grid));
  const auto result = grid_search(config_from(opt), axes, out_dir(opt));
  std::fputs(format_grid(result).c_str(), stdout);
}

void cmd_predict(const Options& opt) {
  const std::string output = predict_tsv(opt.model, slurp(opt.input));
  if (opt.output.empty()) {
    std::fputs(output.c_str(), stdout);
  } else {
    spit(opt.output, output);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tweet polarity classification experiments"};
  app.require_subcommand(1);
  Options opt;

  auto add_config = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--config", opt.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    if (with_out) sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "override the config seed");
  };

  auto* preprocess = app.add_subcommand("preprocess", "write basic and semantic token streams per split");
  add_config(preprocess);
  auto* augment = app.add_subcommand("augment", "write the augmented training corpus");
  add_config(augment);
  auto* train = app.add_subcommand("train", "run the full pipeline and persist the model");
  add_config(train);
  auto* eval = app.add_subcommand("eval", "evaluate a saved model on a labeled TSV");
  eval->add_option("--model", opt.model, "model directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--input", opt.input, "labeled TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", opt.out, "write report.txt and report.json here");
  auto* ablate = app.add_subcommand("ablate", "run the ablation table on the dev split");
  add_config(ablate);
  ablate->add_option("--only", opt.removals, "subset of removals (e.g. no-BoC)");
  auto* grid = app.add_subcommand("grid", "exhaustive grid search on the dev split");
  add_config(grid);
  grid->add_option("--grid", opt.grid, "grid JSON: {param: [values]}")->required()->check(CLI::ExistingFile);
  auto* predict = app.add_subcommand("predict", "label tweets with a saved model");
  predict->add_option("--model", opt.model, "model directory")->required()->check(CLI::ExistingDirectory);
  predict->add_option("--input", opt.input, "TSV of id, text")->required()->check(CLI::ExistingFile);
  predict->add_option("--output", opt.output, "output TSV (stdout when absent)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (preprocess->parsed()) cmd_preprocess(opt);
    else if (augment->parsed()) cmd_augment(opt);
    else if (train->parsed()) cmd_train(opt);
    else if (eval->parsed()) cmd_eval(opt);
    else if (ablate->parsed()) cmd_ablate(opt);
    else if (grid->parsed()) cmd_grid(opt);
    else if (predict->parsed()) cmd_predict(opt);
  } catch (const StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: [cli] %s\n", e.what());
    return 1;
  }
  return 0;
}
