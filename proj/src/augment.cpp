#include "polarity/augment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polarity/random.hpp"

namespace polarity {

using nlohmann::json;

namespace {

std::vector<std::string> split_spaces(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto space = text.find(' ', start);
    const auto end = space == std::string::npos ? text.size() : space;
    if (end > start) out.push_back(text.substr(start, end - start));
    if (space == std::string::npos) break;
    start = space + 1;
  }
  return out;
}

std::string join_spaces(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

std::string lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

}  // namespace

void CrossoverConfig::validate() const {
  if (factor < 1) throw AugmentError("crossover factor must be >= 1");
}

std::vector<CrossoverParents> plan_crossover(std::span<const Label> labels,
                                             const CrossoverConfig& config) {
  config.validate();
  std::vector<CrossoverParents> plan;
  if (config.factor == 1) return plan;

  std::array<std::vector<std::size_t>, kNumLabels> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[index_of(labels[i])].push_back(i);

  Rng rng(config.seed);
  for (Label label : kAllLabels) {
    const auto& group = members[index_of(label)];
    const std::size_t n = group.size();
    const std::size_t wanted = (config.factor - 1) * n;
    if (n == 0) continue;
    if (n == 1) {
      warn("crossover: class " + std::string(to_string(label)) +
           " has a single instance; padding by duplication");
      for (std::size_t k = 0; k < wanted; ++k) plan.push_back({group[0], group[0], label});
      continue;
    }
    for (std::size_t k = 0; k < wanted; ++k) {
      const auto i = uniform_index(rng, n);
      auto j = uniform_index(rng, n - 1);
      if (j >= i) ++j;
      plan.push_back({group[i], group[j], label});
    }
  }
  return plan;
}

Dataset crossover_augment(const Dataset& dataset, const CrossoverConfig& config) {
  std::vector<Label> labels;
  labels.reserve(dataset.size());
  for (const auto& tweet : dataset.tweets) {
    if (!tweet.label) throw AugmentError("crossover: unlabeled tweet '" + tweet.id + "'");
    labels.push_back(*tweet.label);
  }
  const auto plan = plan_crossover(labels, config);

  Dataset out = dataset;
  out.tweets.reserve(dataset.size() * config.factor);
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(dataset.size());
  for (const auto& tweet : dataset.tweets) tokens.push_back(split_spaces(tweet.text));

  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto& p = plan[k];
    const auto child = crossover_pair<std::string>(tokens[p.first], tokens[p.second]);
    out.tweets.push_back({dataset.tweets[p.first].id + "+" + dataset.tweets[p.second].id + "#x" +
                              std::to_string(k),
                          join_spaces(child), p.label});
  }
  return out;
}

void TranslationConfig::validate() const {
  if (pivots.empty()) throw AugmentError("translation: pivot list is empty");
  std::set<std::string> seen;
  for (const auto& pivot : pivots) {
    const auto key = lower_ascii(pivot);
    if (pivot.empty()) throw AugmentError("translation: empty pivot code");
    if (!seen.insert(key).second) throw AugmentError("translation: duplicate pivot '" + pivot + "'");
    if (key == lower_ascii(source)) throw AugmentError("translation: source language used as pivot");
  }
}

FixtureTranslator FixtureTranslator::parse(std::string_view text) {
  FixtureTranslator translator;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw AugmentError(std::string("translation fixture: ") + e.what());
  }
  const json tables = doc.is_array() ? doc : json::array({doc});
  for (const auto& table : tables) {
    if (!table.contains("src_lang") || !table.contains("dst_lang") || !table.contains("entries")) {
      throw AugmentError("translation fixture: tables need src_lang, dst_lang and entries");
    }
    const auto src = lower_ascii(table.at("src_lang").get<std::string>());
    const auto dst = lower_ascii(table.at("dst_lang").get<std::string>());
    for (const auto& [text_key, translation] : table.at("entries").items()) {
      translator.add(src, dst, text_key, translation.get<std::string>());
    }
  }
  return translator;
}

FixtureTranslator FixtureTranslator::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AugmentError("cannot open translation fixture " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void FixtureTranslator::add(const std::string& src, const std::string& dst, std::string text,
                            std::string translation) {
  tables_[{lower_ascii(src), lower_ascii(dst)}][std::move(text)] = std::move(translation);
}

std::string FixtureTranslator::translate(const std::string& text, const std::string& src_lang,
                                         const std::string& dst_lang) {
  const auto table = tables_.find({lower_ascii(src_lang), lower_ascii(dst_lang)});
  if (table == tables_.end()) return text;
  const auto entry = table->second.find(text);
  return entry == table->second.end() ? text : entry->second;
}

std::string RemoteTranslator::translate(const std::string&, const std::string& src_lang,
                                        const std::string& dst_lang) {
  throw AugmentError("remote translation (" + src_lang + "->" + dst_lang + " via " + endpoint_ +
                     ") is not available in this build; use a translation fixture");
}

TranslationCache::TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // created on first insert
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto record = json::parse(line);
      entries_[{record.at("text").get<std::string>(), record.at("pivot").get<std::string>()}] =
          record.at("result").get<std::string>();
    } catch (const json::exception& e) {
      throw AugmentError(path_.string() + ":" + std::to_string(line_no) + ": bad cache record: " + e.what());
    }
  }
}

std::optional<std::string> TranslationCache::find(const std::string& text, const std::string& pivot) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find({text, pivot});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::insert(const std::string& text, const std::string& pivot, const std::string& result) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(std::make_pair(text, pivot), result).second) return;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << json{{"text", text}, {"pivot", pivot}, {"result", result}}.dump() << '\n';
  out.flush();
  if (!out) throw AugmentError("cannot append to translation cache " + path_.string());
}

std::size_t TranslationCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string two_way_translate(TranslatorClient& client, TranslationCache& cache, const std::string& text,
                              const std::string& pivot, const TranslationConfig& config) {
  if (std::find(config.pivots.begin(), config.pivots.end(), pivot) == config.pivots.end()) {
    throw AugmentError("translation: '" + pivot + "' is not a configured pivot");
  }
  if (auto hit = cache.find(text, pivot)) return *hit;
  const auto forward = client.translate(text, config.source, pivot);
  auto back = client.translate(forward, pivot, config.source);
  cache.insert(text, pivot, back);
  return back;
}

Dataset translation_augment(const Dataset& dataset, TranslatorClient& client, TranslationCache& cache,
                            const TranslationConfig& config) {
  config.validate();
  Dataset out = dataset;
  out.tweets.reserve(dataset.size() * (1 + config.pivots.size()));
  for (const auto& pivot : config.pivots) {
    for (const auto& tweet : dataset.tweets) {
      std::string text;
      try {
        text = two_way_translate(client, cache, tweet.text, pivot, config);
      } catch (const Error& e) {
        throw AugmentError("translation via '" + pivot + "' failed for tweet '" + tweet.id + "': " + e.what());
      }
      out.tweets.push_back({tweet.id + "~" + pivot, std::move(text), tweet.label});
    }
  }
  return out;
}

}  // namespace polarity
