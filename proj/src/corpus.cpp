#include "polarity/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace polarity {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw CorpusError("read failure on " + path.string());
  return buffer.str();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "dev") return Split::dev;
  if (text == "test") return Split::test;
  throw CorpusError("unknown split '" + std::string(text) + "'");
}

Dataset parse_tsv(std::string_view content, std::string name, Split split) {
  Dataset dataset{std::move(name), split, {}};
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto where = [&] { return dataset.name + ":" + std::to_string(line_no) + ": "; };
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw CorpusError(where() + "expected id<TAB>text[<TAB>label], got " +
                        std::to_string(fields.size()) + " fields");
    }
    Tweet tweet;
    tweet.id = std::string(fields[0]);
    tweet.text = std::string(fields[1]);
    if (tweet.id.empty()) throw CorpusError(where() + "empty id");
    if (fields.size() == 3) {
      tweet.label = parse_label(fields[2]);
      if (!tweet.label) throw CorpusError(where() + "unknown label '" + std::string(fields[2]) + "'");
    } else if (split != Split::test) {
      throw CorpusError(where() + "missing label in " + std::string(to_string(split)) + " split");
    }
    if (!seen.insert(tweet.id).second) throw CorpusError(where() + "duplicate id '" + tweet.id + "'");
    dataset.tweets.push_back(std::move(tweet));
  }
  return dataset;
}

Dataset load_tsv(const std::filesystem::path& path, std::string name, Split split) {
  return parse_tsv(read_file(path), std::move(name), split);
}

std::string to_tsv(const Dataset& dataset) {
  std::string out;
  for (const auto& tweet : dataset.tweets) {
    out += tweet.id;
    out += '\t';
    out += tweet.text;
    if (tweet.label) {
      out += '\t';
      out += to_string(*tweet.label);
    }
    out += '\n';
  }
  return out;
}

void write_tsv(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + path.string());
  out << to_tsv(dataset);
  if (!out) throw CorpusError("write failure on " + path.string());
}

LabelCounts label_distribution(const Dataset& dataset) {
  LabelCounts counts{};
  for (const auto& tweet : dataset.tweets) {
    if (!tweet.label) throw CorpusError("unlabeled tweet '" + tweet.id + "' in " + dataset.name);
    ++counts[index_of(*tweet.label)];
  }
  return counts;
}

void require_labels(const Dataset& dataset) {
  for (const auto& tweet : dataset.tweets) {
    if (!tweet.label) throw CorpusError("unlabeled tweet '" + tweet.id + "' in " + dataset.name);
  }
}

Dataset merge(std::span<const Dataset> datasets) {
  Dataset out;
  if (datasets.empty()) return out;
  out.split = datasets.front().split;
  std::unordered_set<std::string> names;
  std::unordered_set<std::string> ids;
  for (const auto& dataset : datasets) {
    if (!names.insert(dataset.name).second) {
      throw CorpusError("merge: dataset name '" + dataset.name + "' given twice");
    }
    if (!out.name.empty()) out.name += '+';
    out.name += dataset.name;
    for (const auto& tweet : dataset.tweets) {
      Tweet copy = tweet;
      copy.id = dataset.name + "/" + tweet.id;
      if (!ids.insert(copy.id).second) throw CorpusError("merge: id collision on '" + copy.id + "'");
      out.tweets.push_back(std::move(copy));
    }
  }
  return out;
}

}  // namespace polarity
