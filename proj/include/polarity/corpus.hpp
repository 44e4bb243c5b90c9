#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polarity/error.hpp"
#include "polarity/label.hpp"

namespace polarity {

class CorpusError : public Error {
 public:
  using Error::Error;
};

enum class Split { train, dev, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct Tweet {
  std::string id;
  std::string text;
  std::optional<Label> label;

  bool operator==(const Tweet&) const = default;
};

struct Dataset {
  std::string name;
  Split split = Split::train;
  std::vector<Tweet> tweets;

  std::size_t size() const { return tweets.size(); }
  bool empty() const { return tweets.empty(); }
};

// Reads `id<TAB>text[<TAB>label]` lines. Empty lines are skipped. Labels are
// required unless `split` is test.
Dataset load_tsv(const std::filesystem::path& path, std::string name,
                 Split split);
Dataset parse_tsv(std::string_view content, std::string name, Split split);

// Canonical serialization: one line per tweet, label written in upper case
// when present, LF terminated.
std::string to_tsv(const Dataset& dataset);
void write_tsv(const std::filesystem::path& path, const Dataset& dataset);

LabelCounts label_distribution(const Dataset& dataset);

// Concatenates datasets in argument order, prefixing ids with "<name>/".
Dataset merge(std::span<const Dataset> datasets);

// Throws CorpusError unless every tweet is labeled.
void require_labels(const Dataset& dataset);

}  // namespace polarity
