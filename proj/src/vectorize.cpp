#include "polarity/vectorize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polarity/utf8.hpp"

namespace polarity {

namespace {

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += s[i];
    }
  }
  return out;
}

std::string format_double(double value) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FeatureError("vocabulary: bad number '" + std::string(text) + "'");
  }
  return value;
}

std::size_t parse_size(std::string_view text) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FeatureError("vocabulary: bad integer '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto at = line.find(sep, start);
    if (at == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, at - start));
    start = at + 1;
  }
}

}  // namespace

TermCounts extract_word_ngrams(std::span<const std::string> tokens, std::size_t n_max) {
  TermCounts counts;
  for (std::size_t start = 0; start < tokens.size(); ++start) {
    std::string term;
    for (std::size_t n = 1; n <= n_max && start + n <= tokens.size(); ++n) {
      if (n > 1) term += ' ';
      term += tokens[start + n - 1];
      ++counts[term];
    }
  }
  return counts;
}

TermCounts extract_char_ngrams(std::string_view raw_text, std::size_t n_max) {
  TermCounts counts;
  const auto bounds = utf8::boundaries(raw_text);
  const std::size_t length = bounds.size() - 1;
  for (std::size_t start = 0; start < length; ++start) {
    for (std::size_t n = 1; n <= n_max && start + n <= length; ++n) {
      ++counts[std::string(raw_text.substr(bounds[start], bounds[start + n] - bounds[start]))];
    }
  }
  return counts;
}

void VocabularyBuilder::add(const TermCounts& counts) {
  ++doc_count_;
  for (const auto& [term, count] : counts) {
    if (count > 0) ++document_frequency_[term];
  }
}

Vocabulary VocabularyBuilder::build() const {
  if (doc_count_ == 0) throw FeatureError("cannot fit a vocabulary on an empty corpus");
  Vocabulary vocab;
  vocab.config_ = config_;
  vocab.doc_count_ = doc_count_;
  vocab.terms_.reserve(document_frequency_.size());
  for (const auto& entry : document_frequency_) vocab.terms_.push_back(entry.first);
  std::sort(vocab.terms_.begin(), vocab.terms_.end());
  vocab.idf_.resize(static_cast<Eigen::Index>(vocab.terms_.size()));
  vocab.lookup_.reserve(vocab.terms_.size());
  const double docs = static_cast<double>(doc_count_);
  for (std::size_t i = 0; i < vocab.terms_.size(); ++i) {
    const double df = static_cast<double>(document_frequency_.at(vocab.terms_[i]));
    vocab.idf_[static_cast<Eigen::Index>(i)] = std::log((1.0 + docs) / (1.0 + df)) + 1.0;
    vocab.lookup_.emplace(vocab.terms_[i], i);
  }
  return vocab;
}

Vocabulary Vocabulary::fit(std::span<const TermCounts> corpus, const NgramConfig& config) {
  VocabularyBuilder builder(config);
  for (const auto& doc : corpus) builder.add(doc);
  return builder.build();
}

std::optional<std::size_t> Vocabulary::index(std::string_view term) const {
  const auto it = lookup_.find(std::string(term));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

SparseVector Vocabulary::transform(const TermCounts& counts) const {
  std::vector<std::pair<std::size_t, double>> entries;
  entries.reserve(counts.size());
  for (const auto& [term, count] : counts) {
    if (count == 0) continue;
    const auto it = lookup_.find(term);
    if (it == lookup_.end()) continue;
    double value = config_.binarize ? 1.0 : static_cast<double>(count);
    if (config_.tfidf) value *= idf_[static_cast<Eigen::Index>(it->second)];
    entries.emplace_back(it->second, value);
  }
  std::sort(entries.begin(), entries.end());

  if (config_.tfidf) {
    double norm = 0.0;
    for (const auto& e : entries) norm += e.second * e.second;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (auto& e : entries) e.second /= norm;
    }
  }

  SparseVector out(static_cast<Eigen::Index>(size()));
  out.reserve(static_cast<Eigen::Index>(entries.size()));
  for (const auto& [index, value] : entries) {
    if (value != 0.0) out.insertBack(static_cast<Eigen::Index>(index)) = value;
  }
  return out;
}

SparseVector transform(const TermCounts& counts, const Vocabulary& vocab) {
  return vocab.transform(counts);
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  return terms_ == other.terms_ && doc_count_ == other.doc_count_ && config_ == other.config_ &&
         idf_.size() == other.idf_.size() && idf_ == other.idf_;
}

std::string Vocabulary::to_tsv() const {
  std::string out = "#vocabulary\tdoc_count=" + std::to_string(doc_count_) +
                    "\tn_max=" + std::to_string(config_.n_max) +
                    "\tbinarize=" + (config_.binarize ? "1" : "0") +
                    "\ttfidf=" + (config_.tfidf ? "1" : "0") + "\n";
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    out += escape(terms_[i]);
    out += '\t';
    out += std::to_string(i);
    out += '\t';
    out += format_double(idf_[static_cast<Eigen::Index>(i)]);
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::from_tsv(std::string_view content) {
  Vocabulary vocab;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<double> idf;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!header_seen) {
      const auto fields = split(line, '\t');
      if (fields.empty() || fields[0] != "#vocabulary") throw FeatureError("vocabulary: missing header");
      for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto eq = fields[i].find('=');
        if (eq == std::string_view::npos) throw FeatureError("vocabulary: bad header field");
        const auto key = fields[i].substr(0, eq);
        const auto value = fields[i].substr(eq + 1);
        if (key == "doc_count") vocab.doc_count_ = parse_size(value);
        else if (key == "n_max") vocab.config_.n_max = parse_size(value);
        else if (key == "binarize") vocab.config_.binarize = value == "1";
        else if (key == "tfidf") vocab.config_.tfidf = value == "1";
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw FeatureError("vocabulary line " + std::to_string(line_no) + ": expected 3 fields");
    }
    if (parse_size(fields[1]) != vocab.terms_.size()) {
      throw FeatureError("vocabulary line " + std::to_string(line_no) + ": non-dense index");
    }
    vocab.lookup_.emplace(unescape(fields[0]), vocab.terms_.size());
    vocab.terms_.push_back(unescape(fields[0]));
    idf.push_back(parse_double(fields[2]));
  }
  if (!header_seen) throw FeatureError("vocabulary: missing header");
  vocab.idf_ = Eigen::Map<const Eigen::VectorXd>(idf.data(), static_cast<Eigen::Index>(idf.size()));
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FeatureError("cannot write " + path.string());
  out << to_tsv();
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FeatureError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_tsv(buffer.str());
}

bool is_canonical(const SparseVector& v) {
  const Eigen::Index nnz = v.nonZeros();
  for (Eigen::Index k = 0; k < nnz; ++k) {
    const auto index = v.innerIndexPtr()[k];
    if (index < 0 || index >= v.size()) return false;
    if (k > 0 && v.innerIndexPtr()[k - 1] >= index) return false;
    if (v.valuePtr()[k] == 0.0) return false;
  }
  return true;
}

std::size_t total_dim(const FeatureLayout& layout) {
  std::size_t dim = 0;
  for (const auto& block : layout) dim += block.dim;
  return dim;
}

std::size_t block_dim(const FeatureBlock& block) {
  return std::visit([](const auto& b) { return static_cast<std::size_t>(b.size()); }, block);
}

SparseVector concat_features(std::span<const FeatureBlock> blocks) {
  std::size_t dim = 0;
  Eigen::Index nnz = 0;
  for (const auto& block : blocks) {
    dim += block_dim(block);
    if (const auto* sparse = std::get_if<SparseVector>(&block)) nnz += sparse->nonZeros();
    else nnz += std::get<Eigen::VectorXd>(block).size();
  }
  SparseVector out(static_cast<Eigen::Index>(dim));
  out.reserve(nnz);
  Eigen::Index offset = 0;
  for (const auto& block : blocks) {
    if (const auto* sparse = std::get_if<SparseVector>(&block)) {
      for (SparseVector::InnerIterator it(*sparse); it; ++it) {
        if (it.value() != 0.0) out.insertBack(offset + it.index()) = it.value();
      }
      offset += sparse->size();
    } else {
      const auto& dense = std::get<Eigen::VectorXd>(block);
      for (Eigen::Index i = 0; i < dense.size(); ++i) {
        if (dense[i] != 0.0) out.insertBack(offset + i) = dense[i];
      }
      offset += dense.size();
    }
  }
  return out;
}

SparseVector concat_features(std::span<const FeatureBlock> blocks, const FeatureLayout& layout) {
  if (blocks.size() != layout.size()) {
    throw FeatureError("expected " + std::to_string(layout.size()) + " feature blocks, got " +
                       std::to_string(blocks.size()));
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (block_dim(blocks[i]) != layout[i].dim) {
      throw FeatureError("feature block '" + layout[i].name + "' has dim " +
                         std::to_string(block_dim(blocks[i])) + ", layout expects " +
                         std::to_string(layout[i].dim));
    }
  }
  return concat_features(blocks);
}

FeatureMatrix stack_rows(std::span<const SparseVector> rows, std::size_t dim) {
  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t nnz = 0;
  for (const auto& row : rows) nnz += static_cast<std::size_t>(row.nonZeros());
  triplets.reserve(nnz);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<std::size_t>(rows[r].size()) != dim) {
      throw FeatureError("row " + std::to_string(r) + " has dim " + std::to_string(rows[r].size()) +
                         ", expected " + std::to_string(dim));
    }
    for (SparseVector::InnerIterator it(rows[r]); it; ++it) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
    }
  }
  FeatureMatrix matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  return matrix;
}

}  // namespace polarity
