#include "polarity/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "polarity/utf8.hpp"

namespace polarity {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Whitespace-separated fields of one line.
std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view content) : content_(content) {}

  // Next nonempty line; false at end of input.
  bool next(std::string_view& line) {
    while (pos_ < content_.size()) {
      auto end = content_.find('\n', pos_);
      if (end == std::string_view::npos) end = content_.size();
      line = content_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      if (!fields_of(line).empty()) return true;
    }
    return false;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view content_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

double to_double(std::string_view text, std::size_t line_no) {
  double value = 0.0;
  const char* first = text.data();
  if (!text.empty() && text.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw EmbeddingError("line " + std::to_string(line_no) + ": non-numeric component '" +
                         std::string(text) + "'");
  }
  return value;
}

std::uint64_t to_uint(std::string_view text, std::size_t line_no, const char* what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw EmbeddingError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                         std::string(text) + "'");
  }
  return value;
}

Eigen::VectorXd parse_vector(std::span<const std::string_view> components, std::size_t dim,
                             std::size_t line_no) {
  if (components.size() != dim) {
    throw EmbeddingError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                         " components, got " + std::to_string(components.size()));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = to_double(components[i], line_no);
  return v;
}

SubwordTable parse_subwords(std::string_view content, std::size_t dim) {
  LineReader reader(content);
  std::string_view line;
  if (!reader.next(line)) throw EmbeddingError("subword file: missing header");
  const auto header = fields_of(line);
  if (header.size() != 3) throw EmbeddingError("subword file: header must be `min_n max_n bucket_count`");
  SubwordTable table;
  table.min_n = to_uint(header[0], reader.line_no(), "min_n");
  table.max_n = to_uint(header[1], reader.line_no(), "max_n");
  const auto buckets = to_uint(header[2], reader.line_no(), "bucket_count");
  if (buckets == 0 || buckets > 0xFFFFFFFFull) throw EmbeddingError("subword file: bucket_count out of range");
  if (table.min_n == 0 || table.min_n > table.max_n) throw EmbeddingError("subword file: bad n-gram range");
  table.bucket_count = static_cast<std::uint32_t>(buckets);
  while (reader.next(line)) {
    const auto fields = fields_of(line);
    const auto index = to_uint(fields[0], reader.line_no(), "bucket index");
    if (index >= table.bucket_count) {
      throw EmbeddingError("line " + std::to_string(reader.line_no()) + ": bucket index out of range");
    }
    table.buckets[static_cast<std::uint32_t>(index)] =
        parse_vector(std::span(fields).subspan(1), dim, reader.line_no());
  }
  return table;
}

}  // namespace

std::uint32_t fnv1a32(std::string_view bytes) {
  std::uint32_t h = 2166136261u;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  return h;
}

std::vector<std::string> subword_ngrams(std::string_view word, std::size_t min_n, std::size_t max_n) {
  const std::string wrapped = "<" + std::string(word) + ">";
  const auto bounds = utf8::boundaries(wrapped);
  const std::size_t length = bounds.size() - 1;
  std::vector<std::string> out;
  for (std::size_t start = 0; start < length; ++start) {
    for (std::size_t n = min_n; n <= max_n && start + n <= length; ++n) {
      out.push_back(wrapped.substr(bounds[start], bounds[start + n] - bounds[start]));
    }
  }
  return out;
}

Eigen::VectorXd EmbeddingTable::word_vector(std::string_view word) const {
  const auto d = static_cast<Eigen::Index>(dim);
  if (const auto it = words.find(std::string(word)); it != words.end()) return it->second;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  if (!subword) return sum;
  const auto ngrams = subword_ngrams(word, subword->min_n, subword->max_n);
  if (ngrams.empty()) return sum;
  for (const auto& ngram : ngrams) {
    const auto bucket = fnv1a32(ngram) % subword->bucket_count;
    if (const auto it = subword->buckets.find(bucket); it != subword->buckets.end()) sum += it->second;
  }
  return sum / static_cast<double>(ngrams.size());
}

EmbeddingTable parse_embeddings(std::string_view content, std::optional<std::string_view> subword_content) {
  LineReader reader(content);
  std::string_view line;
  if (!reader.next(line)) throw EmbeddingError("embedding file: missing header");
  const auto header = fields_of(line);
  if (header.size() != 2) throw EmbeddingError("embedding file: header must be `vocab_size dim`");
  const auto vocab_size = to_uint(header[0], reader.line_no(), "vocab_size");
  EmbeddingTable table;
  table.dim = to_uint(header[1], reader.line_no(), "dim");
  if (table.dim == 0) throw EmbeddingError("embedding file: dim must be positive");
  std::size_t rows = 0;
  while (reader.next(line)) {
    const auto fields = fields_of(line);
    if (rows == vocab_size) {
      throw EmbeddingError("embedding file: more than the declared " + std::to_string(vocab_size) + " words");
    }
    table.words[std::string(fields[0])] = parse_vector(std::span(fields).subspan(1), table.dim, reader.line_no());
    ++rows;
  }
  if (rows != vocab_size) {
    throw EmbeddingError("embedding file: declared " + std::to_string(vocab_size) + " words, found " +
                         std::to_string(rows));
  }
  if (subword_content) table.subword = parse_subwords(*subword_content, table.dim);
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const std::optional<std::filesystem::path>& subword_path) {
  const std::string content = read_file(path);
  if (!subword_path) return parse_embeddings(content);
  const std::string subwords = read_file(*subword_path);
  return parse_embeddings(content, subwords);
}

void UnigramModel::add(std::string token, std::uint64_t count) {
  counts_[std::move(token)] += count;
  total_ += count;
}

std::uint64_t UnigramModel::count(std::string_view token) const {
  const auto it = counts_.find(std::string(token));
  return it == counts_.end() ? 0 : it->second;
}

double UnigramModel::probability(std::string_view token) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(count(token)) / static_cast<double>(total_);
}

UnigramModel parse_unigram_counts(std::string_view content) {
  UnigramModel model;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw EmbeddingError("unigram counts line " + std::to_string(line_no) + ": expected token<TAB>count");
    }
    const auto count = to_uint(line.substr(tab + 1), line_no, "count");
    if (count == 0) throw EmbeddingError("unigram counts line " + std::to_string(line_no) + ": count must be positive");
    model.add(std::string(line.substr(0, tab)), count);
  }
  return model;
}

UnigramModel load_unigram_counts(const std::filesystem::path& path) {
  return parse_unigram_counts(read_file(path));
}

void SifConfig::validate() const {
  if (!(a > 0.0)) throw EmbeddingError("SIF smoothing a must be > 0");
}

Eigen::VectorXd sif_embed(std::span<const std::string> tokens, const EmbeddingTable& table,
                          const UnigramModel& unigrams, const SifConfig& config) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dim));
  if (tokens.empty()) return sum;
  for (const auto& token : tokens) {
    sum += sif_weight(config.a, unigrams.probability(token)) * table.word_vector(token);
  }
  return sum / static_cast<double>(tokens.size());
}

}  // namespace polarity
