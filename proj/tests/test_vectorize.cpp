#include <doctest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "polarity/vectorize.hpp"

using namespace polarity;

namespace {

std::vector<std::string> words(std::initializer_list<const char*> list) { return {list.begin(), list.end()}; }

std::vector<TermCounts> toy_corpus() {
  return {extract_word_ngrams(words({"a", "b"}), 1), extract_word_ngrams(words({"a", "c"}), 1),
          extract_word_ngrams(words({"a", "b", "d", "b"}), 1)};
}

}  // namespace

TEST_CASE("word n-grams cover every contiguous run up to n_max") {
  const auto counts = extract_word_ngrams(words({"no", "me", "gusta", "no"}), 2);
  CHECK(counts.at("no") == 2);
  CHECK(counts.at("no me") == 1);
  CHECK(counts.at("gusta no") == 1);
  CHECK(counts.size() == 6);
  std::size_t total = 0;
  for (const auto& [term, n] : extract_word_ngrams(words({"a", "b", "c", "d", "e"}), 5)) total += n;
  CHECK(total == 5 + 4 + 3 + 2 + 1);
}

TEST_CASE("character n-grams count code points, not bytes") {
  const auto counts = extract_char_ngrams("ñá", 2);
  CHECK(counts.size() == 3);
  CHECK(counts.at("ñ") == 1);
  CHECK(counts.at("ñá") == 1);
  const auto spaced = extract_char_ngrams("ab a", 3);
  CHECK(spaced.at("a") == 2);
  CHECK(spaced.at("b a") == 1);
}

TEST_CASE("smooth idf on a three-document corpus") {
  const auto vocab = Vocabulary::fit(toy_corpus(), {1, false, true});
  CHECK(vocab.size() == 4);
  CHECK(vocab.doc_count() == 3);
  CHECK(vocab.term(0) == "a");
  CHECK(vocab.idf(*vocab.index("a")) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vocab.idf(*vocab.index("b")) == doctest::Approx(oracle::smooth_idf(3, 2)).epsilon(1e-12));
  CHECK(std::abs(vocab.idf(*vocab.index("c")) - 1.6931) <= 1e-4);
  CHECK(vocab.idf(*vocab.index("d")) == doctest::Approx(oracle::smooth_idf(3, 1)).epsilon(1e-12));
  CHECK_FALSE(vocab.index("z").has_value());
}

TEST_CASE("idf matches a brute-force document-frequency count on random corpora") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::string>> docs(1 + rng() % 15);
    for (auto& d : docs)
      for (int k = 0, n = int(rng() % 8); k < n; ++k) d.push_back(std::string(1, char('a' + rng() % 6)));
    std::vector<TermCounts> corpus;
    for (const auto& d : docs) corpus.push_back(extract_word_ngrams(d, 2));
    const auto vocab = Vocabulary::fit(corpus, {2, false, true});
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const auto& term = vocab.term(i);
      std::size_t df = 0;
      for (const auto& d : docs) {
        for (std::size_t s = 0; s < d.size(); ++s) {
          if (d[s] == term || (s + 1 < d.size() && d[s] + " " + d[s + 1] == term)) {
            ++df;
            break;
          }
        }
      }
      CHECK(vocab.idf(i) == doctest::Approx(oracle::smooth_idf(double(docs.size()), double(df))).epsilon(1e-12));
      if (i > 0) CHECK(vocab.term(i - 1) < term);
    }
  }
}

TEST_CASE("tf-idf vectors are unit length and canonical") {
  const auto corpus = toy_corpus();
  const auto vocab = Vocabulary::fit(corpus, {1, false, true});
  const auto v = vocab.transform(corpus[2]);
  CHECK(is_canonical(v));
  CHECK(std::abs(v.norm() - 1.0) <= 1e-9);
  const double b = 2 * oracle::smooth_idf(3, 2), a = 1.0, d = oracle::smooth_idf(3, 1);
  const double norm = std::sqrt(a * a + b * b + d * d);
  CHECK(v.coeff(long(*vocab.index("b"))) == doctest::Approx(b / norm));

  CHECK(vocab.transform(extract_word_ngrams(words({"zz"}), 1)).nonZeros() == 0);
}

TEST_CASE("binary and raw-count modes") {
  const auto corpus = toy_corpus();
  const auto counts = Vocabulary::fit(corpus, {1, false, false});
  const auto raw = counts.transform(corpus[2]);
  CHECK(raw.coeff(long(*counts.index("b"))) == 2.0);
  const auto binary = Vocabulary::fit(corpus, {1, true, false});
  CHECK(binary.transform(corpus[2]).coeff(long(*binary.index("b"))) == 1.0);
}

TEST_CASE("vocabulary round-trips through its TSV form") {
  TermCounts odd;
  odd["tab\there"] = 1;
  odd["new\nline"] = 1;
  odd["back\\slash"] = 1;
  auto corpus = toy_corpus();
  corpus.push_back(odd);
  const auto vocab = Vocabulary::fit(corpus, {3, true, true});
  const auto restored = Vocabulary::from_tsv(vocab.to_tsv());
  CHECK(restored == vocab);
  CHECK(restored.index("tab\there").has_value());

  const auto path = std::filesystem::temp_directory_path() / "polarity_vocab.tsv";
  vocab.save(path);
  CHECK(Vocabulary::load(path) == vocab);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(Vocabulary::from_tsv("garbage"), FeatureError);
}

TEST_CASE("builder and fit agree") {
  const auto corpus = toy_corpus();
  VocabularyBuilder builder({1, false, true});
  for (const auto& doc : corpus) builder.add(doc);
  CHECK(builder.build() == Vocabulary::fit(corpus, {1, false, true}));
}

TEST_CASE("concatenation shifts indices by block") {
  SparseVector a(3);
  a.insert(1) = 2.0;
  Eigen::VectorXd dense(2);
  dense << 0.0, -1.5;
  SparseVector c(4);
  c.insert(0) = 1.0;
  c.insert(3) = 4.0;
  const std::vector<FeatureBlock> blocks = {a, dense, c};
  const auto v = concat_features(blocks);
  CHECK(v.size() == 9);
  CHECK(v.nonZeros() == 4);
  CHECK(v.coeff(1) == 2.0);
  CHECK(v.coeff(4) == -1.5);
  CHECK(v.coeff(5) == 1.0);
  CHECK(v.coeff(8) == 4.0);
  CHECK(is_canonical(v));

  const FeatureLayout layout = {{"bow", 3}, {"embedding", 2}, {"boc", 4}};
  CHECK(concat_features(blocks, layout).isApprox(v));
  const FeatureLayout wrong = {{"bow", 3}, {"embedding", 3}, {"boc", 4}};
  CHECK_THROWS_AS(concat_features(blocks, wrong), FeatureError);
  CHECK(total_dim(layout) == 9);
}

TEST_CASE("stack_rows builds a row-major matrix") {
  SparseVector r0(3), r1(3);
  r0.insert(2) = 1.0;
  r1.insert(0) = 5.0;
  const std::vector<SparseVector> rows = {r0, r1};
  const auto m = stack_rows(rows, 3);
  CHECK(m.rows() == 2);
  CHECK(m.coeff(0, 2) == 1.0);
  CHECK(m.coeff(1, 0) == 5.0);
  CHECK(m.nonZeros() == 2);
}
