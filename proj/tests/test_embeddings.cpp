#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "polarity/embeddings.hpp"

using namespace polarity;

namespace {

EmbeddingTable small_table() {
  return parse_embeddings("3 2\nbueno 1 0\nmalo 0 1\ncasa 0.5 0.5\n");
}

}  // namespace

TEST_CASE("word2vec text format is parsed with line-numbered errors") {
  const auto table = small_table();
  CHECK(table.dim == 2);
  CHECK(table.words.size() == 3);
  CHECK(table.word_vector("malo").isApprox(Eigen::Vector2d(0, 1)));
  CHECK(table.word_vector("desconocido").isZero(0));
  CHECK_THROWS_AS(parse_embeddings("2 2\nbueno 1 0\n"), EmbeddingError);
  CHECK_THROWS_WITH_AS(parse_embeddings("1 2\nbueno 1 x\n"), doctest::Contains("line 2"), EmbeddingError);
  CHECK_THROWS_AS(parse_embeddings("1 2\nbueno 1 0 3\n"), EmbeddingError);
}

TEST_CASE("fnv1a32 matches published vectors") {
  CHECK(fnv1a32("") == 0x811c9dc5u);
  CHECK(fnv1a32("a") == 0xe40c292cu);
  CHECK(fnv1a32("foobar") == 0xbf9cf968u);
}

TEST_CASE("subword n-grams include the boundary markers") {
  auto grams = subword_ngrams("sí", 3, 4);
  std::sort(grams.begin(), grams.end());
  std::vector<std::string> expected = {"<sí", "sí>", "<sí>"};
  std::sort(expected.begin(), expected.end());
  CHECK(grams == expected);
  CHECK(subword_ngrams("a", 5, 6).empty());
}

TEST_CASE("out-of-vocabulary words average their subword buckets") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal;
  SubwordTable sub;
  sub.min_n = 2;
  sub.max_n = 4;
  sub.bucket_count = 997;
  for (std::uint32_t b = 0; b < sub.bucket_count; b += 2) {
    sub.buckets[b] = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
  }
  EmbeddingTable table;
  table.dim = 3;
  table.words["hola"] = Eigen::Vector3d(1, 2, 3);
  table.subword = sub;

  CHECK(table.word_vector("hola") == Eigen::Vector3d(1, 2, 3));

  const std::string alphabet[] = {"a", "b", "ñ", "é", "z", "😀", "o"};
  for (int trial = 0; trial < 20; ++trial) {
    std::string word;
    for (int k = 0, n = 1 + int(rng() % 7); k < n; ++k) word += alphabet[rng() % 7];
    if (table.words.contains(word)) continue;
    Eigen::Vector3d expected = Eigen::Vector3d::Zero();
    const auto grams = oracle::char_ngrams(word, sub.min_n, sub.max_n);
    for (const auto& g : grams) {
      const auto it = sub.buckets.find(oracle::fnv1a32(g) % sub.bucket_count);
      if (it != sub.buckets.end()) expected += it->second;
    }
    if (!grams.empty()) expected /= double(grams.size());
    CHECK((table.word_vector(word) - expected).norm() <= 1e-12);
  }
}

TEST_CASE("subword sidecar parsing") {
  const std::string vectors = "1 2\nbueno 1 0\n";
  const std::string subwords = "3 3 10\n" + std::to_string(fnv1a32("<ma") % 10) + " 2 4\n";
  const auto table = parse_embeddings(vectors, subwords);
  REQUIRE(table.subword.has_value());
  CHECK(table.subword->bucket_count == 10);
  // "<ma", "ma>": only the first bucket is populated (unless they collide).
  const auto v = table.word_vector("ma");
  if (fnv1a32("<ma") % 10 != fnv1a32("ma>") % 10) CHECK(v.isApprox(Eigen::Vector2d(1, 2)));
  CHECK_THROWS_AS(parse_embeddings(vectors, std::string_view("3 3 10\n12 1 1\n")), EmbeddingError);
}

TEST_CASE("unigram counts") {
  const auto model = parse_unigram_counts("de\t6\nbueno\t2\nde\t2\n");
  CHECK(model.count("de") == 8);
  CHECK(model.total() == 10);
  CHECK(model.probability("bueno") == doctest::Approx(0.2));
  CHECK(model.probability("nada") == 0.0);
  CHECK(UnigramModel().probability("x") == 0.0);
  CHECK_THROWS_AS(parse_unigram_counts("de\t0\n"), EmbeddingError);
  CHECK_THROWS_AS(parse_unigram_counts("de 3\n"), EmbeddingError);
}

TEST_CASE("SIF weights") {
  CHECK(sif_weight(0.1, 0.0) == 1.0);
  CHECK(sif_weight(0.1, 0.1) == 0.5);
  CHECK(sif_weight(1e-3, 1e-3) == 0.5);
  CHECK(sif_weight(0.1f, 0.3f) == doctest::Approx(0.25));
}

TEST_CASE("SIF embedding: weighted mean, huge a gives the plain mean, empty gives zero") {
  const auto table = small_table();
  const auto unigrams = parse_unigram_counts("bueno\t1\nmalo\t3\n");
  const std::vector<std::string> tokens = {"bueno", "malo", "casa", "nuevo"};

  SifConfig config;
  config.a = 0.25;
  const auto v = sif_embed(tokens, table, unigrams, config);
  Eigen::Vector2d expected = (0.25 / 0.5) * Eigen::Vector2d(1, 0) + (0.25 / 1.0) * Eigen::Vector2d(0, 1) +
                             1.0 * Eigen::Vector2d(0.5, 0.5);
  expected /= 4.0;
  CHECK((v - expected).norm() <= 1e-12);

  config.a = 1e9;
  const Eigen::Vector2d mean = (Eigen::Vector2d(1, 0) + Eigen::Vector2d(0, 1) + Eigen::Vector2d(0.5, 0.5)) / 4.0;
  CHECK((sif_embed(tokens, table, unigrams, config) - mean).norm() <= 1e-6 * mean.norm());

  CHECK(sif_embed({}, table, unigrams, config).isZero(0));
  CHECK(sif_embed({}, table, unigrams, config).size() == 2);

  config.a = 0.0;
  CHECK_THROWS_AS(config.validate(), EmbeddingError);
}

TEST_CASE("common component matches power iteration and is projected out") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd a(5, 3);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    const Eigen::VectorXd u = common_component(a);
    Eigen::VectorXd ref = oracle::leading_right_vector(a);
    if (ref.dot(u) < 0) ref = -ref;
    CHECK((u - ref).norm() <= 1e-6);
    CHECK(u.norm() == doctest::Approx(1.0));

    const Eigen::MatrixXd out = remove_common_component(a);
    CHECK((out * u).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((out * ref).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("rank-one rows vanish; degenerate inputs") {
  const Eigen::Vector3d dir(1, -2, 0.5);
  Eigen::MatrixXd rank1(4, 3);
  const double scales[] = {1.0, -3.0, 0.5, 2.0};
  for (int i = 0; i < 4; ++i) rank1.row(i) = scales[i] * dir.transpose();
  CHECK(remove_common_component(rank1).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK(common_component(Eigen::MatrixXd::Zero(3, 2)).isZero(0));
  CHECK(remove_common_component(Eigen::MatrixXd::Zero(3, 2)).isZero(0));
  CHECK_THROWS_AS(remove_common_component(Eigen::MatrixXd::Ones(1, 2)), EmbeddingError);

  const Eigen::VectorXd u = common_component(rank1);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u[i] != 0) {
      CHECK(u[i] > 0);
      break;
    }
  }
}
