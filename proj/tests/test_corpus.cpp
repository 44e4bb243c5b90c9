#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "polarity/corpus.hpp"

using namespace polarity;

TEST_CASE("labels parse case-insensitively and print canonically") {
  CHECK(parse_label("p") == Label::P);
  CHECK(parse_label("Neu") == Label::NEU);
  CHECK(parse_label("NONE") == Label::NONE);
  CHECK_FALSE(parse_label("POS").has_value());
  CHECK_FALSE(parse_label("").has_value());
  for (Label l : kAllLabels) CHECK(parse_label(to_string(l)) == l);
}

TEST_CASE("parse_tsv reads labeled lines and skips blank ones") {
  const auto ds = parse_tsv("a\thola mundo\tP\n\nb\tqué mal\tn\r\n", "ES", Split::train);
  REQUIRE(ds.size() == 2);
  CHECK(ds.tweets[0] == Tweet{"a", "hola mundo", Label::P});
  CHECK(ds.tweets[1] == Tweet{"b", "qué mal", Label::N});
  CHECK(ds.name == "ES");
}

TEST_CASE("parse_tsv errors name the line") {
  CHECK_THROWS_WITH_AS(parse_tsv("a\tx\tP\nb\ty\tWAT\n", "ES", Split::train), doctest::Contains("ES:2"), CorpusError);
  CHECK_THROWS_AS(parse_tsv("a\tx\n", "ES", Split::train), CorpusError);
  CHECK_THROWS_AS(parse_tsv("a\tx\tP\na\ty\tN\n", "ES", Split::dev), CorpusError);
  CHECK_THROWS_AS(parse_tsv("only-one-field\n", "ES", Split::test), CorpusError);
}

TEST_CASE("test split may be unlabeled") {
  const auto ds = parse_tsv("a\tx\nb\ty\tNEU\n", "ES", Split::test);
  CHECK_FALSE(ds.tweets[0].label.has_value());
  CHECK(ds.tweets[1].label == Label::NEU);
  CHECK_THROWS_AS(require_labels(ds), CorpusError);
}

TEST_CASE("to_tsv round-trips through parse_tsv") {
  const auto ds = parse_tsv("x1\t¡Qué día! 😀\tp\nx2\tnada\tNONE\n", "ES", Split::dev);
  const auto text = to_tsv(ds);
  CHECK(text == "x1\t¡Qué día! 😀\tP\nx2\tnada\tNONE\n");
  const auto again = parse_tsv(text, "ES", Split::dev);
  CHECK(again.tweets == ds.tweets);

  const auto path = std::filesystem::temp_directory_path() / "polarity_corpus_roundtrip.tsv";
  write_tsv(path, ds);
  CHECK(load_tsv(path, "ES", Split::dev).tweets == ds.tweets);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_tsv(path, "ES", Split::dev), CorpusError);
}

TEST_CASE("label distribution and merge") {
  const auto es = parse_tsv("1\ta\tP\n2\tb\tN\n3\tc\tN\n", "ES", Split::train);
  const auto pe = parse_tsv("1\td\tNONE\n", "PE", Split::train);
  const auto dist = label_distribution(es);
  CHECK(dist == LabelCounts{1, 2, 0, 0});

  const std::vector<Dataset> parts = {es, pe};
  const auto merged = merge(parts);
  CHECK(merged.size() == 4);
  CHECK(merged.name == "ES+PE");
  CHECK(merged.tweets[0].id == "ES/1");
  CHECK(merged.tweets[3].id == "PE/1");
  CHECK(label_distribution(merged) == LabelCounts{1, 2, 0, 1});
}
