#include <doctest.h>

#include <random>

#include "polarity/preprocess.hpp"

using namespace polarity;

namespace {

std::vector<TokenKind> kinds(const Tokens& tokens) {
  std::vector<TokenKind> out;
  for (const auto& t : tokens) out.push_back(t.kind);
  return out;
}

PreprocessConfig spanish() {
  PreprocessConfig config;
  config.negation_words = default_negation_words();
  config.stopwords = {"el", "la", "de", "que", "no", "me"};
  config.lemma_table = {{"alegro", "alegrar"}, {"gustó", "gustar"}};
  return config;
}

}  // namespace

TEST_CASE("tokenizer separates the tweet-specific kinds") {
  const auto t = tokenize("@juan_p mira https://t.co/x1. escribe a ana.b@mail.com #viernes 😀 ¡¡Genial!! 2019");
  REQUIRE(t.size() == 15);
  CHECK(t[0] == Token{"@juan_p", TokenKind::handle});
  CHECK(t[1] == Token{"mira", TokenKind::word});
  CHECK(t[2] == Token{"https://t.co/x1", TokenKind::url});
  CHECK(t[3] == Token{".", TokenKind::punctuation});
  CHECK(t[6] == Token{"ana.b@mail.com", TokenKind::email});
  CHECK(t[7] == Token{"#viernes", TokenKind::emoji_or_other});
  CHECK(t[8] == Token{"😀", TokenKind::emoji_or_other});
  CHECK(t[9] == Token{"¡", TokenKind::punctuation});
  CHECK(t[11] == Token{"Genial", TokenKind::word});
  CHECK(t[14] == Token{"2019", TokenKind::number});
}

TEST_CASE("emoji modifiers and joiners stay with their base") {
  const auto t = tokenize("ok 👍🏽 👨‍👩‍👧 ❤️");
  REQUIRE(t.size() == 4);
  CHECK(t[1].surface == "👍🏽");
  CHECK(t[2].surface == "👨‍👩‍👧");
  CHECK(t[3].surface == "❤️");
}

TEST_CASE("tokenizer is total on arbitrary bytes") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s(rng() % 40, '\0');
    for (auto& c : s) c = static_cast<char>(rng() % 256);
    const auto tokens = tokenize(s);
    for (const auto& token : tokens) CHECK_FALSE(token.surface.empty());
    CHECK(tokenize(s) == tokens);
  }
}

TEST_CASE("basic preprocessing replaces entities and caps letter repeats") {
  const auto config = spanish();
  const auto out = basic_preprocess(tokenize("@ana geniaaaaal www.x.com yo@mail.es 1000 jajajaja!!!"), config);
  CHECK(join_surfaces(out) == "@USER geniaal URL EMAIL 1000 jajajaja ! ! !");
  CHECK(kinds(out)[0] == TokenKind::handle);
}

TEST_CASE("repeat cap is configurable and digits are left alone") {
  auto config = spanish();
  config.repeat_cap = 1;
  CHECK(join_surfaces(basic_preprocess(tokenize("coooool 1000"), config)) == "col 1000");
  config.repeat_cap = 3;
  CHECK(join_surfaces(basic_preprocess(tokenize("siiiiii"), config)) == "siii");
}

TEST_CASE("negation prefixes up to three words and stops at non-words") {
  const auto config = spanish();
  const auto scoped = handle_negation(tokenize("no me gusta nada esto"), config);
  CHECK(join_surfaces(scoped) == "no NOT_me NOT_gusta NOT_nada esto");

  CHECK(join_surfaces(handle_negation(tokenize("no bueno , malo"), config)) == "no NOT_bueno , malo");
  CHECK(join_surfaces(handle_negation(tokenize("nunca"), config)) == "nunca");
  // A cue inside the scope is prefixed and does not start a new scope.
  CHECK(join_surfaces(handle_negation(tokenize("no nunca vi eso hoy"), config)) == "no NOT_nunca NOT_vi NOT_eso hoy");
}

TEST_CASE("negation preserves the token count") {
  const auto config = spanish();
  std::mt19937_64 rng(5);
  const std::vector<std::string> vocab = {"no", "nunca", "bien", "mal", ",", "casa", "😀", "sin", "ni"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string s;
    for (int k = 0, n = int(rng() % 12); k < n; ++k) s += vocab[rng() % vocab.size()] + " ";
    const auto tokens = tokenize(s);
    const auto negated = handle_negation(tokens, config);
    REQUIRE(negated.size() == tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      CHECK(negated[i].kind == tokens[i].kind);
      const bool same = negated[i].surface == tokens[i].surface;
      const bool prefixed = negated[i].surface == "NOT_" + tokens[i].surface;
      CHECK((same || prefixed));
    }
  }
}

TEST_CASE("semantic preprocessing: lower, lemma, negation, filtering") {
  const auto config = spanish();
  const auto basic = basic_preprocess(tokenize("Me ALEGRO , no me gustó el final 100 % @pepe"), config);
  const auto out = surfaces(semantic_preprocess(basic, config));
  const std::vector<std::string> expected = {"alegrar", "no", "NOT_me", "NOT_gustar", "NOT_el", "final", "@USER"};
  CHECK(out == expected);
}

TEST_CASE("lemma table keys must be lower case") {
  auto config = spanish();
  config.lemma_table["Hola"] = "hola";
  CHECK_THROWS_AS(config.validate(), Error);
  config = spanish();
  config.repeat_cap = 0;
  CHECK_THROWS_AS(config.validate(), Error);
}
