#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "polarity/error.hpp"

namespace polarity {

enum class TokenKind { word, punctuation, number, handle, url, email, emoji_or_other };

std::string_view to_string(TokenKind kind);

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::word;

  bool operator==(const Token&) const = default;
};

using Tokens = std::vector<Token>;

inline constexpr std::string_view kHandleReplacement = "@USER";
inline constexpr std::string_view kUrlReplacement = "URL";
inline constexpr std::string_view kEmailReplacement = "EMAIL";
inline constexpr std::string_view kNegationPrefix = "NOT_";

struct PreprocessConfig {
  std::unordered_set<std::string> negation_words;
  std::size_t negation_scope = 3;
  std::unordered_set<std::string> stopwords;
  std::unordered_map<std::string, std::string> lemma_table;
  std::size_t repeat_cap = 2;

  // Throws Error if repeat_cap == 0 or a lemma key is not lower case.
  void validate() const;
};

// Spanish negation cues used when no cue file is given.
std::unordered_set<std::string> default_negation_words();

// One token per line; blank lines ignored.
std::unordered_set<std::string> load_word_list(const std::filesystem::path& path);
// `word<TAB>lemma` per line.
std::unordered_map<std::string, std::string> load_lemma_table(
    const std::filesystem::path& path);

// Splits raw text into handles, URLs, e-mails, hashtags, words, numbers,
// single punctuation marks and emoji/other symbols. Total and deterministic.
Tokens tokenize(std::string_view text);

// Replaces handles, URLs and e-mails with placeholders and collapses letter
// runs longer than repeat_cap inside words.
Tokens basic_preprocess(std::span<const Token> tokens, const PreprocessConfig& config);

// Prefixes up to negation_scope word tokens following a cue with NOT_,
// stopping at the first non-word token. Token count is preserved.
Tokens handle_negation(std::span<const Token> tokens, const PreprocessConfig& config);

// lowercase -> lemmatize -> negation -> drop punctuation/numbers/stopwords.
Tokens semantic_preprocess(std::span<const Token> tokens, const PreprocessConfig& config);

// Surfaces joined with single spaces.
std::string join_surfaces(std::span<const Token> tokens);
std::vector<std::string> surfaces(std::span<const Token> tokens);

}  // namespace polarity
