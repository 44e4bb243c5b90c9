#include "polarity/preprocess.hpp"

#include <fstream>

#include "polarity/utf8.hpp"

namespace polarity {

namespace {

using utf8::decode;

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = text[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_word_char(char32_t cp) {
  return utf8::is_letter(cp) || utf8::is_digit(cp) || utf8::is_combining_mark(cp);
}

bool is_handle_char(char32_t cp) { return is_word_char(cp) || cp == '_'; }

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Byte length of an e-mail address starting at pos, or 0.
std::size_t match_email(std::string_view text, std::size_t pos) {
  auto local = [](char c) {
    return is_ascii_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
  };
  std::size_t i = pos;
  while (i < text.size() && local(text[i])) ++i;
  if (i == pos || i >= text.size() || text[i] != '@') return 0;
  ++i;
  std::size_t labels = 0;
  std::size_t end = 0;
  while (true) {
    const std::size_t start = i;
    while (i < text.size() && (is_ascii_alnum(text[i]) || text[i] == '-')) ++i;
    if (i == start) break;
    ++labels;
    end = i;
    if (i < text.size() && text[i] == '.' && i + 1 < text.size() && is_ascii_alnum(text[i + 1])) {
      ++i;
      continue;
    }
    break;
  }
  return labels >= 2 ? end - pos : 0;
}

// Byte length of a URL starting at pos, or 0. Runs to the next whitespace,
// minus trailing sentence punctuation.
std::size_t match_url(std::string_view text, std::size_t pos) {
  std::size_t prefix = 0;
  if (starts_with_ci(text, pos, "http://")) {
    prefix = 7;
  } else if (starts_with_ci(text, pos, "https://")) {
    prefix = 8;
  } else if (starts_with_ci(text, pos, "www.")) {
    prefix = 4;
  } else {
    return 0;
  }
  std::size_t i = pos;
  while (i < text.size()) {
    const auto d = decode(text, i);
    if (utf8::is_space(d.code_point)) break;
    i += d.length;
  }
  while (i > pos + prefix) {
    const char c = text[i - 1];
    if (c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == ')' ||
        c == '"' || c == '\'') {
      --i;
    } else {
      break;
    }
  }
  return i - pos;
}

// Byte length of a run of code points satisfying pred, starting at pos.
template <typename Pred>
std::size_t match_run(std::string_view text, std::size_t pos, Pred pred) {
  std::size_t i = pos;
  while (i < text.size()) {
    const auto d = decode(text, i);
    if (!pred(d.code_point)) break;
    i += d.length;
  }
  return i - pos;
}

bool all_ascii_digits(std::string_view s) {
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::string collapse_repeats(std::string_view word, std::size_t cap) {
  std::string out;
  out.reserve(word.size());
  char32_t previous = 0;
  std::size_t run = 0;
  std::size_t pos = 0;
  while (pos < word.size()) {
    const auto d = decode(word, pos);
    if (d.code_point == previous && utf8::is_letter(d.code_point)) {
      ++run;
    } else {
      previous = d.code_point;
      run = 1;
    }
    if (run <= cap) out.append(word.substr(pos, d.length));
    pos += d.length;
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::word: return "word";
    case TokenKind::punctuation: return "punctuation";
    case TokenKind::number: return "number";
    case TokenKind::handle: return "handle";
    case TokenKind::url: return "url";
    case TokenKind::email: return "email";
    case TokenKind::emoji_or_other: return "emoji_or_other";
  }
  return "?";
}

void PreprocessConfig::validate() const {
  if (repeat_cap < 1) throw Error("repeat_cap must be >= 1");
  for (const auto& [word, lemma] : lemma_table) {
    if (utf8::to_lower(word) != word) throw Error("lemma table key '" + word + "' is not lower case");
  }
}

std::unordered_set<std::string> default_negation_words() {
  return {"no", "ni", "nunca", "jamás", "tampoco", "nadie", "nada", "ningún", "ninguna",
          "ninguno", "sin"};
}

std::unordered_set<std::string> load_word_list(const std::filesystem::path& path) {
  std::unordered_set<std::string> words;
  for (auto& line : read_lines(path)) {
    if (!line.empty()) words.insert(std::move(line));
  }
  return words;
}

std::unordered_map<std::string, std::string> load_lemma_table(const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> table;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected word<TAB>lemma");
    }
    table[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return table;
}

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::size_t pos = 0;
  auto emit = [&](std::size_t len, TokenKind kind) {
    tokens.push_back({std::string(text.substr(pos, len)), kind});
    pos += len;
  };

  while (pos < text.size()) {
    const auto d = decode(text, pos);
    const char32_t cp = d.code_point;

    if (utf8::is_space(cp)) {
      pos += d.length;
      continue;
    }
    if (std::size_t n = match_url(text, pos)) {
      emit(n, TokenKind::url);
      continue;
    }
    if (is_ascii_alnum(static_cast<char>(cp < 0x80 ? cp : 0)) || cp == '.' || cp == '_' ||
        cp == '%' || cp == '+' || cp == '-') {
      if (std::size_t n = match_email(text, pos)) {
        emit(n, TokenKind::email);
        continue;
      }
    }
    if (cp == '@' || cp == '#') {
      const std::size_t tail = match_run(text, pos + 1, is_handle_char);
      if (tail > 0) {
        emit(1 + tail, cp == '@' ? TokenKind::handle : TokenKind::emoji_or_other);
        continue;
      }
    }
    if (is_word_char(cp) && !utf8::is_combining_mark(cp)) {
      const std::size_t n = match_run(text, pos, is_word_char);
      emit(n, all_ascii_digits(text.substr(pos, n)) ? TokenKind::number : TokenKind::word);
      continue;
    }
    if (utf8::is_punctuation(cp)) {
      emit(d.length, TokenKind::punctuation);
      continue;
    }
    // Emoji and anything else: one symbol plus trailing modifiers, with
    // ZWJ-joined sequences kept together.
    std::size_t n = d.length;
    while (pos + n < text.size()) {
      const auto next = decode(text, pos + n);
      if (utf8::is_emoji_extender(next.code_point) || utf8::is_combining_mark(next.code_point)) {
        n += next.length;
        if (next.code_point == 0x200D && pos + n < text.size()) {
          const auto joined = decode(text, pos + n);
          if (!utf8::is_space(joined.code_point)) n += joined.length;
        }
      } else {
        break;
      }
    }
    emit(n, TokenKind::emoji_or_other);
  }
  return tokens;
}

Tokens basic_preprocess(std::span<const Token> tokens, const PreprocessConfig& config) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    switch (token.kind) {
      case TokenKind::handle:
        out.push_back({std::string(kHandleReplacement), token.kind});
        break;
      case TokenKind::url:
        out.push_back({std::string(kUrlReplacement), token.kind});
        break;
      case TokenKind::email:
        out.push_back({std::string(kEmailReplacement), token.kind});
        break;
      case TokenKind::word:
        out.push_back({collapse_repeats(token.surface, config.repeat_cap), token.kind});
        break;
      default:
        out.push_back(token);
    }
  }
  return out;
}

Tokens handle_negation(std::span<const Token> tokens, const PreprocessConfig& config) {
  Tokens out(tokens.begin(), tokens.end());
  std::size_t i = 0;
  while (i < out.size()) {
    const bool cue = out[i].kind == TokenKind::word && config.negation_words.contains(out[i].surface);
    ++i;
    if (!cue) continue;
    for (std::size_t scoped = 0; scoped < config.negation_scope && i < out.size(); ++scoped, ++i) {
      if (out[i].kind != TokenKind::word) break;
      out[i].surface.insert(0, kNegationPrefix);
    }
  }
  return out;
}

Tokens semantic_preprocess(std::span<const Token> tokens, const PreprocessConfig& config) {
  Tokens lowered;
  lowered.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (token.kind != TokenKind::word) {
      lowered.push_back(token);
      continue;
    }
    std::string lower = utf8::to_lower(token.surface);
    if (const auto it = config.lemma_table.find(lower); it != config.lemma_table.end()) {
      lower = it->second;
    }
    lowered.push_back({std::move(lower), TokenKind::word});
  }

  Tokens negated = handle_negation(lowered, config);

  Tokens out;
  out.reserve(negated.size());
  for (auto& token : negated) {
    if (token.kind == TokenKind::punctuation || token.kind == TokenKind::number) continue;
    if (token.kind == TokenKind::word && config.stopwords.contains(token.surface) &&
        !config.negation_words.contains(token.surface)) {
      continue;
    }
    out.push_back(std::move(token));
  }
  return out;
}

std::string join_surfaces(std::span<const Token> tokens) {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out += ' ';
    out += token.surface;
  }
  return out;
}

std::vector<std::string> surfaces(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) out.push_back(token.surface);
  return out;
}

}  // namespace polarity
