#include "prestamo/tokenizer.h"

#include "prestamo/utf8.h"

namespace prestamo {

namespace {

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case 0xA0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_unicode_punct(char32_t cp) {
  if (cp == 0xA1 || cp == 0xBF) return true;   // ¡ ¿
  if (cp == 0xAB || cp == 0xBB) return true;   // « »
  if (cp == 0xB7 || cp == 0xD7 || cp == 0xF7) return true;
  if (cp >= 0x2010 && cp <= 0x205E) return true;  // dashes, quotes, ellipsis
  if (cp >= 0x2190 && cp <= 0x2BFF) return true;  // arrows, symbols, dingbats
  if (cp >= 0x3001 && cp <= 0x303F) return true;
  if (cp >= 0xFE00 && cp <= 0xFE0F) return true;  // variation selectors
  if (cp >= 0x1F000) return true;                 // emoji planes
  return false;
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= '0' && cp <= '9') || cp == '_';
  }
  return !is_space(cp) && !is_unicode_punct(cp);
}

struct Scanner {
  const std::vector<char32_t>& cps;

  bool word_at(std::size_t i) const {
    return i < cps.size() && is_word_char(cps[i]);
  }

  // Matches http:// or https:// case-insensitively at position i.
  bool url_at(std::size_t i) const {
    static const std::u32string http = U"http";
    std::size_t k = i;
    for (char32_t c : http) {
      if (k >= cps.size() || utf8::to_lower(cps[k]) != c) return false;
      ++k;
    }
    if (k < cps.size() && utf8::to_lower(cps[k]) == U's') ++k;
    return k + 2 < cps.size() && cps[k] == U':' && cps[k + 1] == U'/' &&
           cps[k + 2] == U'/';
  }

  bool token_start(std::size_t i) const {
    if (url_at(i)) return true;
    if ((cps[i] == U'#' || cps[i] == U'@') && word_at(i + 1)) return true;
    return is_word_char(cps[i]);
  }
};

std::string slice(const std::vector<char32_t>& cps, std::size_t b, std::size_t e) {
  std::string out;
  for (std::size_t k = b; k < e; ++k) utf8::encode(cps[k], out);
  return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    cps.push_back(utf8::decode(text, i));
  }

  Scanner scan{cps};
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space(cps[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    if (scan.url_at(i)) {
      while (i < cps.size() && !is_space(cps[i])) ++i;
      tokens.push_back({slice(cps, begin, i), begin, i, TokenKind::Url});
      continue;
    }
    if ((cps[i] == U'#' || cps[i] == U'@') && scan.word_at(i + 1)) {
      TokenKind kind = cps[i] == U'#' ? TokenKind::Hashtag : TokenKind::Mention;
      ++i;
      while (scan.word_at(i)) ++i;
      tokens.push_back({slice(cps, begin, i), begin, i, kind});
      continue;
    }
    if (is_word_char(cps[i])) {
      while (i < cps.size()) {
        if (is_word_char(cps[i])) {
          ++i;
        } else if (cps[i] == U'-' && scan.word_at(i + 1)) {
          i += 2;  // word-internal hyphen, as in "sign-in"
        } else {
          break;
        }
      }
      std::string surface =
          utf8::to_lower(utf8::compose_spanish(slice(cps, begin, i)));
      tokens.push_back({std::move(surface), begin, i, TokenKind::Word});
      continue;
    }
    // Punctuation run: everything up to whitespace or the next token start.
    while (i < cps.size() && !is_space(cps[i]) && !scan.token_start(i)) ++i;
    tokens.push_back({slice(cps, begin, i), begin, i, TokenKind::Other});
  }
  return tokens;
}

const char* token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Word: return "word";
    case TokenKind::Hashtag: return "hashtag";
    case TokenKind::Mention: return "mention";
    case TokenKind::Url: return "url";
    case TokenKind::Other: return "other";
  }
  return "other";
}

}  // namespace prestamo
