#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace prestamo {

enum class TokenKind { Word, Hashtag, Mention, Url, Other };

// Spans are codepoint offsets into the original text, half-open [begin, end).
struct Token {
  std::string surface;  // word tokens: lowercased + accent-composed; others: raw
  std::size_t begin = 0;
  std::size_t end = 0;
  TokenKind kind = TokenKind::Other;
};

std::vector<Token> tokenize(std::string_view text);

const char* token_kind_name(TokenKind kind);

}  // namespace prestamo
