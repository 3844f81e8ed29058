#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prestamo {
namespace utf8 {

// Decodes the codepoint starting at byte offset `i` and advances `i` past it.
// Invalid sequences decode as U+FFFD and advance one byte.
char32_t decode(std::string_view text, std::size_t& i);

void encode(char32_t cp, std::string& out);

std::size_t codepoint_count(std::string_view text);

// Lowercases ASCII plus the Latin-1 range (covers Spanish orthography).
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view text);

// Composes "vowel + combining accent" sequences into the precomposed letters
// used in Spanish (a+U+0301 -> á, n+U+0303 -> ñ, u+U+0308 -> ü, ...).
std::string compose_spanish(std::string_view text);

// á->a, é->e, í->i, ó->o, ú->u, ü->u, ñ->n (and uppercase variants).
char32_t fold_diacritic(char32_t cp);
std::string fold_diacritics(std::string_view text);

}  // namespace utf8
}  // namespace prestamo
