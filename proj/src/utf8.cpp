#include "prestamo/utf8.h"

namespace prestamo {
namespace utf8 {

char32_t decode(std::string_view text, std::size_t& i) {
  const auto byte = [&](std::size_t k) -> std::uint8_t {
    return static_cast<std::uint8_t>(text[k]);
  };
  std::uint8_t b0 = byte(i);
  if (b0 < 0x80) {
    i += 1;
    return b0;
  }
  auto cont = [&](std::size_t k) {
    return k < text.size() && (byte(k) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
    char32_t cp = (char32_t(b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
    i += 2;
    return cp >= 0x80 ? cp : 0xFFFD;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
    char32_t cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(byte(i + 1) & 0x3F) << 6) |
                  (byte(i + 2) & 0x3F);
    i += 3;
    return cp >= 0x800 ? cp : 0xFFFD;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
    char32_t cp = (char32_t(b0 & 0x07) << 18) | (char32_t(byte(i + 1) & 0x3F) << 12) |
                  (char32_t(byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
    i += 4;
    return cp >= 0x10000 && cp <= 0x10FFFF ? cp : 0xFFFD;
  }
  i += 1;
  return 0xFFFD;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::size_t codepoint_count(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size();) {
    decode(text, i);
    ++n;
  }
  return n;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  // Latin-1 uppercase block, skipping the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    encode(to_lower(decode(text, i)), out);
  }
  return out;
}

namespace {

// Precomposed targets for the combining marks that occur in Spanish text.
char32_t compose_pair(char32_t base, char32_t mark) {
  if (mark == 0x0301) {  // combining acute
    switch (base) {
      case 'a': return 0xE1;
      case 'e': return 0xE9;
      case 'i': return 0xED;
      case 'o': return 0xF3;
      case 'u': return 0xFA;
      case 'A': return 0xC1;
      case 'E': return 0xC9;
      case 'I': return 0xCD;
      case 'O': return 0xD3;
      case 'U': return 0xDA;
      default: return 0;
    }
  }
  if (mark == 0x0303) {  // combining tilde
    switch (base) {
      case 'n': return 0xF1;
      case 'N': return 0xD1;
      case 'a': return 0xE3;
      case 'o': return 0xF5;
      default: return 0;
    }
  }
  if (mark == 0x0308) {  // combining diaeresis
    switch (base) {
      case 'u': return 0xFC;
      case 'U': return 0xDC;
      default: return 0;
    }
  }
  return 0;
}

}  // namespace

std::string compose_spanish(std::string_view text) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    cps.push_back(decode(text, i));
  }
  std::string out;
  out.reserve(text.size());
  for (std::size_t k = 0; k < cps.size(); ++k) {
    if (k + 1 < cps.size()) {
      char32_t composed = compose_pair(cps[k], cps[k + 1]);
      if (composed != 0) {
        encode(composed, out);
        ++k;
        continue;
      }
    }
    encode(cps[k], out);
  }
  return out;
}

char32_t fold_diacritic(char32_t cp) {
  switch (cp) {
    case 0xE1: case 0xC1: return cp == 0xE1 ? U'a' : U'A';
    case 0xE9: case 0xC9: return cp == 0xE9 ? U'e' : U'E';
    case 0xED: case 0xCD: return cp == 0xED ? U'i' : U'I';
    case 0xF3: case 0xD3: return cp == 0xF3 ? U'o' : U'O';
    case 0xFA: case 0xDA: return cp == 0xFA ? U'u' : U'U';
    case 0xFC: case 0xDC: return cp == 0xFC ? U'u' : U'U';
    case 0xF1: case 0xD1: return cp == 0xF1 ? U'n' : U'N';
    default: return cp;
  }
}

std::string fold_diacritics(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    encode(fold_diacritic(decode(text, i)), out);
  }
  return out;
}

}  // namespace utf8
}  // namespace prestamo
