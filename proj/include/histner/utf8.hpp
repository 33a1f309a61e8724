#pragma once

// Minimal UTF-8 <-> UTF-32 codec. All character-level machinery in this
// library (corruption, OCR simulation, alignment) operates on code points;
// byte strings only appear at the file boundary.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace histner {

class Utf8Error : public std::runtime_error {
 public:
  explicit Utf8Error(std::size_t byte_offset)
      : std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp <= 0x7F) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
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

inline std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append_utf8(out, cp);
  return out;
}

/// Decodes UTF-8 into code points. Throws Utf8Error on malformed input,
/// overlong encodings, surrogates, or values beyond U+10FFFF.
inline std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw Utf8Error(i);
    }
    if (i + len > n) throw Utf8Error(i);
    for (std::size_t k = 1; k < len; ++k) {
      const auto bk = static_cast<unsigned char>(bytes[i + k]);
      if ((bk & 0xC0) != 0x80) throw Utf8Error(i + k);
      cp = (cp << 6) | (bk & 0x3F);
    }
    static constexpr char32_t kMinForLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLen[len]) throw Utf8Error(i);            // overlong
    if (cp >= 0xD800 && cp <= 0xDFFF) throw Utf8Error(i);    // surrogate
    if (cp > 0x10FFFF) throw Utf8Error(i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline bool is_valid_utf8(std::string_view bytes) {
  try {
    decode_utf8(bytes);
    return true;
  } catch (const Utf8Error&) {
    return false;
  }
}

/// Letter test used to decide token eligibility for corruption. Covers ASCII
/// letters plus the Latin-1..Latin Extended-B range, which includes every
/// French and Dutch diacritic and digraph. The multiplication and division
/// signs sit inside that range and are excluded.
inline bool is_letter(char32_t cp) {
  if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) return true;
  if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
  return false;
}

inline bool is_blank(char32_t cp) { return cp == U' ' || cp == U'\t'; }

}  // namespace histner
