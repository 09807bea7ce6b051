#pragma once

// Text normalization and rule-based tokenization.
//
// A token is a maximal run of characters of one class: word characters,
// punctuation/symbols, or emoji. Whitespace and control characters separate
// tokens. Combining marks and format characters extend the run they follow.
// With strip_punctuation the punctuation runs are dropped; with strip_emoji the
// emoji are removed during normalization, before segmentation.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>
#include <unicode/locid.h>

#include "stc/error.hpp"

namespace stc {

enum class UnicodeNormalization { NFC, NFKC };

inline std::string_view to_string(UnicodeNormalization n) {
  return n == UnicodeNormalization::NFC ? "NFC" : "NFKC";
}

inline std::optional<UnicodeNormalization> parse_unicode_normalization(std::string_view s) {
  if (s == "NFC") return UnicodeNormalization::NFC;
  if (s == "NFKC") return UnicodeNormalization::NFKC;
  return std::nullopt;
}

struct TokenizerConfig {
  bool lowercase = true;
  UnicodeNormalization unicode_normalization = UnicodeNormalization::NFC;
  bool strip_punctuation = true;
  bool strip_emoji = true;
  // Removed from the end of a token (longest match, once). Stands in for
  // postposition removal in agglutinative languages.
  std::vector<std::string> stopword_suffixes;

  bool operator==(const TokenizerConfig&) const = default;
};

struct TokenStream {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  auto begin() const noexcept { return tokens.begin(); }
  auto end() const noexcept { return tokens.end(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }

  bool operator==(const TokenStream&) const = default;
};

namespace unicode {

inline bool is_emoji_base(UChar32 c) {
  return u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC) ||
         u_hasBinaryProperty(c, UCHAR_EMOJI_PRESENTATION) ||
         u_hasBinaryProperty(c, UCHAR_EMOJI_MODIFIER) ||
         u_hasBinaryProperty(c, UCHAR_REGIONAL_INDICATOR);
}

// Characters that only carry meaning inside an emoji sequence.
inline bool is_emoji_joiner(UChar32 c) {
  return c == 0x200D || c == 0xFE0E || c == 0xFE0F || c == 0x20E3 ||
         (c >= 0xE0020 && c <= 0xE007F) || u_hasBinaryProperty(c, UCHAR_EMOJI_MODIFIER);
}

inline icu::UnicodeString remove_emoji(const icu::UnicodeString& in) {
  icu::UnicodeString out;
  bool in_sequence = false;
  for (int32_t i = 0; i < in.length(); i = in.moveIndex32(i, 1)) {
    const UChar32 c = in.char32At(i);
    if (is_emoji_base(c)) {
      in_sequence = true;
      continue;
    }
    if (c == 0xFE0F || c == 0x20E3 || (in_sequence && is_emoji_joiner(c))) continue;
    in_sequence = false;
    out.append(c);
  }
  return out;
}

enum class CharClass { Separator, Mark, Word, Punct, Emoji };

inline CharClass classify(UChar32 c) {
  if (u_isUWhiteSpace(c)) return CharClass::Separator;
  const auto type = static_cast<UCharCategory>(u_charType(c));
  switch (type) {
    case U_CONTROL_CHAR:
    case U_LINE_SEPARATOR:
    case U_PARAGRAPH_SEPARATOR:
    case U_SPACE_SEPARATOR:
      return CharClass::Separator;
    case U_NON_SPACING_MARK:
    case U_COMBINING_SPACING_MARK:
    case U_ENCLOSING_MARK:
    case U_FORMAT_CHAR:
      return CharClass::Mark;
    default:
      break;
  }
  if (is_emoji_base(c)) return CharClass::Emoji;
  switch (type) {
    case U_DASH_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_CONNECTOR_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
      return CharClass::Punct;
    default:
      return CharClass::Word;
  }
}

}  // namespace unicode

/// Normalizes `text` per `config`: Unicode normalization form, lowercasing
/// and emoji removal. The result is a fixed point (normalize is idempotent).
inline std::string normalize(std::string_view text, const TokenizerConfig& config) {
  if (text.empty()) return {};
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer =
      config.unicode_normalization == UnicodeNormalization::NFC
          ? icu::Normalizer2::getNFCInstance(status)
          : icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalizer unavailable");

  auto pass = [&](const icu::UnicodeString& in) {
    UErrorCode st = U_ZERO_ERROR;
    icu::UnicodeString s = normalizer->normalize(in, st);
    if (config.lowercase) s.toLower(icu::Locale::getRoot());
    if (config.strip_emoji) s = unicode::remove_emoji(s);
    s = normalizer->normalize(s, st);
    if (U_FAILURE(st)) throw std::runtime_error("ICU normalization failed");
    return s;
  };

  icu::UnicodeString current =
      pass(icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))));
  // Lowercasing and compatibility mappings can feed each other; iterate to a fixed point.
  for (int i = 0; i < 4; ++i) {
    icu::UnicodeString next = pass(current);
    if (next == current) break;
    current = std::move(next);
  }
  std::string out;
  current.toUTF8String(out);
  return out;
}

/// Pluggable tokenizer. Index construction and query processing go through
/// this interface so that a morphological analyzer can replace the rules.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual TokenStream tokenize(std::string_view text) const = 0;
};

class RuleTokenizer final : public Tokenizer {
 public:
  explicit RuleTokenizer(TokenizerConfig config) : config_(std::move(config)) {
    for (const auto& suffix : config_.stopword_suffixes) {
      std::string s = normalize(suffix, config_);
      if (!s.empty()) suffixes_.push_back(std::move(s));
    }
    std::ranges::stable_sort(suffixes_, [](const std::string& a, const std::string& b) {
      return a.size() > b.size();
    });
  }

  const TokenizerConfig& config() const noexcept { return config_; }

  TokenStream tokenize(std::string_view text) const override {
    const std::string norm = normalize(text, config_);
    TokenStream out;
    std::string current;
    auto current_class = unicode::CharClass::Separator;

    auto flush = [&] {
      if (current.empty()) return;
      if (!(config_.strip_punctuation && current_class == unicode::CharClass::Punct)) {
        strip_suffix(current);
        out.tokens.push_back(std::move(current));
      }
      current.clear();
    };

    const auto* bytes = reinterpret_cast<const uint8_t*>(norm.data());
    const auto length = static_cast<int32_t>(norm.size());
    int32_t i = 0;
    while (i < length) {
      const int32_t start = i;
      UChar32 c;
      U8_NEXT(bytes, i, length, c);
      if (c < 0) continue;  // invalid byte sequence
      auto cls = unicode::classify(c);
      if (cls == unicode::CharClass::Separator) {
        flush();
        current_class = cls;
        continue;
      }
      if (cls == unicode::CharClass::Mark) {
        if (current.empty()) {
          // A dangling mark after a separator starts a word.
          current_class = unicode::CharClass::Word;
        }
        current.append(norm, start, i - start);
        continue;
      }
      if (cls != current_class) {
        flush();
        current_class = cls;
      }
      current.append(norm, start, i - start);
    }
    flush();
    return out;
  }

 private:
  void strip_suffix(std::string& token) const {
    // Longest matching suffix only; a token that is entirely a suffix is kept.
    for (const auto& suffix : suffixes_) {
      if (!token.ends_with(suffix)) continue;
      if (token.size() > suffix.size()) token.resize(token.size() - suffix.size());
      return;
    }
  }

  TokenizerConfig config_;
  std::vector<std::string> suffixes_;
};

inline TokenStream tokenize(std::string_view text, const TokenizerConfig& config) {
  return RuleTokenizer(config).tokenize(text);
}

}  // namespace stc
