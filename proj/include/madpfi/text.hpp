// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_TEXT_HPP
#define MADPFI_TEXT_HPP

#include <string>
#include <string_view>

#include <unicode/errorcode.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "madpfi/errors.hpp"

namespace madpfi {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool is_ascii(std::string_view s) {
  for (unsigned char c : s)
    if (c >= 0x80) return false;
  return true;
}

/// Unicode NFC normalization. ASCII input is already normalized and is
/// returned without touching ICU.
inline std::string nfc(std::string_view s) {
  if (is_ascii(s)) return std::string(s);
  icu::ErrorCode status;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (status.isFailure())
    throw ComputationError(std::string("NFC normalizer unavailable: ") +
                           status.errorName());
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  icu::UnicodeString out = norm->normalize(in, status);
  if (status.isFailure())
    throw ValidationError(std::string("NFC normalization failed: ") +
                          status.errorName());
  std::string result;
  out.toUTF8String(result);
  return result;
}

/// Canonical form used for topic and co-mention identifiers: trim, then NFC.
inline std::string canonical_text(std::string_view s) {
  return nfc(trim(s));
}

}  // namespace madpfi

#endif  // MADPFI_TEXT_HPP
