#include "analogy/text.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <stdexcept>

#include "analogy/error.hpp"

namespace analogy {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownGlyph: return "UnknownGlyph";
    case ErrorCode::LastGlyph: return "LastGlyph";
    case ErrorCode::FirstGlyph: return "FirstGlyph";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    case ErrorCode::InvalidAlphabet: return "InvalidAlphabet";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::AlphabetOverflow: return "AlphabetOverflow";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::RuleConflict: return "RuleConflict";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::ProgressionUnsupported: return "ProgressionUnsupported";
    case ErrorCode::MalformedGrid: return "MalformedGrid";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::WrongCount: return "WrongCount";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::UnknownTag: return "UnknownTag";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SuiteExhausted: return "SuiteExhausted";
    case ErrorCode::SessionComplete: return "SessionComplete";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::OutOfOrder: return "OutOfOrder";
    case ErrorCode::SessionIncomplete: return "SessionIncomplete";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Tokens split_ws(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

namespace {

std::size_t codepoint_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

}  // namespace

Tokens utf8_codepoints(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = codepoint_length(static_cast<unsigned char>(text[i]));
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xc0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

bool is_single_codepoint(std::string_view glyph) {
  return !glyph.empty() && utf8_codepoints(glyph).size() == 1;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  return text;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace analogy
