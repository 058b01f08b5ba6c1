#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace analogy {

using Tokens = std::vector<std::string>;

/// Splits on ASCII whitespace, dropping empty pieces.
Tokens split_ws(std::string_view text);

std::string join(const Tokens& tokens, std::string_view sep = " ");

/// UTF-8 code points as individual strings. Invalid bytes pass through singly.
Tokens utf8_codepoints(std::string_view text);

bool is_single_codepoint(std::string_view glyph);

std::string to_lower_ascii(std::string_view text);

std::string_view trim(std::string_view text);

std::string sha256_hex(std::string_view bytes);

}  // namespace analogy
