#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sdml {

using codepoint = std::uint32_t;

// Minimal UTF-8 utilities for the text pipeline. Invalid byte sequences are
// decoded as U+FFFD, one byte at a time, so tokenization never throws on
// malformed input.

// Decodes the codepoint starting at byte offset `i` and advances `i` past it.
codepoint decode_utf8(std::string_view text, std::size_t& i);

void append_utf8(std::string& out, codepoint cp);

std::size_t codepoint_count(std::string_view text);

bool is_space(codepoint cp);
bool is_digit(codepoint cp);
bool is_letter(codepoint cp);
// Currency, percent, math and similar marks; tokenized as kind `symbol`.
bool is_symbol_char(codepoint cp);
// Everything punctuation-like that is not a symbol; tokenized as kind `punctuation`.
bool is_punct_char(codepoint cp);
bool is_upper(codepoint cp);

// ASCII lowercasing plus a compact fold for Latin-1 / Latin Extended-A.
// Other codepoints fold to themselves.
codepoint fold_case(codepoint cp);

// Case-folds a whole UTF-8 string.
std::string fold_case(std::string_view text);

} // namespace sdml
