#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sdml/lexicons.hpp"
#include "sdml/pos.hpp"

namespace sdml {

enum class TokenKind : uint8_t { word, number, punct, symbol };

struct Token {
    std::string text;
    std::string folded;
    TokenKind kind = TokenKind::word;
    UPos pos = UPos::X;
    bool line_initial = false;
    // Dependency annotation (CoNLL-U convention: 0 = root, otherwise 1-based
    // index of the head within the sentence). -1 when unannotated.
    int head = -1;
    std::string deprel;
};

// Half-open token range [begin, end).
struct Sentence {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Document {
    std::string text;
    std::vector<Token> tokens;
    std::vector<Sentence> sentences;
    bool has_deps = false;
};

// Whitespace-delimited tokenization. Leading and trailing punctuation/symbol
// characters are split off as their own tokens, with runs of the same
// character kept together ("..." is one token). Internal punctuation stays in
// the token, so contractions ("don't"), hyphenations ("re-do") and
// abbreviations ("e.g") survive intact. A core of digits with at most one
// decimal point and non-adjacent comma separators is a number token.
std::vector<Token> tokenize(std::string_view text);

// Sentence boundaries fall after terminator tokens (./!/?/ellipsis runs),
// extended over immediately following closing quotes/brackets. A lone period
// after a known abbreviation does not end a sentence.
std::vector<Sentence> segment_sentences(const std::vector<Token>& tokens,
                                        const Lexicons& lex);

// Heuristic syllable count: maximal vowel groups, silent final e, floor of 1.
int count_syllables(std::string_view word);

// Rule-based tagger used when no annotations are available.
void tag_pos_fallback(std::vector<Token>& tokens,
                      const std::vector<Sentence>& sentences,
                      const Lexicons& lex);

// tokenize + segment + tag in one pass.
Document analyze(std::string_view text, const Lexicons& lex = Lexicons::defaults());

} // namespace sdml
