#include "sdml/text.hpp"

#include "sdml/unicode.hpp"

namespace sdml {

namespace {

struct Cp {
    codepoint value;
    std::size_t byte_begin;
    std::size_t byte_end;
};

std::vector<Cp> decode_all(std::string_view text) {
    std::vector<Cp> out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t begin = i;
        codepoint cp = decode_utf8(text, i);
        out.push_back({cp, begin, i});
    }
    return out;
}

bool is_separator_char(codepoint cp) {
    return is_punct_char(cp) || is_symbol_char(cp);
}

bool is_number_core(const std::vector<Cp>& cps, std::size_t begin, std::size_t end) {
    if (begin >= end) return false;
    if (!is_digit(cps[begin].value) || !is_digit(cps[end - 1].value)) return false;
    int dots = 0;
    bool prev_sep = false;
    for (std::size_t i = begin; i < end; ++i) {
        codepoint c = cps[i].value;
        if (is_digit(c)) {
            prev_sep = false;
        } else if (c == '.' || c == ',') {
            if (prev_sep) return false;
            if (c == '.' && ++dots > 1) return false;
            prev_sep = true;
        } else {
            return false;
        }
    }
    return true;
}

Token make_token(std::string_view chunk, const std::vector<Cp>& cps, std::size_t begin,
                 std::size_t end, TokenKind kind) {
    Token tok;
    tok.text = std::string(
        chunk.substr(cps[begin].byte_begin, cps[end - 1].byte_end - cps[begin].byte_begin));
    tok.folded = fold_case(tok.text);
    tok.kind = kind;
    return tok;
}

void emit_separator_runs(std::string_view chunk, const std::vector<Cp>& cps,
                         std::size_t begin, std::size_t end, std::vector<Token>& out) {
    std::size_t i = begin;
    while (i < end) {
        std::size_t j = i + 1;
        while (j < end && cps[j].value == cps[i].value) ++j;
        TokenKind kind = is_punct_char(cps[i].value) ? TokenKind::punct : TokenKind::symbol;
        out.push_back(make_token(chunk, cps, i, j, kind));
        i = j;
    }
}

void tokenize_chunk(std::string_view chunk, std::vector<Token>& out) {
    std::vector<Cp> cps = decode_all(chunk);
    if (cps.empty()) return;
    std::size_t core_begin = 0;
    while (core_begin < cps.size() && is_separator_char(cps[core_begin].value)) ++core_begin;
    std::size_t core_end = cps.size();
    while (core_end > core_begin && is_separator_char(cps[core_end - 1].value)) --core_end;

    emit_separator_runs(chunk, cps, 0, core_begin, out);
    if (core_begin < core_end) {
        TokenKind kind = is_number_core(cps, core_begin, core_end) ? TokenKind::number
                                                                   : TokenKind::word;
        out.push_back(make_token(chunk, cps, core_begin, core_end, kind));
    }
    emit_separator_runs(chunk, cps, core_end, cps.size(), out);
}

bool is_terminator_char(codepoint cp) {
    return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026;
}

bool is_closing_char(codepoint cp) {
    switch (cp) {
        case ')': case ']': case '}': case '"': case '\'':
        case 0x00BB:  // »
        case 0x2019:  // right single quote
        case 0x201D:  // right double quote
        case 0x203A:  // single right angle quote
            return true;
        default:
            return false;
    }
}

codepoint first_codepoint(std::string_view text) {
    std::size_t i = 0;
    return decode_utf8(text, i);
}

bool is_vowel(codepoint cp) {
    switch (cp) {
        case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
            return true;
        default:
            // Latin-1 folded vowels.
            return (cp >= 0x00E0 && cp <= 0x00E6) || (cp >= 0x00E8 && cp <= 0x00EF) ||
                   (cp >= 0x00F2 && cp <= 0x00F6) || cp == 0x00F8 ||
                   (cp >= 0x00F9 && cp <= 0x00FC) || cp == 0x00FD || cp == 0x00FF;
    }
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    bool at_line_start = true;
    while (i < text.size()) {
        std::size_t probe = i;
        codepoint cp = decode_utf8(text, probe);
        if (is_space(cp)) {
            if (cp == '\n' || cp == '\r' || cp == 0x2028 || cp == 0x2029 || cp == 0x0085) {
                at_line_start = true;
            }
            i = probe;
            continue;
        }
        std::size_t chunk_begin = i;
        while (i < text.size()) {
            std::size_t next = i;
            codepoint c = decode_utf8(text, next);
            if (is_space(c)) break;
            i = next;
        }
        std::size_t before = out.size();
        tokenize_chunk(text.substr(chunk_begin, i - chunk_begin), out);
        if (at_line_start && out.size() > before) {
            out[before].line_initial = true;
            at_line_start = false;
        }
    }
    return out;
}

std::vector<Sentence> segment_sentences(const std::vector<Token>& tokens,
                                        const Lexicons& lex) {
    std::vector<Sentence> sentences;
    std::size_t begin = 0;
    std::size_t i = 0;
    while (i < tokens.size()) {
        const Token& tok = tokens[i];
        bool boundary = false;
        if (tok.kind == TokenKind::punct && is_terminator_char(first_codepoint(tok.text))) {
            boundary = true;
            if (tok.text == "." && i > 0 && tokens[i - 1].kind == TokenKind::word &&
                lex.abbreviations.count(tokens[i - 1].folded)) {
                boundary = false;
            }
        }
        ++i;
        if (boundary) {
            while (i < tokens.size() && tokens[i].kind == TokenKind::punct &&
                   is_closing_char(first_codepoint(tokens[i].text))) {
                ++i;
            }
            sentences.push_back({begin, i});
            begin = i;
        }
    }
    if (begin < tokens.size()) sentences.push_back({begin, tokens.size()});
    return sentences;
}

int count_syllables(std::string_view word) {
    std::string folded = fold_case(word);
    std::vector<codepoint> cps;
    std::size_t i = 0;
    while (i < folded.size()) cps.push_back(decode_utf8(folded, i));

    int groups = 0;
    bool in_group = false;
    for (codepoint cp : cps) {
        if (is_vowel(cp)) {
            if (!in_group) ++groups;
            in_group = true;
        } else {
            in_group = false;
        }
    }
    // Silent final e, except the consonant-le ending ("table", "little").
    std::size_t n = cps.size();
    if (n >= 2 && cps[n - 1] == 'e' && is_letter(cps[n - 2]) && !is_vowel(cps[n - 2])) {
        bool consonant_le = n >= 3 && cps[n - 2] == 'l' && is_letter(cps[n - 3]) &&
                            !is_vowel(cps[n - 3]);
        if (!consonant_le) --groups;
    }
    return groups < 1 ? 1 : groups;
}

void tag_pos_fallback(std::vector<Token>& tokens,
                      const std::vector<Sentence>& sentences,
                      const Lexicons& lex) {
    // First word of each sentence, where ordinary capitalization is expected.
    std::vector<bool> sentence_initial(tokens.size(), false);
    for (const Sentence& s : sentences) {
        for (std::size_t i = s.begin; i < s.end; ++i) {
            if (tokens[i].kind == TokenKind::word) {
                sentence_initial[i] = true;
                break;
            }
        }
    }

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        Token& tok = tokens[i];
        if (tok.kind == TokenKind::punct) {
            tok.pos = UPos::PUNCT;
            continue;
        }
        if (tok.kind == TokenKind::symbol) {
            tok.pos = UPos::SYM;
            continue;
        }
        if (tok.kind == TokenKind::number) {
            tok.pos = UPos::NUM;
            continue;
        }
        auto it = lex.closed_class.find(tok.folded);
        if (it != lex.closed_class.end()) {
            tok.pos = it->second;
            continue;
        }
        const std::string& w = tok.folded;
        std::size_t len = w.size();
        if (len >= 4 && ends_with(w, "ly")) {
            tok.pos = UPos::ADV;
        } else if ((len >= 5 && ends_with(w, "ing")) || (len >= 4 && ends_with(w, "ed"))) {
            tok.pos = UPos::VERB;
        } else if ((len >= 5 && (ends_with(w, "ous") || ends_with(w, "ful") ||
                                 ends_with(w, "ive"))) ||
                   (len >= 6 && ends_with(w, "able"))) {
            tok.pos = UPos::ADJ;
        } else if (!sentence_initial[i] && is_upper(first_codepoint(tok.text))) {
            tok.pos = UPos::PROPN;
        } else {
            tok.pos = UPos::NOUN;
        }
    }
}

Document analyze(std::string_view text, const Lexicons& lex) {
    Document doc;
    doc.text = std::string(text);
    doc.tokens = tokenize(text);
    doc.sentences = segment_sentences(doc.tokens, lex);
    tag_pos_fallback(doc.tokens, doc.sentences, lex);
    return doc;
}

} // namespace sdml
