#include "sdml/unicode.hpp"

namespace sdml {

codepoint decode_utf8(std::string_view text, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t len = 0;
    codepoint cp = 0;
    if ((b0 & 0xe0) == 0xc0) {
        len = 2;
        cp = b0 & 0x1f;
    } else if ((b0 & 0xf0) == 0xe0) {
        len = 3;
        cp = b0 & 0x0f;
    } else if ((b0 & 0xf8) == 0xf0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xfffd;
    }
    if (i + len > text.size()) {
        ++i;
        return 0xfffd;
    }
    for (std::size_t k = 1; k < len; ++k) {
        if ((byte(i + k) & 0xc0) != 0x80) {
            ++i;
            return 0xfffd;
        }
        cp = (cp << 6) | (byte(i + k) & 0x3f);
    }
    i += len;
    if (cp > 0x10ffff) return 0xfffd;
    return cp;
}

void append_utf8(std::string& out, codepoint cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

std::size_t codepoint_count(std::string_view text) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < text.size();) {
        decode_utf8(text, i);
        ++n;
    }
    return n;
}

bool is_space(codepoint cp) {
    switch (cp) {
        case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
        case 0x85: case 0xa0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202f: case 0x205f: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200a;
    }
}

bool is_digit(codepoint cp) {
    return cp >= '0' && cp <= '9';
}

bool is_symbol_char(codepoint cp) {
    switch (cp) {
        case '$': case '%': case '+': case '<': case '=': case '>':
        case '^': case '|': case '~':
        case 0xa2: case 0xa3: case 0xa4: case 0xa5:  // cent, pound, currency, yen
        case 0xa7: case 0xa9: case 0xae: case 0xb0:  // section, (c), (r), degree
        case 0xb1: case 0xd7: case 0xf7:             // plus-minus, times, divide
        case 0x20ac:                                 // euro
            return true;
        default:
            return (cp >= 0x2200 && cp <= 0x22ff)    // mathematical operators
                || (cp >= 0x20a0 && cp <= 0x20bf);   // currency signs
    }
}

bool is_punct_char(codepoint cp) {
    if (is_symbol_char(cp)) return false;
    if (cp < 0x80) {
        return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@')
            || (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
    }
    switch (cp) {
        case 0xa1: case 0xab: case 0xb7: case 0xbb: case 0xbf:  // inverted marks, middle dot, guillemets
            return true;
        default:
            return cp >= 0x2010 && cp <= 0x205e;     // general punctuation block
    }
}

bool is_letter(codepoint cp) {
    if (cp < 0x80) {
        return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
    }
    if (is_space(cp) || is_punct_char(cp) || is_symbol_char(cp) || cp == 0xfffd) return false;
    if (cp >= 0xc0 && cp <= 0xff) return true;     // Latin-1 letters (x/÷ excluded above)
    if (cp >= 0x100 && cp <= 0x2af) return true;   // Latin Extended-A/B, IPA
    if (cp >= 0x370 && cp <= 0x4ff) return true;   // Greek, Cyrillic
    // Unknown scripts default to word characters so tokens stay intact.
    return cp >= 0x530;
}

bool is_upper(codepoint cp) {
    if (cp >= 'A' && cp <= 'Z') return true;
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return true;
    if (cp >= 0x100 && cp <= 0x177) return (cp % 2) == 0;
    if (cp >= 0x391 && cp <= 0x3a9) return true;   // Greek capitals
    if (cp >= 0x410 && cp <= 0x42f) return true;   // Cyrillic capitals
    return false;
}

codepoint fold_case(codepoint cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20;
    // Latin Extended-A pairs upper/lower on even/odd codepoints.
    if (cp >= 0x100 && cp <= 0x177 && (cp % 2) == 0) return cp + 1;
    if (cp >= 0x391 && cp <= 0x3a9 && cp != 0x3a2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42f) return cp + 0x20;
    return cp;
}

std::string fold_case(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        append_utf8(out, fold_case(decode_utf8(text, i)));
    }
    return out;
}

} // namespace sdml
