#include "sdml/conllu.hpp"

#include <charconv>

#include "sdml/errors.hpp"
#include "sdml/unicode.hpp"

namespace sdml {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            cols.push_back(line.substr(start));
            return cols;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

void finish_sentence(AnnotatedSentence& sent, std::vector<AnnotatedSentence>& out,
                     std::size_t line_no) {
    if (sent.tokens.empty()) {
        sent = AnnotatedSentence{};
        return;
    }
    const int n = static_cast<int>(sent.tokens.size());
    int roots = 0;
    for (const auto& tok : sent.tokens) {
        if (tok.head < 0 || tok.head > n) {
            throw input_error("sentence ending at line " + std::to_string(line_no) +
                              ": head index " + std::to_string(tok.head) +
                              " out of range [0, " + std::to_string(n) + "]");
        }
        if (tok.head == 0) ++roots;
    }
    if (roots != 1) {
        throw input_error("sentence ending at line " + std::to_string(line_no) + ": " +
                          std::to_string(roots) + " root tokens, expected exactly 1");
    }
    for (int i = 0; i < n; ++i) {
        int cursor = i + 1;
        int steps = 0;
        while (cursor != 0) {
            cursor = sent.tokens[static_cast<std::size_t>(cursor - 1)].head;
            if (++steps > n) {
                throw input_error("sentence ending at line " + std::to_string(line_no) +
                                  ": head cycle involving token " + std::to_string(i + 1));
            }
        }
    }
    out.push_back(std::move(sent));
    sent = AnnotatedSentence{};
}

} // namespace

std::vector<AnnotatedSentence> parse_conllu(std::istream& in) {
    std::vector<AnnotatedSentence> sentences;
    AnnotatedSentence current;
    bool pending_new_doc = false;
    std::string line;
    std::size_t line_no = 0;
    bool first_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first_line) {
            first_line = false;
            if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        }
        if (line.empty()) {
            finish_sentence(current, sentences, line_no);
            continue;
        }
        if (line[0] == '#') {
            std::string_view comment = trim(std::string_view(line).substr(1));
            if (comment.rfind("newdoc", 0) == 0) {
                pending_new_doc = true;
            } else if (comment.rfind("text =", 0) == 0) {
                current.text = std::string(trim(comment.substr(6)));
            } else if (comment.rfind("text=", 0) == 0) {
                current.text = std::string(trim(comment.substr(5)));
            }
            continue;
        }
        auto cols = split_tabs(line);
        if (cols.size() != 10) {
            throw input_error("line " + std::to_string(line_no) + ": expected 10 columns, got " +
                              std::to_string(cols.size()));
        }
        // Multiword ranges (1-2) and empty nodes (5.1) carry no basic dependencies.
        if (cols[0].find('-') != std::string_view::npos ||
            cols[0].find('.') != std::string_view::npos) {
            continue;
        }
        int id = 0;
        if (!parse_int(cols[0], id)) {
            throw input_error("line " + std::to_string(line_no) + ": non-integer token id `" +
                              std::string(cols[0]) + "`");
        }
        if (current.tokens.empty() && pending_new_doc) {
            current.starts_new_doc = true;
            pending_new_doc = false;
        }
        if (id != static_cast<int>(current.tokens.size()) + 1) {
            throw input_error("line " + std::to_string(line_no) +
                              ": token ids not consecutive from 1 (got " + std::to_string(id) +
                              ", expected " + std::to_string(current.tokens.size() + 1) + ")");
        }
        AnnotatedToken tok;
        tok.form = std::string(cols[1]);
        tok.upos = std::string(cols[3]);
        if (!parse_int(cols[6], tok.head)) {
            throw input_error("line " + std::to_string(line_no) + ": non-integer HEAD `" +
                              std::string(cols[6]) + "`");
        }
        tok.deprel = std::string(cols[7]);
        current.tokens.push_back(std::move(tok));
    }
    finish_sentence(current, sentences, line_no + 1);
    return sentences;
}

std::vector<std::vector<AnnotatedSentence>> parse_conllu_documents(std::istream& in) {
    std::vector<std::vector<AnnotatedSentence>> docs;
    for (auto& sent : parse_conllu(in)) {
        if (docs.empty() || sent.starts_new_doc) docs.emplace_back();
        docs.back().push_back(std::move(sent));
    }
    return docs;
}

Document document_from_annotations(const std::vector<AnnotatedSentence>& sentences) {
    Document doc;
    doc.has_deps = true;
    for (const auto& sent : sentences) {
        Sentence range;
        range.begin = doc.tokens.size();
        for (const auto& ann : sent.tokens) {
            Token tok;
            tok.text = ann.form;
            tok.folded = fold_case(ann.form);
            tok.pos = upos_from_string(ann.upos).value_or(UPos::X);
            switch (tok.pos) {
                case UPos::PUNCT: tok.kind = TokenKind::punct; break;
                case UPos::SYM: tok.kind = TokenKind::symbol; break;
                case UPos::NUM: tok.kind = TokenKind::number; break;
                default: tok.kind = TokenKind::word; break;
            }
            tok.head = ann.head;
            tok.deprel = ann.deprel;
            doc.tokens.push_back(std::move(tok));
        }
        range.end = doc.tokens.size();
        if (range.end > range.begin) doc.sentences.push_back(range);

        if (!doc.text.empty()) doc.text += ' ';
        if (!sent.text.empty()) {
            doc.text += sent.text;
        } else {
            for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
                if (i > 0) doc.text += ' ';
                doc.text += sent.tokens[i].form;
            }
        }
    }
    return doc;
}

} // namespace sdml
