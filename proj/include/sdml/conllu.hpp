#pragma once

#include <istream>
#include <string>
#include <vector>

#include "sdml/text.hpp"

namespace sdml {

struct AnnotatedToken {
    std::string form;
    std::string upos;
    int head = 0;       // 0 = root, otherwise 1-based index within the sentence
    std::string deprel;
};

struct AnnotatedSentence {
    std::vector<AnnotatedToken> tokens;
    std::string text;            // `# text = ...` metadata when present
    bool starts_new_doc = false; // preceded by a `# newdoc` comment
};

// Reads CoNLL-U: 10 tab-separated columns per token line, `#` comments,
// blank line ends a sentence. Multiword ranges (`3-4`) and empty nodes
// (`5.1`) are skipped. Uses ID, FORM, UPOS, HEAD, DEPREL; validates that ids
// run 1..n, heads are in range, and the head graph is a tree with a single
// root.
std::vector<AnnotatedSentence> parse_conllu(std::istream& in);

// Groups sentences into documents at `# newdoc` markers. Input without any
// marker is one document.
std::vector<std::vector<AnnotatedSentence>> parse_conllu_documents(std::istream& in);

// Builds an analyzed document from gold annotations: tags come from the
// UPOS column, token kinds follow the tags, dependency fields are kept.
Document document_from_annotations(const std::vector<AnnotatedSentence>& sentences);

} // namespace sdml
