#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>

#include "sdml/pos.hpp"

namespace sdml {

// Word lists backing segmentation, the fallback tagger and the lexicon-based
// features. All entries are stored case-folded. The defaults are compiled in;
// each list can be replaced from a plain-text file (one entry per line,
// `#` comments allowed) via the CLI.
struct Lexicons {
    // Sentence segmentation: words whose trailing period is not a boundary.
    std::unordered_set<std::string> abbreviations;
    // Fallback tagger: closed-class word -> UPOS.
    std::unordered_map<std::string, UPos> closed_class;
    std::unordered_set<std::string> stop_words;
    // Cohesion lexicons.
    std::unordered_set<std::string> connectives;
    std::unordered_set<std::string> pronouns;
    std::unordered_set<std::string> first_person;
    std::unordered_set<std::string> demonstratives;
    // Reference vocabulary for the out-of-vocabulary rate.
    std::unordered_set<std::string> frequent_words;

    static const Lexicons& defaults();

    void load_abbreviations(const std::string& path);
    // File format: `word TAG` per line.
    void load_closed_class(const std::string& path);
    void load_stop_words(const std::string& path);
    void load_frequent_words(const std::string& path);
};

} // namespace sdml
