#include "sdml/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "sdml/errors.hpp"
#include "sdml/unicode.hpp"

namespace sdml {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    // descriptive
    "token_count",
    "unique_token_count",
    "proportion_unique_tokens",
    "character_count",
    "sentence_count",
    "mean_token_length",
    "median_token_length",
    "std_token_length",
    "mean_sentence_length_tokens",
    "median_sentence_length_tokens",
    "std_sentence_length_tokens",
    "mean_syllables_per_token",
    // readability
    "flesch_reading_ease",
    "flesch_kincaid_grade",
    "automated_readability_index",
    "smog",
    "gunning_fog",
    "coleman_liau",
    "lix",
    "rix",
    // lexical diversity / information
    "type_token_ratio",
    "root_ttr",
    "log_ttr",
    "hapax_legomena_ratio",
    "token_entropy",
    "normalized_token_entropy",
    "bigram_entropy",
    "character_entropy",
    // POS proportions
    "pos_prop_adj",
    "pos_prop_adp",
    "pos_prop_adv",
    "pos_prop_aux",
    "pos_prop_cconj",
    "pos_prop_det",
    "pos_prop_intj",
    "pos_prop_noun",
    "pos_prop_num",
    "pos_prop_part",
    "pos_prop_pron",
    "pos_prop_propn",
    "pos_prop_punct",
    "pos_prop_sconj",
    "pos_prop_sym",
    "pos_prop_verb",
    "pos_prop_x",
    // dependency structure
    "mean_dep_distance",
    "std_dep_distance",
    "prop_adjacent_deps",
    "mean_tree_depth",
    "max_tree_depth",
    "mean_clausal_relations_per_sentence",
    // cohesion
    "connective_density",
    "pronoun_density",
    "first_person_pronoun_proportion",
    "demonstrative_density",
    "definite_article_density",
    "adjacent_sentence_overlap_mean",
    "adjacent_sentence_overlap_std",
    // surface quality
    "punctuation_density",
    "comma_density",
    "stop_word_proportion",
    "symbol_to_word_ratio",
    "duplicate_word_bigram_fraction",
    "duplicate_sentence_fraction",
    "oov_proportion",
    "sentence_length_cv",
    "ellipsis_bullet_density",
    "uppercase_token_proportion",
};

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double population_std(const std::vector<double>& xs, double mean) {
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

template <typename Map>
double entropy_bits(const Map& freq, double total) {
    double h = 0.0;
    for (const auto& [key, count] : freq) {
        double p = static_cast<double>(count) / total;
        h -= p * std::log2(p);
    }
    return h;
}

const std::unordered_set<std::string>& clausal_relations() {
    static const std::unordered_set<std::string> set = {
        "ccomp", "xcomp", "advcl", "acl", "csubj", "relcl", "acl:relcl"};
    return set;
}

bool is_comma_token(const Token& tok) {
    return tok.kind == TokenKind::punct && tok.text[0] == ',';
}

bool is_ellipsis_or_bullet(const Token& tok) {
    if (tok.kind != TokenKind::punct) return false;
    std::size_t i = 0;
    codepoint first = decode_utf8(tok.text, i);
    if (first == 0x2026) return true;                      // horizontal ellipsis
    if (first == '.') return codepoint_count(tok.text) >= 3;
    if (tok.line_initial && codepoint_count(tok.text) == 1) {
        return first == 0x2022 || first == '*' || first == '-' || first == 0xB7;
    }
    return false;
}

bool is_uppercase_word(const Token& tok) {
    if (codepoint_count(tok.text) < 2) return false;
    bool has_letter = false;
    std::size_t i = 0;
    while (i < tok.text.size()) {
        codepoint cp = decode_utf8(tok.text, i);
        if (is_letter(cp)) {
            has_letter = true;
            if (!is_upper(cp)) return false;
        }
    }
    return has_letter;
}

} // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() {
    return kFeatureNames;
}

uint64_t schema_hash() {
    static const uint64_t hash = [] {
        uint64_t h = 14695981039346656037ull;
        auto mix = [&h](unsigned char byte) {
            h ^= byte;
            h *= 1099511628211ull;
        };
        for (const auto& name : kFeatureNames) {
            for (char c : name) mix(static_cast<unsigned char>(c));
            mix(0x1f);
        }
        return h;
    }();
    return hash;
}

int feature_index(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
        if (kFeatureNames[i] == name) return static_cast<int>(i);
    }
    return -1;
}

void FeatureVector::set(std::size_t i, double v) {
    if (std::isfinite(v)) {
        values[i] = v;
        missing[i] = false;
    } else {
        values[i] = 0.0;
        missing[i] = true;
    }
}

std::array<std::optional<double>, 8> readability_indices(const ReadabilityCounts& c) {
    std::array<std::optional<double>, 8> out;
    if (c.words <= 0 || c.sentences <= 0) return out;
    const double wps = c.words / c.sentences;
    const double spw = c.syllables / c.words;
    out[0] = 206.835 - 1.015 * wps - 84.6 * spw;
    out[1] = 0.39 * wps + 11.8 * spw - 15.59;
    out[2] = 4.71 * (c.letters_digits / c.words) + 0.5 * wps - 21.43;
    out[3] = 1.0430 * std::sqrt(c.polysyllables * 30.0 / c.sentences) + 3.1291;
    out[4] = 0.4 * (wps + 100.0 * c.polysyllables / c.words);
    out[5] = 0.0588 * (100.0 * c.letters / c.words) -
             0.296 * (100.0 * c.sentences / c.words) - 15.8;
    out[6] = wps + 100.0 * c.long_words / c.words;
    out[7] = c.long_words / c.sentences;
    return out;
}

FeatureVector extract_features(const Document& doc, const Lexicons& lex) {
    FeatureVector fv;
    const auto& toks = doc.tokens;
    const double token_count = static_cast<double>(toks.size());
    const double sentence_count = static_cast<double>(doc.sentences.size());

    std::vector<std::size_t> lexical;  // word + number tokens
    std::vector<std::size_t> words;    // word tokens only
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind == TokenKind::word || toks[i].kind == TokenKind::number) {
            lexical.push_back(i);
        }
        if (toks[i].kind == TokenKind::word) words.push_back(i);
    }

    // --- descriptive ---
    fv.set(0, token_count);
    {
        std::unordered_set<std::string> unique;
        for (const auto& t : toks) unique.insert(t.folded);
        fv.set(1, static_cast<double>(unique.size()));
    }
    fv.set(3, static_cast<double>(codepoint_count(doc.text)));
    fv.set(4, sentence_count);

    std::vector<double> sentence_lengths;
    for (const auto& s : doc.sentences) {
        sentence_lengths.push_back(static_cast<double>(s.end - s.begin));
    }

    std::vector<int> lexical_syllables;
    if (!lexical.empty()) {
        fv.set(2, fv.values[1] / token_count);

        std::vector<double> lengths;
        std::vector<double> syllables;
        for (std::size_t i : lexical) {
            lengths.push_back(static_cast<double>(codepoint_count(toks[i].text)));
            int syl = count_syllables(toks[i].text);
            lexical_syllables.push_back(syl);
            syllables.push_back(static_cast<double>(syl));
        }
        double len_mean = mean_of(lengths);
        fv.set(5, len_mean);
        fv.set(6, median_of(lengths));
        fv.set(7, population_std(lengths, len_mean));

        double sl_mean = mean_of(sentence_lengths);
        fv.set(8, sl_mean);
        fv.set(9, median_of(sentence_lengths));
        fv.set(10, population_std(sentence_lengths, sl_mean));

        fv.set(11, mean_of(syllables));
    }

    // --- readability ---
    if (!lexical.empty() && sentence_count > 0) {
        ReadabilityCounts rc;
        rc.words = static_cast<double>(lexical.size());
        rc.sentences = sentence_count;
        for (std::size_t k = 0; k < lexical.size(); ++k) {
            const Token& t = toks[lexical[k]];
            int syl = lexical_syllables[k];
            rc.syllables += syl;
            if (syl >= 3) rc.polysyllables += 1;
            std::size_t letters = 0;
            std::size_t i = 0;
            while (i < t.text.size()) {
                codepoint cp = decode_utf8(t.text, i);
                if (is_letter(cp)) {
                    ++letters;
                    rc.letters += 1;
                    rc.letters_digits += 1;
                } else if (is_digit(cp)) {
                    rc.letters_digits += 1;
                }
            }
            if (letters > 6) rc.long_words += 1;
        }
        auto indices = readability_indices(rc);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i]) fv.set(12 + i, *indices[i]);
        }
    }

    // --- lexical diversity / information ---
    std::unordered_map<std::string, std::size_t> bigram_freq;
    double bigram_total = 0;
    for (const auto& s : doc.sentences) {
        const std::string* prev = nullptr;
        for (std::size_t i = s.begin; i < s.end; ++i) {
            if (toks[i].kind != TokenKind::word) continue;
            if (prev) {
                ++bigram_freq[*prev + '\x1f' + toks[i].folded];
                bigram_total += 1;
            }
            prev = &toks[i].folded;
        }
    }

    if (!words.empty()) {
        const double n = static_cast<double>(words.size());
        std::unordered_map<std::string, std::size_t> freq;
        for (std::size_t i : words) ++freq[toks[i].folded];
        const double u = static_cast<double>(freq.size());

        fv.set(20, u / n);
        fv.set(21, u / std::sqrt(n));
        if (n > 1) fv.set(22, std::log(u) / std::log(n));
        std::size_t hapax = 0;
        for (const auto& [w, c] : freq) {
            if (c == 1) ++hapax;
        }
        fv.set(23, static_cast<double>(hapax) / u);

        double h = entropy_bits(freq, n);
        fv.set(24, h);
        if (u > 1) fv.set(25, h / std::log2(u));

        if (bigram_total > 0) fv.set(26, entropy_bits(bigram_freq, bigram_total));

        std::unordered_map<codepoint, std::size_t> char_freq;
        double char_total = 0;
        for (std::size_t i : words) {
            const std::string& f = toks[i].folded;
            std::size_t pos = 0;
            while (pos < f.size()) {
                ++char_freq[decode_utf8(f, pos)];
                char_total += 1;
            }
        }
        if (char_total > 0) fv.set(27, entropy_bits(char_freq, char_total));
    }

    // --- POS proportions ---
    if (!toks.empty()) {
        std::array<std::size_t, kUposCount> counts{};
        for (const auto& t : toks) ++counts[static_cast<std::size_t>(t.pos)];
        for (std::size_t i = 0; i < kUposCount; ++i) {
            fv.set(28 + i, static_cast<double>(counts[i]) / token_count);
        }
    }

    // --- dependency structure ---
    if (doc.has_deps && !doc.sentences.empty()) {
        std::vector<double> distances;
        std::vector<double> sentence_max_depths;
        std::vector<double> clausal_counts;
        bool valid = true;
        for (const auto& s : doc.sentences) {
            const int len = static_cast<int>(s.end - s.begin);
            double clausal = 0;
            double max_depth = 0;
            for (int p = 1; p <= len && valid; ++p) {
                const Token& t = toks[s.begin + static_cast<std::size_t>(p - 1)];
                if (t.head < 0 || t.head > len) {
                    valid = false;
                    break;
                }
                if (t.head != 0) distances.push_back(std::abs(p - t.head));
                if (clausal_relations().count(t.deprel)) clausal += 1;
                int depth = 0;
                int cursor = t.head;
                while (cursor != 0 && depth <= len) {
                    ++depth;
                    cursor = toks[s.begin + static_cast<std::size_t>(cursor - 1)].head;
                }
                if (depth > len) {
                    valid = false;
                    break;
                }
                max_depth = std::max(max_depth, static_cast<double>(depth));
            }
            if (!valid) break;
            sentence_max_depths.push_back(max_depth);
            clausal_counts.push_back(clausal);
        }
        if (valid) {
            if (!distances.empty()) {
                double m = mean_of(distances);
                fv.set(45, m);
                fv.set(46, population_std(distances, m));
                std::size_t adjacent = 0;
                for (double d : distances) {
                    if (d == 1.0) ++adjacent;
                }
                fv.set(47, static_cast<double>(adjacent) / static_cast<double>(distances.size()));
            }
            fv.set(48, mean_of(sentence_max_depths));
            fv.set(49, *std::max_element(sentence_max_depths.begin(), sentence_max_depths.end()));
            fv.set(50, mean_of(clausal_counts));
        }
    }

    // --- cohesion ---
    if (!words.empty()) {
        const double n = static_cast<double>(words.size());
        double connectives = 0, pronouns = 0, first_person = 0, demonstratives = 0,
               definite = 0;
        for (std::size_t i : words) {
            const std::string& w = toks[i].folded;
            if (lex.connectives.count(w)) connectives += 1;
            if (lex.pronouns.count(w)) pronouns += 1;
            if (lex.first_person.count(w)) first_person += 1;
            if (lex.demonstratives.count(w)) demonstratives += 1;
            if (w == "the") definite += 1;
        }
        fv.set(51, connectives / n);
        fv.set(52, pronouns / n);
        fv.set(53, first_person / n);
        fv.set(54, demonstratives / n);
        fv.set(55, definite / n);

        if (doc.sentences.size() >= 2) {
            std::vector<std::unordered_set<std::string>> content_sets;
            for (const auto& s : doc.sentences) {
                std::unordered_set<std::string> set;
                for (std::size_t i = s.begin; i < s.end; ++i) {
                    const Token& t = toks[i];
                    if (t.kind != TokenKind::word && t.kind != TokenKind::number) continue;
                    if (lex.stop_words.count(t.folded)) continue;
                    set.insert(t.folded);
                }
                content_sets.push_back(std::move(set));
            }
            std::vector<double> overlaps;
            for (std::size_t i = 0; i + 1 < content_sets.size(); ++i) {
                const auto& a = content_sets[i];
                const auto& b = content_sets[i + 1];
                if (a.empty() && b.empty()) {
                    overlaps.push_back(1.0);
                    continue;
                }
                std::size_t inter = 0;
                for (const auto& w : a) inter += b.count(w);
                std::size_t uni = a.size() + b.size() - inter;
                overlaps.push_back(static_cast<double>(inter) / static_cast<double>(uni));
            }
            double m = mean_of(overlaps);
            fv.set(56, m);
            fv.set(57, population_std(overlaps, m));
        }
    }

    // --- surface quality ---
    if (!toks.empty()) {
        double punct = 0, commas = 0, symbols = 0;
        for (const auto& t : toks) {
            if (t.kind == TokenKind::punct) punct += 1;
            if (t.kind == TokenKind::symbol) symbols += 1;
            if (is_comma_token(t)) commas += 1;
        }
        fv.set(58, punct / token_count);
        fv.set(59, commas / token_count);

        if (!words.empty()) {
            const double n = static_cast<double>(words.size());
            double stops = 0, oov = 0, upper = 0;
            for (std::size_t i : words) {
                if (lex.stop_words.count(toks[i].folded)) stops += 1;
                if (!lex.frequent_words.count(toks[i].folded)) oov += 1;
                if (is_uppercase_word(toks[i])) upper += 1;
            }
            fv.set(60, stops / n);
            fv.set(61, symbols / n);
            fv.set(64, oov / n);
            fv.set(67, upper / n);
        }

        if (bigram_total > 0) {
            fv.set(62, 1.0 - static_cast<double>(bigram_freq.size()) / bigram_total);
        }

        if (!doc.sentences.empty()) {
            std::unordered_set<std::string> seen;
            double dups = 0;
            for (const auto& s : doc.sentences) {
                std::string key;
                for (std::size_t i = s.begin; i < s.end; ++i) {
                    key += toks[i].folded;
                    key += '\x1f';
                }
                if (!seen.insert(key).second) dups += 1;
            }
            fv.set(63, dups / sentence_count);

            double sl_mean = mean_of(sentence_lengths);
            fv.set(65, population_std(sentence_lengths, sl_mean) / sl_mean);

            double marks = 0;
            for (const auto& t : toks) {
                if (is_ellipsis_or_bullet(t)) marks += 1;
            }
            fv.set(66, marks / sentence_count);
        }
    }

    // Zero word tokens leaves every per-word statistic missing; counts stay
    // present.
    if (lexical.empty()) {
        for (std::size_t i : {2u, 5u, 6u, 7u, 8u, 9u, 10u, 11u}) {
            fv.missing[i] = true;
            fv.values[i] = 0.0;
        }
    }

    return fv;
}

StandardizerState fit_standardizer(const std::vector<FeatureVector>& rows) {
    StandardizerState state;
    state.schema = schema_hash();
    std::vector<const FeatureVector*> complete;
    for (const auto& row : rows) {
        bool ok = true;
        for (bool m : row.missing) {
            if (m) {
                ok = false;
                break;
            }
        }
        if (ok) complete.push_back(&row);
    }
    if (complete.empty()) {
        throw training_error("standardizer fit: all " + std::to_string(rows.size()) +
                             " rows contain missing values");
    }
    const double n = static_cast<double>(complete.size());
    state.fitted_on = complete.size();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double sum = 0.0;
        for (const auto* row : complete) sum += row->values[f];
        double mean = sum / n;
        double acc = 0.0;
        for (const auto* row : complete) {
            double d = row->values[f] - mean;
            acc += d * d;
        }
        state.means[f] = mean;
        state.stds[f] = std::sqrt(acc / n);
    }
    return state;
}

std::array<double, kFeatureCount> standardize(const FeatureVector& v,
                                              const StandardizerState& s) {
    if (s.schema != schema_hash()) {
        throw schema_error("standardizer schema hash mismatch");
    }
    std::array<double, kFeatureCount> out{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (v.missing[f] || s.stds[f] == 0.0) {
            out[f] = 0.0;
        } else {
            out[f] = (v.values[f] - s.means[f]) / s.stds[f];
        }
    }
    return out;
}

} // namespace sdml
