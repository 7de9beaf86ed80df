#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sdml/lexicons.hpp"
#include "sdml/text.hpp"

namespace sdml {

inline constexpr std::size_t kFeatureCount = 68;

// Ordered feature names. Groups: descriptive statistics (0-11), readability
// indices (12-19), lexical diversity and information measures (20-27), POS
// proportions (28-44), dependency structure (45-50), cohesion (51-57),
// surface quality (58-67).
const std::array<std::string_view, kFeatureCount>& feature_names();

// FNV-1a over the ordered name list. Pins the column layout of every
// persisted matrix and model; renaming or reordering features changes it.
uint64_t schema_hash();

// Index for a feature name, -1 if unknown.
int feature_index(std::string_view name);

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::array<bool, kFeatureCount> missing;

    FeatureVector() { missing.fill(true); }

    // Non-finite values are recorded as missing.
    void set(std::size_t i, double v);
    std::optional<double> get(std::size_t i) const {
        if (missing[i]) return std::nullopt;
        return values[i];
    }
};

// Aggregate counts feeding the readability formulas.
struct ReadabilityCounts {
    double words = 0;
    double sentences = 0;
    double syllables = 0;
    double letters_digits = 0;
    double letters = 0;
    double polysyllables = 0;   // words with >= 3 syllables
    double long_words = 0;      // words with > 6 letters
};

// The eight readability values in schema order (indices 12-19); nullopt when
// words or sentences are zero.
std::array<std::optional<double>, 8> readability_indices(const ReadabilityCounts& c);

FeatureVector extract_features(const Document& doc,
                               const Lexicons& lex = Lexicons::defaults());

struct StandardizerState {
    std::array<double, kFeatureCount> means{};
    std::array<double, kFeatureCount> stds{};  // population
    uint64_t fitted_on = 0;
    uint64_t schema = 0;
};

// Fits on rows with no missing values; rows with any gap are dropped.
StandardizerState fit_standardizer(const std::vector<FeatureVector>& rows);

// (value - mean) / std per feature. Zero-spread features and missing values
// map to 0.
std::array<double, kFeatureCount> standardize(const FeatureVector& v,
                                              const StandardizerState& s);

} // namespace sdml
