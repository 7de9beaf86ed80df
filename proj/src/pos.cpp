#include "sdml/pos.hpp"

#include <array>

namespace sdml {

namespace {
constexpr std::array<const char*, kUposCount> kNames = {
    "ADJ",  "ADP",  "ADV",   "AUX",   "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM",  "VERB", "X"};
} // namespace

std::string_view upos_name(UPos pos) {
    return kNames[static_cast<std::size_t>(pos)];
}

std::optional<UPos> upos_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (name == kNames[i]) return static_cast<UPos>(i);
    }
    return std::nullopt;
}

} // namespace sdml
