#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace sdml {

// Universal POS inventory, ordered alphabetically; this order also fixes the
// POS-proportion block of the feature schema.
enum class UPos : std::uint8_t {
    ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM,
    PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X,
};

inline constexpr int kUposCount = 17;

std::string_view upos_name(UPos tag);
std::optional<UPos> upos_from_string(std::string_view name);

} // namespace sdml
