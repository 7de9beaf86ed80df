#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "sdml/convnet.hpp"
#include "sdml/features.hpp"
#include "sdml/forest.hpp"

namespace sdml {

// Binary container: magic `SDML`, u16 format version, u8 model kind
// (1 = forest, 2 = network), u64 schema hash, then seed, decision threshold
// and a training timestamp, followed by `[id u8][length u64][payload]`
// sections. Integers are little-endian; weight payloads are binary64 arrays,
// row-major, dimensions first. Section 0x01 holds the model, section 0x10 an
// optional standardizer. The timestamp is written as zero so identical models
// produce identical files.
inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint8_t kKindForest = 1;
inline constexpr std::uint8_t kKindConvNet = 2;

struct SavedModel {
    std::variant<ForestModel, ConvNetModel> model;
    std::optional<StandardizerState> standardizer;
};

void write_model(const std::string& path, const ForestModel& model,
                 const std::optional<StandardizerState>& standardizer = std::nullopt);
void write_model(const std::string& path, const ConvNetModel& model,
                 const std::optional<StandardizerState>& standardizer = std::nullopt);

// Wrong magic or version: format_error. Truncated, oversized-length or
// internally inconsistent payloads: integrity_error. Unknown section ids are
// skipped.
SavedModel read_model(const std::string& path);

} // namespace sdml
