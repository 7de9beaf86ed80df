#pragma once

#include <stdexcept>
#include <string>

namespace sdml {

// Error taxonomy mirrored by CLI exit codes:
//   input_error -> 2, schema_error -> 3, format_error / integrity_error -> 4,
//   training_error -> 5.

// Unreadable/malformed inputs: files, CSV rows, CoNLL-U lines, bad flags.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Feature-schema hash disagreement between artifacts.
struct schema_error : std::runtime_error {
    explicit schema_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model container with wrong magic/version/kind.
struct format_error : std::runtime_error {
    explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model container that is structurally damaged (truncation, bad lengths).
struct integrity_error : std::runtime_error {
    explicit integrity_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Training could not produce a model (single-class data, divergence, ...).
struct training_error : std::runtime_error {
    explicit training_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sdml
