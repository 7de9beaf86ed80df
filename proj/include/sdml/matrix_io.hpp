#pragma once

#include <string>
#include <vector>

#include "sdml/features.hpp"

namespace sdml {

struct FeatureMatrix {
    std::vector<FeatureVector> rows;
    std::vector<int> labels;
};

// Comma-separated text: header of the 68 schema names plus `label`, floats as
// shortest round-trip decimals, missing values as empty fields. Read-back is
// bit-exact.
void write_feature_matrix(const std::string& path, const std::vector<FeatureVector>& rows,
                          const std::vector<int>& labels);

FeatureMatrix read_feature_matrix(const std::string& path);

} // namespace sdml
