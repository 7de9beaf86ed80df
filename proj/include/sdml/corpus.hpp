#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdml {

struct LabeledRecord {
    std::size_t id = 0;   // position in the source file, 0-based
    std::string text;
    int label = 0;        // 0 = human, 1 = AI
};

struct CsvColumns {
    std::string text = "text";
    std::string label = "generated";
};

// RFC-4180-style reader: quoted fields may hold commas, newlines and doubled
// quotes. Labels accept 0/1 and 0.0/1.0 spellings.
std::vector<LabeledRecord> load_labeled_csv(const std::string& path,
                                            const CsvColumns& columns = {});

void write_labeled_csv(const std::string& path, const std::vector<LabeledRecord>& records,
                       const CsvColumns& columns = {});

struct SplitSpec {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
    uint64_t seed = 42;
};

struct SplitResult {
    std::vector<LabeledRecord> train;
    std::vector<LabeledRecord> validation;
    std::vector<LabeledRecord> test;
};

// Shuffles each class with its own seeded stream, then apportions counts so
// every split stays within one record of exact per-class proportionality.
SplitResult stratified_split(const std::vector<LabeledRecord>& records, const SplitSpec& spec);

} // namespace sdml
