#include "sdml/corpus.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csv_detail.hpp"
#include "sdml/errors.hpp"
#include "sdml/rng.hpp"

namespace sdml {

namespace detail {

std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    std::size_t i = 0;
    if (content.rfind("\xEF\xBB\xBF", 0) == 0) i = 3;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        // Blank lines are not records.
        if (row.size() > 1 || !row[0].empty()) rows.push_back(std::move(row));
        row.clear();
        row_started = false;
    };

    for (; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                end_field();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                break;
            default:
                field += c;
                row_started = true;
                break;
        }
    }
    if (row_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace detail

namespace {

using detail::csv_escape;
using detail::parse_csv;

bool parse_binary_label(const std::string& raw, int& out) {
    std::string s = raw;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    if (s == "0" || s == "0.0") { out = 0; return true; }
    if (s == "1" || s == "1.0") { out = 1; return true; }
    return false;
}

bool blank_after_trim(const std::string& text) {
    for (char c : text) {
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r') return false;
    }
    return true;
}

} // namespace

std::vector<LabeledRecord> load_labeled_csv(const std::string& path,
                                            const CsvColumns& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open corpus file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto rows = parse_csv(buffer.str());
    if (rows.empty()) throw input_error("empty corpus: " + path);

    const auto& header = rows[0];
    std::size_t text_col = header.size();
    std::size_t label_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == columns.text) text_col = i;
        if (header[i] == columns.label) label_col = i;
    }
    if (text_col == header.size()) {
        throw input_error("missing column `" + columns.text + "` in " + path);
    }
    if (label_col == header.size()) {
        throw input_error("missing column `" + columns.label + "` in " + path);
    }
    if (rows.size() == 1) throw input_error("empty corpus: " + path + " has no data rows");

    std::vector<LabeledRecord> records;
    records.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::size_t row_no = r;  // 1-based among data rows
        if (row.size() <= text_col || row.size() <= label_col) {
            throw input_error("row " + std::to_string(row_no) + ": has " +
                              std::to_string(row.size()) + " fields, header has " +
                              std::to_string(header.size()));
        }
        LabeledRecord rec;
        rec.id = records.size();
        rec.text = row[text_col];
        if (!parse_binary_label(row[label_col], rec.label)) {
            throw input_error("row " + std::to_string(row_no) + ": cannot parse label `" +
                              row[label_col] + "` as 0/1");
        }
        if (blank_after_trim(rec.text)) {
            throw input_error("row " + std::to_string(row_no) + ": text is empty");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_labeled_csv(const std::string& path, const std::vector<LabeledRecord>& records,
                       const CsvColumns& columns) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write corpus file: " + path);
    out << csv_escape(columns.text) << ',' << csv_escape(columns.label) << '\n';
    for (const auto& rec : records) {
        out << csv_escape(rec.text) << ',' << rec.label << '\n';
    }
    if (!out) throw input_error("write failed: " + path);
}

SplitResult stratified_split(const std::vector<LabeledRecord>& records, const SplitSpec& spec) {
    const std::array<double, 3> fractions = {spec.train, spec.validation, spec.test};
    for (double f : fractions) {
        if (!(f > 0.0)) throw input_error("split fractions must be positive");
    }
    if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
        throw input_error("split fractions must sum to 1");
    }

    SplitResult result;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> indices;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].label == cls) indices.push_back(i);
        }
        if (indices.empty()) {
            throw input_error("cannot stratify: class " + std::to_string(cls) +
                              " has no records");
        }
        SplitMix64 rng(child_seed(spec.seed, static_cast<uint64_t>(cls)));
        shuffle(indices, rng);

        // Largest-remainder apportionment keeps every count within one record
        // of exact proportionality. Leftover seats go to test, then
        // validation, then train.
        const std::size_t n = indices.size();
        std::array<std::size_t, 3> counts;
        std::array<double, 3> remainders;
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            double quota = fractions[static_cast<std::size_t>(s)] * static_cast<double>(n);
            counts[static_cast<std::size_t>(s)] = static_cast<std::size_t>(std::floor(quota));
            remainders[static_cast<std::size_t>(s)] =
                quota - std::floor(quota);
            assigned += counts[static_cast<std::size_t>(s)];
        }
        const std::array<int, 3> preference = {2, 1, 0};  // test, validation, train
        while (assigned < n) {
            int best = -1;
            for (int s : preference) {
                if (best < 0 || remainders[static_cast<std::size_t>(s)] >
                                    remainders[static_cast<std::size_t>(best)]) {
                    best = s;
                }
            }
            ++counts[static_cast<std::size_t>(best)];
            remainders[static_cast<std::size_t>(best)] = -1.0;
            ++assigned;
        }

        std::size_t cursor = 0;
        for (std::size_t k = 0; k < counts[0]; ++k) result.train.push_back(records[indices[cursor++]]);
        for (std::size_t k = 0; k < counts[1]; ++k) result.validation.push_back(records[indices[cursor++]]);
        for (std::size_t k = 0; k < counts[2]; ++k) result.test.push_back(records[indices[cursor++]]);
    }
    return result;
}

} // namespace sdml
