#include "sdml/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "csv_detail.hpp"
#include "sdml/errors.hpp"

namespace sdml {

namespace {

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

uint64_t hash_names(const std::vector<std::string>& names) {
    uint64_t h = 14695981039346656037ull;
    auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 1099511628211ull;
    };
    for (const auto& name : names) {
        for (char c : name) mix(static_cast<unsigned char>(c));
        mix(0x1f);
    }
    return h;
}

} // namespace

void write_feature_matrix(const std::string& path, const std::vector<FeatureVector>& rows,
                          const std::vector<int>& labels) {
    if (rows.size() != labels.size()) {
        throw input_error("feature matrix: " + std::to_string(rows.size()) + " rows but " +
                          std::to_string(labels.size()) + " labels");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write feature matrix: " + path);
    for (auto name : feature_names()) out << name << ',';
    out << "label\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            if (!rows[r].missing[f]) out << format_double(rows[r].values[f]);
            out << ',';
        }
        out << labels[r] << '\n';
    }
    if (!out) throw input_error("write failed: " + path);
}

FeatureMatrix read_feature_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open feature matrix: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto parsed = detail::parse_csv(buffer.str());
    if (parsed.empty()) throw input_error("empty feature matrix: " + path);

    const auto& header = parsed[0];
    if (header.size() != kFeatureCount + 1 || header.back() != "label") {
        throw schema_error("feature matrix header of " + path +
                           " does not match the " + std::to_string(kFeatureCount) +
                           "-feature schema");
    }
    std::vector<std::string> names(header.begin(), header.end() - 1);
    uint64_t file_hash = hash_names(names);
    if (file_hash != schema_hash()) {
        std::ostringstream msg;
        msg << "feature matrix schema hash mismatch for " << path << ": file "
            << std::hex << file_hash << ", expected " << schema_hash();
        throw schema_error(msg.str());
    }

    FeatureMatrix matrix;
    for (std::size_t r = 1; r < parsed.size(); ++r) {
        const auto& row = parsed[r];
        if (row.size() != kFeatureCount + 1) {
            throw input_error("feature matrix row " + std::to_string(r) + ": expected " +
                              std::to_string(kFeatureCount + 1) + " fields, got " +
                              std::to_string(row.size()));
        }
        FeatureVector fv;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            const std::string& cell = row[f];
            if (cell.empty()) continue;
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                throw input_error("feature matrix row " + std::to_string(r) +
                                  ": cannot parse value `" + cell + "`");
            }
            fv.set(f, v);
        }
        const std::string& label_cell = row[kFeatureCount];
        if (label_cell != "0" && label_cell != "1") {
            throw input_error("feature matrix row " + std::to_string(r) +
                              ": label `" + label_cell + "` is not 0/1");
        }
        matrix.rows.push_back(fv);
        matrix.labels.push_back(label_cell == "1" ? 1 : 0);
    }
    return matrix;
}

} // namespace sdml
