#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "sdml/conllu.hpp"
#include "sdml/convnet.hpp"
#include "sdml/corpus.hpp"
#include "sdml/errors.hpp"
#include "sdml/features.hpp"
#include "sdml/forest.hpp"
#include "sdml/matrix_io.hpp"
#include "sdml/metrics.hpp"
#include "sdml/model_io.hpp"
#include "sdml/rng.hpp"
#include "sdml/text.hpp"

using namespace sdml;

namespace {

struct Global {
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    bool quiet = false;
};

void info(const Global& g, const std::string& line) {
    if (!g.quiet) std::cout << line << "\n";
}

std::string with_commas(std::uint64_t v) {
    std::string digits = std::to_string(v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i != 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

std::string split_stem(const std::string& path) {
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        return path.substr(0, path.size() - 4);
    }
    return path;
}

struct LexiconFlags {
    std::string abbreviations;
    std::string closed_class;
    std::string stop_words;
    std::string frequent_words;

    Lexicons build() const {
        Lexicons lex = Lexicons::defaults();
        if (!abbreviations.empty()) lex.load_abbreviations(abbreviations);
        if (!closed_class.empty()) lex.load_closed_class(closed_class);
        if (!stop_words.empty()) lex.load_stop_words(stop_words);
        if (!frequent_words.empty()) lex.load_frequent_words(frequent_words);
        return lex;
    }

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--abbreviations", abbreviations,
                        "Replace the sentence-segmentation abbreviation list");
        cmd->add_option("--closed-class", closed_class,
                        "Replace the closed-class tag lexicon (word TAG per line)");
        cmd->add_option("--stop-words", stop_words, "Replace the stop-word list");
        cmd->add_option("--frequent-words", frequent_words,
                        "Replace the reference vocabulary for the OOV rate");
    }
};

// Dependency-structure block of the schema; rows missing any of it are
// counted in the extract summary.
bool missing_dependency_features(const FeatureVector& v) {
    for (std::size_t i = 45; i <= 50; ++i) {
        if (v.missing[i]) return true;
    }
    return false;
}

struct ExtractResult {
    std::vector<FeatureVector> rows;
    std::vector<int> labels;
    std::size_t missing_dep_rows = 0;
    std::vector<std::string> warnings;
};

ExtractResult extract_corpus(const std::vector<LabeledRecord>& records,
                             const std::vector<std::vector<AnnotatedSentence>>* annotations,
                             const Lexicons& lex, std::size_t jobs) {
    ExtractResult out;
    out.rows.resize(records.size());
    out.labels.resize(records.size());
    std::vector<std::string> warnings(records.size());
    std::vector<std::exception_ptr> errors(std::max<std::size_t>(jobs, 1));

    auto worker = [&](std::size_t worker_index, std::size_t stride) {
        try {
            for (std::size_t i = worker_index; i < records.size(); i += stride) {
                const LabeledRecord& rec = records[i];
                Document doc = annotations ? document_from_annotations((*annotations)[i])
                                           : analyze(rec.text, lex);
                if (doc.tokens.empty()) {
                    warnings[i] = "warning: record " + std::to_string(rec.id) +
                                  " has no tokens; features are mostly missing";
                }
                out.rows[i] = extract_features(doc, lex);
                out.labels[i] = rec.label;
            }
        } catch (...) {
            errors[worker_index] = std::current_exception();
        }
    };

    if (jobs <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker, w, jobs);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    for (auto& w : warnings) {
        if (!w.empty()) out.warnings.push_back(std::move(w));
    }
    for (const FeatureVector& v : out.rows) {
        if (missing_dependency_features(v)) ++out.missing_dep_rows;
    }
    return out;
}

// Training policy: rows with any missing value are dropped before the
// standardizer is fitted.
struct TrainingMatrix {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    std::size_t dropped = 0;
};

TrainingMatrix standardized_complete_rows(const FeatureMatrix& m, const StandardizerState& s) {
    TrainingMatrix out;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        const FeatureVector& row = m.rows[i];
        if (std::any_of(row.missing.begin(), row.missing.end(), [](bool b) { return b; })) {
            ++out.dropped;
            continue;
        }
        auto z = standardize(row, s);
        out.x.emplace_back(z.begin(), z.end());
        out.y.push_back(m.labels[i]);
    }
    return out;
}

std::vector<FeatureVector> complete_rows(const FeatureMatrix& m) {
    std::vector<FeatureVector> rows;
    for (const FeatureVector& row : m.rows) {
        if (std::none_of(row.missing.begin(), row.missing.end(), [](bool b) { return b; })) {
            rows.push_back(row);
        }
    }
    return rows;
}

double accuracy_of(const std::vector<int>& y, const std::vector<double>& probs,
                   double threshold) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        correct += static_cast<std::size_t>((probs[i] > threshold) == (y[i] == 1));
    }
    return y.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(y.size());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw input_error("cannot write file: " + path);
    out << content;
    if (!out) throw input_error("cannot write file: " + path);
}

std::string depth_text(const std::optional<std::size_t>& d) {
    return d ? std::to_string(*d) : std::string("none");
}

// ---------- split ----------

bool is_newdoc_line(const std::string& line) {
    if (line.empty() || line[0] != '#') return false;
    std::size_t at = 1;
    while (at < line.size() && (line[at] == ' ' || line[at] == '\t')) ++at;
    return line.compare(at, 6, "newdoc") == 0;
}

// Raw `# newdoc`-delimited blocks, one per corpus record, so the annotation
// file can be partitioned alongside the labeled rows.
std::vector<std::string> annotation_blocks(const std::string& path, std::size_t expected) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open annotation file: " + path);
    std::vector<std::string> blocks;
    std::string line;
    bool seen_marker = false;
    while (std::getline(in, line)) {
        std::string physical = line;
        if (!physical.empty() && physical.back() == '\r') physical.pop_back();
        if (is_newdoc_line(physical)) {
            seen_marker = true;
            blocks.emplace_back();
        } else if (!seen_marker && !blank(physical)) {
            throw input_error("annotation file has content before the first `# newdoc` marker");
        }
        if (seen_marker) blocks.back() += line + "\n";
    }
    if (blocks.size() != expected) {
        const std::size_t id = std::min(blocks.size(), expected);
        throw input_error("annotation/corpus misalignment at record " + std::to_string(id) +
                          ": " + std::to_string(blocks.size()) + " annotated documents for " +
                          std::to_string(expected) + " corpus rows");
    }
    for (std::string& b : blocks) {
        if (b.size() < 2 || b.compare(b.size() - 2, 2, "\n\n") != 0) b += "\n";
    }
    return blocks;
}

void run_split(const Global& g, const std::string& input, const std::string& fractions,
               const std::string& conllu_path, const CsvColumns& cols, std::string stem) {
    SplitSpec spec;
    spec.seed = g.seed;
    if (!fractions.empty()) {
        double a = 0, b = 0, c = 0;
        char extra = 0;
        if (std::sscanf(fractions.c_str(), "%lf,%lf,%lf%c", &a, &b, &c, &extra) != 3) {
            throw input_error("--fractions expects three comma-separated numbers");
        }
        spec.train = a;
        spec.validation = b;
        spec.test = c;
    }

    auto records = load_labeled_csv(input, cols);
    std::vector<std::string> blocks;
    if (!conllu_path.empty()) blocks = annotation_blocks(conllu_path, records.size());

    SplitResult split = stratified_split(records, spec);
    if (stem.empty()) stem = split_stem(input);

    struct Part {
        const char* name;
        const std::vector<LabeledRecord>* records;
        std::string suffix;
    };
    const Part parts[] = {{"train", &split.train, ".train.csv"},
                          {"validation", &split.validation, ".val.csv"},
                          {"test", &split.test, ".test.csv"}};
    for (const Part& part : parts) {
        write_labeled_csv(stem + part.suffix, *part.records, cols);
        std::size_t ai = 0;
        for (const LabeledRecord& r : *part.records) ai += static_cast<std::size_t>(r.label);
        info(g, std::string(part.name) + ": " + std::to_string(part.records->size()) +
                    " rows (" + std::to_string(part.records->size() - ai) + " human, " +
                    std::to_string(ai) + " ai) -> " + stem + part.suffix);
        if (!blocks.empty()) {
            const std::string ann_path =
                stem + part.suffix.substr(0, part.suffix.size() - 4) + ".conllu";
            std::string content;
            for (const LabeledRecord& r : *part.records) content += blocks[r.id];
            write_text_file(ann_path, content);
            info(g, std::string(part.name) + " annotations -> " + ann_path);
        }
    }
}

// ---------- extract ----------

void run_extract(const Global& g, const std::string& input, const std::string& conllu_path,
                 const std::string& output, const CsvColumns& cols, const LexiconFlags& lexf) {
    auto records = load_labeled_csv(input, cols);

    std::optional<std::vector<std::vector<AnnotatedSentence>>> annotations;
    if (!conllu_path.empty()) {
        std::ifstream in(conllu_path);
        if (!in) throw input_error("cannot open annotation file: " + conllu_path);
        annotations = parse_conllu_documents(in);
        if (annotations->size() != records.size()) {
            const std::size_t id = std::min(annotations->size(), records.size());
            throw input_error("annotation/corpus misalignment at record " + std::to_string(id) +
                              ": " + std::to_string(annotations->size()) +
                              " annotated documents for " + std::to_string(records.size()) +
                              " corpus rows");
        }
    }

    Lexicons lex = lexf.build();
    ExtractResult result =
        extract_corpus(records, annotations ? &*annotations : nullptr, lex, g.jobs);
    for (const std::string& w : result.warnings) std::cerr << w << "\n";

    const std::string out_path = output.empty() ? split_stem(input) + ".features.csv" : output;
    write_feature_matrix(out_path, result.rows, result.labels);
    info(g, "extracted " + std::to_string(result.rows.size()) + " rows (" +
                std::to_string(result.missing_dep_rows) +
                " with missing dependency features) -> " + out_path);
}

// ---------- train ----------

struct TrainFlags {
    std::string model = "forest";
    std::string train_path;
    std::string val_path;
    std::string output = "model.sdml";
    std::string history;
    double threshold = 0.5;
    // forest
    std::size_t trees = 100;
    std::optional<std::size_t> depth;
    std::size_t subset = 0;
    bool grid = false;
    std::size_t folds = 5;
    // network
    std::size_t epochs = 100;
    std::size_t batch = 32;
    std::size_t patience = 5;
    double learning_rate = 1e-3;
};

std::string history_path_of(const TrainFlags& f) {
    return f.history.empty() ? f.output + ".history.csv" : f.history;
}

void run_train_forest(const Global& g, const TrainFlags& f) {
    FeatureMatrix train_m = read_feature_matrix(f.train_path);
    StandardizerState scaler = fit_standardizer(train_m.rows);
    TrainingMatrix train_set = standardized_complete_rows(train_m, scaler);
    if (train_set.x.empty()) {
        throw training_error("all " + std::to_string(train_set.dropped) +
                             " training rows were dropped for missing values");
    }
    if (train_set.dropped > 0) {
        info(g, "dropped " + std::to_string(train_set.dropped) + " rows with missing values");
    }

    std::string history = "n_estimators,max_depth,feature_subset,accuracy\n";
    ForestConfig cfg;
    cfg.seed = g.seed;
    cfg.n_jobs = g.jobs;
    cfg.threshold = f.threshold;
    if (f.grid) {
        GridSpec spec;
        spec.folds = f.folds;
        spec.seed = g.seed;
        GridResult grid = grid_search(train_set.x, train_set.y, spec);
        for (const GridCell& cell : grid.cells) {
            history += std::to_string(cell.config.n_estimators) + "," +
                       depth_text(cell.config.max_depth) + "," +
                       std::to_string(cell.config.feature_subset_size) + "," +
                       fixed6(cell.accuracy) + "\n";
        }
        cfg.n_estimators = grid.best.n_estimators;
        cfg.max_depth = grid.best.max_depth;
        cfg.feature_subset_size = grid.best.feature_subset_size;
        info(g, "grid best: trees=" + std::to_string(cfg.n_estimators) + " depth=" +
                    depth_text(cfg.max_depth) + " (cross-validation over " +
                    std::to_string(grid.cells.size()) + " cells)");
    } else {
        cfg.n_estimators = f.trees;
        cfg.max_depth = f.depth;
        cfg.feature_subset_size = f.subset;
    }

    ForestModel model = fit_forest(train_set.x, train_set.y, cfg);
    std::vector<double> train_probs;
    train_probs.reserve(train_set.x.size());
    for (const auto& row : train_set.x) train_probs.push_back(predict_proba(model, row));
    const double train_acc = accuracy_of(train_set.y, train_probs, model.threshold);
    info(g, "training accuracy: " + fixed4(train_acc));
    if (!f.grid) {
        history += std::to_string(cfg.n_estimators) + "," + depth_text(cfg.max_depth) + "," +
                   std::to_string(model.feature_subset_size) + "," + fixed6(train_acc) + "\n";
    }

    if (!f.val_path.empty()) {
        FeatureMatrix val_m = read_feature_matrix(f.val_path);
        TrainingMatrix val_set = standardized_complete_rows(val_m, scaler);
        std::vector<double> val_probs;
        val_probs.reserve(val_set.x.size());
        for (const auto& row : val_set.x) val_probs.push_back(predict_proba(model, row));
        info(g, "validation accuracy: " +
                    fixed4(accuracy_of(val_set.y, val_probs, model.threshold)));
    }

    write_model(f.output, model, scaler);
    write_text_file(history_path_of(f), history);
    info(g, "model -> " + f.output);
}

void run_train_convnet(const Global& g, const TrainFlags& f) {
    if (f.val_path.empty()) {
        throw input_error("--model convnet requires --val for early stopping");
    }
    FeatureMatrix train_m = read_feature_matrix(f.train_path);
    FeatureMatrix val_m = read_feature_matrix(f.val_path);
    StandardizerState scaler = fit_standardizer(train_m.rows);
    TrainingMatrix train_set = standardized_complete_rows(train_m, scaler);
    TrainingMatrix val_set = standardized_complete_rows(val_m, scaler);
    if (train_set.x.empty() || val_set.x.empty()) {
        throw training_error("all rows of a split were dropped for missing values");
    }
    if (train_set.dropped + val_set.dropped > 0) {
        info(g, "dropped " + std::to_string(train_set.dropped + val_set.dropped) +
                    " rows with missing values");
    }

    TrainConfig cfg;
    cfg.max_epochs = f.epochs;
    cfg.batch_size = f.batch;
    cfg.patience = f.patience;
    cfg.learning_rate = f.learning_rate;
    cfg.seed = g.seed;

    ConvNetModel net = build_network(g.seed);
    net.threshold = f.threshold;
    TrainResult result =
        train(std::move(net), train_set.x, train_set.y, val_set.x, val_set.y, cfg);

    std::string history = "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
    for (std::size_t e = 0; e < result.history.size(); ++e) {
        const EpochStats& s = result.history[e];
        history += std::to_string(e + 1) + "," + fixed6(s.train_loss) + "," +
                   fixed6(s.train_accuracy) + "," + fixed6(s.val_loss) + "," +
                   fixed6(s.val_accuracy) + "\n";
    }

    std::vector<double> val_probs;
    val_probs.reserve(val_set.x.size());
    for (const auto& row : val_set.x) val_probs.push_back(predict(result.model, row).first);
    info(g, "epochs run: " + std::to_string(result.history.size()));
    info(g, "validation loss: " + fixed4(log_loss(val_set.y, val_probs)));
    info(g, "validation accuracy: " +
                fixed4(accuracy_of(val_set.y, val_probs, result.model.threshold)));

    write_model(f.output, result.model, scaler);
    write_text_file(history_path_of(f), history);
    info(g, "model -> " + f.output);
}

void run_train(const Global& g, const TrainFlags& f) {
    if (f.model == "forest") {
        run_train_forest(g, f);
    } else if (f.model == "convnet") {
        run_train_convnet(g, f);
    } else {
        throw input_error("unknown model kind `" + f.model + "` (expected forest or convnet)");
    }
}

// ---------- shared model loading ----------

struct LoadedModel {
    SavedModel saved;
    double threshold = 0.5;
    std::uint64_t schema = 0;

    const StandardizerState& scaler() const {
        if (!saved.standardizer) {
            throw integrity_error("model container has no standardizer section");
        }
        return *saved.standardizer;
    }

    double probability(const std::array<double, kFeatureCount>& z) const {
        const std::vector<double> x(z.begin(), z.end());
        if (const ForestModel* forest = std::get_if<ForestModel>(&saved.model)) {
            return predict_proba(*forest, x);
        }
        return forward(std::get<ConvNetModel>(saved.model), x, Mode::infer);
    }
};

LoadedModel load_model(const std::string& path) {
    LoadedModel m{read_model(path)};
    if (const ForestModel* forest = std::get_if<ForestModel>(&m.saved.model)) {
        m.threshold = forest->threshold;
        m.schema = forest->schema;
    } else {
        const ConvNetModel& net = std::get<ConvNetModel>(m.saved.model);
        m.threshold = net.threshold;
        m.schema = net.schema;
    }
    return m;
}

void check_schema(const LoadedModel& m) {
    if (m.schema != schema_hash()) {
        throw schema_error("model schema " + hex64(m.schema) +
                           " does not match feature schema " + hex64(schema_hash()));
    }
}

// ---------- evaluate ----------

void run_evaluate(const Global& g, const std::string& model_path, const std::string& features,
                  const std::string& format, const std::string& output) {
    if (format != "text" && format != "json") {
        throw input_error("--format expects text or json");
    }
    LoadedModel model = load_model(model_path);
    check_schema(model);
    const StandardizerState& scaler = model.scaler();

    FeatureMatrix m = read_feature_matrix(features);
    std::vector<double> probs;
    probs.reserve(m.rows.size());
    for (const FeatureVector& row : m.rows) {
        probs.push_back(model.probability(standardize(row, scaler)));
    }

    EvalReport report = evaluate(m.labels, probs, model.threshold);
    std::string rendered =
        format == "json" ? render_report_json(report) + "\n" : render_report_text(report);
    std::cout << rendered;
    if (!output.empty()) write_text_file(output, rendered);
}

// ---------- predict ----------

std::string read_stream(std::istream& in) {
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void run_predict(const std::string& model_path, const std::vector<std::string>& inputs,
                 const LexiconFlags& lexf) {
    LoadedModel model = load_model(model_path);
    check_schema(model);
    const StandardizerState& scaler = model.scaler();
    Lexicons lex = lexf.build();

    auto emit = [&](const std::string& text, const std::string& source) {
        Document doc = analyze(text, lex);
        FeatureVector features = extract_features(doc, lex);
        const double p = model.probability(standardize(features, scaler));
        const int label = p > model.threshold ? 1 : 0;
        std::cout << fixed6(p) << "\t" << label << "\t" << source << "\n";
    };

    if (inputs.empty()) {
        emit(read_stream(std::cin), "stdin");
        return;
    }
    for (const std::string& path : inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw input_error("cannot open input: " + path);
        emit(read_stream(in), path);
    }
}

// ---------- inspect ----------

void run_inspect(const std::string& model_path) {
    LoadedModel model = load_model(model_path);
    if (const ConvNetModel* net = std::get_if<ConvNetModel>(&model.saved.model)) {
        std::printf("%-12s %14s\n", "layer", "parameters");
        for (const LayerParams& layer : parameter_audit(*net)) {
            std::printf("%-12s %14s\n", layer.name.c_str(), with_commas(layer.count).c_str());
        }
        std::printf("%-12s %14s\n", "total", with_commas(parameter_count(*net)).c_str());
        std::printf("input width: %zu\n", net->shape.features);
        std::printf("seed: %llu\n", static_cast<unsigned long long>(net->seed));
        std::printf("threshold: %s\n", fixed4(net->threshold).c_str());
        std::printf("schema: %s\n", hex64(net->schema).c_str());
        return;
    }

    const ForestModel& forest = std::get<ForestModel>(model.saved.model);
    std::size_t min_depth = SIZE_MAX, max_depth = 0, depth_sum = 0;
    for (const Tree& tree : forest.trees) {
        const std::size_t d = tree_depth(tree);
        min_depth = std::min(min_depth, d);
        max_depth = std::max(max_depth, d);
        depth_sum += d;
    }
    const double mean_depth =
        forest.trees.empty() ? 0.0
                             : static_cast<double>(depth_sum) / static_cast<double>(forest.trees.size());
    std::printf("trees: %zu\n", forest.trees.size());
    std::printf("depth: min %zu, mean %.1f, max %zu\n", min_depth, mean_depth, max_depth);
    std::printf("feature subset per split: %zu\n", forest.feature_subset_size);
    std::printf("seed: %llu\n", static_cast<unsigned long long>(forest.seed));
    std::printf("threshold: %s\n", fixed4(forest.threshold).c_str());
    std::printf("schema: %s\n", hex64(forest.schema).c_str());

    std::vector<double> importances = feature_importances(forest);
    std::vector<std::size_t> order(importances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return importances[a] > importances[b];
    });
    std::printf("top feature importances:\n");
    const std::size_t shown = std::min<std::size_t>(order.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) {
        const std::size_t idx = order[i];
        const std::string name = forest.n_features == kFeatureCount
                                     ? std::string(feature_names()[idx])
                                     : "feature_" + std::to_string(idx);
        std::printf("  %-28s %.6f\n", name.c_str(), importances[idx]);
    }
}

// ---------- schema ----------

void run_schema() {
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::printf("%2zu  %s\n", i, std::string(names[i]).c_str());
    }
    std::printf("hash: %s\n", hex64(schema_hash()).c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stylometric detector for machine-generated text"};
    app.require_subcommand(1);

    Global global;
    app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
    app.add_option("--jobs", global.jobs, "Worker threads (results match --jobs 1)")
        ->capture_default_str();
    app.add_flag("--quiet", global.quiet, "Suppress informational output");

    // split
    auto* split_cmd = app.add_subcommand("split", "Stratified train/validation/test split");
    split_cmd->fallthrough();
    std::string split_input, split_fractions, split_conllu, split_stem_flag;
    CsvColumns split_cols;
    split_cmd->add_option("input", split_input, "Labeled CSV")->required();
    split_cmd->add_option("--fractions", split_fractions, "Comma-separated fractions")
        ->default_str("0.8,0.1,0.1");
    split_cmd->add_option("--conllu", split_conllu,
                          "Annotation file to partition alongside the rows");
    split_cmd->add_option("--text-column", split_cols.text)->capture_default_str();
    split_cmd->add_option("--label-column", split_cols.label)->capture_default_str();
    split_cmd->add_option("--out-stem", split_stem_flag, "Output stem (default: input stem)");

    // extract
    auto* extract_cmd = app.add_subcommand("extract", "Compute the feature matrix");
    extract_cmd->fallthrough();
    std::string extract_input, extract_conllu, extract_output;
    CsvColumns extract_cols;
    LexiconFlags extract_lex;
    extract_cmd->add_option("input", extract_input, "Labeled CSV")->required();
    extract_cmd->add_option("--conllu", extract_conllu,
                            "Dependency annotations aligned by `# newdoc`");
    extract_cmd->add_option("--output", extract_output, "Feature matrix path");
    extract_cmd->add_option("--text-column", extract_cols.text)->capture_default_str();
    extract_cmd->add_option("--label-column", extract_cols.label)->capture_default_str();
    extract_lex.add_flags(extract_cmd);

    // train
    auto* train_cmd = app.add_subcommand("train", "Fit a classifier on extracted features");
    train_cmd->fallthrough();
    TrainFlags train_flags;
    train_cmd->add_option("--model", train_flags.model, "forest or convnet")
        ->capture_default_str();
    train_cmd->add_option("--train", train_flags.train_path, "Training feature matrix")
        ->required();
    train_cmd->add_option("--val", train_flags.val_path, "Validation feature matrix");
    train_cmd->add_option("--output", train_flags.output, "Model container path")
        ->capture_default_str();
    train_cmd->add_option("--history", train_flags.history,
                          "History CSV (default: <output>.history.csv)");
    train_cmd->add_option("--threshold", train_flags.threshold, "Decision threshold")
        ->capture_default_str();
    train_cmd->add_option("--trees", train_flags.trees, "Forest size")->capture_default_str();
    train_cmd->add_option("--depth", train_flags.depth, "Forest depth cap (default none)");
    train_cmd->add_option("--subset", train_flags.subset,
                          "Features per split (0 = ceil(sqrt(F)))");
    train_cmd->add_flag("--grid", train_flags.grid, "Cross-validated hyperparameter search");
    train_cmd->add_option("--folds", train_flags.folds, "Grid-search folds")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train_flags.epochs, "Network epoch cap")
        ->capture_default_str();
    train_cmd->add_option("--batch", train_flags.batch, "Network batch size")
        ->capture_default_str();
    train_cmd->add_option("--patience", train_flags.patience, "Early-stopping patience")
        ->capture_default_str();
    train_cmd->add_option("--lr", train_flags.learning_rate, "Adam learning rate")
        ->capture_default_str();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on a feature matrix");
    eval_cmd->fallthrough();
    std::string eval_model, eval_features, eval_format = "text", eval_output;
    eval_cmd->add_option("--model", eval_model, "Model container")->required();
    eval_cmd->add_option("--features", eval_features, "Feature matrix")->required();
    eval_cmd->add_option("--format", eval_format, "text or json")->capture_default_str();
    eval_cmd->add_option("--output", eval_output, "Also write the report here");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "Classify raw documents");
    predict_cmd->fallthrough();
    std::string predict_model;
    std::vector<std::string> predict_inputs;
    LexiconFlags predict_lex;
    predict_cmd->add_option("--model", predict_model, "Model container")->required();
    predict_cmd->add_option("inputs", predict_inputs,
                            "Document files (one document per file; stdin when absent)");
    predict_lex.add_flags(predict_cmd);

    // inspect
    auto* inspect_cmd = app.add_subcommand("inspect", "Summarize a model container");
    inspect_cmd->fallthrough();
    std::string inspect_model;
    inspect_cmd->add_option("--model", inspect_model, "Model container")->required();

    // schema
    auto* schema_cmd = app.add_subcommand("schema", "List the feature schema");
    schema_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (split_cmd->parsed()) {
            run_split(global, split_input, split_fractions, split_conllu, split_cols,
                      split_stem_flag);
        } else if (extract_cmd->parsed()) {
            run_extract(global, extract_input, extract_conllu, extract_output, extract_cols,
                        extract_lex);
        } else if (train_cmd->parsed()) {
            run_train(global, train_flags);
        } else if (eval_cmd->parsed()) {
            run_evaluate(global, eval_model, eval_features, eval_format, eval_output);
        } else if (predict_cmd->parsed()) {
            run_predict(predict_model, predict_inputs, predict_lex);
        } else if (inspect_cmd->parsed()) {
            run_inspect(inspect_model);
        } else if (schema_cmd->parsed()) {
            run_schema();
        }
    } catch (const schema_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const format_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const integrity_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const training_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
