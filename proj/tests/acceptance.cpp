// End-to-end acceptance checks for the assembled toolchain. Each numbered
// check prints one PASS/FAIL line; the exit code is the number of failed
// gating checks. Everything runs against the real CLI binary (SDML_CLI_PATH)
// or the library APIs it is built from.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "sdml/convnet.hpp"
#include "sdml/features.hpp"
#include "sdml/forest.hpp"
#include "sdml/matrix_io.hpp"
#include "sdml/metrics.hpp"
#include "sdml/model_io.hpp"
#include "sdml/rng.hpp"

using namespace sdml;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int number, bool ok, const std::string& detail) {
    std::printf("check %2d: %s - %s\n", number, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

struct CliRun {
    int code = -1;
    std::string out;
    double elapsed_ms = 0.0;
};

CliRun run_cli(const fs::path& dir, const std::string& args) {
    const fs::path out_path = dir / "_stdout";
    const std::string cmd = "cd '" + dir.string() + "' && '" + SDML_CLI_PATH + "' " + args +
                            " > '" + out_path.string() + "' 2>&1 < /dev/null";
    const auto start = Clock::now();
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.elapsed_ms = ms_since(start);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    return r;
}

fs::path work_root() {
    static fs::path root = [] {
        fs::path p =
            fs::temp_directory_path() / ("sdml_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string format_double(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// ---------- check 1: parameter audit through `inspect` ----------

std::optional<std::uint64_t> table_value(const std::string& out, const std::string& row) {
    std::istringstream in(out);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(row, 0) != 0) continue;
        std::string digits;
        for (char c : line.substr(row.size())) {
            if (c >= '0' && c <= '9') digits.push_back(c);
        }
        if (digits.empty()) return std::nullopt;
        return std::stoull(digits);
    }
    return std::nullopt;
}

void check_parameter_audit() {
    const fs::path dir = work_root() / "audit";
    fs::create_directories(dir);
    write_model((dir / "fresh.sdml").string(), build_network(42));

    CliRun r = run_cli(dir, "inspect --model fresh.sdml");
    const std::array<std::pair<const char*, std::uint64_t>, 7> expected = {{
        {"conv1d", 512},
        {"batch_norm", 512},
        {"dense1", 2'162'944},
        {"dense2", 32'896},
        {"dense3", 8'256},
        {"output", 65},
        {"total", 2'205'185},
    }};
    bool ok = r.code == 0 && r.elapsed_ms < 1000.0;
    for (const auto& [row, want] : expected) {
        ok = ok && table_value(r.out, row) == want;
    }
    report(1, ok,
           "layer parameter counts from `inspect` (" + format_double(r.elapsed_ms, 1) + " ms)");
}

// ---------- check 2: AUC and confusion-derived metrics ----------

double pair_count_auc(const std::vector<int>& labels, const std::vector<double>& probs) {
    double wins = 0.0;
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        ++pos;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] == 1) continue;
            if (probs[i] > probs[j]) wins += 1.0;
            else if (probs[i] == probs[j]) wins += 0.5;
        }
    }
    for (int y : labels) neg += y == 0;
    return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

double trapezoid(const std::vector<RocPoint>& pts) {
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        area += 0.5 * (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr);
    }
    return area;
}

void check_metric_oracles() {
    SplitMix64 rng(1234);
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const std::size_t n = 2 + rng.next_below(49);
        std::vector<int> labels(n);
        std::vector<double> probs(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.next_below(2));
            probs[i] = trial % 2 ? static_cast<double>(rng.next_below(9)) / 8.0
                                 : rng.next_double();
        }
        labels[0] = 0;
        labels[n - 1] = 1;

        const double brute = pair_count_auc(labels, probs);
        const auto [auc, points] = roc_auc(labels, probs);
        ok = ok && auc == brute;
        ok = ok && std::abs(trapezoid(points) - brute) <= 1e-12;
    }

    const ThresholdMetrics m = threshold_metrics(ConfusionMatrix{963, 28, 37, 969});
    ok = ok && std::abs(m.accuracy - 0.9675) <= 1e-4;
    ok = ok && m.precision && std::abs(*m.precision - 0.9717) <= 1e-4;
    ok = ok && m.recall && std::abs(*m.recall - 0.9630) <= 1e-4;
    ok = ok && m.f1 && std::abs(*m.f1 - 0.9674) <= 1e-4;

    report(2, ok, "rank AUC vs pair counting on 200 instances; confusion-count metrics");
}

// ---------- check 3: analytic gradients vs finite differences ----------

std::vector<std::vector<double>*> tensor_list(ConvNetModel& m) {
    return {&m.conv_w, &m.conv_b, &m.bn_gamma, &m.bn_beta, &m.w1, &m.b1,
            &m.w2,     &m.b2,     &m.w3,       &m.b3,      &m.w4, &m.b4};
}

std::vector<const std::vector<double>*> gradient_list(const Gradients& g) {
    return {&g.conv_w, &g.conv_b, &g.bn_gamma, &g.bn_beta, &g.w1, &g.b1,
            &g.w2,     &g.b2,     &g.w3,       &g.b3,      &g.w4, &g.b4};
}

// All-zero fresh biases can park a pre-activation exactly on the relu kink,
// where the loss is not differentiable; nudge them off zero first.
void jitter_biases(ConvNetModel& m, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (auto* t : {&m.conv_b, &m.bn_beta, &m.b1, &m.b2, &m.b3, &m.b4}) {
        for (double& v : *t) v = 0.2 * (2.0 * rng.next_double() - 1.0);
    }
}

double batch_loss(const ConvNetModel& m, const std::vector<std::vector<double>>& xs,
                  const std::vector<int>& ys) {
    SplitMix64 mask_rng(999);  // dropout rates are zero; masks are all-ones
    const std::vector<double> probs = forward_batch(m, xs, Mode::train, &mask_rng, nullptr);
    double loss = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) loss += bce_loss(probs[i], ys[i]);
    return loss / static_cast<double>(probs.size());
}

// Max relative error between analytic and central-difference gradients over
// the given parameter slots (global indices into the tensor list order).
double fd_max_rel_error(ConvNetModel& m, const std::vector<std::vector<double>*>& tensors,
                        const std::vector<std::size_t>& slots,
                        const std::vector<std::vector<double>>& xs,
                        const std::vector<int>& ys) {
    const double h = 1e-5;
    SplitMix64 mask_rng(999);
    ForwardCache cache;
    forward_batch(m, xs, Mode::train, &mask_rng, &cache);
    const Gradients grads = backward(m, cache, ys);
    const auto grad_tensors = gradient_list(grads);

    double worst = 0.0;
    for (std::size_t slot : slots) {
        std::size_t t = 0, at = slot;
        while (at >= tensors[t]->size()) at -= tensors[t++]->size();
        double& theta = (*tensors[t])[at];
        const double saved = theta;
        theta = saved + h;
        const double up = batch_loss(m, xs, ys);
        theta = saved - h;
        const double down = batch_loss(m, xs, ys);
        theta = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = (*grad_tensors[t])[at];
        const double rel = std::abs(fd - an) / std::max({1e-6, std::abs(fd), std::abs(an)});
        worst = std::max(worst, rel);
    }
    return worst;
}

void check_gradients() {
    const auto start = Clock::now();

    NetworkShape reduced;
    reduced.features = 8;
    reduced.filters = 4;
    reduced.kernel = 3;
    reduced.dense1 = 10;
    reduced.dense2 = 8;
    reduced.dense3 = 6;

    ConvNetModel small = build_network(7, reduced);
    small.dropout1 = small.dropout2 = small.dropout3 = 0.0;
    jitter_biases(small, 171);
    auto small_tensors = tensor_list(small);
    std::size_t small_total = 0;
    for (auto* t : small_tensors) small_total += t->size();

    SplitMix64 data_rng(55);
    std::vector<std::vector<double>> xs(6, std::vector<double>(reduced.features));
    std::vector<int> ys(6);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ys[i] = static_cast<int>(i % 2);
        for (double& v : xs[i]) v = 2.0 * data_rng.next_double() - 1.0;
    }
    std::vector<std::size_t> all_slots(small_total);
    for (std::size_t i = 0; i < small_total; ++i) all_slots[i] = i;
    const double small_worst = fd_max_rel_error(small, small_tensors, all_slots, xs, ys);

    ConvNetModel full = build_network(11);
    full.dropout1 = full.dropout2 = full.dropout3 = 0.0;
    jitter_biases(full, 231);
    auto full_tensors = tensor_list(full);
    std::size_t full_total = 0;
    for (auto* t : full_tensors) full_total += t->size();

    std::vector<std::vector<double>> fxs(4, std::vector<double>(full.shape.features));
    std::vector<int> fys(4);
    for (std::size_t i = 0; i < fxs.size(); ++i) {
        fys[i] = static_cast<int>(i % 2);
        for (double& v : fxs[i]) v = 2.0 * data_rng.next_double() - 1.0;
    }
    SplitMix64 pick(91);
    std::vector<std::size_t> sampled;
    for (int i = 0; i < 250; ++i) sampled.push_back(pick.next_below(full_total));
    const double full_worst = fd_max_rel_error(full, full_tensors, sampled, fxs, fys);

    const double elapsed = ms_since(start);
    const bool ok = small_worst < 1e-4 && full_worst < 1e-4 && elapsed < 60'000.0;
    report(3, ok,
           "finite differences: max relative error " +
               format_double(std::max(small_worst, full_worst), 8) + " over " +
               std::to_string(small_total) + "+250 parameters (" +
               format_double(elapsed / 1000.0, 1) + " s)");
}

// ---------- check 4: readability formulas ----------

void check_readability() {
    ReadabilityCounts c;
    c.words = 100;
    c.sentences = 5;
    c.syllables = 150;
    c.letters_digits = 450;
    const auto values = readability_indices(c);
    const bool ok = values[0] && std::abs(*values[0] - 59.635) <= 1e-9 &&
                    values[1] && std::abs(*values[1] - 9.91) <= 1e-9 &&
                    values[2] && std::abs(*values[2] - 9.765) <= 1e-9;
    report(4, ok, "reading ease 59.635, grade 9.91, automated index 9.765");
}

// ---------- check 5: single trees match exhaustive CART ----------

// Independent exhaustive CART: minimizes weighted child Gini as an exact
// fraction (cross-multiplied in 64-bit), splitting at midpoints, ties to the
// lowest feature then lowest threshold.
struct ExactCost {
    std::int64_t num = 0;
    std::int64_t den = 1;
};

bool cost_less(const ExactCost& a, const ExactCost& b) {
    return a.num * b.den < b.num * a.den;
}

struct OracleNode {
    int feature = -1;
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
    std::int64_t n0 = 0, n1 = 0;
};

std::size_t oracle_grow(const std::vector<std::array<double, 2>>& x, const std::vector<int>& y,
                        const std::vector<std::size_t>& rows, std::vector<OracleNode>& nodes) {
    std::int64_t c0 = 0, c1 = 0;
    for (std::size_t r : rows) (y[r] == 1 ? c1 : c0) += 1;
    const std::size_t index = nodes.size();
    nodes.push_back(OracleNode{-1, 0.0, 0, 0, c0, c1});
    if (c0 == 0 || c1 == 0 || rows.size() < 2) return index;

    const std::int64_t n = static_cast<std::int64_t>(rows.size());
    const ExactCost parent{n * n - c0 * c0 - c1 * c1, n * n};
    std::optional<std::pair<int, double>> best;
    ExactCost best_cost;
    for (int f = 0; f < 2; ++f) {
        std::vector<double> values;
        for (std::size_t r : rows) values.push_back(x[r][static_cast<std::size_t>(f)]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            double threshold = (values[i] + values[i + 1]) / 2.0;
            if (threshold == values[i + 1]) threshold = values[i];
            std::int64_t l0 = 0, l1 = 0;
            for (std::size_t r : rows) {
                if (x[r][static_cast<std::size_t>(f)] <= threshold) (y[r] == 1 ? l1 : l0) += 1;
            }
            const std::int64_t nl = l0 + l1, nr = n - nl;
            const std::int64_t r0 = c0 - l0, r1 = c1 - l1;
            const ExactCost cost{
                (nl * nl - l0 * l0 - l1 * l1) * nr + (nr * nr - r0 * r0 - r1 * r1) * nl,
                n * nl * nr};
            if (!cost_less(cost, parent)) continue;
            if (best && !cost_less(cost, best_cost)) continue;
            best = {f, threshold};
            best_cost = cost;
        }
    }
    if (!best) return index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        (x[r][static_cast<std::size_t>(best->first)] <= best->second ? left_rows : right_rows)
            .push_back(r);
    }
    nodes[index].feature = best->first;
    nodes[index].threshold = best->second;
    nodes[index].left = oracle_grow(x, y, left_rows, nodes);
    nodes[index].right = oracle_grow(x, y, right_rows, nodes);
    return index;
}

bool oracle_predict(const std::vector<OracleNode>& nodes, const std::array<double, 2>& x) {
    std::size_t at = 0;
    while (nodes[at].feature >= 0) {
        at = x[static_cast<std::size_t>(nodes[at].feature)] <= nodes[at].threshold
                 ? nodes[at].left
                 : nodes[at].right;
    }
    return nodes[at].n1 > nodes[at].n0;
}

bool tree_predict(const Tree& t, const std::vector<double>& x) {
    std::size_t at = 0;
    while (!t.nodes[at].is_leaf()) {
        at = x[static_cast<std::size_t>(t.nodes[at].feature)] <= t.nodes[at].threshold
                 ? t.nodes[at].left
                 : t.nodes[at].right;
    }
    return t.nodes[at].n1 > t.nodes[at].n0;
}

// Datasets are multisets over (pattern, label) row types; both growers are
// order-independent, so this enumerates every dataset up to permutation.
struct CartSweep {
    std::vector<std::array<double, 2>> patterns;
    std::size_t max_rows = 0;
    std::size_t instances = 0;
    std::size_t mismatches = 0;

    void run() {
        std::vector<std::size_t> counts(patterns.size() * 2, 0);
        descend(counts, 0, max_rows);
    }

    void descend(std::vector<std::size_t>& counts, std::size_t type, std::size_t budget) {
        if (type == counts.size()) {
            if (budget < max_rows) evaluate(counts);
            return;
        }
        for (std::size_t take = 0; take <= budget; ++take) {
            counts[type] = take;
            descend(counts, type + 1, budget - take);
        }
        counts[type] = 0;
    }

    void evaluate(const std::vector<std::size_t>& counts) {
        std::vector<std::vector<double>> x;
        std::vector<std::array<double, 2>> ox;
        std::vector<int> y;
        for (std::size_t t = 0; t < counts.size(); ++t) {
            const auto& p = patterns[t / 2];
            for (std::size_t k = 0; k < counts[t]; ++k) {
                x.push_back({p[0], p[1]});
                ox.push_back(p);
                y.push_back(static_cast<int>(t % 2));
            }
        }
        ++instances;

        std::vector<std::size_t> rows(x.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        SplitMix64 rng(1);
        const Tree grown = grow_tree(x, y, rows, 2, rng, std::nullopt);
        std::vector<OracleNode> oracle;
        oracle_grow(ox, y, rows, oracle);

        for (const auto& p : patterns) {
            if (tree_predict(grown, {p[0], p[1]}) != oracle_predict(oracle, p)) {
                ++mismatches;
                return;
            }
        }
    }
};

void check_cart_equivalence() {
    const auto start = Clock::now();

    CartSweep binary;
    binary.patterns = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    binary.max_rows = 8;
    binary.run();

    CartSweep mixed;
    mixed.patterns = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.5}, {1.0, 0.5}, {0.0, 1.0}, {1.0, 1.0}};
    mixed.max_rows = 4;
    mixed.run();

    const double elapsed = ms_since(start);
    const bool ok =
        binary.mismatches == 0 && mixed.mismatches == 0 && elapsed < 30'000.0;
    report(5, ok,
           std::to_string(binary.instances + mixed.instances) +
               " exhaustive small datasets match brute-force trees (" +
               format_double(elapsed / 1000.0, 1) + " s)");
}

// ---------- checks 6 and 7: synthetic end-to-end run, then determinism ----------

// Two-class corpus with injected stylometric signal: one class writes short
// sentences over a broad vocabulary, the other long sentences over a narrow
// one. Annotations carry the same tokens with synthetic heads.
void write_synthetic_corpus(const fs::path& csv, const fs::path& conllu, std::size_t docs) {
    static const char* upos[8] = {"NOUN", "VERB", "ADJ", "DET", "ADV", "PRON", "ADP", "NOUN"};
    SplitMix64 rng(7);
    std::ostringstream rows;
    std::ostringstream ann;
    rows << "text,generated\n";
    for (std::size_t d = 0; d < docs; ++d) {
        const int label = static_cast<int>(d % 2);
        const std::size_t vocab = label ? 25 : 120;
        const std::size_t sentences = 3 + rng.next_below(4);
        ann << "# newdoc id = doc" << d << "\n";
        std::string text;
        for (std::size_t s = 0; s < sentences; ++s) {
            const std::size_t len = label ? 14 + rng.next_below(7) : 5 + rng.next_below(5);
            ann << "# sent_id = " << d << "-" << s << "\n";
            for (std::size_t t = 0; t < len; ++t) {
                const std::string form = "word" + std::to_string(rng.next_below(vocab));
                const std::size_t head = t == 0 ? 0 : (t % 3 == 2 ? 1 : t);
                ann << t + 1 << "\t" << form << "\t" << form << "\t" << upos[t % 8]
                    << "\t_\t_\t" << head << "\t" << (head == 0 ? "root" : "dep")
                    << "\t_\t_\n";
                if (!text.empty()) text += ' ';
                text += form;
            }
            text += '.';
            ann << "\n";
        }
        rows << text << ',' << label << "\n";
    }
    spit(csv, rows.str());
    spit(conllu, ann.str());
}

// split -> extract -> train both -> evaluate both, through the CLI. Returns
// false if any stage exits nonzero.
bool run_pipeline(const fs::path& dir) {
    write_synthetic_corpus(dir / "corpus.csv", dir / "corpus.conllu", 2000);
    if (run_cli(dir, "split corpus.csv --fractions 0.8,0.1,0.1 --conllu corpus.conllu").code)
        return false;
    for (const char* part : {"train", "val", "test"}) {
        const std::string p = part;
        if (run_cli(dir, "extract corpus." + p + ".csv --conllu corpus." + p +
                             ".conllu --output " + p + ".features.csv")
                .code)
            return false;
    }
    if (run_cli(dir, "train --model forest --train train.features.csv --output forest.sdml")
            .code)
        return false;
    if (run_cli(dir, "train --model convnet --train train.features.csv "
                     "--val val.features.csv --epochs 30 --patience 5 --output net.sdml")
            .code)
        return false;
    for (const char* model : {"forest", "net"}) {
        const std::string m = model;
        if (run_cli(dir, "evaluate --model " + m + ".sdml --features test.features.csv "
                         "--format json --output " + m + ".report.json")
                .code)
            return false;
    }
    return true;
}

struct Scores {
    double accuracy = 0.0;
    double auc = 0.0;
};

Scores read_report(const fs::path& p) {
    const auto parsed = nlohmann::json::parse(slurp(p));
    return {parsed.at("accuracy").get<double>(), parsed.at("roc_auc").get<double>()};
}

void check_end_to_end(bool& pipeline_ok) {
    const auto start = Clock::now();
    const fs::path dir = work_root() / "pipeline";
    fs::create_directories(dir);

    pipeline_ok = run_pipeline(dir);
    Scores forest{}, net{};
    if (pipeline_ok) {
        forest = read_report(dir / "forest.report.json");
        net = read_report(dir / "net.report.json");
    }
    const double elapsed = ms_since(start);
    const bool ok = pipeline_ok && forest.accuracy >= 0.95 && forest.auc >= 0.98 &&
                    net.accuracy >= 0.95 && net.auc >= 0.98 && elapsed < 300'000.0;
    report(6, ok,
           "2000-document pipeline: forest " + format_double(forest.accuracy) + "/" +
               format_double(forest.auc) + ", network " + format_double(net.accuracy) + "/" +
               format_double(net.auc) + " accuracy/AUC (" +
               format_double(elapsed / 1000.0, 1) + " s)");
}

void check_determinism(bool pipeline_ok) {
    if (!pipeline_ok) {
        report(7, false, "skipped: the end-to-end pipeline did not complete");
        return;
    }
    const fs::path first = work_root() / "pipeline";
    const fs::path second = work_root() / "pipeline_repeat";
    fs::create_directories(second);

    bool ok = run_pipeline(second);
    for (const char* name :
         {"forest.sdml", "net.sdml", "forest.report.json", "net.report.json"}) {
        ok = ok && slurp(first / name) == slurp(second / name);
    }

    ok = ok && run_cli(first, "--jobs 4 extract corpus.train.csv --conllu "
                              "corpus.train.conllu --output jobs4.features.csv")
                       .code == 0;
    ok = ok && slurp(first / "train.features.csv") == slurp(first / "jobs4.features.csv");
    report(7, ok, "identical model and report bytes on repeat; --jobs 4 matches --jobs 1");
}

// ---------- check 8: single-document prediction latency ----------

void check_latency(bool pipeline_ok) {
    if (!pipeline_ok) {
        report(8, false, "skipped: no trained network container available");
        return;
    }
    const fs::path dir = work_root() / "pipeline";
    SplitMix64 rng(3);
    std::string text;
    std::size_t words = 0;
    while (words < 300) {
        const std::size_t len = std::min<std::size_t>(8 + rng.next_below(8), 300 - words);
        for (std::size_t i = 0; i < len; ++i) {
            if (!text.empty()) text += ' ';
            text += "term" + std::to_string(rng.next_below(400));
        }
        text += '.';
        words += len;
    }
    spit(dir / "doc300.txt", text);

    run_cli(dir, "predict --model net.sdml doc300.txt");  // warm-up
    std::vector<double> samples;
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
        CliRun r = run_cli(dir, "predict --model net.sdml doc300.txt");
        ok = ok && r.code == 0;
        samples.push_back(r.elapsed_ms);
    }
    std::sort(samples.begin(), samples.end());
    const double median = (samples[9] + samples[10]) / 2.0;
    ok = ok && median < 100.0;
    report(8, ok,
           "300-word `predict` median " + format_double(median, 1) + " ms over 20 runs");
}

// ---------- check 9: standardizer output statistics ----------

void check_standardizer() {
    bool ok = true;
    for (std::uint64_t seed : {1, 2, 3}) {
        SplitMix64 rng(seed);
        const std::size_t n = 200 + rng.next_below(200);
        std::vector<FeatureVector> rows(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                if (j == 5 || j == 20) rows[i].set(j, 3.25);  // constant columns
                else rows[i].set(j, 10.0 * rng.next_double() - 5.0);
            }
        }
        const StandardizerState state = fit_standardizer(rows);
        std::array<double, kFeatureCount> sum{}, sumsq{};
        for (const FeatureVector& row : rows) {
            const auto z = standardize(row, state);
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                sum[j] += z[j];
                sumsq[j] += z[j] * z[j];
            }
        }
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            if (j == 5 || j == 20) continue;
            const double mean = sum[j] / static_cast<double>(n);
            const double var = sumsq[j] / static_cast<double>(n) - mean * mean;
            ok = ok && std::abs(mean) < 1e-9 && std::abs(var - 1.0) < 1e-9;
        }
    }
    report(9, ok, "transformed non-constant columns have mean 0 and unit variance");
}

} // namespace

int main() {
    check_parameter_audit();
    check_metric_oracles();
    check_gradients();
    check_readability();
    check_cart_equivalence();
    bool pipeline_ok = false;
    check_end_to_end(pipeline_ok);
    check_determinism(pipeline_ok);
    check_latency(pipeline_ok);
    check_standardizer();
    std::printf("check 10: SKIP - external-corpus reproduction is informative only; "
                "see the README for the recipe\n");
    std::printf("%d of 9 gating checks failed\n", g_failures);
    return g_failures;
}
