#include "sdml/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>

#include "sdml/errors.hpp"
#include "sdml/features.hpp"

namespace sdml {

namespace {

using u128 = unsigned __int128;

// Minimizing the weighted child Gini is equivalent to maximizing
// sum over children of (c0^2 + c1^2) / size. Candidates are compared as
// exact fractions to keep tie-breaking independent of rounding.
struct SplitScore {
    std::uint64_t num = 0;  // A*nR + B*nL with A, B the children's count-square sums
    std::uint64_t den = 0;  // nL * nR
};

bool better(const SplitScore& a, const SplitScore& b) {
    return static_cast<u128>(a.num) * b.den > static_cast<u128>(b.num) * a.den;
}

// score/n > parent (c0^2 + c1^2)/n^2, i.e. the split has positive gain.
bool gains(const SplitScore& s, std::uint64_t csq, std::uint64_t n) {
    return static_cast<u128>(s.num) * n > static_cast<u128>(csq) * s.den;
}

struct GrowContext {
    const std::vector<std::vector<double>>& x;
    const std::vector<int>& y;
    std::size_t n_features;
    std::size_t subset_size;
    std::optional<std::size_t> max_depth;
    SplitMix64& rng;
    Tree& tree;
};

std::uint32_t grow_node(GrowContext& ctx, const std::vector<std::size_t>& rows,
                        std::size_t depth) {
    std::uint64_t c0 = 0, c1 = 0;
    for (std::size_t r : rows) (ctx.y[r] == 1 ? c1 : c0) += 1;

    const auto index = static_cast<std::uint32_t>(ctx.tree.nodes.size());
    ctx.tree.nodes.push_back({});
    ctx.tree.nodes[index].n0 = c0;
    ctx.tree.nodes[index].n1 = c1;

    const bool stop = c0 == 0 || c1 == 0 || rows.size() < 2 ||
                      (ctx.max_depth && depth >= *ctx.max_depth);
    if (stop) return index;

    auto subset = sample_without_replacement(ctx.subset_size, ctx.n_features, ctx.rng);
    auto split = best_split(ctx.x, ctx.y, rows, subset);
    if (!split) return index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        (ctx.x[r][split->feature] <= split->threshold ? left_rows : right_rows).push_back(r);
    }
    ctx.tree.nodes[index].feature = static_cast<std::int32_t>(split->feature);
    ctx.tree.nodes[index].threshold = split->threshold;
    const auto left = grow_node(ctx, left_rows, depth + 1);
    const auto right = grow_node(ctx, right_rows, depth + 1);
    ctx.tree.nodes[index].left = left;
    ctx.tree.nodes[index].right = right;
    return index;
}

std::size_t default_subset(std::size_t n_features) {
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
}

const TreeNode& route(const Tree& t, const std::vector<double>& x) {
    const TreeNode* node = &t.nodes[0];
    while (!node->is_leaf()) {
        node = &t.nodes[x[static_cast<std::size_t>(node->feature)] <= node->threshold
                            ? node->left
                            : node->right];
    }
    return *node;
}

void check_training_input(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y) {
    if (x.size() != y.size()) {
        throw input_error("row/label count mismatch: " + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
    }
    if (x.size() < 2) throw training_error("need at least 2 rows to fit");
    const std::size_t width = x[0].size();
    if (width == 0) throw input_error("rows have no features");
    for (const auto& row : x) {
        if (row.size() != width) throw input_error("rows differ in feature count");
    }
    bool has0 = false, has1 = false;
    for (int label : y) (label == 1 ? has1 : has0) = true;
    if (!has0 || !has1) throw training_error("training data has a single class");
}

} // namespace

std::size_t tree_depth(const Tree& t) {
    // Preorder layout: depth via an explicit (index, depth) stack.
    std::size_t best = 0;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        const TreeNode& node = t.nodes[i];
        if (!node.is_leaf()) {
            stack.push_back({node.left, d + 1});
            stack.push_back({node.right, d + 1});
        }
    }
    return best;
}

double gini_impurity(std::uint64_t n0, std::uint64_t n1) {
    const double n = static_cast<double>(n0 + n1);
    const double p0 = static_cast<double>(n0) / n;
    const double p1 = static_cast<double>(n1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

std::optional<Split> best_split(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y,
                                const std::vector<std::size_t>& rows,
                                const std::vector<std::size_t>& features) {
    const std::uint64_t n = rows.size();
    if (n < 2 || features.empty()) return std::nullopt;

    std::uint64_t c0 = 0, c1 = 0;
    for (std::size_t r : rows) (y[r] == 1 ? c1 : c0) += 1;
    if (c0 == 0 || c1 == 0) return std::nullopt;
    const std::uint64_t parent_sq = c0 * c0 + c1 * c1;

    std::optional<Split> best;
    SplitScore best_score;
    std::vector<std::pair<double, int>> column(rows.size());
    for (std::size_t f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            column[i] = {x[rows[i]][f], y[rows[i]]};
        }
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::uint64_t l0 = 0, l1 = 0;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            (column[i].second == 1 ? l1 : l0) += 1;
            if (column[i].first == column[i + 1].first) continue;

            const std::uint64_t nl = i + 1, nr = n - nl;
            const std::uint64_t a = l0 * l0 + l1 * l1;
            const std::uint64_t b = (c0 - l0) * (c0 - l0) + (c1 - l1) * (c1 - l1);
            const SplitScore score{a * nr + b * nl, nl * nr};
            if (!gains(score, parent_sq, n)) continue;
            if (best && !better(score, best_score)) continue;

            double threshold = (column[i].first + column[i + 1].first) / 2.0;
            // Adjacent representable values can round the midpoint up onto
            // the right value; fall back so the split still separates.
            if (threshold == column[i + 1].first) threshold = column[i].first;
            const double gain =
                (static_cast<double>(score.num) / static_cast<double>(score.den) -
                 static_cast<double>(parent_sq) / static_cast<double>(n)) /
                static_cast<double>(n);
            best = Split{f, threshold, gain};
            best_score = score;
        }
    }
    return best;
}

Tree grow_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
               const std::vector<std::size_t>& rows, std::size_t subset_size,
               SplitMix64& rng, std::optional<std::size_t> max_depth) {
    Tree tree;
    GrowContext ctx{x, y, x[0].size(), subset_size, max_depth, rng, tree};
    grow_node(ctx, rows, 0);
    return tree;
}

ForestModel fit_forest(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, const ForestConfig& cfg) {
    check_training_input(x, y);
    if (cfg.n_estimators == 0) throw input_error("n_estimators must be at least 1");
    const std::size_t n_features = x[0].size();
    const std::size_t subset =
        cfg.feature_subset_size == 0 ? default_subset(n_features) : cfg.feature_subset_size;
    if (subset > n_features) {
        throw input_error("feature subset size " + std::to_string(subset) + " exceeds " +
                          std::to_string(n_features) + " features");
    }

    ForestModel model;
    model.n_estimators = cfg.n_estimators;
    model.seed = cfg.seed;
    model.n_features = n_features;
    model.feature_subset_size = subset;
    model.schema = n_features == kFeatureCount ? schema_hash() : 0;
    model.threshold = cfg.threshold;
    model.trees.resize(cfg.n_estimators);

    const std::size_t n = x.size();
    auto build = [&](std::size_t t) {
        SplitMix64 rng(child_seed(cfg.seed, t));
        std::vector<std::size_t> bag(n);
        for (std::size_t i = 0; i < n; ++i) {
            bag[i] = static_cast<std::size_t>(rng.next_below(n));
        }
        model.trees[t] = grow_tree(x, y, bag, subset, rng, cfg.max_depth);
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.n_jobs, cfg.n_estimators));
    if (jobs == 1) {
        for (std::size_t t = 0; t < cfg.n_estimators; ++t) build(t);
    } else {
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t t = w; t < cfg.n_estimators; t += jobs) build(t);
            });
        }
        for (auto& worker : workers) worker.join();
    }
    return model;
}

double predict_proba(const ForestModel& m, const std::vector<double>& x) {
    if (x.size() != m.n_features) {
        throw schema_error("feature vector has " + std::to_string(x.size()) +
                           " values; model expects " + std::to_string(m.n_features));
    }
    double sum = 0.0;
    for (const Tree& tree : m.trees) {
        const TreeNode& leaf = route(tree, x);
        sum += static_cast<double>(leaf.n1) / static_cast<double>(leaf.n0 + leaf.n1);
    }
    return sum / static_cast<double>(m.trees.size());
}

bool predict_label(const ForestModel& m, const std::vector<double>& x) {
    return predict_proba(m, x) > m.threshold;
}

std::vector<double> feature_importances(const ForestModel& m) {
    std::vector<double> total(m.n_features, 0.0);
    bool any_split = false;
    for (const Tree& tree : m.trees) {
        const double root_n = static_cast<double>(tree.nodes[0].n0 + tree.nodes[0].n1);
        for (const TreeNode& node : tree.nodes) {
            if (node.is_leaf()) continue;
            any_split = true;
            const TreeNode& l = tree.nodes[node.left];
            const TreeNode& r = tree.nodes[node.right];
            const double n = static_cast<double>(node.n0 + node.n1);
            const double nl = static_cast<double>(l.n0 + l.n1);
            const double nr = static_cast<double>(r.n0 + r.n1);
            const double gain = gini_impurity(node.n0, node.n1) -
                                (nl / n) * gini_impurity(l.n0, l.n1) -
                                (nr / n) * gini_impurity(r.n0, r.n1);
            total[static_cast<std::size_t>(node.feature)] += (n / root_n) * gain;
        }
    }
    if (!any_split) return total;
    double sum = 0.0;
    for (double& v : total) {
        v /= static_cast<double>(m.trees.size());
        sum += v;
    }
    for (double& v : total) v /= sum;
    return total;
}

GridResult grid_search(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, const GridSpec& grid) {
    check_training_input(x, y);
    if (grid.n_estimators.empty() || grid.max_depth.empty() ||
        grid.feature_subset_size.empty()) {
        throw input_error("grid has an empty candidate list");
    }
    if (grid.folds < 2) throw input_error("grid search needs at least 2 folds");
    std::size_t class_count[2] = {0, 0};
    for (int label : y) class_count[label == 1 ? 1 : 0] += 1;
    if (std::min(class_count[0], class_count[1]) < grid.folds) {
        throw input_error("cannot build " + std::to_string(grid.folds) +
                          " stratified folds: smallest class has " +
                          std::to_string(std::min(class_count[0], class_count[1])) +
                          " rows");
    }

    // Stratified folds, fixed across all cells: shuffle each class with its
    // own stream and deal the rows out round-robin.
    std::vector<std::size_t> fold_of(y.size(), 0);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if ((y[i] == 1) == (cls == 1)) members.push_back(i);
        }
        SplitMix64 rng(child_seed(grid.seed, static_cast<std::uint64_t>(cls)));
        shuffle(members, rng);
        for (std::size_t j = 0; j < members.size(); ++j) {
            fold_of[members[j]] = j % grid.folds;
        }
    }

    GridResult result;
    std::size_t cell_index = 0;
    for (std::size_t ne : grid.n_estimators) {
        for (const auto& md : grid.max_depth) {
            for (std::size_t fs : grid.feature_subset_size) {
                double accuracy_sum = 0.0;
                for (std::size_t fold = 0; fold < grid.folds; ++fold) {
                    std::vector<std::vector<double>> train_x;
                    std::vector<int> train_y;
                    std::vector<std::size_t> val_rows;
                    for (std::size_t i = 0; i < x.size(); ++i) {
                        if (fold_of[i] == fold) {
                            val_rows.push_back(i);
                        } else {
                            train_x.push_back(x[i]);
                            train_y.push_back(y[i]);
                        }
                    }
                    ForestConfig cfg;
                    cfg.n_estimators = ne;
                    cfg.max_depth = md;
                    cfg.feature_subset_size = fs;
                    // Streams 0 and 1 shuffled the classes above.
                    cfg.seed = child_seed(grid.seed, 2 + cell_index * grid.folds + fold);
                    ForestModel model = fit_forest(train_x, train_y, cfg);
                    std::size_t correct = 0;
                    for (std::size_t i : val_rows) {
                        correct += static_cast<std::size_t>(predict_label(model, x[i]) ==
                                                            (y[i] == 1));
                    }
                    accuracy_sum +=
                        static_cast<double>(correct) / static_cast<double>(val_rows.size());
                }
                GridCell cell;
                cell.config.n_estimators = ne;
                cell.config.max_depth = md;
                cell.config.feature_subset_size = fs;
                cell.config.seed = grid.seed;
                cell.accuracy = accuracy_sum / static_cast<double>(grid.folds);
                result.cells.push_back(cell);
                ++cell_index;
            }
        }
    }

    const GridCell* best = &result.cells[0];
    auto depth_rank = [](const std::optional<std::size_t>& d) {
        return d ? *d : std::numeric_limits<std::size_t>::max();
    };
    for (const GridCell& cell : result.cells) {
        if (cell.accuracy > best->accuracy) {
            best = &cell;
        } else if (cell.accuracy == best->accuracy) {
            if (cell.config.n_estimators < best->config.n_estimators ||
                (cell.config.n_estimators == best->config.n_estimators &&
                 depth_rank(cell.config.max_depth) < depth_rank(best->config.max_depth))) {
                best = &cell;
            }
        }
    }
    result.best = best->config;
    return result;
}

} // namespace sdml
