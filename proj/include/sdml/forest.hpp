#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sdml/rng.hpp"

namespace sdml {

// One node of a decision tree. Nodes live in the owning tree's array in
// preorder; index 0 is the root. Leaves have feature -1. Class counts are
// kept on every node so importances can be recomputed from a loaded model.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint64_t n0 = 0;
    std::uint64_t n1 = 0;
    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;
};

std::size_t tree_depth(const Tree& t);

struct ForestModel {
    std::vector<Tree> trees;
    std::size_t n_estimators = 0;
    std::uint64_t seed = 0;
    std::size_t n_features = 0;
    std::size_t feature_subset_size = 0;
    std::uint64_t schema = 0;
    double threshold = 0.5;
};

struct ForestConfig {
    std::size_t n_estimators = 100;
    std::uint64_t seed = 42;
    std::optional<std::size_t> max_depth;  // nullopt: unlimited
    std::size_t feature_subset_size = 0;   // 0: ceil(sqrt(n_features))
    double threshold = 0.5;
    std::size_t n_jobs = 1;
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

// 1 - p0^2 - p1^2 over n0 + n1 >= 1 samples.
double gini_impurity(std::uint64_t n0, std::uint64_t n1);

// Lowest weighted child Gini over the candidate features, thresholds at
// midpoints of consecutive distinct values, routing value <= threshold to
// the left. Ties go to the lowest feature index, then the lowest threshold.
// Cost comparisons use exact integer arithmetic, so a tie means a
// mathematical tie. Empty when no split strictly reduces impurity.
std::optional<Split> best_split(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y,
                                const std::vector<std::size_t>& rows,
                                const std::vector<std::size_t>& features);

// Recursive CART growth on the given rows. Each split considers a fresh
// subset of subset_size features drawn from rng in node preorder. Stops on
// purity, fewer than 2 rows, the depth cap, or no gainful split.
Tree grow_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
               const std::vector<std::size_t>& rows, std::size_t subset_size,
               SplitMix64& rng, std::optional<std::size_t> max_depth);

// Bagged trees: tree t draws n rows with replacement from a generator
// seeded with child_seed(seed, t), so parallel and serial fits agree.
ForestModel fit_forest(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, const ForestConfig& cfg);

// Mean over trees of the leaf class-1 fraction.
double predict_proba(const ForestModel& m, const std::vector<double>& x);

// probability > threshold; a probability exactly at the threshold is 0.
bool predict_label(const ForestModel& m, const std::vector<double>& x);

// Mean decrease in impurity: per split, node weight times Gini gain
// accumulated to its feature, averaged over trees and normalized to sum 1.
// All zeros for a forest that never split.
std::vector<double> feature_importances(const ForestModel& m);

struct GridSpec {
    std::vector<std::size_t> n_estimators{50, 100, 200};
    std::vector<std::optional<std::size_t>> max_depth{std::nullopt, 10, 20};
    std::vector<std::size_t> feature_subset_size{0};
    std::size_t folds = 5;
    std::uint64_t seed = 42;
};

struct GridCell {
    ForestConfig config;
    double accuracy = 0.0;  // mean validation accuracy over folds
};

struct GridResult {
    ForestConfig best;
    std::vector<GridCell> cells;
};

// Stratified k-fold accuracy for every hyperparameter combination. Best is
// the highest mean accuracy; ties prefer fewer trees, then shallower depth.
GridResult grid_search(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, const GridSpec& grid);

} // namespace sdml
