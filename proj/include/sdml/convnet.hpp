#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdml/rng.hpp"

namespace sdml {

// Layer widths. The default is the production topology; tests shrink it to
// keep finite-difference checks cheap. The wiring is fixed either way:
// Conv1D (valid, stride 1) -> ReLU -> BatchNorm -> Flatten -> three
// ReLU+Dropout dense layers -> sigmoid unit.
struct NetworkShape {
    std::size_t features = 68;
    std::size_t filters = 128;
    std::size_t kernel = 3;
    std::size_t dense1 = 256;
    std::size_t dense2 = 128;
    std::size_t dense3 = 64;

    std::size_t positions() const { return features - kernel + 1; }
    std::size_t flat() const { return positions() * filters; }
};

struct ConvNetModel {
    NetworkShape shape;

    std::vector<double> conv_w;  // kernel x filters, w[k * filters + c]
    std::vector<double> conv_b;  // filters
    std::vector<double> bn_gamma, bn_beta;      // filters each
    std::vector<double> bn_mean, bn_var;        // running statistics
    std::vector<double> w1, b1;  // flat x dense1 (row-major in x out), dense1
    std::vector<double> w2, b2;
    std::vector<double> w3, b3;
    std::vector<double> w4, b4;  // dense3 x 1, 1

    double dropout1 = 0.4, dropout2 = 0.3, dropout3 = 0.2;
    double bn_epsilon = 1e-3;
    double bn_momentum = 0.99;  // running = m * running + (1 - m) * batch
    double threshold = 0.5;
    std::uint64_t schema = 0;
    std::uint64_t seed = 0;
};

// He-uniform weights, zero biases, gamma 1 / beta 0, running mean 0 / var 1.
ConvNetModel build_network(std::uint64_t seed, const NetworkShape& shape = {});

struct LayerParams {
    std::string name;
    std::size_t count;
};

// Per-layer parameter counts, batchnorm running statistics included.
std::vector<LayerParams> parameter_audit(const ConvNetModel& m);
std::size_t parameter_count(const ConvNetModel& m);

enum class Mode { train, infer };

// Every intermediate a training step needs, kept per batch: inputs, conv
// pre/post activations, the batch statistics actually used, normalized and
// scaled outputs, dense pre-activations, post-dropout activations, and the
// scaled dropout masks (0 or 1/keep).
struct ForwardCache {
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> conv_z, conv_a;
    std::vector<double> bn_batch_mean, bn_batch_var, bn_inv_std;
    std::vector<std::vector<double>> bn_xhat, bn_out;
    std::vector<std::vector<double>> z1, a1, m1;
    std::vector<std::vector<double>> z2, a2, m2;
    std::vector<std::vector<double>> z3, a3, m3;
    std::vector<double> logits, probs;
};

// Batch forward pass. Train mode normalizes with batch statistics and
// applies inverted dropout from rng; infer mode is a pure function of
// (model, x). rng may be null in infer mode; cache may be null when only
// probabilities are needed.
std::vector<double> forward_batch(const ConvNetModel& model,
                                  const std::vector<std::vector<double>>& xs, Mode mode,
                                  SplitMix64* rng, ForwardCache* cache);

double forward(const ConvNetModel& model, const std::vector<double>& x, Mode mode,
               SplitMix64* rng = nullptr);

// running = momentum * running + (1 - momentum) * batch, from a train-mode
// cache. The trainer calls this once per batch.
void update_running_stats(ConvNetModel& model, const ForwardCache& cache);

struct Gradients {
    std::vector<double> conv_w, conv_b, bn_gamma, bn_beta;
    std::vector<double> w1, b1, w2, b2, w3, b3, w4, b4;
};

// Analytic gradients of the mean clipped cross entropy over the cached
// batch, including the flow through the batch statistics.
Gradients backward(const ConvNetModel& model, const ForwardCache& cache,
                   const std::vector<int>& ys);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t patience = 5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 42;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    ConvNetModel model;  // weights from the best validation-loss epoch
    std::vector<EpochStats> history;
};

// Minibatch Adam with per-epoch seeded shuffling and early stopping once
// validation loss has not improved for more than `patience` epochs.
TrainResult train(ConvNetModel model, const std::vector<std::vector<double>>& train_x,
                  const std::vector<int>& train_y,
                  const std::vector<std::vector<double>>& val_x,
                  const std::vector<int>& val_y, const TrainConfig& cfg);

// Infer-mode probability and thresholded label (exactly at the threshold is
// class 0).
std::pair<double, bool> predict(const ConvNetModel& model, const std::vector<double>& x);

} // namespace sdml
