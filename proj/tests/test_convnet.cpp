#include "sdml/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "doctest.h"
#include "sdml/errors.hpp"
#include "sdml/features.hpp"
#include "sdml/metrics.hpp"
#include "sdml/rng.hpp"

using namespace sdml;

namespace {

NetworkShape reduced_shape() {
    NetworkShape s;
    s.features = 8;
    s.filters = 4;
    s.kernel = 3;
    s.dense1 = 10;
    s.dense2 = 8;
    s.dense3 = 6;
    return s;
}

double standard_normal(SplitMix64& rng) {
    const double u1 = 1.0 - rng.next_double();
    const double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Two gaussian blobs separated along every axis.
void gaussian_data(std::size_t n, std::size_t width, double spread, std::uint64_t seed,
                   std::vector<std::vector<double>>& xs, std::vector<int>& ys) {
    SplitMix64 rng(seed);
    xs.clear();
    ys.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        std::vector<double> row(width);
        const double center = label == 1 ? spread : -spread;
        for (std::size_t f = 0; f < width; ++f) row[f] = center + standard_normal(rng);
        xs.push_back(std::move(row));
        ys.push_back(label);
    }
}

bool close_rel(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// All trainable tensors plus the running statistics, in storage order.
std::vector<std::vector<double>*> tensor_list(ConvNetModel& m) {
    return {&m.conv_w, &m.conv_b, &m.bn_gamma, &m.bn_beta, &m.w1, &m.b1,
            &m.w2,     &m.b2,     &m.w3,       &m.b3,      &m.w4, &m.b4};
}

std::vector<std::vector<double>*> gradient_list(Gradients& g) {
    return {&g.conv_w, &g.conv_b, &g.bn_gamma, &g.bn_beta, &g.w1, &g.b1,
            &g.w2,     &g.b2,     &g.w3,       &g.b3,      &g.w4, &g.b4};
}

double mean_bce(const std::vector<double>& probs, const std::vector<int>& ys) {
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) sum += bce_loss(probs[i], ys[i]);
    return sum / static_cast<double>(probs.size());
}

// Difference quotients need a point where the loss is differentiable. With
// all-zero biases a layer whose activations all die puts the next
// pre-activation exactly on the relu kink, so move the biases off zero.
void jitter_biases(ConvNetModel& m, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (auto* t : {&m.conv_b, &m.bn_beta, &m.b1, &m.b2, &m.b3, &m.b4}) {
        for (double& v : *t) v = 0.2 * (2.0 * rng.next_double() - 1.0);
    }
}

} // namespace

TEST_CASE("parameter audit matches the layer arithmetic") {
    ConvNetModel m = build_network(1);
    CHECK(m.shape.positions() == 66);
    CHECK(m.shape.flat() == 8448);

    auto audit = parameter_audit(m);
    REQUIRE(audit.size() == 7);
    CHECK(audit[0].name == "conv1d");
    CHECK(audit[0].count == 512);
    CHECK(audit[1].name == "batch_norm");
    CHECK(audit[1].count == 512);
    CHECK(audit[2].name == "flatten");
    CHECK(audit[2].count == 0);
    CHECK(audit[3].name == "dense1");
    CHECK(audit[3].count == 2'162'944);
    CHECK(audit[4].name == "dense2");
    CHECK(audit[4].count == 32'896);
    CHECK(audit[5].name == "dense3");
    CHECK(audit[5].count == 8'256);
    CHECK(audit[6].name == "output");
    CHECK(audit[6].count == 65);
    CHECK(parameter_count(m) == 2'205'185);

    ConvNetModel r = build_network(1, reduced_shape());
    CHECK(r.shape.positions() == 6);
    CHECK(r.shape.flat() == 24);
    CHECK(parameter_count(r) == (12 + 4) + 16 + (24 * 10 + 10) + (10 * 8 + 8) +
                                    (8 * 6 + 6) + (6 + 1));
}

TEST_CASE("freshly built network has the documented initial state") {
    ConvNetModel m = build_network(99, reduced_shape());
    CHECK(m.seed == 99);
    CHECK(m.schema == 0);  // non-production width
    CHECK(build_network(3).schema == schema_hash());

    for (double v : m.conv_b) CHECK(v == 0.0);
    for (double v : m.b1) CHECK(v == 0.0);
    for (double v : m.b4) CHECK(v == 0.0);
    for (double v : m.bn_gamma) CHECK(v == 1.0);
    for (double v : m.bn_beta) CHECK(v == 0.0);
    for (double v : m.bn_mean) CHECK(v == 0.0);
    for (double v : m.bn_var) CHECK(v == 1.0);

    const double conv_limit = std::sqrt(6.0 / 3.0);
    for (double v : m.conv_w) CHECK(std::fabs(v) <= conv_limit);
    const double w1_limit = std::sqrt(6.0 / 24.0);
    for (double v : m.w1) CHECK(std::fabs(v) <= w1_limit);
    CHECK(*std::max_element(m.w1.begin(), m.w1.end()) >
          *std::min_element(m.w1.begin(), m.w1.end()));

    ConvNetModel again = build_network(99, reduced_shape());
    CHECK(again.conv_w == m.conv_w);
    CHECK(again.w1 == m.w1);
    ConvNetModel other = build_network(100, reduced_shape());
    CHECK(other.conv_w != m.conv_w);
}

TEST_CASE("all-zero weights produce probability one half") {
    ConvNetModel m = build_network(5, reduced_shape());
    for (auto* t : tensor_list(m)) std::fill(t->begin(), t->end(), 0.0);
    m.bn_gamma.assign(m.shape.filters, 1.0);
    m.bn_var.assign(m.shape.filters, 1.0);

    const std::vector<double> x{0.3, -0.7, 1.1, 0.0, 2.0, -1.5, 0.4, 0.9};
    CHECK(forward(m, x, Mode::infer) == 0.5);

    auto [p, label] = predict(m, x);
    CHECK(p == 0.5);
    CHECK_FALSE(label);  // at the threshold the negative class wins

    m.b4[0] = 1.0;
    auto [p2, label2] = predict(m, x);
    CHECK(p2 == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
    CHECK(label2);
}

TEST_CASE("inference is pure and deterministic") {
    ConvNetModel m = build_network(11, reduced_shape());
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(16, 8, 1.0, 21, xs, ys);

    auto first = forward_batch(m, xs, Mode::infer, nullptr, nullptr);
    auto second = forward_batch(m, xs, Mode::infer, nullptr, nullptr);
    CHECK(first == second);
    for (double p : first) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
    // Batched and one-at-a-time inference agree.
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(forward(m, xs[i], Mode::infer) == first[i]);
}

TEST_CASE("malformed inputs are rejected") {
    ConvNetModel m = build_network(11, reduced_shape());
    CHECK_THROWS_AS(forward(m, std::vector<double>(7, 0.0), Mode::infer), input_error);
    std::vector<double> bad(8, 0.0);
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(forward(m, bad, Mode::infer), input_error);
    bad[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(forward(m, bad, Mode::infer), input_error);
}

TEST_CASE("analytic gradients match central differences on a small network") {
    ConvNetModel m = build_network(17, reduced_shape());
    jitter_biases(m, 171);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(6, 8, 0.8, 33, xs, ys);

    // Reseeding before every evaluation freezes the dropout masks: the number
    // of draws depends only on the batch and layer sizes, never on the
    // parameter values.
    const std::uint64_t mask_seed = 999;
    auto loss_at = [&](const ConvNetModel& model) {
        SplitMix64 rng(mask_seed);
        auto probs = forward_batch(model, xs, Mode::train, &rng, nullptr);
        return mean_bce(probs, ys);
    };

    SplitMix64 rng(mask_seed);
    ForwardCache cache;
    forward_batch(m, xs, Mode::train, &rng, &cache);
    Gradients analytic = backward(m, cache, ys);

    auto params = tensor_list(m);
    auto grads = gradient_list(analytic);
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t]->size(); ++i) slots.emplace_back(t, i);
    }
    SplitMix64 pick(4242);
    shuffle(slots, pick);
    slots.resize(std::min<std::size_t>(slots.size(), 200));

    const double h = 1e-5;
    for (auto [t, i] : slots) {
        ConvNetModel plus = m;
        ConvNetModel minus = m;
        (*tensor_list(plus)[t])[i] += h;
        (*tensor_list(minus)[t])[i] -= h;
        const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
        const double an = (*grads[t])[i];
        const double denom = std::max({1e-6, std::fabs(fd), std::fabs(an)});
        CHECK(std::fabs(fd - an) / denom < 1e-4);
    }
}

TEST_CASE("analytic gradients match central differences at production width") {
    ConvNetModel m = build_network(23);
    jitter_biases(m, 231);
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(3, 68, 0.8, 51, xs, ys);

    const std::uint64_t mask_seed = 777;
    auto loss_at = [&](const ConvNetModel& model) {
        SplitMix64 rng(mask_seed);
        auto probs = forward_batch(model, xs, Mode::train, &rng, nullptr);
        return mean_bce(probs, ys);
    };

    SplitMix64 rng(mask_seed);
    ForwardCache cache;
    forward_batch(m, xs, Mode::train, &rng, &cache);
    Gradients analytic = backward(m, cache, ys);
    auto grads = gradient_list(analytic);

    // A slot from every tensor; the small network covers the dense interiors.
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    auto params = tensor_list(m);
    SplitMix64 pick(31);
    for (std::size_t t = 0; t < params.size(); ++t) {
        slots.emplace_back(t, pick.next_below(params[t]->size()));
    }

    const double h = 1e-5;
    for (auto [t, i] : slots) {
        ConvNetModel plus = m;
        ConvNetModel minus = m;
        (*tensor_list(plus)[t])[i] += h;
        (*tensor_list(minus)[t])[i] -= h;
        const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
        const double an = (*grads[t])[i];
        const double denom = std::max({1e-6, std::fabs(fd), std::fabs(an)});
        CHECK(std::fabs(fd - an) / denom < 1e-4);
    }
}

TEST_CASE("saturated correct predictions are a zero-gradient fixed point") {
    ConvNetModel m = build_network(29, reduced_shape());
    m.b4[0] = 40.0;  // sigmoid(40) is above the clip ceiling
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(8, 8, 1.0, 13, xs, ys);
    std::fill(ys.begin(), ys.end(), 1);

    SplitMix64 rng(55);
    ForwardCache cache;
    auto probs = forward_batch(m, xs, Mode::train, &rng, &cache);
    for (double p : probs) CHECK(p >= 1.0 - 1e-15);

    Gradients g = backward(m, cache, ys);
    for (auto* t : gradient_list(g)) {
        for (double v : *t) CHECK(std::fabs(v) <= 1e-12);
    }
}

TEST_CASE("duplicating the batch leaves the gradient unchanged") {
    ConvNetModel m = build_network(37, reduced_shape());
    m.dropout1 = m.dropout2 = m.dropout3 = 0.0;
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(4, 8, 1.0, 61, xs, ys);

    std::vector<std::vector<double>> doubled = xs;
    doubled.insert(doubled.end(), xs.begin(), xs.end());
    std::vector<int> doubled_y = ys;
    doubled_y.insert(doubled_y.end(), ys.begin(), ys.end());

    SplitMix64 rng1(1), rng2(1);
    ForwardCache c1, c2;
    forward_batch(m, xs, Mode::train, &rng1, &c1);
    forward_batch(m, doubled, Mode::train, &rng2, &c2);
    Gradients g1 = backward(m, c1, ys);
    Gradients g2 = backward(m, c2, doubled_y);

    auto l1 = gradient_list(g1);
    auto l2 = gradient_list(g2);
    for (std::size_t t = 0; t < l1.size(); ++t) {
        REQUIRE(l1[t]->size() == l2[t]->size());
        for (std::size_t i = 0; i < l1[t]->size(); ++i) {
            CHECK(close_rel((*l1[t])[i], (*l2[t])[i], 1e-11));
        }
    }
}

TEST_CASE("normalization cancels a per-channel shift of the convolution output") {
    ConvNetModel m = build_network(41, reduced_shape());
    // Keep every pre-activation positive so the relu passes the shift through.
    for (double& v : m.conv_w) v *= 0.3;
    for (double& v : m.conv_b) v = 5.0;

    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(6, 8, 0.5, 71, xs, ys);

    ConvNetModel shifted = m;
    shifted.conv_b[2] += 0.7;

    SplitMix64 r1(9), r2(9);
    ForwardCache c1, c2;
    auto p1 = forward_batch(m, xs, Mode::train, &r1, &c1);
    auto p2 = forward_batch(shifted, xs, Mode::train, &r2, &c2);

    for (std::size_t b = 0; b < xs.size(); ++b) {
        for (double v : c1.conv_z[b]) CHECK(v > 0.0);
        for (std::size_t i = 0; i < c1.bn_out[b].size(); ++i) {
            CHECK(std::fabs(c1.bn_out[b][i] - c2.bn_out[b][i]) <= 1e-9);
        }
    }
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(std::fabs(p1[i] - p2[i]) <= 1e-9);
}

TEST_CASE("inverted dropout preserves the expected activation") {
    ConvNetModel m = build_network(43, reduced_shape());
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(1, 8, 1.0, 81, xs, ys);

    SplitMix64 rng(2024);
    ForwardCache cache;
    forward_batch(m, xs, Mode::train, &rng, &cache);
    std::vector<double> target(m.shape.dense1);
    for (std::size_t j = 0; j < target.size(); ++j) {
        target[j] = cache.z1[0][j] > 0.0 ? cache.z1[0][j] : 0.0;
    }
    std::size_t unit = 0;
    for (std::size_t j = 1; j < target.size(); ++j) {
        if (target[j] > target[unit]) unit = j;
    }
    REQUIRE(target[unit] > 0.0);

    const std::size_t draws = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
        forward_batch(m, xs, Mode::train, &rng, &cache);
        const double a = cache.a1[0][unit];
        sum += a;
        sum_sq += a * a;
    }
    const double mean = sum / draws;
    const double var = sum_sq / draws - mean * mean;
    const double se = std::sqrt(std::max(var, 0.0) / draws);
    CHECK(std::fabs(mean - target[unit]) <= 3.0 * se);
}

TEST_CASE("running statistics blend in the batch statistics") {
    ConvNetModel m = build_network(47, reduced_shape());
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(5, 8, 1.0, 91, xs, ys);

    SplitMix64 rng(3);
    ForwardCache cache;
    forward_batch(m, xs, Mode::train, &rng, &cache);

    const std::size_t P = m.shape.positions();
    const std::size_t C = m.shape.filters;
    for (std::size_t c = 0; c < C; ++c) {
        double s = 0.0;
        for (std::size_t b = 0; b < xs.size(); ++b) {
            for (std::size_t p = 0; p < P; ++p) s += cache.conv_a[b][p * C + c];
        }
        const double mean = s / static_cast<double>(xs.size() * P);
        double sq = 0.0;
        for (std::size_t b = 0; b < xs.size(); ++b) {
            for (std::size_t p = 0; p < P; ++p) {
                const double d = cache.conv_a[b][p * C + c] - mean;
                sq += d * d;
            }
        }
        const double var = sq / static_cast<double>(xs.size() * P);
        CHECK(cache.bn_batch_mean[c] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(cache.bn_batch_var[c] == doctest::Approx(var).epsilon(1e-12));
        CHECK(cache.bn_batch_var[c] >= 0.0);
    }

    update_running_stats(m, cache);
    for (std::size_t c = 0; c < C; ++c) {
        CHECK(m.bn_mean[c] ==
              doctest::Approx(0.01 * cache.bn_batch_mean[c]).epsilon(1e-12));
        CHECK(m.bn_var[c] ==
              doctest::Approx(0.99 + 0.01 * cache.bn_batch_var[c]).epsilon(1e-12));
    }
}

TEST_CASE("training separates two well-spread classes") {
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(1000, 8, 2.0, 101, xs, ys);
    std::vector<std::vector<double>> train_x(xs.begin(), xs.begin() + 800);
    std::vector<int> train_y(ys.begin(), ys.begin() + 800);
    std::vector<std::vector<double>> val_x(xs.begin() + 800, xs.end());
    std::vector<int> val_y(ys.begin() + 800, ys.end());

    TrainConfig cfg;
    cfg.max_epochs = 30;
    cfg.patience = 3;
    cfg.seed = 7;
    ConvNetModel net = build_network(7, reduced_shape());
    TrainResult result = train(net, train_x, train_y, val_x, val_y, cfg);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < val_x.size(); ++i) {
        correct += static_cast<std::size_t>(predict(result.model, val_x[i]).second ==
                                            (val_y[i] == 1));
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(val_x.size());
    CHECK(accuracy >= 0.99);
    CHECK(result.history.size() <= 30);
}

TEST_CASE("training loss falls over the first ten epochs") {
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(200, 8, 1.0, 111, xs, ys);
    std::vector<std::vector<double>> train_x(xs.begin(), xs.begin() + 160);
    std::vector<int> train_y(ys.begin(), ys.begin() + 160);
    std::vector<std::vector<double>> val_x(xs.begin() + 160, xs.end());
    std::vector<int> val_y(ys.begin() + 160, ys.end());

    TrainConfig cfg;
    cfg.max_epochs = 10;
    cfg.patience = 10;
    cfg.seed = 5;
    TrainResult result = train(build_network(5, reduced_shape()), train_x, train_y, val_x,
                               val_y, cfg);
    REQUIRE(result.history.size() == 10);
    CHECK(result.history[9].train_loss < result.history[0].train_loss);
}

TEST_CASE("zero patience stops at the first epoch that fails to improve") {
    // Random labels: the validation loss cannot keep improving for long.
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(120, 8, 0.0, 121, xs, ys);
    SplitMix64 label_rng(9);
    for (int& y : ys) y = static_cast<int>(label_rng.next_below(2));
    ys[0] = 0;
    ys[1] = 1;

    std::vector<std::vector<double>> train_x(xs.begin(), xs.begin() + 80);
    std::vector<int> train_y(ys.begin(), ys.begin() + 80);
    std::vector<std::vector<double>> val_x(xs.begin() + 80, xs.end());
    std::vector<int> val_y(ys.begin() + 80, ys.end());

    TrainConfig cfg;
    cfg.max_epochs = 50;
    cfg.patience = 0;
    cfg.seed = 19;
    TrainResult result = train(build_network(19, reduced_shape()), train_x, train_y, val_x,
                               val_y, cfg);
    REQUIRE(result.history.size() >= 2);
    REQUIRE(result.history.size() < 50);

    // Every epoch before the last strictly improved; the last one did not.
    const auto& h = result.history;
    for (std::size_t i = 1; i + 1 < h.size(); ++i) {
        CHECK(h[i].val_loss < h[i - 1].val_loss);
    }
    CHECK(h.back().val_loss >= h[h.size() - 2].val_loss);
}

TEST_CASE("training is deterministic in the seed") {
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(80, 8, 1.5, 131, xs, ys);
    std::vector<std::vector<double>> train_x(xs.begin(), xs.begin() + 60);
    std::vector<int> train_y(ys.begin(), ys.begin() + 60);
    std::vector<std::vector<double>> val_x(xs.begin() + 60, xs.end());
    std::vector<int> val_y(ys.begin() + 60, ys.end());

    TrainConfig cfg;
    cfg.max_epochs = 4;
    cfg.patience = 4;
    cfg.seed = 23;

    TrainResult a = train(build_network(23, reduced_shape()), train_x, train_y, val_x, val_y,
                          cfg);
    TrainResult b = train(build_network(23, reduced_shape()), train_x, train_y, val_x, val_y,
                          cfg);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].train_loss == b.history[i].train_loss);
        CHECK(a.history[i].val_loss == b.history[i].val_loss);
        CHECK(a.history[i].train_accuracy == b.history[i].train_accuracy);
        CHECK(a.history[i].val_accuracy == b.history[i].val_accuracy);
    }
    auto ta = tensor_list(a.model);
    auto tb = tensor_list(b.model);
    for (std::size_t t = 0; t < ta.size(); ++t) CHECK(*ta[t] == *tb[t]);
    CHECK(a.model.bn_mean == b.model.bn_mean);
    CHECK(a.model.bn_var == b.model.bn_var);

    TrainConfig other = cfg;
    other.seed = 24;
    TrainResult c = train(build_network(23, reduced_shape()), train_x, train_y, val_x, val_y,
                          other);
    CHECK(c.model.w4 != a.model.w4);
}

TEST_CASE("training rejects unusable configurations and data") {
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    gaussian_data(20, 8, 1.0, 141, xs, ys);
    ConvNetModel net = build_network(1, reduced_shape());

    TrainConfig bad;
    bad.batch_size = 0;
    CHECK_THROWS_AS(train(net, xs, ys, xs, ys, bad), input_error);
    bad = TrainConfig{};
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(train(net, xs, ys, xs, ys, bad), input_error);

    TrainConfig cfg;
    std::vector<int> ones(ys.size(), 1);
    CHECK_THROWS_AS(train(net, xs, ones, xs, ys, cfg), training_error);
    CHECK_THROWS_AS(train(net, xs, ys, xs, ones, cfg), training_error);
    CHECK_THROWS_AS(train(net, {}, {}, xs, ys, cfg), training_error);
    std::vector<int> short_y(ys.begin(), ys.end() - 1);
    CHECK_THROWS_AS(train(net, xs, short_y, xs, ys, cfg), input_error);
}
