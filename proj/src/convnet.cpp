#include "sdml/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "sdml/errors.hpp"
#include "sdml/features.hpp"
#include "sdml/metrics.hpp"

namespace sdml {

namespace {

constexpr double kProbClip = 1e-15;

double sigmoid(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void he_uniform(std::vector<double>& w, std::size_t fan_in, SplitMix64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : w) v = (2.0 * rng.next_double() - 1.0) * limit;
}

void check_finite(const std::vector<std::vector<double>>& xs, std::size_t width) {
    for (const auto& x : xs) {
        if (x.size() != width) {
            throw input_error("network input has " + std::to_string(x.size()) +
                              " values; expected " + std::to_string(width));
        }
        for (double v : x) {
            if (!std::isfinite(v)) throw input_error("non-finite network input");
        }
    }
}

struct DenseLayer {
    const std::vector<double>& w;
    const std::vector<double>& b;
    std::size_t in;
    std::size_t out;
    double drop_rate;
};

// out[j] = b[j] + sum_i in[i] * w[i*out + j]
void dense_forward(const DenseLayer& layer, const std::vector<double>& input,
                   std::vector<double>& z) {
    z.assign(layer.b.begin(), layer.b.end());
    for (std::size_t i = 0; i < layer.in; ++i) {
        const double xi = input[i];
        if (xi == 0.0) continue;
        const double* row = layer.w.data() + i * layer.out;
        for (std::size_t j = 0; j < layer.out; ++j) z[j] += xi * row[j];
    }
}

void relu_dropout(const std::vector<double>& z, double drop_rate, Mode mode,
                  SplitMix64* rng, std::vector<double>& a, std::vector<double>* mask) {
    const std::size_t n = z.size();
    a.resize(n);
    if (mode == Mode::train) {
        const double keep = 1.0 - drop_rate;
        mask->resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double scaled = rng->next_double() < keep ? 1.0 / keep : 0.0;
            (*mask)[j] = scaled;
            a[j] = (z[j] > 0.0 ? z[j] : 0.0) * scaled;
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) a[j] = z[j] > 0.0 ? z[j] : 0.0;
    }
}

struct AdamState {
    std::vector<double> m, v;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::vector<double>& w, const std::vector<double>& g, AdamState& s,
               const TrainConfig& cfg, double bc1, double bc2) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * g[i];
        s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = s.m[i] / bc1;
        const double vhat = s.v[i] / bc2;
        w[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

} // namespace

ConvNetModel build_network(std::uint64_t seed, const NetworkShape& shape) {
    ConvNetModel m;
    m.shape = shape;
    m.seed = seed;
    m.schema = shape.features == kFeatureCount ? schema_hash() : 0;

    const std::size_t C = shape.filters;
    m.conv_w.resize(shape.kernel * C);
    m.conv_b.assign(C, 0.0);
    m.bn_gamma.assign(C, 1.0);
    m.bn_beta.assign(C, 0.0);
    m.bn_mean.assign(C, 0.0);
    m.bn_var.assign(C, 1.0);
    m.w1.resize(shape.flat() * shape.dense1);
    m.b1.assign(shape.dense1, 0.0);
    m.w2.resize(shape.dense1 * shape.dense2);
    m.b2.assign(shape.dense2, 0.0);
    m.w3.resize(shape.dense2 * shape.dense3);
    m.b3.assign(shape.dense3, 0.0);
    m.w4.resize(shape.dense3);
    m.b4.assign(1, 0.0);

    SplitMix64 rng(seed);
    he_uniform(m.conv_w, shape.kernel, rng);  // one input channel
    he_uniform(m.w1, shape.flat(), rng);
    he_uniform(m.w2, shape.dense1, rng);
    he_uniform(m.w3, shape.dense2, rng);
    he_uniform(m.w4, shape.dense3, rng);
    return m;
}

std::vector<LayerParams> parameter_audit(const ConvNetModel& m) {
    const NetworkShape& s = m.shape;
    return {
        {"conv1d", s.kernel * s.filters + s.filters},
        {"batch_norm", 4 * s.filters},
        {"flatten", 0},
        {"dense1", s.flat() * s.dense1 + s.dense1},
        {"dense2", s.dense1 * s.dense2 + s.dense2},
        {"dense3", s.dense2 * s.dense3 + s.dense3},
        {"output", s.dense3 + 1},
    };
}

std::size_t parameter_count(const ConvNetModel& m) {
    std::size_t total = 0;
    for (const auto& layer : parameter_audit(m)) total += layer.count;
    return total;
}

std::vector<double> forward_batch(const ConvNetModel& model,
                                  const std::vector<std::vector<double>>& xs, Mode mode,
                                  SplitMix64* rng, ForwardCache* cache) {
    const NetworkShape& s = model.shape;
    check_finite(xs, s.features);
    const std::size_t batch = xs.size();
    const std::size_t P = s.positions();
    const std::size_t C = s.filters;
    const std::size_t flat = s.flat();

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc.x = xs;
    cc.conv_z.assign(batch, std::vector<double>(flat));
    cc.conv_a.assign(batch, std::vector<double>(flat));
    cc.bn_xhat.assign(batch, std::vector<double>(flat));
    cc.bn_out.assign(batch, std::vector<double>(flat));
    cc.z1.resize(batch);
    cc.a1.resize(batch);
    cc.m1.resize(batch);
    cc.z2.resize(batch);
    cc.a2.resize(batch);
    cc.m2.resize(batch);
    cc.z3.resize(batch);
    cc.a3.resize(batch);
    cc.m3.resize(batch);
    cc.logits.resize(batch);
    cc.probs.resize(batch);

    for (std::size_t b = 0; b < batch; ++b) {
        std::vector<double>& z = cc.conv_z[b];
        for (std::size_t p = 0; p < P; ++p) {
            for (std::size_t c = 0; c < C; ++c) z[p * C + c] = model.conv_b[c];
            for (std::size_t k = 0; k < s.kernel; ++k) {
                const double xv = xs[b][p + k];
                const double* row = model.conv_w.data() + k * C;
                double* out = z.data() + p * C;
                for (std::size_t c = 0; c < C; ++c) out[c] += xv * row[c];
            }
        }
        std::vector<double>& a = cc.conv_a[b];
        for (std::size_t i = 0; i < flat; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
    }

    // Channel statistics: batch ones in train mode, running ones in infer.
    cc.bn_batch_mean.assign(C, 0.0);
    cc.bn_batch_var.assign(C, 0.0);
    cc.bn_inv_std.assign(C, 0.0);
    if (mode == Mode::train) {
        const double n = static_cast<double>(batch * P);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* a = cc.conv_a[b].data();
            for (std::size_t p = 0; p < P; ++p) {
                for (std::size_t c = 0; c < C; ++c) cc.bn_batch_mean[c] += a[p * C + c];
            }
        }
        for (std::size_t c = 0; c < C; ++c) cc.bn_batch_mean[c] /= n;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* a = cc.conv_a[b].data();
            for (std::size_t p = 0; p < P; ++p) {
                for (std::size_t c = 0; c < C; ++c) {
                    const double d = a[p * C + c] - cc.bn_batch_mean[c];
                    cc.bn_batch_var[c] += d * d;
                }
            }
        }
        for (std::size_t c = 0; c < C; ++c) {
            cc.bn_batch_var[c] /= n;
            cc.bn_inv_std[c] = 1.0 / std::sqrt(cc.bn_batch_var[c] + model.bn_epsilon);
        }
    } else {
        cc.bn_batch_mean = model.bn_mean;
        cc.bn_batch_var = model.bn_var;
        for (std::size_t c = 0; c < C; ++c) {
            cc.bn_inv_std[c] = 1.0 / std::sqrt(model.bn_var[c] + model.bn_epsilon);
        }
    }
    for (std::size_t b = 0; b < batch; ++b) {
        const double* a = cc.conv_a[b].data();
        double* xhat = cc.bn_xhat[b].data();
        double* out = cc.bn_out[b].data();
        for (std::size_t p = 0; p < P; ++p) {
            for (std::size_t c = 0; c < C; ++c) {
                const std::size_t i = p * C + c;
                xhat[i] = (a[i] - cc.bn_batch_mean[c]) * cc.bn_inv_std[c];
                out[i] = model.bn_gamma[c] * xhat[i] + model.bn_beta[c];
            }
        }
    }

    const DenseLayer l1{model.w1, model.b1, flat, s.dense1, model.dropout1};
    const DenseLayer l2{model.w2, model.b2, s.dense1, s.dense2, model.dropout2};
    const DenseLayer l3{model.w3, model.b3, s.dense2, s.dense3, model.dropout3};
    for (std::size_t b = 0; b < batch; ++b) {
        dense_forward(l1, cc.bn_out[b], cc.z1[b]);
        relu_dropout(cc.z1[b], l1.drop_rate, mode, rng, cc.a1[b], &cc.m1[b]);
        dense_forward(l2, cc.a1[b], cc.z2[b]);
        relu_dropout(cc.z2[b], l2.drop_rate, mode, rng, cc.a2[b], &cc.m2[b]);
        dense_forward(l3, cc.a2[b], cc.z3[b]);
        relu_dropout(cc.z3[b], l3.drop_rate, mode, rng, cc.a3[b], &cc.m3[b]);
        double logit = model.b4[0];
        for (std::size_t i = 0; i < s.dense3; ++i) logit += model.w4[i] * cc.a3[b][i];
        cc.logits[b] = logit;
        cc.probs[b] = sigmoid(logit);
    }
    return cc.probs;
}

double forward(const ConvNetModel& model, const std::vector<double>& x, Mode mode,
               SplitMix64* rng) {
    return forward_batch(model, {x}, mode, rng, nullptr)[0];
}

void update_running_stats(ConvNetModel& model, const ForwardCache& cache) {
    const double m = model.bn_momentum;
    for (std::size_t c = 0; c < model.shape.filters; ++c) {
        model.bn_mean[c] = m * model.bn_mean[c] + (1.0 - m) * cache.bn_batch_mean[c];
        model.bn_var[c] = m * model.bn_var[c] + (1.0 - m) * cache.bn_batch_var[c];
    }
}

Gradients backward(const ConvNetModel& model, const ForwardCache& cache,
                   const std::vector<int>& ys) {
    const NetworkShape& s = model.shape;
    const std::size_t batch = cache.x.size();
    const std::size_t P = s.positions();
    const std::size_t C = s.filters;
    const std::size_t flat = s.flat();

    Gradients g;
    g.conv_w.assign(model.conv_w.size(), 0.0);
    g.conv_b.assign(C, 0.0);
    g.bn_gamma.assign(C, 0.0);
    g.bn_beta.assign(C, 0.0);
    g.w1.assign(model.w1.size(), 0.0);
    g.b1.assign(s.dense1, 0.0);
    g.w2.assign(model.w2.size(), 0.0);
    g.b2.assign(s.dense2, 0.0);
    g.w3.assign(model.w3.size(), 0.0);
    g.b3.assign(s.dense3, 0.0);
    g.w4.assign(s.dense3, 0.0);
    g.b4.assign(1, 0.0);

    std::vector<std::vector<double>> dflat(batch, std::vector<double>(flat));
    std::vector<double> dz3(s.dense3), dz2(s.dense2), dz1(s.dense1);
    std::vector<double> da2(s.dense2), da1(s.dense1);

    for (std::size_t b = 0; b < batch; ++b) {
        const double p = cache.probs[b];
        // The loss is flat where the probability is clipped.
        const double dlogit = (p > kProbClip && p < 1.0 - kProbClip)
                                  ? (p - static_cast<double>(ys[b])) / static_cast<double>(batch)
                                  : 0.0;

        g.b4[0] += dlogit;
        for (std::size_t i = 0; i < s.dense3; ++i) {
            g.w4[i] += cache.a3[b][i] * dlogit;
            const double da3 = model.w4[i] * dlogit;
            dz3[i] = cache.z3[b][i] > 0.0 ? da3 * cache.m3[b][i] : 0.0;
        }

        for (std::size_t j = 0; j < s.dense3; ++j) g.b3[j] += dz3[j];
        for (std::size_t i = 0; i < s.dense2; ++i) {
            const double ai = cache.a2[b][i];
            double* row = g.w3.data() + i * s.dense3;
            const double* wrow = model.w3.data() + i * s.dense3;
            double acc = 0.0;
            for (std::size_t j = 0; j < s.dense3; ++j) {
                row[j] += ai * dz3[j];
                acc += wrow[j] * dz3[j];
            }
            da2[i] = acc;
        }
        for (std::size_t i = 0; i < s.dense2; ++i) {
            dz2[i] = cache.z2[b][i] > 0.0 ? da2[i] * cache.m2[b][i] : 0.0;
        }

        for (std::size_t j = 0; j < s.dense2; ++j) g.b2[j] += dz2[j];
        for (std::size_t i = 0; i < s.dense1; ++i) {
            const double ai = cache.a1[b][i];
            double* row = g.w2.data() + i * s.dense2;
            const double* wrow = model.w2.data() + i * s.dense2;
            double acc = 0.0;
            for (std::size_t j = 0; j < s.dense2; ++j) {
                row[j] += ai * dz2[j];
                acc += wrow[j] * dz2[j];
            }
            da1[i] = acc;
        }
        for (std::size_t i = 0; i < s.dense1; ++i) {
            dz1[i] = cache.z1[b][i] > 0.0 ? da1[i] * cache.m1[b][i] : 0.0;
        }

        for (std::size_t j = 0; j < s.dense1; ++j) g.b1[j] += dz1[j];
        std::vector<double>& dxb = dflat[b];
        for (std::size_t i = 0; i < flat; ++i) {
            const double xi = cache.bn_out[b][i];
            double* row = g.w1.data() + i * s.dense1;
            const double* wrow = model.w1.data() + i * s.dense1;
            double acc = 0.0;
            for (std::size_t j = 0; j < s.dense1; ++j) {
                row[j] += xi * dz1[j];
                acc += wrow[j] * dz1[j];
            }
            dxb[i] = acc;
        }
    }

    // Batchnorm backward per channel, through the batch statistics.
    const double n = static_cast<double>(batch * P);
    std::vector<std::vector<double>> dconv(batch, std::vector<double>(flat));
    for (std::size_t c = 0; c < C; ++c) {
        const double mean = cache.bn_batch_mean[c];
        const double inv = cache.bn_inv_std[c];
        const double gamma = model.bn_gamma[c];
        double sum_dxhat = 0.0, dvar = 0.0, sum_dev = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t p = 0; p < P; ++p) {
                const std::size_t i = p * C + c;
                const double dout = dflat[b][i];
                g.bn_gamma[c] += dout * cache.bn_xhat[b][i];
                g.bn_beta[c] += dout;
                const double dxhat = dout * gamma;
                const double dev = cache.conv_a[b][i] - mean;
                sum_dxhat += dxhat;
                dvar += dxhat * dev;
                sum_dev += dev;
            }
        }
        dvar *= -0.5 * inv * inv * inv;
        const double dmean = -inv * sum_dxhat + dvar * (-2.0 / n) * sum_dev;
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t p = 0; p < P; ++p) {
                const std::size_t i = p * C + c;
                const double dxhat = dflat[b][i] * gamma;
                const double dev = cache.conv_a[b][i] - mean;
                const double da = dxhat * inv + dvar * 2.0 * dev / n + dmean / n;
                dconv[b][i] = cache.conv_z[b][i] > 0.0 ? da : 0.0;
            }
        }
    }

    for (std::size_t b = 0; b < batch; ++b) {
        const std::vector<double>& dz = dconv[b];
        const std::vector<double>& x = cache.x[b];
        for (std::size_t p = 0; p < P; ++p) {
            const double* dzp = dz.data() + p * C;
            for (std::size_t c = 0; c < C; ++c) g.conv_b[c] += dzp[c];
            for (std::size_t k = 0; k < s.kernel; ++k) {
                const double xv = x[p + k];
                double* row = g.conv_w.data() + k * C;
                for (std::size_t c = 0; c < C; ++c) row[c] += xv * dzp[c];
            }
        }
    }
    return g;
}

TrainResult train(ConvNetModel model, const std::vector<std::vector<double>>& train_x,
                  const std::vector<int>& train_y,
                  const std::vector<std::vector<double>>& val_x,
                  const std::vector<int>& val_y, const TrainConfig& cfg) {
    if (cfg.batch_size < 1) throw input_error("batch size must be at least 1");
    if (!(cfg.learning_rate > 0.0)) throw input_error("learning rate must be positive");
    if (train_x.size() != train_y.size() || val_x.size() != val_y.size()) {
        throw input_error("row/label count mismatch");
    }
    auto both_classes = [](const std::vector<int>& y) {
        bool h0 = false, h1 = false;
        for (int v : y) (v == 1 ? h1 : h0) = true;
        return h0 && h1;
    };
    if (train_x.empty() || val_x.empty() || !both_classes(train_y) || !both_classes(val_y)) {
        throw training_error("training and validation splits must contain both classes");
    }

    // Stream 1 shuffles, stream 2 drives dropout.
    SplitMix64 shuffle_rng(child_seed(cfg.seed, 1));
    SplitMix64 dropout_rng(child_seed(cfg.seed, 2));

    AdamState s_conv_w(model.conv_w.size()), s_conv_b(model.conv_b.size());
    AdamState s_gamma(model.bn_gamma.size()), s_beta(model.bn_beta.size());
    AdamState s_w1(model.w1.size()), s_b1(model.b1.size());
    AdamState s_w2(model.w2.size()), s_b2(model.b2.size());
    AdamState s_w3(model.w3.size()), s_b3(model.b3.size());
    AdamState s_w4(model.w4.size()), s_b4(model.b4.size());
    std::size_t step = 0;

    TrainResult result;
    ConvNetModel best = model;
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::size_t epochs_since_best = 0;

    std::vector<std::size_t> order(train_x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    auto evaluate_split = [&](const ConvNetModel& m, const std::vector<std::vector<double>>& xs,
                              const std::vector<int>& ys, double& loss, double& accuracy) {
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < xs.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(xs.size(), start + cfg.batch_size);
            std::vector<std::vector<double>> batch(xs.begin() + start, xs.begin() + end);
            auto probs = forward_batch(m, batch, Mode::infer, nullptr, nullptr);
            for (std::size_t i = 0; i < probs.size(); ++i) {
                loss_sum += bce_loss(probs[i], ys[start + i]);
                correct += static_cast<std::size_t>((probs[i] > m.threshold) ==
                                                    (ys[start + i] == 1));
            }
        }
        loss = loss_sum / static_cast<double>(xs.size());
        accuracy = static_cast<double>(correct) / static_cast<double>(xs.size());
    };

    ForwardCache cache;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle(order, shuffle_rng);
        double train_loss_sum = 0.0;
        std::size_t train_correct = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::vector<double>> bx;
            std::vector<int> by;
            for (std::size_t i = start; i < end; ++i) {
                bx.push_back(train_x[order[i]]);
                by.push_back(train_y[order[i]]);
            }
            auto probs = forward_batch(model, bx, Mode::train, &dropout_rng, &cache);
            update_running_stats(model, cache);
            for (std::size_t i = 0; i < probs.size(); ++i) {
                train_loss_sum += bce_loss(probs[i], by[i]);
                train_correct +=
                    static_cast<std::size_t>((probs[i] > model.threshold) == (by[i] == 1));
            }
            Gradients grad = backward(model, cache, by);
            ++step;
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            adam_step(model.conv_w, grad.conv_w, s_conv_w, cfg, bc1, bc2);
            adam_step(model.conv_b, grad.conv_b, s_conv_b, cfg, bc1, bc2);
            adam_step(model.bn_gamma, grad.bn_gamma, s_gamma, cfg, bc1, bc2);
            adam_step(model.bn_beta, grad.bn_beta, s_beta, cfg, bc1, bc2);
            adam_step(model.w1, grad.w1, s_w1, cfg, bc1, bc2);
            adam_step(model.b1, grad.b1, s_b1, cfg, bc1, bc2);
            adam_step(model.w2, grad.w2, s_w2, cfg, bc1, bc2);
            adam_step(model.b2, grad.b2, s_b2, cfg, bc1, bc2);
            adam_step(model.w3, grad.w3, s_w3, cfg, bc1, bc2);
            adam_step(model.b3, grad.b3, s_b3, cfg, bc1, bc2);
            adam_step(model.w4, grad.w4, s_w4, cfg, bc1, bc2);
            adam_step(model.b4, grad.b4, s_b4, cfg, bc1, bc2);
        }

        EpochStats stats;
        stats.train_loss = train_loss_sum / static_cast<double>(order.size());
        stats.train_accuracy =
            static_cast<double>(train_correct) / static_cast<double>(order.size());
        evaluate_split(model, val_x, val_y, stats.val_loss, stats.val_accuracy);
        result.history.push_back(stats);
        if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.val_loss)) {
            throw training_error("non-finite loss at epoch " + std::to_string(epoch + 1));
        }

        if (stats.val_loss < best_val_loss) {
            best_val_loss = stats.val_loss;
            best = model;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best > cfg.patience) break;
        }
    }

    result.model = std::move(best);
    return result;
}

std::pair<double, bool> predict(const ConvNetModel& model, const std::vector<double>& x) {
    const double p = forward(model, x, Mode::infer);
    return {p, p > model.threshold};
}

} // namespace sdml
