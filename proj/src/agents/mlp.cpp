#include "fedrl/agents/mlp.hpp"

#include <cmath>
#include <string>

#include "fedrl/errors.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamHyper& hyper) {
    if (params.size() != grads.size() || state.m.size() != params.size() ||
        state.v.size() != params.size()) {
        throw UsageError("adam_step: parameter/gradient/moment shapes differ");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grads[i];
        state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
}

Mlp::Mlp(int inputs, std::vector<int> hidden, int outputs, double bn_momentum, double bn_eps)
    : bn_momentum_(bn_momentum), bn_eps_(bn_eps) {
    if (inputs <= 0 || outputs <= 0) throw UsageError("Mlp: inputs/outputs must be positive");
    for (int h : hidden) {
        if (h <= 0) throw UsageError("Mlp: hidden sizes must be positive");
    }
    // dense layer l maps in_[l] -> out_[l]; the last layer is the head
    in_.push_back(inputs);
    for (int h : hidden) {
        out_.push_back(h);
        in_.push_back(h);
    }
    out_.push_back(outputs);

    std::size_t p = 0, s = 0;
    layers_.resize(in_.size());
    for (std::size_t l = 0; l < in_.size(); ++l) {
        auto& lv = layers_[l];
        lv.w = p;
        p += static_cast<std::size_t>(in_[l]) * out_[l];
        lv.b = p;
        p += out_[l];
        if (l + 1 < in_.size()) {  // blocks carry batch norm, the head does not
            lv.gamma = p;
            p += out_[l];
            lv.beta = p;
            p += out_[l];
            lv.mean = s;
            s += out_[l];
            lv.var = s;
            s += out_[l];
        }
    }
    params_.assign(p, 0.0);
    stats_.assign(s, 0.0);
    // gamma = 1 and running variance = 1 even before init_weights
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        for (int u = 0; u < out_[l]; ++u) {
            params_[layers_[l].gamma + u] = 1.0;
            stats_[layers_[l].var + u] = 1.0;
        }
    }
}

void Mlp::init_weights(std::mt19937_64& rng) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(in_[l]));
        double* w = params_.data() + layers_[l].w;
        const std::size_t n = static_cast<std::size_t>(in_[l]) * out_[l];
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = bound * (2.0 * uniform01(rng) - 1.0);
        }
        double* b = params_.data() + layers_[l].b;
        for (int u = 0; u < out_[l]; ++u) b[u] = 0.0;
        if (l + 1 < layers_.size()) {
            for (int u = 0; u < out_[l]; ++u) {
                params_[layers_[l].gamma + u] = 1.0;
                params_[layers_[l].beta + u] = 0.0;
                stats_[layers_[l].mean + u] = 0.0;
                stats_[layers_[l].var + u] = 1.0;
            }
        }
    }
}

void Mlp::dense(const LayerView& lv, int in, int out, const double* x, double* z) const {
    const double* w = params_.data() + lv.w;
    const double* b = params_.data() + lv.b;
    for (int u = 0; u < out; ++u) {
        const double* row = w + static_cast<std::size_t>(u) * in;
        double acc = 0.0;
        for (int i = 0; i < in; ++i) acc += row[i] * x[i];
        z[u] = acc + b[u];
    }
}

void Mlp::forward(std::span<const double> x, std::span<double> q, bool train, bool update_stats,
                  Cache* cache) {
    if (static_cast<int>(x.size()) != in_[0]) {
        throw NumericError("Mlp::forward: input has " + std::to_string(x.size()) +
                           " features, expected " + std::to_string(in_[0]));
    }
    if (static_cast<int>(q.size()) != out_.back()) {
        throw NumericError("Mlp::forward: output slot count mismatch");
    }
    if (cache != nullptr && !train) {
        throw UsageError("Mlp::forward: cache requires train mode");
    }
    const int n_blocks = blocks();
    if (cache) {
        cache->block_input.resize(n_blocks);
        cache->relu.resize(n_blocks);
        cache->normalized.resize(n_blocks);
        cache->inv_std.resize(n_blocks);
    }

    std::vector<double>& cur = scratch_in_;
    std::vector<double>& z = scratch_z_;
    cur.assign(x.begin(), x.end());
    for (int l = 0; l < n_blocks; ++l) {
        const auto& lv = layers_[l];
        z.resize(out_[l]);
        dense(lv, in_[l], out_[l], cur.data(), z.data());
        if (cache) cache->block_input[l].assign(cur.begin(), cur.end());

        // ReLU then batch norm with the (pre-update) running statistics
        cur.resize(out_[l]);
        if (cache) {
            cache->normalized[l].resize(out_[l]);
            cache->inv_std[l].resize(out_[l]);
        }
        const double* gamma = params_.data() + lv.gamma;
        const double* beta = params_.data() + lv.beta;
        double* mean = stats_.data() + lv.mean;
        double* var = stats_.data() + lv.var;
        for (int u = 0; u < out_[l]; ++u) {
            const double a = z[u] > 0.0 ? z[u] : 0.0;
            z[u] = a;
            const double is = 1.0 / std::sqrt(var[u] + bn_eps_);
            const double norm = (a - mean[u]) * is;
            cur[u] = gamma[u] * norm + beta[u];
            if (!std::isfinite(cur[u])) {
                throw NumericError("Mlp::forward: non-finite activation in block " +
                                   std::to_string(l));
            }
            if (cache) {
                cache->normalized[l][u] = norm;
                cache->inv_std[l][u] = is;
            }
        }
        if (train && update_stats) {
            for (int u = 0; u < out_[l]; ++u) {
                const double a = z[u];
                const double dev = a - mean[u];
                mean[u] = bn_momentum_ * mean[u] + (1.0 - bn_momentum_) * a;
                var[u] = bn_momentum_ * var[u] + (1.0 - bn_momentum_) * dev * dev;
            }
        }
        if (cache) cache->relu[l].assign(z.begin(), z.end());
    }

    if (cache) cache->head_input.assign(cur.begin(), cur.end());
    const auto& head = layers_.back();
    dense(head, in_.back(), out_.back(), cur.data(), q.data());
    for (int u = 0; u < out_.back(); ++u) {
        if (!std::isfinite(q[u])) {
            throw NumericError("Mlp::forward: non-finite activation in output layer");
        }
    }
}

void Mlp::backward(const Cache& cache, int action, double delta, std::span<double> grads) const {
    if (grads.size() != params_.size()) {
        throw UsageError("Mlp::backward: gradient buffer size mismatch");
    }
    if (cache.head_input.empty()) {
        throw UsageError("Mlp::backward: missing forward cache");
    }
    if (action < 0 || action >= out_.back()) {
        throw UsageError("Mlp::backward: action out of range");
    }
    std::fill(grads.begin(), grads.end(), 0.0);

    // Loss = 1/2 delta^2 with the target constant: dLoss/dq[action] = -delta.
    const double g_out = -delta;
    const auto& head = layers_.back();
    const int head_in = in_.back();
    std::vector<double> dcur(head_in, 0.0);
    {
        const double* x = cache.head_input.data();
        double* dw = grads.data() + head.w + static_cast<std::size_t>(action) * head_in;
        for (int i = 0; i < head_in; ++i) dw[i] = g_out * x[i];
        grads[head.b + action] = g_out;
        const double* w = params_.data() + head.w + static_cast<std::size_t>(action) * head_in;
        for (int i = 0; i < head_in; ++i) dcur[i] = w[i] * g_out;
    }

    for (int l = blocks() - 1; l >= 0; --l) {
        const auto& lv = layers_[l];
        const int n_out = out_[l];
        const int n_in = in_[l];
        const double* gamma = params_.data() + lv.gamma;
        std::vector<double> dz(n_out);
        for (int u = 0; u < n_out; ++u) {
            const double dy = dcur[u];
            grads[lv.gamma + u] = dy * cache.normalized[l][u];
            grads[lv.beta + u] = dy;
            const double da = dy * gamma[u] * cache.inv_std[l][u];
            dz[u] = cache.relu[l][u] > 0.0 ? da : 0.0;
        }
        const double* x = cache.block_input[l].data();
        double* dw = grads.data() + lv.w;
        for (int u = 0; u < n_out; ++u) {
            double* row = dw + static_cast<std::size_t>(u) * n_in;
            const double d = dz[u];
            for (int i = 0; i < n_in; ++i) row[i] = d * x[i];
            grads[lv.b + u] = d;
        }
        std::vector<double> dx(n_in, 0.0);
        const double* w = params_.data() + lv.w;
        for (int u = 0; u < n_out; ++u) {
            const double d = dz[u];
            if (d == 0.0) continue;
            const double* row = w + static_cast<std::size_t>(u) * n_in;
            for (int i = 0; i < n_in; ++i) dx[i] += row[i] * d;
        }
        dcur = std::move(dx);
    }
}

std::int64_t Mlp::count_learnables(int inputs, const std::vector<int>& hidden, int outputs) {
    std::int64_t n = 0;
    int prev = inputs;
    for (int h : hidden) {
        n += static_cast<std::int64_t>(prev) * h + h;  // dense
        n += 2LL * h;                                  // gamma, beta
        prev = h;
    }
    n += static_cast<std::int64_t>(prev) * outputs + outputs;
    return n;
}

std::int64_t Mlp::count_value_operations(int inputs, const std::vector<int>& hidden, int outputs) {
    std::int64_t n = 0;
    int prev = inputs;
    auto dense_ops = [](int in, int out) {
        return static_cast<std::int64_t>(in) * out + static_cast<std::int64_t>(in - 1) * out;
    };
    for (int h : hidden) {
        n += dense_ops(prev, h);
        prev = h;
    }
    n += dense_ops(prev, outputs);
    return n;
}

}  // namespace fedrl
