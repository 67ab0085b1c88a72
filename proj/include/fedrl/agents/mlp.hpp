#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fedrl {

// Adam with bias correction.
struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamHyper& hyper);

// Multilayer perceptron built from blocks of dense -> ReLU -> batch norm,
// followed by a dense output layer, one output per action.
//
// Batch normalization always normalizes with the running statistics (they
// are updated from single observations with an exponential momentum rule),
// so training with batch size 1 stays well defined. Running statistics are
// state, not learnable parameters.
class Mlp {
public:
    Mlp(int inputs, std::vector<int> hidden, int outputs, double bn_momentum = 0.99,
        double bn_eps = 1e-5);

    // He-style uniform dense init scaled by fan-in; biases 0, gamma 1,
    // beta 0, running mean 0 / variance 1.
    void init_weights(std::mt19937_64& rng);

    struct Cache {
        // per block: input, post-ReLU activation, normalized activation,
        // 1/sqrt(var+eps); plus the output layer input
        std::vector<std::vector<double>> block_input;
        std::vector<std::vector<double>> relu;
        std::vector<std::vector<double>> normalized;
        std::vector<std::vector<double>> inv_std;
        std::vector<double> head_input;
    };

    // q must have `outputs()` slots. In train mode with update_stats the
    // running statistics absorb this observation (normalization itself uses
    // the pre-update values). Throws NumericError naming the layer on a
    // non-finite activation.
    void forward(std::span<const double> x, std::span<double> q, bool train, bool update_stats,
                 Cache* cache);

    // Gradients of 1/2 delta^2 with the TD target held constant, i.e.
    // dLoss/dq[action] = -delta, zero elsewhere. Fills `grads` (same layout
    // as learnables).
    void backward(const Cache& cache, int action, double delta, std::span<double> grads) const;

    std::span<double> learnables() { return params_; }
    std::span<const double> learnables() const { return params_; }
    std::span<double> running_stats() { return stats_; }
    std::span<const double> running_stats() const { return stats_; }

    int inputs() const { return in_[0]; }
    int outputs() const { return out_.back(); }
    int blocks() const { return static_cast<int>(in_.size()) - 1; }
    std::size_t n_learnables() const { return params_.size(); }
    std::size_t n_stats() const { return stats_.size(); }

    static std::int64_t count_learnables(int inputs, const std::vector<int>& hidden, int outputs);
    // Arithmetic to evaluate all action values once: per dense layer,
    // in*out multiplications and (in-1)*out additions.
    static std::int64_t count_value_operations(int inputs, const std::vector<int>& hidden,
                                               int outputs);

private:
    struct LayerView {
        std::size_t w = 0;      // offset of dense weights (out x in, row-major)
        std::size_t b = 0;      // offset of bias
        std::size_t gamma = 0;  // batch-norm gain (blocks only)
        std::size_t beta = 0;   // batch-norm shift (blocks only)
        std::size_t mean = 0;   // offset into stats_ (blocks only)
        std::size_t var = 0;
    };

    void dense(const LayerView& lv, int in, int out, const double* x, double* z) const;

    std::vector<int> in_;   // per dense layer
    std::vector<int> out_;
    std::vector<LayerView> layers_;
    std::vector<double> params_;
    std::vector<double> stats_;
    std::vector<double> scratch_in_;
    std::vector<double> scratch_z_;
    double bn_momentum_;
    double bn_eps_;
};

}  // namespace fedrl
