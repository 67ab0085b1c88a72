#include <doctest.h>

#include <cmath>
#include <random>

#include "fedrl/agents/agent.hpp"
#include "fedrl/agents/mlp.hpp"
#include "fedrl/errors.hpp"
#include "fedrl/rng.hpp"

using namespace fedrl;

namespace {

double loss_at(Mlp& net, std::span<const double> x, int action, double target) {
    std::vector<double> q(net.outputs(), 0.0);
    net.forward(x, q, false, false, nullptr);
    const double delta = target - q[action];
    return 0.5 * delta * delta;
}

// central finite differences over every learnable, frozen running stats
double max_rel_gradient_error(Mlp& net, std::span<const double> x, int action, double target,
                              double h = 1e-5) {
    std::vector<double> q(net.outputs(), 0.0);
    Mlp::Cache cache;
    net.forward(x, q, true, false, &cache);
    const double delta = target - q[action];
    std::vector<double> analytic(net.n_learnables(), 0.0);
    net.backward(cache, action, delta, analytic);

    auto params = net.learnables();
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + h;
        const double lp = loss_at(net, x, action, target);
        params[i] = keep - h;
        const double lm = loss_at(net, x, action, target);
        params[i] = keep;
        const double numeric = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("zero network outputs the output bias") {
    Mlp net(kStateDim, paper_hidden_sizes(), kNumActions);
    // all params zero except gamma (=1 by construction); biases zero
    std::vector<double> x(kStateDim, 0.7);
    std::vector<double> q(kNumActions, 99.0);
    net.forward(x, q, false, false, nullptr);
    for (double v : q) CHECK(v == 0.0);

    SUBCASE("output bias passes straight through") {
        auto params = net.learnables();
        // head bias of action 4 lives at the very end of the layout
        params[params.size() - kNumActions + 4] = 1.0;
        net.forward(x, q, false, false, nullptr);
        for (int a = 0; a < kNumActions; ++a) {
            CHECK(q[a] == (a == 4 ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("output length equals the action count") {
    Mlp net(kStateDim, paper_hidden_sizes(), kNumActions);
    CHECK(net.outputs() == 9);
    std::vector<double> q(kNumActions, 0.0);
    std::mt19937_64 gen(5);
    net.init_weights(gen);
    std::vector<double> x(kStateDim);
    for (auto& f : x) f = uniform01(gen);
    net.forward(x, q, false, false, nullptr);
    for (double v : q) CHECK(std::isfinite(v));
    std::vector<double> wrong(8, 0.0);
    CHECK_THROWS_AS(net.forward(x, wrong, false, false, nullptr), NumericError);
}

TEST_CASE("analytic gradients match central finite differences") {
    SUBCASE("3-unit toy network") {
        Mlp net(2, {3}, 2);
        std::mt19937_64 gen(99);
        net.init_weights(gen);
        const std::vector<double> x{0.4, -0.7};
        CHECK(max_rel_gradient_error(net, x, 1, 0.5) < 1e-4);
    }
    SUBCASE("randomized small networks") {
        std::mt19937_64 gen(123);
        for (int rep = 0; rep < 10; ++rep) {
            const int inputs = 2 + static_cast<int>(gen() % 4);
            std::vector<int> hidden{2 + static_cast<int>(gen() % 6),
                                    2 + static_cast<int>(gen() % 6)};
            const int outputs = 2 + static_cast<int>(gen() % 3);
            Mlp net(inputs, hidden, outputs);
            net.init_weights(gen);
            // move running stats off their init to exercise the normalizer
            for (auto& s : net.running_stats()) s = 0.5 + uniform01(gen);
            std::vector<double> x(inputs);
            for (auto& f : x) f = 2.0 * uniform01(gen) - 1.0;
            const int action = static_cast<int>(gen() % outputs);
            const double target = 2.0 * uniform01(gen) - 1.0;
            CHECK(max_rel_gradient_error(net, x, action, target) < 1e-4);
        }
    }
}

TEST_CASE("backward structure") {
    Mlp net(4, {5, 3}, 3);
    std::mt19937_64 gen(7);
    net.init_weights(gen);
    std::vector<double> x{0.1, -0.2, 0.3, 0.9};
    std::vector<double> q(3, 0.0);
    Mlp::Cache cache;
    net.forward(x, q, true, false, &cache);

    SUBCASE("zero delta gives all-zero gradients") {
        std::vector<double> grads(net.n_learnables(), 1.0);
        net.backward(cache, 1, 0.0, grads);
        for (double g : grads) CHECK(g == 0.0);
    }
    SUBCASE("non-selected output rows get zero gradient") {
        std::vector<double> grads(net.n_learnables(), 0.0);
        net.backward(cache, 1, 0.7, grads);
        // head layout: the last 3*3 weights then 3 biases
        const std::size_t head_b = net.n_learnables() - 3;
        const std::size_t head_w = head_b - 3 * 3;
        for (int row = 0; row < 3; ++row) {
            double norm = std::abs(grads[head_b + row]);
            for (int i = 0; i < 3; ++i) norm += std::abs(grads[head_w + row * 3 + i]);
            if (row == 1) {
                CHECK(norm > 0.0);  // the bias gradient is -delta regardless
            } else {
                CHECK(norm == 0.0);
            }
        }
    }
    SUBCASE("missing cache is a usage error") {
        Mlp::Cache empty;
        std::vector<double> grads(net.n_learnables(), 0.0);
        CHECK_THROWS_AS(net.backward(empty, 0, 1.0, grads), UsageError);
    }
}

TEST_CASE("adam optimizer") {
    SUBCASE("first-step magnitude is about lr per coordinate") {
        std::vector<double> p{1.0, -2.0, 0.5};
        std::vector<double> g{0.3, -0.8, 1e-3};
        AdamState st(3);
        AdamHyper hy;
        hy.lr = 0.01;
        adam_step(p, g, st, hy);
        CHECK(p[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-4));
        CHECK(p[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-4));
        CHECK(p[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-3));
    }
    SUBCASE("zero gradient on a fresh state leaves parameters unchanged") {
        std::vector<double> p{1.0, 2.0};
        std::vector<double> g{0.0, 0.0};
        AdamState st(2);
        adam_step(p, g, st, AdamHyper{});
        CHECK(p[0] == 1.0);
        CHECK(p[1] == 2.0);
        CHECK(st.t == 1);
    }
    SUBCASE("constant positive gradient decreases the parameter monotonically") {
        std::vector<double> p{5.0};
        std::vector<double> g{0.25};
        AdamState st(1);
        AdamHyper hy;
        double prev = p[0];
        for (int i = 0; i < 1000; ++i) {
            adam_step(p, g, st, hy);
            CHECK(p[0] < prev);
            prev = p[0];
        }
    }
    SUBCASE("shape mismatch") {
        std::vector<double> p{1.0};
        std::vector<double> g{1.0, 2.0};
        AdamState st(1);
        CHECK_THROWS_AS(adam_step(p, g, st, AdamHyper{}), UsageError);
    }
}

TEST_CASE("parameter and operation counts reproduce the comparison table") {
    // parameters
    CHECK(parameter_count(AgentFamily::kMab) == 9);
    CHECK(parameter_count(AgentFamily::kSarsa) == 171);
    CHECK(parameter_count(AgentFamily::kQLearning) == 171);
    CHECK(parameter_count(AgentFamily::kDeepSarsa) == 19529);
    CHECK(parameter_count(AgentFamily::kDdqn) == 19529);
    // independent reconstruction
    CHECK(171 == 9 * (18 + 1));
    std::int64_t dense = 0;
    std::int64_t bn = 0;
    int prev = 18;
    for (int h : {64, 128, 64, 16}) {
        dense += prev * h + h;
        bn += 2 * h;
        prev = h;
    }
    dense += prev * 9 + 9;
    CHECK(dense == 18985);
    CHECK(bn == 544);
    CHECK(dense + bn == 19529);

    // operations
    CHECK(operation_count(AgentFamily::kMab) == 0);
    CHECK(operation_count(AgentFamily::kSarsa) == 333);
    CHECK(operation_count(AgentFamily::kQLearning) == 333);
    CHECK(operation_count(AgentFamily::kDeepSarsa) == 37127);
    CHECK(operation_count(AgentFamily::kDdqn) == 37127);
    CHECK(333 == 9 * 37);
    std::int64_t mults = 0;
    std::int64_t outs = 0;
    prev = 18;
    for (int h : {64, 128, 64, 16, 9}) {
        mults += prev * h;
        outs += h;
        prev = h;
    }
    CHECK(mults == 18704);
    CHECK(outs == 281);
    CHECK(2 * mults - outs == 37127);

    // the live network agrees with the counting convention
    Mlp net(kStateDim, paper_hidden_sizes(), kNumActions);
    CHECK(static_cast<std::int64_t>(net.n_learnables()) == 19529);
    CHECK(net.n_stats() == 2 * (64 + 128 + 64 + 16));
}

TEST_CASE("batch-norm running statistics absorb observations in train mode") {
    Mlp net(2, {4}, 2);
    std::mt19937_64 gen(31);
    net.init_weights(gen);
    const std::vector<double> before(net.running_stats().begin(), net.running_stats().end());
    std::vector<double> q(2, 0.0);
    const std::vector<double> x{1.5, -0.5};
    net.forward(x, q, false, false, nullptr);
    const std::vector<double> after_eval(net.running_stats().begin(), net.running_stats().end());
    CHECK(before == after_eval);
    net.forward(x, q, true, true, nullptr);
    const std::vector<double> after_train(net.running_stats().begin(), net.running_stats().end());
    CHECK(before != after_train);
}
