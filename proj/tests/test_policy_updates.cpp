#include <doctest.h>

#include <array>
#include <cmath>

#include "fedrl/agents/policy.hpp"
#include "fedrl/agents/updates.hpp"
#include "fedrl/errors.hpp"
#include "fedrl/rng.hpp"

using namespace fedrl;

TEST_CASE("epsilon schedule") {
    CHECK(epsilon_schedule(0, 1001, 0.1, 0.0001) == 0.1);
    CHECK(epsilon_schedule(1000, 1001, 0.1, 0.0001) == 0.0001);
    // midpoint of the linear ramp, hand-evaluated
    CHECK(epsilon_schedule(500, 1001, 0.1, 0.0001) == doctest::Approx(0.05005).epsilon(1e-12));
    // clamped past the end
    CHECK(epsilon_schedule(5000, 1001, 0.1, 0.0001) == 0.0001);
    CHECK_THROWS_AS(epsilon_schedule(0, 0, 0.1, 0.0001), UsageError);
    CHECK_THROWS_AS(epsilon_schedule(0, 10, 0.0001, 0.1), UsageError);
}

TEST_CASE("epsilon-greedy selection") {
    std::mt19937_64 gen(11);

    SUBCASE("pure greedy picks the unique maximum") {
        std::array<double, 9> q{};
        q[8] = 1.0;
        for (int i = 0; i < 100; ++i) CHECK(epsilon_greedy(q, 0.0, gen) == 8);
    }

    SUBCASE("pure exploration is uniform (chi-square over 10k draws)") {
        std::array<double, 9> q{};
        q[3] = 100.0;  // must be ignored at eps = 1
        std::array<int, 9> counts{};
        const int n = 10000;
        for (int i = 0; i < n; ++i) ++counts[epsilon_greedy(q, 1.0, gen)];
        double chi2 = 0.0;
        const double expected = n / 9.0;
        for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
        // 8 dof, p > 0.01 -> chi2 below 20.09
        CHECK(chi2 < 20.09);
    }

    SUBCASE("all-equal values tie-break uniformly") {
        std::mt19937_64 tie_gen(4);
        std::array<double, 9> q{};
        std::array<int, 9> counts{};
        const int n = 18000;
        for (int i = 0; i < n; ++i) ++counts[epsilon_greedy(q, 0.0, tie_gen)];
        double chi2 = 0.0;
        const double expected = n / 9.0;
        for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
        CHECK(chi2 < 20.09);
    }

    SUBCASE("argmax invariant to adding a constant to every value") {
        std::mt19937_64 g1(5), g2(5);
        for (int rep = 0; rep < 500; ++rep) {
            std::array<double, 9> q{};
            for (auto& x : q) x = uniform01(gen);
            std::array<double, 9> shifted = q;
            for (auto& x : shifted) x += 3.25;
            CHECK(epsilon_greedy(q, 0.0, g1) == epsilon_greedy(shifted, 0.0, g2));
        }
    }
}

TEST_CASE("MAB update rule") {
    ActionValueTable t;

    SUBCASE("lambda = 1 jumps to the reward") {
        mab_update(t, 2, 0.686, 1.0);
        CHECK(t.values[2] == 0.686);
        CHECK(t.step_count[2] == 1);
    }
    SUBCASE("hand-evaluated recency-weighted step") {
        t.values[4] = 0.4;
        mab_update(t, 4, 0.686, 0.1);
        CHECK(t.values[4] == doctest::Approx(0.4286).epsilon(1e-12));
    }
    SUBCASE("reward equal to the estimate is a fixed point") {
        t.values[1] = 0.3;
        for (double lam : {0.05, 0.5, 1.0}) {
            mab_update(t, 1, 0.3, lam);
            CHECK(t.values[1] == 0.3);
        }
    }
    SUBCASE("other actions untouched") {
        t.values[0] = 0.9;
        mab_update(t, 5, 1.0, 0.5);
        CHECK(t.values[0] == 0.9);
        CHECK(t.values[5] == 0.5);
    }
    SUBCASE("boundedness: estimates stay within the reward range") {
        std::mt19937_64 gen(3);
        ActionValueTable b;
        for (auto& v : b.values) v = -1.0 + 2.0 * uniform01(gen);  // inside [-1, 1]
        for (int i = 0; i < 20000; ++i) {
            const int a = uniform_int(gen, 9);
            const double r = -1.0 + 2.0 * uniform01(gen);
            const double lam = 0.001 + 0.999 * uniform01(gen);
            mab_update(b, a, r, lam);
            CHECK(b.values[a] >= -1.0);
            CHECK(b.values[a] <= 1.0);
        }
    }
    SUBCASE("lambda out of range") {
        CHECK_THROWS_AS(mab_update(t, 0, 1.0, 0.0), UsageError);
        CHECK_THROWS_AS(mab_update(t, 0, 1.0, 1.5), UsageError);
    }
}

TEST_CASE("linear value function") {
    LinearWeights w;
    StateVector s;

    SUBCASE("basis vector picks out one feature") {
        w.row(0)[0] = 1.0;
        s.features[0] = 2.5;
        CHECK(linear_q_value(w, s, 0) == 2.5);
    }
    SUBCASE("bias-only weights read the homogeneous coordinate") {
        w.row(3)[kStateDim] = 0.7;
        for (auto& f : s.features) f = 123.0;
        // only the bias row entry is set, features hit zero weights
        CHECK(linear_q_value(w, s, 3) == 0.7);
    }
    SUBCASE("all-ones weights sum the homogeneous vector") {
        for (int i = 0; i < kStateDimHomogeneous; ++i) w.row(1)[i] = 1.0;
        for (auto& f : s.features) f = 1.0;
        CHECK(linear_q_value(w, s, 1) == 19.0);
    }
    SUBCASE("affinity in the feature part") {
        std::mt19937_64 gen(17);
        for (int rep = 0; rep < 200; ++rep) {
            LinearWeights wr;
            for (int i = 0; i < kStateDimHomogeneous; ++i) wr.row(2)[i] = uniform01(gen) - 0.5;
            StateVector s1, s2, sum, zero;
            for (int i = 0; i < kStateDim; ++i) {
                s1.features[i] = uniform01(gen) - 0.5;
                s2.features[i] = uniform01(gen) - 0.5;
                sum.features[i] = s1.features[i] + s2.features[i];
            }
            const double lhs = linear_q_value(wr, sum, 2) + linear_q_value(wr, zero, 2);
            const double rhs = linear_q_value(wr, s1, 2) + linear_q_value(wr, s2, 2);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
    }
}

TEST_CASE("TD errors") {
    SUBCASE("SARSA hand cases") {
        CHECK(td_error_sarsa(1.0, 0.0, 0.0, 0.0) == 1.0);
        CHECK(td_error_sarsa(0.5, 0.5, 0.2, 0.2) == 0.0);
        CHECK(td_error_sarsa(0.686, 0.5, 0.2, 0.3) == doctest::Approx(0.086).epsilon(1e-12));
    }
    SUBCASE("Q-learning max selection") {
        std::array<double, 9> q{};
        q[1] = 0.9;
        q[0] = 0.1;
        CHECK(td_error_qlearning(0.0, 0.0, q, 0.0) == 0.9);
    }
    SUBCASE("degenerate max reduces to SARSA") {
        std::array<double, 9> q{};
        for (auto& x : q) x = 0.42;
        CHECK(td_error_qlearning(0.3, 0.1, q, 0.2) ==
              td_error_sarsa(0.3, 0.1, 0.42, 0.2));
    }
    SUBCASE("dominance: delta_Q >= delta_SARSA for any realized next action") {
        std::mt19937_64 gen(23);
        for (int rep = 0; rep < 10000; ++rep) {
            std::array<double, 9> q{};
            for (auto& x : q) x = 2.0 * uniform01(gen) - 1.0;
            const double r = 2.0 * uniform01(gen) - 1.0;
            const double rbar = 2.0 * uniform01(gen) - 1.0;
            const double q_curr = 2.0 * uniform01(gen) - 1.0;
            const int a_next = uniform_int(gen, 9);
            const double dq = td_error_qlearning(r, rbar, q, q_curr);
            const double ds = td_error_sarsa(r, rbar, q[a_next], q_curr);
            CHECK(dq >= ds);
        }
    }
}

TEST_CASE("linear weight update") {
    SUBCASE("hand case: e1 with homogeneous coordinate") {
        LinearWeights w;
        StateVector s;
        s.features[0] = 1.0;
        linear_weight_update(w, s, 2, 1.0, 0.1);
        CHECK(w.row(2)[0] == doctest::Approx(0.1).epsilon(1e-15));
        for (int i = 1; i < kStateDim; ++i) CHECK(w.row(2)[i] == 0.0);
        CHECK(w.row(2)[kStateDim] == doctest::Approx(0.1).epsilon(1e-15));
        // other rows untouched
        for (int a = 0; a < kNumActions; ++a) {
            if (a == 2) continue;
            for (int i = 0; i < kStateDimHomogeneous; ++i) CHECK(w.row(a)[i] == 0.0);
        }
    }
    SUBCASE("zero delta is a no-op") {
        LinearWeights w;
        w.row(1)[4] = 0.5;
        StateVector s;
        s.features[4] = 3.0;
        linear_weight_update(w, s, 1, 0.0, 0.1);
        CHECK(w.row(1)[4] == 0.5);
    }
    SUBCASE("opposite states cancel features, bias accumulates") {
        LinearWeights w;
        StateVector s, ns;
        for (int i = 0; i < kStateDim; ++i) {
            s.features[i] = static_cast<double>(i + 1);
            ns.features[i] = -s.features[i];
        }
        linear_weight_update(w, s, 0, 0.5, 0.2);
        linear_weight_update(w, ns, 0, 0.5, 0.2);
        for (int i = 0; i < kStateDim; ++i) {
            CHECK(w.row(0)[i] == doctest::Approx(0.0).epsilon(1e-12));
        }
        CHECK(w.row(0)[kStateDim] == doctest::Approx(2.0 * 0.2 * 0.5).epsilon(1e-12));
    }
}

TEST_CASE("average reward update") {
    CHECK(avg_reward_update(0.0, 1.0, 0.01) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(avg_reward_update(0.37, 0.0, 0.2) == 0.37);
    CHECK_THROWS_AS(avg_reward_update(0.0, 1.0, 0.0), UsageError);
    CHECK_THROWS_AS(avg_reward_update(0.0, 1.0, 1.0), UsageError);

    SUBCASE("converges to a constant reward under a fixed greedy policy") {
        // scalar recursion oracle: Rbar' = Rbar + beta*(R - Rbar + q - q)
        const double target = 0.686;
        double rbar = 0.0;
        for (int i = 0; i < 3000; ++i) {
            const double delta = td_error_sarsa(target, rbar, 0.0, 0.0);
            rbar = avg_reward_update(rbar, delta, 0.01);
        }
        CHECK(std::abs(rbar - target) < 1e-3);
    }
}
