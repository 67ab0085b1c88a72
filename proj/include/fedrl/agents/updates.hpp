#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fedrl/agents/policy.hpp"
#include "fedrl/sim/state.hpp"

namespace fedrl {

// Lookup-table action values for the stateless learner.
struct ActionValueTable {
    std::array<double, kNumActions> values{};
    std::array<std::int64_t, kNumActions> step_count{};
};

// Q(a) <- Q(a) + lambda * (R - Q(a)); recency-weighted for the
// non-stationary environment. lambda in (0,1].
void mab_update(ActionValueTable& table, int action, double reward, double lambda);

// One weight row per action over the homogeneous state (18 features + bias).
struct LinearWeights {
    // row-major [action][feature], kNumActions x kStateDimHomogeneous
    std::vector<double> w = std::vector<double>(kNumActions * kStateDimHomogeneous, 0.0);

    double* row(int action) { return w.data() + action * kStateDimHomogeneous; }
    const double* row(int action) const { return w.data() + action * kStateDimHomogeneous; }
};

// Q_hat(s, a, w) = s . w_a, with s in homogeneous coordinates.
double linear_q_value(const LinearWeights& weights, const StateVector& state, int action);

void linear_q_values(const LinearWeights& weights, const StateVector& state,
                     std::span<double> out);

// delta = R - Rbar + Q(s',a') - Q(s,a)
double td_error_sarsa(double reward, double avg_reward, double q_next, double q_curr);

// delta = R - Rbar + max_a Q(s',a) - Q(s,a)
double td_error_qlearning(double reward, double avg_reward, std::span<const double> q_values_next,
                          double q_curr);

// w_a <- w_a + alpha * delta * s (homogeneous); other rows untouched.
void linear_weight_update(LinearWeights& weights, const StateVector& state, int action,
                          double delta, double alpha);

// Rbar <- Rbar + beta * delta (differential semi-gradient convention).
double avg_reward_update(double avg_reward, double delta, double beta);

}  // namespace fedrl
