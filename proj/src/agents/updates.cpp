#include "fedrl/agents/updates.hpp"

#include <algorithm>

#include "fedrl/errors.hpp"

namespace fedrl {

void mab_update(ActionValueTable& table, int action, double reward, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw UsageError("mab_update: lambda must be in (0,1]");
    }
    table.values[action] += lambda * (reward - table.values[action]);
    ++table.step_count[action];
}

double linear_q_value(const LinearWeights& weights, const StateVector& state, int action) {
    if (action < 0 || action >= kNumActions) {
        throw NumericError("linear_q_value: action out of range");
    }
    const auto s = state.homogeneous();
    const double* w = weights.row(action);
    double q = 0.0;
    for (int i = 0; i < kStateDimHomogeneous; ++i) q += w[i] * s[i];
    return q;
}

void linear_q_values(const LinearWeights& weights, const StateVector& state,
                     std::span<double> out) {
    if (out.size() != kNumActions) {
        throw NumericError("linear_q_values: output must have one slot per action");
    }
    const auto s = state.homogeneous();
    for (int a = 0; a < kNumActions; ++a) {
        const double* w = weights.row(a);
        double q = 0.0;
        for (int i = 0; i < kStateDimHomogeneous; ++i) q += w[i] * s[i];
        out[a] = q;
    }
}

double td_error_sarsa(double reward, double avg_reward, double q_next, double q_curr) {
    return reward - avg_reward + q_next - q_curr;
}

double td_error_qlearning(double reward, double avg_reward, std::span<const double> q_values_next,
                          double q_curr) {
    if (q_values_next.empty()) {
        throw UsageError("td_error_qlearning: empty next-state values");
    }
    const double q_max = *std::max_element(q_values_next.begin(), q_values_next.end());
    return reward - avg_reward + q_max - q_curr;
}

void linear_weight_update(LinearWeights& weights, const StateVector& state, int action,
                          double delta, double alpha) {
    if (!(alpha > 0.0)) throw UsageError("linear_weight_update: alpha must be positive");
    const auto s = state.homogeneous();
    double* w = weights.row(action);
    for (int i = 0; i < kStateDimHomogeneous; ++i) w[i] += alpha * delta * s[i];
}

double avg_reward_update(double avg_reward, double delta, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw UsageError("avg_reward_update: beta must be in (0,1)");
    }
    return avg_reward + beta * delta;
}

}  // namespace fedrl
