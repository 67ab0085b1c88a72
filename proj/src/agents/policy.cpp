#include "fedrl/agents/policy.hpp"

#include <vector>

#include "fedrl/errors.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

double epsilon_schedule(std::int64_t global_step, std::int64_t total_steps, double eps_start,
                        double eps_end) {
    if (total_steps <= 0) throw UsageError("epsilon_schedule: total_steps must be positive");
    if (!(0.0 <= eps_end && eps_end <= eps_start && eps_start <= 1.0)) {
        throw UsageError("epsilon_schedule: require 0 <= eps_end <= eps_start <= 1");
    }
    if (total_steps == 1) return eps_end;
    const double frac =
        static_cast<double>(global_step) / static_cast<double>(total_steps - 1);
    if (frac >= 1.0) return eps_end;
    if (frac <= 0.0) return eps_start;
    return eps_start + (eps_end - eps_start) * frac;
}

int argmax_random_tie(std::span<const double> q, std::mt19937_64& rng) {
    int best = 0;
    int n_tied = 1;
    for (int i = 1; i < static_cast<int>(q.size()); ++i) {
        if (q[i] > q[best]) {
            best = i;
            n_tied = 1;
        } else if (q[i] == q[best]) {
            // reservoir pick among exact ties
            ++n_tied;
            if (uniform_int(rng, n_tied) == 0) best = i;
        }
    }
    return best;
}

int epsilon_greedy(std::span<const double> q, double eps, std::mt19937_64& rng) {
    if (q.empty()) throw UsageError("epsilon_greedy: empty value vector");
    if (eps > 0.0 && uniform01(rng) < eps) {
        return uniform_int(rng, static_cast<int>(q.size()));
    }
    return argmax_random_tie(q, rng);
}

}  // namespace fedrl
