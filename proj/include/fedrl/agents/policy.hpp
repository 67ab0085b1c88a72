#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fedrl {

inline constexpr int kNumActions = 9;

// Linear decay from eps_start at step 0 to eps_end at the final step,
// clamped at eps_end afterwards.
double epsilon_schedule(std::int64_t global_step, std::int64_t total_steps, double eps_start,
                        double eps_end);

// With probability eps a uniform action, otherwise an argmax of q; exact
// ties are broken uniformly at random from the tied set.
int epsilon_greedy(std::span<const double> q, double eps, std::mt19937_64& rng);

// Greedy tie-breaking argmax (eps = 0 path).
int argmax_random_tie(std::span<const double> q, std::mt19937_64& rng);

}  // namespace fedrl
