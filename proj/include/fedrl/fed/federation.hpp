#pragma once

#include <cstdint>
#include <vector>

#include "fedrl/agents/agent.hpp"

namespace fedrl {

// One agent's contribution to a federation round: its flattened parameters
// and the number of learning steps it performed since the previous round.
struct LocalUpdate {
    int agent_id = 0;
    std::vector<double> payload;
    std::uint64_t step_count = 0;  // N^i
};

struct GlobalModel {
    std::vector<double> payload;
    std::uint64_t round_index = 0;
};

// Snapshot parameters + N^i, then reset the agent's counter.
LocalUpdate collect_update(Agent& agent, int agent_id);

// Componentwise step-count-weighted mean: sum_i N^i p_i / sum_i N^i.
// Updates are processed in ascending agent_id with pairwise summation, so
// the result does not depend on input order. If sum N^i == 0 the previous
// global model is retained (round skipped). Shape mismatch -> ProtocolError.
GlobalModel aggregate(const std::vector<LocalUpdate>& updates, const GlobalModel* previous);

// Replace the agent's parameters; Rbar, epsilon, replay and optimizer
// moments stay local.
void apply_global(Agent& agent, const GlobalModel& global);

struct RoundRecord {
    std::uint64_t round = 0;
    std::int64_t global_step = 0;
    std::uint64_t sum_steps = 0;
    double payload_l2_norm = 0.0;
};

// collect from every agent -> aggregate -> broadcast. Returns the record for
// the round log. `global` is updated in place (kept when the round is
// skipped).
RoundRecord federation_round(std::vector<std::unique_ptr<Agent>>& agents, GlobalModel& global,
                             std::int64_t global_step);

}  // namespace fedrl
