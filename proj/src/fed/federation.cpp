#include "fedrl/fed/federation.hpp"

#include <algorithm>
#include <cmath>

#include "fedrl/errors.hpp"

namespace fedrl {

namespace {

// pairwise tree sum over [lo, hi) of the N_i-scaled payloads
std::vector<double> pairwise_weighted_sum(const std::vector<const LocalUpdate*>& updates,
                                          std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) {
        const auto& u = *updates[lo];
        std::vector<double> scaled(u.payload.size());
        const double w = static_cast<double>(u.step_count);
        for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = w * u.payload[i];
        return scaled;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double> left = pairwise_weighted_sum(updates, lo, mid);
    const std::vector<double> right = pairwise_weighted_sum(updates, mid, hi);
    for (std::size_t i = 0; i < left.size(); ++i) left[i] += right[i];
    return left;
}

}  // namespace

LocalUpdate collect_update(Agent& agent, int agent_id) {
    LocalUpdate u;
    u.agent_id = agent_id;
    u.payload = agent.payload();
    u.step_count = agent.steps_since_federation();
    agent.reset_federation_counter();
    return u;
}

GlobalModel aggregate(const std::vector<LocalUpdate>& updates, const GlobalModel* previous) {
    if (updates.empty()) {
        throw ProtocolError("aggregate: no updates");
    }
    const std::size_t dim = updates.front().payload.size();
    for (const auto& u : updates) {
        if (u.payload.size() != dim) {
            throw ProtocolError("aggregate: payload shape mismatch for agent " +
                                std::to_string(u.agent_id));
        }
    }
    std::uint64_t total_steps = 0;
    for (const auto& u : updates) total_steps += u.step_count;

    GlobalModel g;
    g.round_index = previous ? previous->round_index + 1 : 1;
    if (total_steps == 0) {
        // nothing was learned anywhere: keep the previous model
        g.payload = previous ? previous->payload : std::vector<double>{};
        return g;
    }

    std::vector<const LocalUpdate*> ordered;
    ordered.reserve(updates.size());
    for (const auto& u : updates) {
        if (u.step_count > 0) ordered.push_back(&u);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const LocalUpdate* a, const LocalUpdate* b) { return a->agent_id < b->agent_id; });

    g.payload = pairwise_weighted_sum(ordered, 0, ordered.size());
    const double denom = static_cast<double>(total_steps);
    for (auto& x : g.payload) x /= denom;

    // clamp into the componentwise hull of the contributing payloads so the
    // convex-combination bound holds exactly despite rounding
    for (std::size_t i = 0; i < dim; ++i) {
        double lo = ordered.front()->payload[i];
        double hi = lo;
        for (const auto* u : ordered) {
            lo = std::min(lo, u->payload[i]);
            hi = std::max(hi, u->payload[i]);
        }
        g.payload[i] = std::clamp(g.payload[i], lo, hi);
    }
    return g;
}

void apply_global(Agent& agent, const GlobalModel& global) {
    agent.load_payload(global.payload);
}

RoundRecord federation_round(std::vector<std::unique_ptr<Agent>>& agents, GlobalModel& global,
                             std::int64_t global_step) {
    std::vector<LocalUpdate> updates;
    updates.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        updates.push_back(collect_update(*agents[i], static_cast<int>(i)));
    }
    const bool had_previous = global.round_index > 0;
    GlobalModel next = aggregate(updates, had_previous ? &global : nullptr);

    std::uint64_t sum_steps = 0;
    for (const auto& u : updates) sum_steps += u.step_count;
    if (sum_steps > 0) {
        for (auto& a : agents) apply_global(*a, next);
    }
    global = std::move(next);

    RoundRecord rec;
    rec.round = global.round_index;
    rec.global_step = global_step;
    rec.sum_steps = sum_steps;
    double norm = 0.0;
    for (double x : global.payload) norm += x * x;
    rec.payload_l2_norm = std::sqrt(norm);
    return rec;
}

}  // namespace fedrl
