#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fedrl/errors.hpp"
#include "fedrl/fed/federation.hpp"
#include "fedrl/rng.hpp"

using namespace fedrl;

namespace {

LocalUpdate mk(int id, std::vector<double> payload, std::uint64_t steps) {
    LocalUpdate u;
    u.agent_id = id;
    u.payload = std::move(payload);
    u.step_count = steps;
    return u;
}

StateVector zero_state() { return StateVector{}; }

}  // namespace

TEST_CASE("aggregate: weighted-mean hand case") {
    const std::vector<LocalUpdate> updates = {mk(0, {0.0}, 1), mk(1, {4.0}, 3)};
    const auto g = aggregate(updates, nullptr);
    CHECK(g.payload.size() == 1);
    CHECK(g.payload[0] == 3.0);  // (0*1 + 4*3) / 4, exact
    CHECK(g.round_index == 1);
}

TEST_CASE("aggregate: idempotence, zero weight, convex bound") {
    std::mt19937_64 gen(31337);

    SUBCASE("identical payloads aggregate to themselves") {
        for (int rep = 0; rep < 200; ++rep) {
            const std::size_t dim = 1 + gen() % 8;
            std::vector<double> v(dim);
            for (auto& x : v) x = 10.0 * (uniform01(gen) - 0.5);
            std::vector<LocalUpdate> updates;
            const int n = 2 + static_cast<int>(gen() % 5);
            for (int i = 0; i < n; ++i) updates.push_back(mk(i, v, 1 + gen() % 5000));
            const auto g = aggregate(updates, nullptr);
            CHECK(g.payload == v);
        }
    }

    SUBCASE("zero-step agents contribute nothing") {
        const std::vector<LocalUpdate> updates = {mk(0, {100.0, -100.0}, 0),
                                                  mk(1, {2.0, 4.0}, 7)};
        const auto g = aggregate(updates, nullptr);
        CHECK(g.payload == std::vector<double>{2.0, 4.0});
    }

    SUBCASE("every component within the contributing hull") {
        for (int rep = 0; rep < 1000; ++rep) {
            const std::size_t dim = 1 + gen() % 6;
            const int n = 1 + static_cast<int>(gen() % 6);
            std::vector<LocalUpdate> updates;
            for (int i = 0; i < n; ++i) {
                std::vector<double> v(dim);
                for (auto& x : v) x = 100.0 * (uniform01(gen) - 0.5);
                updates.push_back(mk(i, std::move(v), gen() % 3 == 0 ? 0 : 1 + gen() % 1000));
            }
            bool any = false;
            for (const auto& u : updates) any = any || u.step_count > 0;
            if (!any) updates[0].step_count = 1;
            const auto g = aggregate(updates, nullptr);
            for (std::size_t c = 0; c < dim; ++c) {
                double lo = 1e300, hi = -1e300;
                for (const auto& u : updates) {
                    if (u.step_count == 0) continue;
                    lo = std::min(lo, u.payload[c]);
                    hi = std::max(hi, u.payload[c]);
                }
                CHECK(g.payload[c] >= lo);
                CHECK(g.payload[c] <= hi);
            }
        }
    }
}

TEST_CASE("aggregate: scale and permutation invariance") {
    std::mt19937_64 gen(99);
    std::vector<LocalUpdate> updates;
    for (int i = 0; i < 5; ++i) {
        std::vector<double> v(7);
        for (auto& x : v) x = uniform01(gen) - 0.5;
        updates.push_back(mk(i, std::move(v), 100 + gen() % 900));
    }
    const auto base = aggregate(updates, nullptr);

    SUBCASE("power-of-two scaling of all step counts is bit-exact") {
        auto scaled = updates;
        for (auto& u : scaled) u.step_count *= 8;
        const auto g = aggregate(scaled, nullptr);
        CHECK(g.payload == base.payload);
    }

    SUBCASE("non-power-of-two scaling stays within a few ulp") {
        auto scaled = updates;
        for (auto& u : scaled) u.step_count *= 3;
        const auto g = aggregate(scaled, nullptr);
        for (std::size_t i = 0; i < base.payload.size(); ++i) {
            const double tol = 4.0 * std::abs(base.payload[i]) *
                               std::numeric_limits<double>::epsilon();
            CHECK(std::abs(g.payload[i] - base.payload[i]) <= tol);
        }
    }

    SUBCASE("input order never matters (sorted pairwise reduction)") {
        auto shuffled = updates;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        const auto g = aggregate(shuffled, nullptr);
        CHECK(g.payload == base.payload);
    }
}

TEST_CASE("aggregate: errors and the skip rule") {
    CHECK_THROWS_AS(aggregate({}, nullptr), ProtocolError);
    CHECK_THROWS_AS(aggregate({mk(0, {1.0}, 1), mk(1, {1.0, 2.0}, 1)}, nullptr), ProtocolError);

    GlobalModel prev;
    prev.payload = {42.0};
    prev.round_index = 4;
    const auto g = aggregate({mk(0, {7.0}, 0)}, &prev);
    CHECK(g.payload == std::vector<double>{42.0});
    CHECK(g.round_index == 5);
}

TEST_CASE("collect resets the step counter; apply replaces only the payload") {
    AgentHyper hyper;
    auto agent = make_agent(AgentFamily::kMab, hyper, 3, 0);
    agent->set_epsilon(1.0);
    agent->begin(zero_state());
    for (int i = 0; i < 10; ++i) agent->step(0.5, zero_state());
    CHECK(agent->steps_since_federation() == 10);

    auto u = collect_update(*agent, 0);
    CHECK(u.step_count == 10);
    CHECK(agent->steps_since_federation() == 0);

    GlobalModel g;
    g.payload = std::vector<double>(9, 0.25);
    g.round_index = 1;
    const double rbar = agent->avg_reward();
    const double eps = agent->epsilon();
    apply_global(*agent, g);
    CHECK(agent->payload() == g.payload);
    CHECK(agent->avg_reward() == rbar);
    CHECK(agent->epsilon() == eps);

    // apply then collect with no intermediate steps returns the global
    auto u2 = collect_update(*agent, 0);
    CHECK(u2.payload == g.payload);
    CHECK(u2.step_count == 0);
}

TEST_CASE("federation round: consensus, identity, skip") {
    AgentHyper hyper;
    std::mt19937_64 gen(17);

    SUBCASE("after a round every agent holds the same payload") {
        std::vector<std::unique_ptr<Agent>> agents;
        for (int i = 0; i < 4; ++i) agents.push_back(make_agent(AgentFamily::kSarsa, hyper, 5, i));
        for (auto& a : agents) {
            a->set_epsilon(0.3);
            StateVector s;
            for (auto& f : s.features) f = uniform01(gen);
            a->begin(s);
            for (int k = 0; k < 20; ++k) {
                StateVector ns;
                for (auto& f : ns.features) f = uniform01(gen);
                a->step(uniform01(gen), ns);
            }
        }
        GlobalModel global;
        const auto rec = federation_round(agents, global, 20);
        CHECK(rec.round == 1);
        CHECK(rec.sum_steps == 80);
        for (auto& a : agents) CHECK(a->payload() == global.payload);

        // identical greedy actions on identical states after consensus
        StateVector probe;
        for (auto& f : probe.features) f = uniform01(gen);
        for (auto& a : agents) a->set_epsilon(0.0);
        // the linear values are identical, so every argmax set is identical;
        // with distinct values the chosen action must agree across agents
        std::vector<int> choices;
        for (auto& a : agents) choices.push_back(a->begin(probe));
        for (int c : choices) CHECK(c == choices.front());
    }

    SUBCASE("single-agent federation is an identity transform") {
        std::vector<std::unique_ptr<Agent>> agents;
        agents.push_back(make_agent(AgentFamily::kMab, hyper, 5, 0));
        agents[0]->set_epsilon(1.0);
        agents[0]->begin(zero_state());
        for (int k = 0; k < 5; ++k) agents[0]->step(0.7, zero_state());
        const auto before = agents[0]->payload();
        GlobalModel global;
        federation_round(agents, global, 5);
        CHECK(agents[0]->payload() == before);
        CHECK(global.payload == before);
    }

    SUBCASE("all-zero step counts leave agents untouched") {
        std::vector<std::unique_ptr<Agent>> agents;
        for (int i = 0; i < 3; ++i) agents.push_back(make_agent(AgentFamily::kMab, hyper, 5, i));
        std::vector<std::vector<double>> before;
        for (auto& a : agents) before.push_back(a->payload());
        GlobalModel global;
        const auto rec = federation_round(agents, global, 0);
        CHECK(rec.sum_steps == 0);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            CHECK(agents[i]->payload() == before[i]);
        }
    }
}
