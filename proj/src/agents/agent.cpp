#include "fedrl/agents/agent.hpp"

#include <algorithm>
#include <array>

#include "fedrl/agents/deep.hpp"
#include "fedrl/errors.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

using namespace ckpt;

namespace {

// --- MAB -------------------------------------------------------------------

class MabAgent final : public Agent {
public:
    MabAgent(const AgentHyper& hyper, std::uint64_t master_seed, int agent_id)
        : lambda_(hyper.mab_lambda),
          explore_(make_stream(master_seed, "agent/" + std::to_string(agent_id) + "/explore")) {}

    AgentFamily family() const override { return AgentFamily::kMab; }

    int begin(const StateVector&) override {
        prev_action_ = epsilon_greedy(table_.values, epsilon_, explore_);
        return prev_action_;
    }

    int step(double reward, const StateVector&) override {
        mab_update(table_, prev_action_, reward, lambda_);
        ++steps_since_federation_;
        prev_action_ = epsilon_greedy(table_.values, epsilon_, explore_);
        return prev_action_;
    }

    std::vector<double> payload() const override {
        return {table_.values.begin(), table_.values.end()};
    }

    void load_payload(std::span<const double> payload) override {
        if (payload.size() != table_.values.size()) {
            throw ProtocolError("MAB payload size mismatch");
        }
        std::copy(payload.begin(), payload.end(), table_.values.begin());
    }

    void save(std::ostream& os) const override {
        write_f64(os, epsilon_);
        write_f64(os, avg_reward_);
        write_u64(os, steps_since_federation_);
        write_vec(os, payload());
        for (auto c : table_.step_count) write_u64(os, static_cast<std::uint64_t>(c));
        write_u64(os, static_cast<std::uint64_t>(prev_action_));
        write_rng(os, explore_);
    }

    void load(std::istream& is) override {
        epsilon_ = read_f64(is);
        avg_reward_ = read_f64(is);
        steps_since_federation_ = read_u64(is);
        load_payload(read_vec(is));
        for (auto& c : table_.step_count) c = static_cast<std::int64_t>(read_u64(is));
        prev_action_ = static_cast<int>(read_u64(is));
        read_rng(is, explore_);
    }

private:
    double lambda_;
    ActionValueTable table_;
    int prev_action_ = 0;
    std::mt19937_64 explore_;
};

// --- linear SARSA / Q-learning -----------------------------------------------

class LinearAgent final : public Agent {
public:
    LinearAgent(AgentFamily family, const AgentHyper& hyper, std::uint64_t master_seed, int agent_id)
        : family_(family),
          alpha_(hyper.alpha),
          beta_(hyper.beta_avg_reward),
          explore_(make_stream(master_seed, "agent/" + std::to_string(agent_id) + "/explore")) {}

    AgentFamily family() const override { return family_; }

    int begin(const StateVector& state) override {
        prev_state_ = state;
        std::array<double, kNumActions> q{};
        linear_q_values(weights_, state, q);
        prev_action_ = epsilon_greedy(q, epsilon_, explore_);
        return prev_action_;
    }

    int step(double reward, const StateVector& next_state) override {
        std::array<double, kNumActions> q_next{};
        linear_q_values(weights_, next_state, q_next);
        const double q_curr = linear_q_value(weights_, prev_state_, prev_action_);

        int next_action = -1;
        double delta = 0.0;
        if (family_ == AgentFamily::kSarsa) {
            // on-policy: commit to a' first and bootstrap from it
            next_action = epsilon_greedy(q_next, epsilon_, explore_);
            delta = td_error_sarsa(reward, avg_reward_, q_next[next_action], q_curr);
        } else {
            delta = td_error_qlearning(reward, avg_reward_, q_next, q_curr);
        }
        linear_weight_update(weights_, prev_state_, prev_action_, delta, alpha_);
        avg_reward_ = avg_reward_update(avg_reward_, delta, beta_);
        ++steps_since_federation_;

        if (family_ == AgentFamily::kQLearning) {
            // off-policy: behave greedily on the freshly updated estimates
            linear_q_values(weights_, next_state, q_next);
            next_action = epsilon_greedy(q_next, epsilon_, explore_);
        }
        prev_state_ = next_state;
        prev_action_ = next_action;
        return next_action;
    }

    std::vector<double> payload() const override { return weights_.w; }

    void load_payload(std::span<const double> payload) override {
        if (payload.size() != weights_.w.size()) {
            throw ProtocolError("linear payload size mismatch");
        }
        std::copy(payload.begin(), payload.end(), weights_.w.begin());
    }

    void save(std::ostream& os) const override {
        write_f64(os, epsilon_);
        write_f64(os, avg_reward_);
        write_u64(os, steps_since_federation_);
        write_vec(os, weights_.w);
        write_state(os, prev_state_);
        write_u64(os, static_cast<std::uint64_t>(prev_action_));
        write_rng(os, explore_);
    }

    void load(std::istream& is) override {
        epsilon_ = read_f64(is);
        avg_reward_ = read_f64(is);
        steps_since_federation_ = read_u64(is);
        load_payload(read_vec(is));
        prev_state_ = read_state(is);
        prev_action_ = static_cast<int>(read_u64(is));
        read_rng(is, explore_);
    }

private:
    AgentFamily family_;
    double alpha_;
    double beta_;
    LinearWeights weights_;
    StateVector prev_state_;
    int prev_action_ = 0;
    std::mt19937_64 explore_;
};

// --- constant benchmark --------------------------------------------------------

class ConstantAgent final : public Agent {
public:
    explicit ConstantAgent(int action) : action_(action) {
        if (action < 0 || action >= kNumActions) {
            throw ConfigError("constant agent action out of range: " + std::to_string(action));
        }
    }

    AgentFamily family() const override { return AgentFamily::kConstant; }
    int begin(const StateVector&) override { return action_; }
    int step(double, const StateVector&) override { return action_; }
    std::vector<double> payload() const override { return {}; }
    void load_payload(std::span<const double> payload) override {
        if (!payload.empty()) throw ProtocolError("constant agent has no parameters");
    }
    void save(std::ostream& os) const override {
        write_u64(os, static_cast<std::uint64_t>(action_));
    }
    void load(std::istream& is) override { action_ = static_cast<int>(read_u64(is)); }

private:
    int action_;
};

}  // namespace

const std::vector<int>& paper_hidden_sizes() {
    static const std::vector<int> kSizes{64, 128, 64, 16};
    return kSizes;
}

std::string family_name(AgentFamily family) {
    switch (family) {
        case AgentFamily::kMab: return "mab";
        case AgentFamily::kSarsa: return "sarsa";
        case AgentFamily::kQLearning: return "qlearning";
        case AgentFamily::kDeepSarsa: return "dsarsa";
        case AgentFamily::kDdqn: return "ddqn";
        case AgentFamily::kConstant: return "constant";
    }
    return "unknown";
}

AgentFamily family_from_name(const std::string& name) {
    if (name == "mab") return AgentFamily::kMab;
    if (name == "sarsa") return AgentFamily::kSarsa;
    if (name == "qlearning") return AgentFamily::kQLearning;
    if (name == "dsarsa") return AgentFamily::kDeepSarsa;
    if (name == "ddqn") return AgentFamily::kDdqn;
    if (name == "constant") return AgentFamily::kConstant;
    throw ConfigError("unknown agent family: " + name);
}

std::unique_ptr<Agent> make_agent(AgentFamily family, const AgentHyper& hyper,
                                  std::uint64_t master_seed, int agent_id) {
    switch (family) {
        case AgentFamily::kMab:
            return std::make_unique<MabAgent>(hyper, master_seed, agent_id);
        case AgentFamily::kSarsa:
        case AgentFamily::kQLearning:
            return std::make_unique<LinearAgent>(family, hyper, master_seed, agent_id);
        case AgentFamily::kDeepSarsa:
            return std::make_unique<DeepSarsaAgent>(hyper, master_seed, agent_id);
        case AgentFamily::kDdqn:
            return std::make_unique<DdqnAgent>(hyper, master_seed, agent_id);
        case AgentFamily::kConstant:
            return std::make_unique<ConstantAgent>(hyper.constant_action);
    }
    throw ConfigError("unknown agent family");
}

std::int64_t parameter_count(AgentFamily family) {
    switch (family) {
        case AgentFamily::kMab:
            return kNumActions;
        case AgentFamily::kSarsa:
        case AgentFamily::kQLearning:
            return static_cast<std::int64_t>(kNumActions) * kStateDimHomogeneous;
        case AgentFamily::kDeepSarsa:
        case AgentFamily::kDdqn:
            return Mlp::count_learnables(kStateDim, paper_hidden_sizes(), kNumActions);
        case AgentFamily::kConstant:
            return 0;
    }
    throw ConfigError("unknown agent family");
}

std::int64_t operation_count(AgentFamily family) {
    switch (family) {
        case AgentFamily::kMab:
            return 0;  // values are retrieved from a lookup table
        case AgentFamily::kSarsa:
        case AgentFamily::kQLearning:
            // per action: 19 multiplications + 18 additions
            return static_cast<std::int64_t>(kNumActions) * (2 * kStateDimHomogeneous - 1);
        case AgentFamily::kDeepSarsa:
        case AgentFamily::kDdqn:
            return Mlp::count_value_operations(kStateDim, paper_hidden_sizes(), kNumActions);
        case AgentFamily::kConstant:
            return 0;
    }
    throw ConfigError("unknown agent family");
}

}  // namespace fedrl
