#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedrl/agents/mlp.hpp"
#include "fedrl/agents/policy.hpp"
#include "fedrl/agents/updates.hpp"
#include "fedrl/sim/state.hpp"

namespace fedrl {

enum class AgentFamily { kMab, kSarsa, kQLearning, kDeepSarsa, kDdqn, kConstant };

std::string family_name(AgentFamily family);
AgentFamily family_from_name(const std::string& name);  // ConfigError on unknown

struct AgentHyper {
    double mab_lambda = 0.05;
    double alpha = 0.01;             // linear learning rate
    double beta_avg_reward = 0.01;   // Rbar step size
    double gamma = 0.99;             // discount symbol; unused by the differential updates
    AdamHyper adam;
    double bn_momentum = 0.99;
    int replay_capacity = 10000;
    int batch_size = 32;
    int target_sync_steps = 500;
    int train_every = 1;             // DDQN gradient step cadence
    bool federate_running_stats = true;
    int constant_action = 0;         // for the benchmark agent
};

// Common driving interface. The harness calls begin() once with the first
// observation, then step() once per decision window with the reward earned
// by the previous action and the fresh observation; step() performs the
// family's learning update and returns the next action.
class Agent {
public:
    virtual ~Agent() = default;

    virtual AgentFamily family() const = 0;
    virtual int begin(const StateVector& state) = 0;
    virtual int step(double reward, const StateVector& next_state) = 0;

    void set_epsilon(double eps) { epsilon_ = eps; }
    double epsilon() const { return epsilon_; }
    double avg_reward() const { return avg_reward_; }

    // learning steps since the last federation round (N^i)
    std::uint64_t steps_since_federation() const { return steps_since_federation_; }
    void reset_federation_counter() { steps_since_federation_ = 0; }

    // flattened model parameters exchanged during federation
    virtual std::vector<double> payload() const = 0;
    virtual void load_payload(std::span<const double> payload) = 0;

    // binary AgentState body (checkpoints)
    virtual void save(std::ostream& os) const = 0;
    virtual void load(std::istream& is) = 0;

protected:
    double epsilon_ = 0.0;
    double avg_reward_ = 0.0;
    std::uint64_t steps_since_federation_ = 0;
};

std::unique_ptr<Agent> make_agent(AgentFamily family, const AgentHyper& hyper,
                                  std::uint64_t master_seed, int agent_id);

// Table II reconstruction for the paper architecture (18 -> 64,128,64,16 -> 9).
// Learnables: dense weights + biases + batch-norm gain/shift; running
// statistics excluded.
std::int64_t parameter_count(AgentFamily family);
// Arithmetic to evaluate the action-value function once: multiplications and
// additions of the dense layers (9 x (19 mul + 18 add) for the linear
// learners); lookup-only for MAB.
std::int64_t operation_count(AgentFamily family);

// paper NN architecture
const std::vector<int>& paper_hidden_sizes();

}  // namespace fedrl
