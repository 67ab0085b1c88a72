#pragma once

#include <deque>

#include "fedrl/agents/agent.hpp"

namespace fedrl {

// On-policy NN learner: strictly online single-transition semi-gradient
// steps, no replay.
class DeepSarsaAgent final : public Agent {
public:
    DeepSarsaAgent(const AgentHyper& hyper, std::uint64_t master_seed, int agent_id);

    AgentFamily family() const override { return AgentFamily::kDeepSarsa; }
    int begin(const StateVector& state) override;
    int step(double reward, const StateVector& next_state) override;
    std::vector<double> payload() const override;
    void load_payload(std::span<const double> payload) override;
    void save(std::ostream& os) const override;
    void load(std::istream& is) override;

    const Mlp& net() const { return net_; }

private:
    AgentHyper hyper_;
    Mlp net_;
    AdamState adam_;
    std::vector<double> grads_;
    Mlp::Cache prev_cache_;
    std::vector<double> prev_q_ = std::vector<double>(kNumActions, 0.0);
    StateVector prev_state_;
    int prev_action_ = 0;
    std::mt19937_64 explore_;
};

// Off-policy NN learner with replay buffer and a periodically synced target
// network; targets use the double estimator in differential form.
class DdqnAgent final : public Agent {
public:
    DdqnAgent(const AgentHyper& hyper, std::uint64_t master_seed, int agent_id);

    AgentFamily family() const override { return AgentFamily::kDdqn; }
    int begin(const StateVector& state) override;
    int step(double reward, const StateVector& next_state) override;
    std::vector<double> payload() const override;
    void load_payload(std::span<const double> payload) override;
    void save(std::ostream& os) const override;
    void load(std::istream& is) override;

    // R - Rbar + Q_target(s', argmax_a Q_online(s', a))
    double double_target(double reward, const StateVector& next_state);
    void sync_target();
    std::size_t replay_size() const { return replay_.size(); }
    Mlp& online() { return online_; }
    Mlp& target() { return target_; }

private:
    struct Transition {
        StateVector state;
        int action = 0;
        double reward = 0.0;
        StateVector next_state;
    };

    void push_transition(const StateVector& s, int a, double r, const StateVector& s2);
    void train_batch();

    AgentHyper hyper_;
    Mlp online_;
    Mlp target_;
    AdamState adam_;
    std::vector<double> grads_;
    std::vector<double> grad_accum_;
    std::deque<Transition> replay_;
    StateVector prev_state_;
    int prev_action_ = 0;
    std::int64_t env_steps_ = 0;
    std::mt19937_64 explore_;
    std::mt19937_64 replay_rng_;
};

// checkpoint binary plumbing shared with the harness
namespace ckpt {
void write_u64(std::ostream& os, std::uint64_t v);
std::uint64_t read_u64(std::istream& is);
void write_f64(std::ostream& os, double d);
double read_f64(std::istream& is);
void write_vec(std::ostream& os, std::span<const double> v);
std::vector<double> read_vec(std::istream& is);
void write_rng(std::ostream& os, const std::mt19937_64& gen);
void read_rng(std::istream& is, std::mt19937_64& gen);
void write_state(std::ostream& os, const StateVector& s);
StateVector read_state(std::istream& is);
}  // namespace ckpt

}  // namespace fedrl
