#include "fedrl/agents/deep.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "fedrl/errors.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

namespace ckpt {

void write_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

std::uint64_t read_u64(std::istream& is) {
    char buf[8];
    is.read(buf, 8);
    if (!is) throw IoError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    }
    return v;
}

void write_f64(std::ostream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    write_u64(os, v);
}

double read_f64(std::istream& is) {
    const std::uint64_t v = read_u64(is);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

void write_vec(std::ostream& os, std::span<const double> v) {
    write_u64(os, v.size());
    for (double x : v) write_f64(os, x);
}

std::vector<double> read_vec(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    std::vector<double> v(n);
    for (auto& x : v) x = read_f64(is);
    return v;
}

void write_rng(std::ostream& os, const std::mt19937_64& gen) {
    std::ostringstream ss;
    ss << gen;
    const std::string s = ss.str();
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void read_rng(std::istream& is, std::mt19937_64& gen) {
    const std::uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw IoError("checkpoint truncated (rng state)");
    std::istringstream ss(s);
    ss >> gen;
}

void write_state(std::ostream& os, const StateVector& s) {
    for (double x : s.features) write_f64(os, x);
}

StateVector read_state(std::istream& is) {
    StateVector s;
    for (auto& x : s.features) x = read_f64(is);
    return s;
}

}  // namespace ckpt

using namespace ckpt;

// --- Deep SARSA ------------------------------------------------------------

DeepSarsaAgent::DeepSarsaAgent(const AgentHyper& hyper, std::uint64_t master_seed, int agent_id)
    : hyper_(hyper),
      net_(kStateDim, paper_hidden_sizes(), kNumActions, hyper.bn_momentum),
      adam_(0),
      explore_(make_stream(master_seed, "agent/" + std::to_string(agent_id) + "/explore")) {
    auto init = make_stream(master_seed, "agent/" + std::to_string(agent_id) + "/init");
    net_.init_weights(init);
    adam_ = AdamState(net_.n_learnables());
    grads_.resize(net_.n_learnables());
}

int DeepSarsaAgent::begin(const StateVector& state) {
    prev_state_ = state;
    net_.forward(state.features, prev_q_, true, true, &prev_cache_);
    prev_action_ = epsilon_greedy(prev_q_, epsilon_, explore_);
    return prev_action_;
}

int DeepSarsaAgent::step(double reward, const StateVector& next_state) {
    // observe s' (running statistics absorb it), pick a' on-policy
    std::vector<double> q_next(kNumActions, 0.0);
    net_.forward(next_state.features, q_next, true, true, nullptr);
    const int next_action = epsilon_greedy(q_next, epsilon_, explore_);

    const double delta =
        td_error_sarsa(reward, avg_reward_, q_next[next_action], prev_q_[prev_action_]);
    net_.backward(prev_cache_, prev_action_, delta, grads_);
    adam_step(net_.learnables(), grads_, adam_, hyper_.adam);
    avg_reward_ = avg_reward_update(avg_reward_, delta, hyper_.beta_avg_reward);
    ++steps_since_federation_;

    // refresh the cached value of (s', a') under the updated weights
    net_.forward(next_state.features, prev_q_, true, false, &prev_cache_);
    prev_state_ = next_state;
    prev_action_ = next_action;
    return next_action;
}

std::vector<double> DeepSarsaAgent::payload() const {
    std::vector<double> p(net_.learnables().begin(), net_.learnables().end());
    if (hyper_.federate_running_stats) {
        p.insert(p.end(), net_.running_stats().begin(), net_.running_stats().end());
    }
    return p;
}

void DeepSarsaAgent::load_payload(std::span<const double> payload) {
    const std::size_t want =
        net_.n_learnables() + (hyper_.federate_running_stats ? net_.n_stats() : 0);
    if (payload.size() != want) throw ProtocolError("deep payload size mismatch");
    std::copy(payload.begin(), payload.begin() + net_.n_learnables(), net_.learnables().begin());
    if (hyper_.federate_running_stats) {
        std::copy(payload.begin() + net_.n_learnables(), payload.end(),
                  net_.running_stats().begin());
    }
}

void DeepSarsaAgent::save(std::ostream& os) const {
    write_f64(os, epsilon_);
    write_f64(os, avg_reward_);
    write_u64(os, steps_since_federation_);
    write_vec(os, net_.learnables());
    write_vec(os, net_.running_stats());
    write_vec(os, adam_.m);
    write_vec(os, adam_.v);
    write_u64(os, static_cast<std::uint64_t>(adam_.t));
    write_state(os, prev_state_);
    write_u64(os, static_cast<std::uint64_t>(prev_action_));
    write_rng(os, explore_);
}

void DeepSarsaAgent::load(std::istream& is) {
    epsilon_ = read_f64(is);
    avg_reward_ = read_f64(is);
    steps_since_federation_ = read_u64(is);
    auto learn = read_vec(is);
    auto stats = read_vec(is);
    if (learn.size() != net_.n_learnables() || stats.size() != net_.n_stats()) {
        throw ProtocolError("deep checkpoint shape mismatch");
    }
    std::copy(learn.begin(), learn.end(), net_.learnables().begin());
    std::copy(stats.begin(), stats.end(), net_.running_stats().begin());
    adam_.m = read_vec(is);
    adam_.v = read_vec(is);
    adam_.t = static_cast<std::int64_t>(read_u64(is));
    prev_state_ = read_state(is);
    prev_action_ = static_cast<int>(read_u64(is));
    read_rng(is, explore_);
    // rebuild the gradient cache for (prev_state, prev_action) exactly as
    // the post-update refresh in step() left it
    net_.forward(prev_state_.features, prev_q_, true, false, &prev_cache_);
}

// --- DDQN --------------------------------------------------------------------

DdqnAgent::DdqnAgent(const AgentHyper& hyper, std::uint64_t master_seed, int agent_id)
    : hyper_(hyper),
      online_(kStateDim, paper_hidden_sizes(), kNumActions, hyper.bn_momentum),
      target_(kStateDim, paper_hidden_sizes(), kNumActions, hyper.bn_momentum),
      adam_(0),
      explore_(make_stream(master_seed, "agent/" + std::to_string(agent_id) + "/explore")),
      replay_rng_(make_stream(master_seed, "agent/" + std::to_string(agent_id) + "/replay")) {
    if (hyper_.batch_size <= 0) throw ConfigError("DDQN batch size must be positive");
    if (hyper_.replay_capacity < hyper_.batch_size) {
        throw ConfigError("DDQN replay capacity must be >= batch size");
    }
    auto init = make_stream(master_seed, "agent/" + std::to_string(agent_id) + "/init");
    online_.init_weights(init);
    sync_target();
    adam_ = AdamState(online_.n_learnables());
    grads_.resize(online_.n_learnables());
    grad_accum_.resize(online_.n_learnables());
}

int DdqnAgent::begin(const StateVector& state) {
    std::vector<double> q(kNumActions, 0.0);
    online_.forward(state.features, q, true, true, nullptr);
    prev_state_ = state;
    prev_action_ = epsilon_greedy(q, epsilon_, explore_);
    return prev_action_;
}

int DdqnAgent::step(double reward, const StateVector& next_state) {
    push_transition(prev_state_, prev_action_, reward, next_state);
    ++env_steps_;

    if (static_cast<int>(replay_.size()) >= hyper_.batch_size &&
        env_steps_ % std::max(1, hyper_.train_every) == 0) {
        train_batch();
        ++steps_since_federation_;
    }
    if (hyper_.target_sync_steps > 0 && env_steps_ % hyper_.target_sync_steps == 0) {
        sync_target();
    }

    std::vector<double> q(kNumActions, 0.0);
    online_.forward(next_state.features, q, true, true, nullptr);
    prev_state_ = next_state;
    prev_action_ = epsilon_greedy(q, epsilon_, explore_);
    return prev_action_;
}

double DdqnAgent::double_target(double reward, const StateVector& next_state) {
    std::vector<double> q_online(kNumActions, 0.0);
    online_.forward(next_state.features, q_online, false, false, nullptr);
    int best = 0;
    for (int a = 1; a < kNumActions; ++a) {
        if (q_online[a] > q_online[best]) best = a;
    }
    std::vector<double> q_target(kNumActions, 0.0);
    target_.forward(next_state.features, q_target, false, false, nullptr);
    return reward - avg_reward_ + q_target[best];
}

void DdqnAgent::sync_target() {
    std::copy(online_.learnables().begin(), online_.learnables().end(),
              target_.learnables().begin());
    std::copy(online_.running_stats().begin(), online_.running_stats().end(),
              target_.running_stats().begin());
}

void DdqnAgent::push_transition(const StateVector& s, int a, double r, const StateVector& s2) {
    if (static_cast<int>(replay_.size()) >= hyper_.replay_capacity) {
        replay_.pop_front();
    }
    replay_.push_back(Transition{s, a, r, s2});
}

void DdqnAgent::train_batch() {
    const int batch = hyper_.batch_size;
    std::fill(grad_accum_.begin(), grad_accum_.end(), 0.0);
    double delta_sum = 0.0;
    std::vector<double> q_curr(kNumActions, 0.0);
    std::vector<double> q_online_next(kNumActions, 0.0);
    std::vector<double> q_target_next(kNumActions, 0.0);
    Mlp::Cache cache;
    for (int b = 0; b < batch; ++b) {
        const auto& tr =
            replay_[static_cast<std::size_t>(uniform_int(replay_rng_, static_cast<int>(replay_.size())))];
        // double estimator: online picks, target evaluates
        online_.forward(tr.next_state.features, q_online_next, false, false, nullptr);
        int best = 0;
        for (int a = 1; a < kNumActions; ++a) {
            if (q_online_next[a] > q_online_next[best]) best = a;
        }
        target_.forward(tr.next_state.features, q_target_next, false, false, nullptr);
        online_.forward(tr.state.features, q_curr, true, false, &cache);
        const double delta = tr.reward - avg_reward_ + q_target_next[best] - q_curr[tr.action];
        online_.backward(cache, tr.action, delta, grads_);
        for (std::size_t i = 0; i < grads_.size(); ++i) grad_accum_[i] += grads_[i];
        delta_sum += delta;
    }
    const double inv = 1.0 / static_cast<double>(batch);
    for (auto& g : grad_accum_) g *= inv;
    adam_step(online_.learnables(), grad_accum_, adam_, hyper_.adam);
    avg_reward_ = avg_reward_update(avg_reward_, delta_sum * inv, hyper_.beta_avg_reward);
}

std::vector<double> DdqnAgent::payload() const {
    std::vector<double> p(online_.learnables().begin(), online_.learnables().end());
    if (hyper_.federate_running_stats) {
        p.insert(p.end(), online_.running_stats().begin(), online_.running_stats().end());
    }
    return p;
}

void DdqnAgent::load_payload(std::span<const double> payload) {
    const std::size_t want =
        online_.n_learnables() + (hyper_.federate_running_stats ? online_.n_stats() : 0);
    if (payload.size() != want) throw ProtocolError("DDQN payload size mismatch");
    std::copy(payload.begin(), payload.begin() + online_.n_learnables(),
              online_.learnables().begin());
    if (hyper_.federate_running_stats) {
        std::copy(payload.begin() + online_.n_learnables(), payload.end(),
                  online_.running_stats().begin());
    }
}

void DdqnAgent::save(std::ostream& os) const {
    write_f64(os, epsilon_);
    write_f64(os, avg_reward_);
    write_u64(os, steps_since_federation_);
    write_vec(os, online_.learnables());
    write_vec(os, online_.running_stats());
    write_vec(os, target_.learnables());
    write_vec(os, target_.running_stats());
    write_vec(os, adam_.m);
    write_vec(os, adam_.v);
    write_u64(os, static_cast<std::uint64_t>(adam_.t));
    write_u64(os, static_cast<std::uint64_t>(env_steps_));
    write_u64(os, static_cast<std::uint64_t>(prev_action_));
    write_state(os, prev_state_);
    write_u64(os, replay_.size());
    for (const auto& tr : replay_) {
        write_state(os, tr.state);
        write_u64(os, static_cast<std::uint64_t>(tr.action));
        write_f64(os, tr.reward);
        write_state(os, tr.next_state);
    }
    write_rng(os, explore_);
    write_rng(os, replay_rng_);
}

void DdqnAgent::load(std::istream& is) {
    epsilon_ = read_f64(is);
    avg_reward_ = read_f64(is);
    steps_since_federation_ = read_u64(is);
    auto ol = read_vec(is);
    auto ost = read_vec(is);
    auto tl = read_vec(is);
    auto tst = read_vec(is);
    if (ol.size() != online_.n_learnables() || ost.size() != online_.n_stats() ||
        tl.size() != target_.n_learnables() || tst.size() != target_.n_stats()) {
        throw ProtocolError("DDQN checkpoint shape mismatch");
    }
    std::copy(ol.begin(), ol.end(), online_.learnables().begin());
    std::copy(ost.begin(), ost.end(), online_.running_stats().begin());
    std::copy(tl.begin(), tl.end(), target_.learnables().begin());
    std::copy(tst.begin(), tst.end(), target_.running_stats().begin());
    adam_.m = read_vec(is);
    adam_.v = read_vec(is);
    adam_.t = static_cast<std::int64_t>(read_u64(is));
    env_steps_ = static_cast<std::int64_t>(read_u64(is));
    prev_action_ = static_cast<int>(read_u64(is));
    prev_state_ = read_state(is);
    const std::uint64_t n = read_u64(is);
    replay_.clear();
    for (std::uint64_t i = 0; i < n; ++i) {
        Transition tr;
        tr.state = read_state(is);
        tr.action = static_cast<int>(read_u64(is));
        tr.reward = read_f64(is);
        tr.next_state = read_state(is);
        replay_.push_back(tr);
    }
    read_rng(is, explore_);
    read_rng(is, replay_rng_);
}

}  // namespace fedrl
