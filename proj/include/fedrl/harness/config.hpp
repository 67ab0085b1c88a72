#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fedrl/agents/agent.hpp"
#include "fedrl/sim/channel.hpp"
#include "fedrl/sim/compression.hpp"
#include "fedrl/sim/link_sim.hpp"
#include "fedrl/sim/state.hpp"

namespace fedrl {

// Fully resolved experiment configuration. Every field has a documented
// default and maps 1:1 to a flat dotted config key; the canonical dump is
// what run directories echo.
struct ExperimentConfig {
    std::uint64_t seed = 1;

    // sim.*
    int n_vehicles = 5;
    double bandwidth_hz = 50e6;
    double subcarrier_spacing_hz = 120e3;
    double tx_power_dbm = 28.0;
    int spatial_layers = 2;
    double frame_rate_fps = 30.0;
    std::int64_t points_per_frame = 82200;
    double decision_interval_s = 0.1;
    double d_kpi_s = 0.05;
    double penalty_scale = 1.0;
    std::int64_t segment_bytes = 12000;
    double retry_turnaround_s = 0.004;
    double pdcp_reorder_penalty_s = 0.001;
    double propagation_s = 0.0005;
    double reassembly_s = 0.0;
    double queue_budget_s = 0.1;
    bool frame_stagger = true;
    double eta_c0 = 0.55;
    double eta_c5 = 0.40;
    double eta_c10 = 0.30;
    std::string compression_table_path;  // empty -> embedded defaults
    std::string trace_file;              // empty -> synthetic channel

    // channel.*
    double ch_sample_interval_s = 1e-3;
    double ch_pl_ref_db = 77.0;
    double ch_ref_dist_m = 10.0;
    double ch_pl_exponent = 3.0;
    double ch_noise_floor_dbm = -90.0;
    double ch_dist_mean_m = 100.0;
    double ch_dist_amp_m = 90.0;
    double ch_dist_amp2_m = 60.0;
    double ch_dist_min_m = 20.0;
    double ch_dist_max_m = 185.0;
    double ch_period_s = 120.0;
    double ch_period2_s = 35.0;
    double ch_period_jitter = 0.2;
    double ch_shadow_sigma_db = 1.2;
    double ch_shadow_rho = 0.999;

    // agents.*
    std::string family = "qlearning";
    double eps_start = 0.1;
    double eps_end = 0.0001;
    double mab_lambda = 0.05;
    double alpha = 0.01;
    double beta_avg_reward = 0.01;
    double gamma = 0.99;  // discount symbol, unused by the differential updates
    double adam_lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double bn_momentum = 0.99;
    int replay_capacity = 10000;
    int batch_size = 32;
    int target_sync_steps = 500;
    int train_every = 1;
    bool federate_running_stats = true;

    // state.* (per-feature affine scaling, shared by all vehicles)
    FeatureScaling scaling = FeatureScaling::defaults();

    // federation.*
    std::int64_t federation_cadence_steps = 0;  // 0 = end of each episode

    // harness.*
    int episodes = 1000;
    int steps_per_episode = 2400;
    int final_reward_episodes = 0;  // 0 = episodes/10 (at least 1)
    int last_episodes_window = 30;
    int first_steps_window = 100;
    bool compute_regret = true;
    bool write_step_metrics = true;
    int timing_reps = 200;

    void validate() const;  // ConfigError naming key and constraint

    LinkParams link_params() const;
    SyntheticChannelParams channel_params() const;
    AgentHyper agent_hyper() const;
    SizeModel size_model() const;
    int effective_final_reward_episodes() const;
};

// Parse `key = value` lines (# comments, blank lines allowed); empty path
// means "defaults only". Values land on top of `base`, then overrides are
// applied. Unknown key, type mismatch or constraint violation -> ConfigError
// naming the key.
ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides,
                              const ExperimentConfig& base = ExperimentConfig{});

// Apply a single override to an existing config.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Named profiles: "desk" (CI-speed) and "paper" (full scale).
void apply_preset(ExperimentConfig& cfg, const std::string& preset);

// Canonical sorted `key = value` dump; digest is FNV-1a over it.
std::string dump_config(const ExperimentConfig& cfg);
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace fedrl
