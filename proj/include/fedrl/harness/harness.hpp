#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedrl/fed/federation.hpp"
#include "fedrl/harness/config.hpp"

namespace fedrl {

struct MetricsRecord {
    int episode = 0;
    int step = 0;
    int vehicle = 0;
    int action = 0;
    double reward = 0.0;
    double app_delay_s = 0.0;  // representative window delay fed to the reward
    double prr_app = 0.0;
    double epsilon = 0.0;
    double cum_regret = 0.0;
};

struct RunSummary {
    std::string agent;
    double final_reward = 0.0;                 // mean over the closing episodes
    std::vector<double> first100_rewards;      // per-step mean reward, start of training
    std::vector<double> last_episodes_rewards; // per-episode mean, end of training
    double regret = 0.0;
    std::int64_t parameters = 0;
    std::int64_t operations = 0;
    double step_time_us = 0.0;
    int n_vehicles = 0;
    int episodes = 0;
    int steps = 0;
    std::uint64_t seed = 0;
    std::string config_digest;
    // diagnostics beyond the required schema
    double mean_reward = 0.0;
    double mean_app_delay_ms = 0.0;  // over delivered frames
    double mean_map = 0.0;           // of the chosen configurations
    std::int64_t federation_rounds = 0;
    int benchmark_action = -1;       // constant runs only
    std::string oracle_action;       // regret oracle's constant config, when known
};

struct RunOutput {
    RunSummary summary;
    std::vector<double> episode_rewards;            // one mean per episode
    std::vector<double> step_mean_rewards;          // mean over vehicles per step
    std::vector<std::vector<double>> vehicle_rewards;  // [vehicle][step], optional
    std::vector<MetricsRecord> records;             // optional per-step metrics
    std::vector<RoundRecord> rounds;
    std::vector<std::unique_ptr<Agent>> agents;     // final agent states
};

// Per-step rewards of the best constant configuration under common random
// numbers; the regret reference.
struct OracleData {
    int best_action = -1;
    std::vector<double> step_mean_rewards;
    std::vector<std::vector<double>> vehicle_rewards;
};

// Full training run of cfg.family. When `oracle` is provided, cum_regret
// columns and the summary regret are filled from it.
RunOutput run_training(const ExperimentConfig& cfg, const OracleData* oracle);

// Same loop with a never-learning fixed-action agent and no federation.
RunOutput run_constant_benchmark(const ExperimentConfig& cfg, int fixed_action,
                                 bool keep_vehicle_rewards = false,
                                 bool keep_records = true);

// Brute-force sweep of all 9 constant configurations on cfg's seed.
OracleData compute_oracle(const ExperimentConfig& cfg);

// regret_T = sum_t (oracle_t - agent_t); UsageError on length mismatch.
double compute_regret(std::span<const double> agent_rewards,
                      std::span<const double> oracle_rewards);

// Mean wall time of one select+update on synthetic states, reps repetitions
// (a tenth as warm-up, excluded). UsageError when reps <= 0.
double time_learning_step(AgentFamily family, const AgentHyper& hyper, int reps);

// Writes metrics.csv (when records kept), episodes.csv, rounds.csv,
// summary.json and config.echo into `dir` (created if needed).
void export_metrics(const RunOutput& out, const ExperimentConfig& cfg, const std::string& dir);

// Reads a summary.json back (report/inspect commands).
RunSummary load_summary(const std::string& path);

}  // namespace fedrl
