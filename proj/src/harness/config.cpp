#include "fedrl/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fedrl/errors.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

namespace {

enum class FieldType { kDouble, kInt64, kInt, kBool, kString, kUint64 };

struct FieldDef {
    FieldType type;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key `" + key + "`: expected a number, got `" + value + "`");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key `" + key + "`: expected an integer, got `" + value + "`");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key `" + key + "`: expected an unsigned integer, got `" + value +
                          "`");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key `" + key + "`: expected true/false, got `" + value + "`");
}

#define F_DOUBLE(field)                                                                  \
    FieldDef {                                                                           \
        FieldType::kDouble,                                                              \
            [](ExperimentConfig& c, const std::string& v) { c.field = parse_double(#field, v); }, \
            [](const ExperimentConfig& c) { return format_double(c.field); }             \
    }
#define F_INT(field)                                                                      \
    FieldDef {                                                                            \
        FieldType::kInt,                                                                  \
            [](ExperimentConfig& c, const std::string& v) {                               \
                c.field = static_cast<int>(parse_int(#field, v));                         \
            },                                                                            \
            [](const ExperimentConfig& c) { return std::to_string(c.field); }             \
    }
#define F_INT64(field)                                                                    \
    FieldDef {                                                                            \
        FieldType::kInt64,                                                                \
            [](ExperimentConfig& c, const std::string& v) { c.field = parse_int(#field, v); }, \
            [](const ExperimentConfig& c) { return std::to_string(c.field); }             \
    }
#define F_UINT64(field)                                                                   \
    FieldDef {                                                                            \
        FieldType::kUint64,                                                               \
            [](ExperimentConfig& c, const std::string& v) { c.field = parse_uint(#field, v); }, \
            [](const ExperimentConfig& c) { return std::to_string(c.field); }             \
    }
#define F_BOOL(field)                                                                     \
    FieldDef {                                                                            \
        FieldType::kBool,                                                                 \
            [](ExperimentConfig& c, const std::string& v) { c.field = parse_bool(#field, v); }, \
            [](const ExperimentConfig& c) { return c.field ? "true" : "false"; }          \
    }
#define F_STRING(field)                                                                   \
    FieldDef {                                                                            \
        FieldType::kString,                                                               \
            [](ExperimentConfig& c, const std::string& v) { c.field = v; },               \
            [](const ExperimentConfig& c) { return c.field; }                             \
    }

const std::map<std::string, FieldDef>& schema() {
    static const std::map<std::string, FieldDef> kSchema = [] {
        std::map<std::string, FieldDef> m;
        m.emplace("seed", F_UINT64(seed));
        m.emplace("sim.n_vehicles", F_INT(n_vehicles));
        m.emplace("sim.bandwidth_hz", F_DOUBLE(bandwidth_hz));
        m.emplace("sim.subcarrier_spacing_hz", F_DOUBLE(subcarrier_spacing_hz));
        m.emplace("sim.tx_power_dbm", F_DOUBLE(tx_power_dbm));
        m.emplace("sim.spatial_layers", F_INT(spatial_layers));
        m.emplace("sim.frame_rate_fps", F_DOUBLE(frame_rate_fps));
        m.emplace("sim.points_per_frame", F_INT64(points_per_frame));
        m.emplace("sim.decision_interval_s", F_DOUBLE(decision_interval_s));
        m.emplace("sim.d_kpi_s", F_DOUBLE(d_kpi_s));
        m.emplace("sim.penalty_scale", F_DOUBLE(penalty_scale));
        m.emplace("sim.segment_bytes", F_INT64(segment_bytes));
        m.emplace("sim.retry_turnaround_s", F_DOUBLE(retry_turnaround_s));
        m.emplace("sim.pdcp_reorder_penalty_s", F_DOUBLE(pdcp_reorder_penalty_s));
        m.emplace("sim.propagation_s", F_DOUBLE(propagation_s));
        m.emplace("sim.reassembly_s", F_DOUBLE(reassembly_s));
        m.emplace("sim.queue_budget_s", F_DOUBLE(queue_budget_s));
        m.emplace("sim.frame_stagger", F_BOOL(frame_stagger));
        m.emplace("sim.eta_c0", F_DOUBLE(eta_c0));
        m.emplace("sim.eta_c5", F_DOUBLE(eta_c5));
        m.emplace("sim.eta_c10", F_DOUBLE(eta_c10));
        m.emplace("sim.compression_table", F_STRING(compression_table_path));
        m.emplace("sim.trace_file", F_STRING(trace_file));
        m.emplace("channel.sample_interval_s", F_DOUBLE(ch_sample_interval_s));
        m.emplace("channel.pl_ref_db", F_DOUBLE(ch_pl_ref_db));
        m.emplace("channel.ref_dist_m", F_DOUBLE(ch_ref_dist_m));
        m.emplace("channel.pl_exponent", F_DOUBLE(ch_pl_exponent));
        m.emplace("channel.noise_floor_dbm", F_DOUBLE(ch_noise_floor_dbm));
        m.emplace("channel.dist_mean_m", F_DOUBLE(ch_dist_mean_m));
        m.emplace("channel.dist_amp_m", F_DOUBLE(ch_dist_amp_m));
        m.emplace("channel.dist_amp2_m", F_DOUBLE(ch_dist_amp2_m));
        m.emplace("channel.dist_min_m", F_DOUBLE(ch_dist_min_m));
        m.emplace("channel.dist_max_m", F_DOUBLE(ch_dist_max_m));
        m.emplace("channel.period_s", F_DOUBLE(ch_period_s));
        m.emplace("channel.period2_s", F_DOUBLE(ch_period2_s));
        m.emplace("channel.period_jitter", F_DOUBLE(ch_period_jitter));
        m.emplace("channel.shadow_sigma_db", F_DOUBLE(ch_shadow_sigma_db));
        m.emplace("channel.shadow_rho", F_DOUBLE(ch_shadow_rho));
        m.emplace("agents.family", F_STRING(family));
        m.emplace("agents.eps_start", F_DOUBLE(eps_start));
        m.emplace("agents.eps_end", F_DOUBLE(eps_end));
        m.emplace("agents.mab_lambda", F_DOUBLE(mab_lambda));
        m.emplace("agents.alpha", F_DOUBLE(alpha));
        m.emplace("agents.beta_avg_reward", F_DOUBLE(beta_avg_reward));
        m.emplace("agents.gamma", F_DOUBLE(gamma));
        m.emplace("agents.adam_lr", F_DOUBLE(adam_lr));
        m.emplace("agents.adam_beta1", F_DOUBLE(adam_beta1));
        m.emplace("agents.adam_beta2", F_DOUBLE(adam_beta2));
        m.emplace("agents.adam_eps", F_DOUBLE(adam_eps));
        m.emplace("agents.bn_momentum", F_DOUBLE(bn_momentum));
        m.emplace("agents.replay_capacity", F_INT(replay_capacity));
        m.emplace("agents.batch_size", F_INT(batch_size));
        m.emplace("agents.target_sync_steps", F_INT(target_sync_steps));
        m.emplace("agents.train_every", F_INT(train_every));
        m.emplace("agents.federate_running_stats", F_BOOL(federate_running_stats));
        m.emplace("federation.cadence_steps", F_INT64(federation_cadence_steps));
        m.emplace("harness.episodes", F_INT(episodes));
        m.emplace("harness.steps_per_episode", F_INT(steps_per_episode));
        m.emplace("harness.final_reward_episodes", F_INT(final_reward_episodes));
        m.emplace("harness.last_episodes_window", F_INT(last_episodes_window));
        m.emplace("harness.first_steps_window", F_INT(first_steps_window));
        m.emplace("harness.compute_regret", F_BOOL(compute_regret));
        m.emplace("harness.write_step_metrics", F_BOOL(write_step_metrics));
        m.emplace("harness.timing_reps", F_INT(timing_reps));
        // per-feature affine state scaling
        for (int i = 0; i < kStateDim; ++i) {
            m.emplace("state.offset." + std::to_string(i),
                      FieldDef{FieldType::kDouble,
                               [i](ExperimentConfig& c, const std::string& v) {
                                   c.scaling.offset[i] = parse_double("state.offset", v);
                               },
                               [i](const ExperimentConfig& c) {
                                   return format_double(c.scaling.offset[i]);
                               }});
            m.emplace("state.scale." + std::to_string(i),
                      FieldDef{FieldType::kDouble,
                               [i](ExperimentConfig& c, const std::string& v) {
                                   c.scaling.scale[i] = parse_double("state.scale", v);
                               },
                               [i](const ExperimentConfig& c) {
                                   return format_double(c.scaling.scale[i]);
                               }});
        }
        return m;
    }();
    return kSchema;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto& s = schema();
    auto it = s.find(key);
    if (it == s.end()) {
        throw ConfigError("unknown config key: `" + key + "`");
    }
    it->second.set(cfg, value);
}

ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides,
                              const ExperimentConfig& base) {
    ExperimentConfig cfg = base;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": expected `key = value`, got `" + line + "`");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            apply_override(cfg, key, value);
        }
    }
    for (const auto& [k, v] : overrides) apply_override(cfg, k, v);
    cfg.validate();
    return cfg;
}

void apply_preset(ExperimentConfig& cfg, const std::string& preset) {
    if (preset.empty()) return;
    if (preset == "desk") {
        // CI-speed profile
        cfg.n_vehicles = 5;
        cfg.episodes = 100;
        cfg.steps_per_episode = 600;
        cfg.batch_size = 16;
        cfg.train_every = 4;
        return;
    }
    if (preset == "paper") {
        cfg.n_vehicles = 5;
        cfg.episodes = 1000;
        cfg.steps_per_episode = 2400;
        cfg.batch_size = 32;
        cfg.train_every = 1;
        return;
    }
    throw ConfigError("unknown preset: `" + preset + "` (expected desk or paper)");
}

void ExperimentConfig::validate() const {
    auto positive = [](const char* key, double v) {
        if (!(v > 0.0)) {
            throw ConfigError(std::string("config key `") + key + "` must be positive");
        }
    };
    if (n_vehicles <= 0) throw ConfigError("config key `sim.n_vehicles` must be positive");
    if (episodes <= 0) throw ConfigError("config key `harness.episodes` must be positive");
    if (steps_per_episode <= 0) {
        throw ConfigError("config key `harness.steps_per_episode` must be positive");
    }
    positive("sim.bandwidth_hz", bandwidth_hz);
    positive("sim.subcarrier_spacing_hz", subcarrier_spacing_hz);
    positive("sim.frame_rate_fps", frame_rate_fps);
    positive("sim.decision_interval_s", decision_interval_s);
    positive("sim.d_kpi_s", d_kpi_s);
    positive("channel.sample_interval_s", ch_sample_interval_s);
    if (points_per_frame <= 0) throw ConfigError("config key `sim.points_per_frame` must be positive");
    if (segment_bytes <= 0) throw ConfigError("config key `sim.segment_bytes` must be positive");
    positive("sim.queue_budget_s", queue_budget_s);
    positive("sim.eta_c0", eta_c0);
    positive("sim.eta_c5", eta_c5);
    positive("sim.eta_c10", eta_c10);
    if (!(0.0 <= eps_end && eps_end <= eps_start && eps_start <= 1.0)) {
        throw ConfigError("config keys `agents.eps_*`: require 0 <= eps_end <= eps_start <= 1");
    }
    if (!(mab_lambda > 0.0 && mab_lambda <= 1.0)) {
        throw ConfigError("config key `agents.mab_lambda` must be in (0,1]");
    }
    positive("agents.alpha", alpha);
    if (!(beta_avg_reward > 0.0 && beta_avg_reward < 1.0)) {
        throw ConfigError("config key `agents.beta_avg_reward` must be in (0,1)");
    }
    positive("agents.adam_lr", adam_lr);
    if (batch_size <= 0) throw ConfigError("config key `agents.batch_size` must be positive");
    if (replay_capacity < batch_size) {
        throw ConfigError("config key `agents.replay_capacity` must be >= agents.batch_size");
    }
    if (train_every <= 0) throw ConfigError("config key `agents.train_every` must be positive");
    if (federation_cadence_steps < 0) {
        throw ConfigError("config key `federation.cadence_steps` must be >= 0");
    }
    if (timing_reps < 0) throw ConfigError("config key `harness.timing_reps` must be >= 0");
    for (int i = 0; i < kStateDim; ++i) {
        if (scaling.scale[i] == 0.0) {
            throw ConfigError("config key `state.scale." + std::to_string(i) + "` must be nonzero");
        }
    }
    family_from_name(family);  // throws on unknown family
    link_params().validate();
}

LinkParams ExperimentConfig::link_params() const {
    LinkParams p;
    p.bandwidth_hz = bandwidth_hz;
    p.subcarrier_spacing_hz = subcarrier_spacing_hz;
    p.tx_power_dbm = tx_power_dbm;
    p.spatial_layers = spatial_layers;
    p.frame_rate_fps = frame_rate_fps;
    p.points_per_frame = points_per_frame;
    p.decision_interval_s = decision_interval_s;
    p.d_kpi_s = d_kpi_s;
    p.segment_bytes = segment_bytes;
    p.retry_turnaround_s = retry_turnaround_s;
    p.pdcp_reorder_penalty_s = pdcp_reorder_penalty_s;
    p.propagation_s = propagation_s;
    p.reassembly_s = reassembly_s;
    p.queue_budget_s = queue_budget_s;
    p.frame_stagger = frame_stagger;
    return p;
}

SyntheticChannelParams ExperimentConfig::channel_params() const {
    SyntheticChannelParams p;
    p.sample_interval = ch_sample_interval_s;
    p.tx_power_dbm = tx_power_dbm;
    p.pl_ref_db = ch_pl_ref_db;
    p.ref_dist_m = ch_ref_dist_m;
    p.pl_exponent = ch_pl_exponent;
    p.noise_floor_dbm = ch_noise_floor_dbm;
    p.dist_mean_m = ch_dist_mean_m;
    p.dist_amp_m = ch_dist_amp_m;
    p.dist_amp2_m = ch_dist_amp2_m;
    p.dist_min_m = ch_dist_min_m;
    p.dist_max_m = ch_dist_max_m;
    p.period_s = ch_period_s;
    p.period2_s = ch_period2_s;
    p.period_jitter = ch_period_jitter;
    p.shadow_sigma_db = ch_shadow_sigma_db;
    p.shadow_rho = ch_shadow_rho;
    return p;
}

AgentHyper ExperimentConfig::agent_hyper() const {
    AgentHyper h;
    h.mab_lambda = mab_lambda;
    h.alpha = alpha;
    h.beta_avg_reward = beta_avg_reward;
    h.gamma = gamma;
    h.adam.lr = adam_lr;
    h.adam.beta1 = adam_beta1;
    h.adam.beta2 = adam_beta2;
    h.adam.eps = adam_eps;
    h.bn_momentum = bn_momentum;
    h.replay_capacity = replay_capacity;
    h.batch_size = batch_size;
    h.target_sync_steps = target_sync_steps;
    h.train_every = train_every;
    h.federate_running_stats = federate_running_stats;
    return h;
}

SizeModel ExperimentConfig::size_model() const {
    SizeModel m;
    m.levels = {0, 5, 10};
    m.eta = {eta_c0, eta_c5, eta_c10};
    return m;
}

int ExperimentConfig::effective_final_reward_episodes() const {
    if (final_reward_episodes > 0) return std::min(final_reward_episodes, episodes);
    return std::max(1, episodes / 10);
}

std::string dump_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [key, def] : schema()) {
        out += key;
        out += " = ";
        out += def.get(cfg);
        out += '\n';
    }
    return out;
}

std::string config_digest(const ExperimentConfig& cfg) {
    const std::uint64_t h = fnv1a64(dump_config(cfg));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fedrl
