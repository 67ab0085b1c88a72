#include "fedrl/sim/channel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fedrl/errors.hpp"

namespace fedrl {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

ChannelTrace load_channel_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open channel trace: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError(path + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time_s,vehicle_id,sinr_db") {
        throw SchemaError(path + ": expected header `time_s,vehicle_id,sinr_db`, got `" + line + "`");
    }

    std::map<int, std::vector<std::pair<double, double>>> per_vehicle;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double t = 0.0, sinr = 0.0;
        int vid = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(line);
        if (!(ss >> t >> c1 >> vid >> c2 >> sinr) || c1 != ',' || c2 != ',') {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": malformed row `" + line + "`");
        }
        per_vehicle[vid].emplace_back(t, sinr);
    }
    if (per_vehicle.empty()) {
        throw SchemaError(path + ": no samples");
    }

    const int n = static_cast<int>(per_vehicle.size());
    for (int v = 0; v < n; ++v) {
        if (!per_vehicle.count(v)) {
            throw SchemaError(path + ": vehicle ids must be contiguous 0..N-1, missing " +
                              std::to_string(v));
        }
    }

    ChannelTrace trace;
    const auto& first = per_vehicle.at(0);
    if (first.size() < 2) {
        throw SchemaError(path + ": need at least 2 samples per vehicle");
    }
    trace.sample_interval = first[1].first - first[0].first;
    if (!(trace.sample_interval > 0.0)) {
        throw SchemaError(path + ": non-increasing timestamps for vehicle 0");
    }

    const std::size_t n_samples = first.size();
    trace.sinr.resize(n);
    for (int v = 0; v < n; ++v) {
        const auto& rows = per_vehicle.at(v);
        if (rows.size() != n_samples) {
            throw SchemaError(path + ": vehicle " + std::to_string(v) + " has " +
                              std::to_string(rows.size()) + " samples, expected " +
                              std::to_string(n_samples));
        }
        trace.sinr[v].reserve(n_samples);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0) {
                const double dt = rows[i].first - rows[i - 1].first;
                if (!(dt > 0.0) || std::abs(dt - trace.sample_interval) > 1e-9) {
                    throw SchemaError(path + ": vehicle " + std::to_string(v) +
                                      " grid not uniform at sample " + std::to_string(i));
                }
            }
            trace.sinr[v].push_back(rows[i].second);
        }
    }
    return trace;
}

void save_channel_trace_csv(const ChannelTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF line endings everywhere
    if (!out) {
        throw IoError("cannot write channel trace: " + path);
    }
    std::string buf = "time_s,vehicle_id,sinr_db\n";
    for (std::size_t v = 0; v < trace.sinr.size(); ++v) {
        for (std::size_t i = 0; i < trace.sinr[v].size(); ++i) {
            append_double(buf, static_cast<double>(i) * trace.sample_interval);
            buf += ',';
            buf += std::to_string(v);
            buf += ',';
            append_double(buf, trace.sinr[v][i]);
            buf += '\n';
        }
    }
    out << buf;
}

TraceChannel::TraceChannel(ChannelTrace trace) : trace_(std::move(trace)) {
    if (trace_.sinr.empty()) {
        throw SchemaError("channel trace has no vehicles");
    }
    for (const auto& v : trace_.sinr) {
        if (v.size() != trace_.sinr.front().size()) {
            throw SchemaError("channel trace vehicles cover different durations");
        }
    }
}

double TraceChannel::sinr_db(int vehicle, std::int64_t sample) {
    if (vehicle < 0 || vehicle >= vehicles()) {
        throw SimulationError("trace has no vehicle " + std::to_string(vehicle));
    }
    const auto& v = trace_.sinr[vehicle];
    if (sample < 0 || sample >= static_cast<std::int64_t>(v.size())) {
        throw SimulationError("channel trace too short: need sample " + std::to_string(sample) +
                              ", have " + std::to_string(v.size()));
    }
    return v[sample];
}

SyntheticChannel::SyntheticChannel(int n_vehicles, const SyntheticChannelParams& params,
                                   std::uint64_t master_seed)
    : params_(params) {
    if (n_vehicles <= 0) {
        throw ConfigError("synthetic channel needs at least one vehicle");
    }
    // stationary AR(1) with marginal std sigma: innov std = sigma*sqrt(1-rho^2)
    shadow_innovation_scale_ =
        params_.shadow_sigma_db * std::sqrt(std::max(0.0, 1.0 - params_.shadow_rho * params_.shadow_rho));
    veh_.resize(n_vehicles);
    for (int v = 0; v < n_vehicles; ++v) {
        auto& s = veh_[v];
        s.gen = make_stream(master_seed, "env/channel/v" + std::to_string(v));
        const double jitter = 2.0 * uniform01(s.gen) - 1.0;
        s.period = params_.period_s * (1.0 + params_.period_jitter * jitter);
        s.phase = 2.0 * kPi * uniform01(s.gen);
        const double jitter2 = 2.0 * uniform01(s.gen) - 1.0;
        s.period2 = params_.period2_s * (1.0 + params_.period_jitter * jitter2);
        s.phase2 = 2.0 * kPi * uniform01(s.gen);
        s.shadow = params_.shadow_sigma_db * s.normal(s.gen);
    }
}

double SyntheticChannel::advance(VehicleState& v, std::int64_t sample) {
    const double t = static_cast<double>(sample) * params_.sample_interval;
    const double excursion = params_.dist_amp_m * std::sin(2.0 * kPi * t / v.period + v.phase) +
                             params_.dist_amp2_m * std::sin(2.0 * kPi * t / v.period2 + v.phase2);
    const double dist = std::clamp(params_.dist_mean_m + excursion,
                                   std::max(1.0, params_.dist_min_m), params_.dist_max_m);
    const double path_loss =
        params_.pl_ref_db + 10.0 * params_.pl_exponent * std::log10(dist / params_.ref_dist_m);
    v.shadow = params_.shadow_rho * v.shadow + shadow_innovation_scale_ * v.normal(v.gen);
    return params_.tx_power_dbm - path_loss - params_.noise_floor_dbm + v.shadow;
}

double SyntheticChannel::sinr_db(int vehicle, std::int64_t sample) {
    if (vehicle < 0 || vehicle >= vehicles()) {
        throw SimulationError("synthetic channel has no vehicle " + std::to_string(vehicle));
    }
    auto& v = veh_[vehicle];
    if (sample < v.next_sample) {
        throw SimulationError("synthetic channel consumed out of order (vehicle " +
                              std::to_string(vehicle) + ")");
    }
    double sinr = 0.0;
    while (v.next_sample <= sample) {
        sinr = advance(v, v.next_sample);
        ++v.next_sample;
    }
    return sinr;
}

ChannelTrace SyntheticChannel::materialize(std::int64_t samples) {
    ChannelTrace trace;
    trace.sample_interval = params_.sample_interval;
    trace.sinr.resize(veh_.size());
    for (int v = 0; v < vehicles(); ++v) {
        trace.sinr[v].reserve(samples);
        for (std::int64_t i = 0; i < samples; ++i) {
            trace.sinr[v].push_back(sinr_db(v, i));
        }
    }
    return trace;
}

}  // namespace fedrl
