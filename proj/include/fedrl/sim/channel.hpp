#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fedrl/rng.hpp"

namespace fedrl {

// Materialized per-vehicle SINR time series on a uniform grid.
struct ChannelTrace {
    double sample_interval = 0.0;            // seconds
    std::vector<std::vector<double>> sinr;   // [vehicle][sample], dB

    double duration() const {
        return sinr.empty() ? 0.0 : sample_interval * static_cast<double>(sinr.front().size());
    }
};

// CSV with header `time_s,vehicle_id,sinr_db`. Vehicles must be 0..N-1 and
// every vehicle must cover the same uniform grid. Throws IoError/SchemaError.
ChannelTrace load_channel_trace_csv(const std::string& path);
void save_channel_trace_csv(const ChannelTrace& trace, const std::string& path);

// Uniform-grid SINR supplier consumed strictly forward by the simulator.
class ChannelSource {
public:
    virtual ~ChannelSource() = default;
    virtual double sinr_db(int vehicle, std::int64_t sample) = 0;
    virtual double sample_interval() const = 0;
    // Number of samples available, or -1 when unbounded.
    virtual std::int64_t sample_count() const = 0;
    virtual int vehicles() const = 0;
};

class TraceChannel final : public ChannelSource {
public:
    explicit TraceChannel(ChannelTrace trace);

    double sinr_db(int vehicle, std::int64_t sample) override;
    double sample_interval() const override { return trace_.sample_interval; }
    std::int64_t sample_count() const override {
        return trace_.sinr.empty() ? 0 : static_cast<std::int64_t>(trace_.sinr.front().size());
    }
    int vehicles() const override { return static_cast<int>(trace_.sinr.size()); }

private:
    ChannelTrace trace_;
};

// Parametric channel: log-distance path loss around a sinusoidal
// vehicle-to-base distance plus AR(1) lognormal shadowing.
struct SyntheticChannelParams {
    double sample_interval = 1e-3;  // seconds
    double tx_power_dbm = 28.0;
    double pl_ref_db = 77.0;        // path loss at ref_dist
    double ref_dist_m = 10.0;
    double pl_exponent = 3.0;
    double noise_floor_dbm = -90.0;
    double dist_mean_m = 100.0;
    double dist_amp_m = 90.0;
    double dist_amp2_m = 60.0;      // second mobility tone
    double dist_min_m = 20.0;       // closest approach
    double dist_max_m = 185.0;      // route extent
    double period_s = 120.0;        // mobility cycle
    double period2_s = 35.0;        // second tone period
    double period_jitter = 0.2;     // per-vehicle relative period spread
    double shadow_sigma_db = 1.2;
    double shadow_rho = 0.999;        // AR(1) coefficient per sample
};

class SyntheticChannel final : public ChannelSource {
public:
    SyntheticChannel(int n_vehicles, const SyntheticChannelParams& params, std::uint64_t master_seed);

    double sinr_db(int vehicle, std::int64_t sample) override;
    double sample_interval() const override { return params_.sample_interval; }
    std::int64_t sample_count() const override { return -1; }
    int vehicles() const override { return static_cast<int>(veh_.size()); }

    // Materialize the first `samples` samples (trace export / tests).
    ChannelTrace materialize(std::int64_t samples);

private:
    struct VehicleState {
        double period = 0.0;
        double phase = 0.0;
        double period2 = 0.0;
        double phase2 = 0.0;
        double shadow = 0.0;          // AR(1) state, dB
        std::int64_t next_sample = 0; // strictly forward cursor
        std::mt19937_64 gen;
        NormalSampler normal;
    };

    double advance(VehicleState& v, std::int64_t sample);

    SyntheticChannelParams params_;
    std::vector<VehicleState> veh_;
    double shadow_innovation_scale_ = 0.0;
};

}  // namespace fedrl
