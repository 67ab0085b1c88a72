#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "fedrl/sim/channel.hpp"
#include "fedrl/sim/compression.hpp"
#include "fedrl/sim/mcs.hpp"

namespace fedrl {

struct LinkParams {
    double bandwidth_hz = 50e6;
    double subcarrier_spacing_hz = 120e3;   // numerology-3 equivalent
    double tx_power_dbm = 28.0;
    int spatial_layers = 2;                 // MIMO rank, multiplies the rate
    double frame_rate_fps = 30.0;
    std::int64_t points_per_frame = 82200;
    double decision_interval_s = 0.1;
    double d_kpi_s = 0.050;

    // plumbing of the three-layer delay model
    std::int64_t segment_bytes = 12000;
    double retry_turnaround_s = 0.004;      // parking time before the single retry
    double pdcp_reorder_penalty_s = 0.001;  // per recovered segment
    double propagation_s = 0.0005;
    double reassembly_s = 0.0;
    double queue_budget_s = 0.1;            // frame dropped once this old and undelivered
    bool frame_stagger = true;              // offset vehicle capture clocks by v/(N*fps)

    void validate() const;  // throws ConfigError
};

struct LayerDelayStats {
    double avg = 0.0;
    double min = 0.0;
    double max = 0.0;
    double std = 0.0;
};

// Per-vehicle observation for one decision window.
struct WindowStats {
    double avg_sinr_db = 0.0;
    double avg_mcs_symbols = 0.0;
    double avg_subcarriers = 0.0;
    LayerDelayStats rlc;
    LayerDelayStats pdcp;
    LayerDelayStats app;
    double prr_rlc = 0.0;
    double prr_pdcp = 0.0;
    double prr_app = 0.0;

    // reward support + conservation accounting (not part of the state vector)
    int frames_generated = 0;
    int frames_delivered = 0;
    int frames_dropped = 0;
    int frames_in_flight = 0;       // still queued at window end
    double mean_app_delay = 0.0;    // over frames delivered this window (0 if none)
};

// Per-frame completion record, used by invariant tests and diagnostics.
struct FrameEvent {
    int vehicle = 0;
    std::int64_t frame_id = 0;
    bool delivered = false;
    double rlc_delay = 0.0;   // max over the frame's segments
    double pdcp_delay = 0.0;  // max over the frame's segments
    double app_delay = 0.0;
};

// Shared-uplink simulator. N vehicles stream compressed frames towards one
// base station; capacity is split equally (in airtime) among vehicles with
// pending traffic every channel sample. Queues persist across windows.
class UplinkSimulator {
public:
    UplinkSimulator(ChannelSource& channel, std::vector<CompressionConfig> table,
                    SizeModel size_model, std::vector<McsEntry> mcs_table, LinkParams params,
                    int n_vehicles);

    // Advance one decision window with the given per-vehicle actions
    // (indices into the compression table).
    std::vector<WindowStats> step(const std::vector<int>& actions);

    const std::vector<FrameEvent>& last_window_events() const { return events_; }
    const std::vector<CompressionConfig>& table() const { return table_; }
    const LinkParams& params() const { return params_; }
    double now() const { return static_cast<double>(next_sample_) * dt_; }

    // Cumulative conservation counters, per vehicle.
    std::int64_t total_generated(int v) const { return veh_[v].generated; }
    std::int64_t total_delivered(int v) const { return veh_[v].delivered; }
    std::int64_t total_dropped(int v) const { return veh_[v].dropped; }
    std::int64_t queued_now(int v) const;

private:
    struct Segment {
        std::int64_t frame_idx = 0;  // index into frames_ of its vehicle
        double full_bits = 0.0;
        double bits_left = 0.0;
        bool lost_once = false;      // first transmission attempt hit outage
        double retry_ready = 0.0;    // parked until this time when lost_once
    };

    struct Frame {
        std::int64_t id = 0;
        double gen_time = 0.0;
        double enqueue_time = 0.0;   // gen + compression
        double compression_time = 0.0;
        std::int64_t bytes = 0;
        int segments_total = 0;
        int segments_done = 0;
        int segments_recovered = 0;
        double max_rlc_delay = 0.0;
        double max_pdcp_delay = 0.0;
        bool dropped = false;
    };

    struct Vehicle {
        std::deque<Segment> queue;
        std::vector<Frame> frames;            // in-flight frame records
        std::deque<std::pair<double, int>> compressing;  // (ready time, frame slot)
        std::int64_t next_frame_id = 0;
        std::int64_t generated = 0;
        std::int64_t delivered = 0;
        std::int64_t dropped = 0;
        // window accumulators
        std::vector<double> rlc_samples;
        std::vector<double> pdcp_samples;
        std::vector<double> app_samples;
        int win_generated = 0;
        int win_frames_delivered = 0;
        int win_frames_dropped = 0;
        int win_seg_first_pass = 0;
        int win_seg_recovered = 0;
        int win_seg_dropped = 0;
        double win_sinr_sum = 0.0;
        double win_mcs_symbols_sum = 0.0;
        double win_subcarrier_sum = 0.0;
        int win_active_samples = 0;
    };

    void generate_frames(Vehicle& v, int vehicle_id, const CompressionConfig& config,
                         double window_start, double window_end);
    void enqueue_ready(Vehicle& v, double t);
    void drop_stale(Vehicle& v, double t);
    void conclude_frame_delivery(int vehicle_id, Vehicle& v, Frame& f);
    void drop_frame(Vehicle& v, std::int64_t frame_idx);
    void compact_frames(Vehicle& v);

    ChannelSource& channel_;
    std::vector<CompressionConfig> table_;
    SizeModel size_model_;
    std::vector<McsEntry> mcs_;
    LinkParams params_;
    double dt_ = 0.0;
    double total_subcarriers_ = 0.0;
    std::int64_t next_sample_ = 0;
    std::vector<Vehicle> veh_;
    std::vector<FrameEvent> events_;
};

}  // namespace fedrl
