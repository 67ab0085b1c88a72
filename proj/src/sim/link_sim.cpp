#include "fedrl/sim/link_sim.hpp"

#include <algorithm>
#include <cmath>

#include "fedrl/errors.hpp"

namespace fedrl {

namespace {

LayerDelayStats stats_of(const std::vector<double>& samples, double sentinel) {
    LayerDelayStats s;
    if (samples.empty()) {
        // documented sentinel: no samples at this layer in the window
        s.avg = s.min = s.max = sentinel;
        s.std = 0.0;
        return s;
    }
    double sum = 0.0, lo = samples[0], hi = samples[0];
    for (double x : samples) {
        sum += x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    const double mean = sum / static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) {
        var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(samples.size());
    s.avg = mean;
    s.min = lo;
    s.max = hi;
    s.std = std::sqrt(std::max(0.0, var));
    return s;
}

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// highest table row with min_sinr <= sinr, -1 = outage
int mcs_index(double sinr_db, const std::vector<McsEntry>& table) {
    if (sinr_db < table.front().min_sinr) return -1;
    int best = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (table[i].min_sinr <= sinr_db) best = static_cast<int>(i);
    }
    return best;
}

}  // namespace

void LinkParams::validate() const {
    if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be positive");
    if (spatial_layers <= 0) throw ConfigError("spatial_layers must be positive");
    if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("subcarrier_spacing_hz must be positive");
    if (!(frame_rate_fps > 0.0)) throw ConfigError("frame_rate_fps must be positive");
    if (points_per_frame <= 0) throw ConfigError("points_per_frame must be positive");
    if (!(decision_interval_s > 0.0)) throw ConfigError("decision_interval_s must be positive");
    if (decision_interval_s * frame_rate_fps < 1.0 - 1e-9) {
        throw ConfigError("decision_interval_s * frame_rate_fps must be >= 1 (one frame per window)");
    }
    if (!(d_kpi_s > 0.0)) throw ConfigError("d_kpi_s must be positive");
    if (segment_bytes <= 0) throw ConfigError("segment_bytes must be positive");
    if (!(retry_turnaround_s >= 0.0)) throw ConfigError("retry_turnaround_s must be >= 0");
    if (!(queue_budget_s > 0.0)) throw ConfigError("queue_budget_s must be positive");
}

UplinkSimulator::UplinkSimulator(ChannelSource& channel, std::vector<CompressionConfig> table,
                                 SizeModel size_model, std::vector<McsEntry> mcs_table,
                                 LinkParams params, int n_vehicles)
    : channel_(channel),
      table_(std::move(table)),
      size_model_(std::move(size_model)),
      mcs_(std::move(mcs_table)),
      params_(params) {
    params_.validate();
    validate_mcs_table(mcs_);
    if (n_vehicles <= 0) throw ConfigError("n_vehicles must be positive");
    if (channel_.vehicles() < n_vehicles) {
        throw SimulationError("channel covers " + std::to_string(channel_.vehicles()) +
                              " vehicles, scenario needs " + std::to_string(n_vehicles));
    }
    dt_ = channel_.sample_interval();
    if (!(dt_ > 0.0)) throw ConfigError("channel sample interval must be positive");
    const double n = params_.decision_interval_s / dt_;
    if (std::abs(n - std::round(n)) > 1e-6 || std::round(n) < 1.0) {
        throw ConfigError("decision_interval_s must be a positive multiple of the channel sample interval");
    }
    total_subcarriers_ = std::floor(params_.bandwidth_hz / params_.subcarrier_spacing_hz);
    veh_.resize(n_vehicles);
}

std::int64_t UplinkSimulator::queued_now(int v) const {
    return veh_[v].generated - veh_[v].delivered - veh_[v].dropped;
}

void UplinkSimulator::generate_frames(Vehicle& v, int vehicle_id, const CompressionConfig& config,
                                      double window_start, double window_end) {
    const double offset =
        params_.frame_stagger
            ? static_cast<double>(vehicle_id) / (static_cast<double>(veh_.size()) * params_.frame_rate_fps)
            : 0.0;
    for (;;) {
        const double gen = static_cast<double>(v.next_frame_id) / params_.frame_rate_fps + offset;
        if (gen >= window_end) break;
        if (gen >= window_start) {
            Frame f;
            f.id = v.next_frame_id;
            f.gen_time = gen;
            f.compression_time = config.compression_time;
            f.enqueue_time = gen + config.compression_time;
            f.bytes = compressed_frame_size(config, params_.points_per_frame, size_model_);
            f.segments_total =
                static_cast<int>((f.bytes + params_.segment_bytes - 1) / params_.segment_bytes);
            v.frames.push_back(f);
            v.compressing.emplace_back(f.enqueue_time, static_cast<int>(v.frames.size() - 1));
            ++v.generated;
            ++v.win_generated;
        }
        ++v.next_frame_id;
    }
}

void UplinkSimulator::enqueue_ready(Vehicle& v, double t) {
    while (!v.compressing.empty() && v.compressing.front().first <= t) {
        const int slot = v.compressing.front().second;
        v.compressing.pop_front();
        const Frame& f = v.frames[slot];
        for (int s = 0; s < f.segments_total; ++s) {
            Segment seg;
            seg.frame_idx = slot;
            const std::int64_t seg_bytes =
                (s == f.segments_total - 1)
                    ? f.bytes - static_cast<std::int64_t>(f.segments_total - 1) * params_.segment_bytes
                    : params_.segment_bytes;
            seg.full_bits = static_cast<double>(seg_bytes) * 8.0;
            seg.bits_left = seg.full_bits;
            v.queue.push_back(seg);
        }
    }
}

void UplinkSimulator::drop_stale(Vehicle& v, double t) {
    for (std::size_t i = 0; i < v.frames.size(); ++i) {
        Frame& f = v.frames[i];
        if (f.dropped || (f.segments_total > 0 && f.segments_done == f.segments_total)) continue;
        if (f.enqueue_time > t) continue;  // still compressing
        if (t - f.enqueue_time > params_.queue_budget_s) {
            drop_frame(v, static_cast<std::int64_t>(i));
        }
    }
}

void UplinkSimulator::drop_frame(Vehicle& v, std::int64_t frame_idx) {
    Frame& f = v.frames[frame_idx];
    int flushed = 0;
    for (auto it = v.queue.begin(); it != v.queue.end();) {
        if (it->frame_idx == frame_idx) {
            ++flushed;
            it = v.queue.erase(it);
        } else {
            ++it;
        }
    }
    f.dropped = true;
    v.win_seg_dropped += flushed;
    ++v.win_frames_dropped;
    ++v.dropped;
}

void UplinkSimulator::compact_frames(Vehicle& v) {
    std::vector<std::int64_t> remap(v.frames.size(), -1);
    std::vector<Frame> kept;
    kept.reserve(v.frames.size());
    for (std::size_t i = 0; i < v.frames.size(); ++i) {
        const Frame& f = v.frames[i];
        const bool concluded = f.dropped || (f.segments_total > 0 && f.segments_done == f.segments_total);
        if (!concluded) {
            remap[i] = static_cast<std::int64_t>(kept.size());
            kept.push_back(f);
        }
    }
    for (auto& seg : v.queue) seg.frame_idx = remap[seg.frame_idx];
    for (auto& c : v.compressing) c.second = static_cast<int>(remap[c.second]);
    v.frames = std::move(kept);
}

void UplinkSimulator::conclude_frame_delivery(int vehicle_id, Vehicle& v, Frame& f) {
    const double app_delay = f.compression_time + f.max_pdcp_delay + params_.reassembly_s;
    v.app_samples.push_back(app_delay);
    ++v.win_frames_delivered;
    ++v.delivered;
    FrameEvent e;
    e.vehicle = vehicle_id;
    e.frame_id = f.id;
    e.delivered = true;
    e.rlc_delay = f.max_rlc_delay;
    e.pdcp_delay = f.max_pdcp_delay;
    e.app_delay = app_delay;
    events_.push_back(e);
}

std::vector<WindowStats> UplinkSimulator::step(const std::vector<int>& actions) {
    const int n = static_cast<int>(veh_.size());
    if (static_cast<int>(actions.size()) != n) {
        throw SimulationError("need one action per vehicle");
    }
    for (int a : actions) {
        if (a < 0 || a >= static_cast<int>(table_.size())) {
            throw SimulationError("action index out of range: " + std::to_string(a));
        }
    }
    const std::int64_t samples_per_window =
        static_cast<std::int64_t>(std::round(params_.decision_interval_s / dt_));
    const std::int64_t available = channel_.sample_count();
    if (available >= 0 && next_sample_ + samples_per_window > available) {
        throw SimulationError("channel trace shorter than the decision window");
    }

    const double window_start = static_cast<double>(next_sample_) * dt_;
    const double window_end = window_start + params_.decision_interval_s;

    events_.clear();
    for (int vi = 0; vi < n; ++vi) {
        Vehicle& v = veh_[vi];
        v.rlc_samples.clear();
        v.pdcp_samples.clear();
        v.app_samples.clear();
        v.win_generated = 0;
        v.win_frames_delivered = 0;
        v.win_frames_dropped = 0;
        v.win_seg_first_pass = 0;
        v.win_seg_recovered = 0;
        v.win_seg_dropped = 0;
        v.win_sinr_sum = 0.0;
        v.win_mcs_symbols_sum = 0.0;
        v.win_subcarrier_sum = 0.0;
        v.win_active_samples = 0;
        generate_frames(v, vi, table_[actions[vi]], window_start, window_end);
    }

    std::vector<int> mcs_of(n, -1);
    std::vector<bool> active(n, false);

    for (std::int64_t k = 0; k < samples_per_window; ++k) {
        const std::int64_t sample = next_sample_ + k;
        const double t = static_cast<double>(sample) * dt_;

        int n_active = 0;
        for (int vi = 0; vi < n; ++vi) {
            Vehicle& v = veh_[vi];
            enqueue_ready(v, t);
            drop_stale(v, t);

            const double sinr = channel_.sinr_db(vi, sample);
            mcs_of[vi] = mcs_index(sinr, mcs_);
            v.win_sinr_sum += sinr;
            if (mcs_of[vi] >= 0) {
                v.win_mcs_symbols_sum += static_cast<double>(mcs_[mcs_of[vi]].modulation_symbols);
            }

            bool transmittable = false;
            if (!v.queue.empty()) {
                const Segment& head = v.queue.front();
                transmittable = !head.lost_once || head.retry_ready <= t;
            }
            active[vi] = transmittable;
            if (transmittable) ++n_active;
        }

        if (n_active == 0) continue;
        const double share = 1.0 / static_cast<double>(n_active);

        for (int vi = 0; vi < n; ++vi) {
            if (!active[vi]) continue;
            Vehicle& v = veh_[vi];
            v.win_subcarrier_sum += total_subcarriers_ * share;
            ++v.win_active_samples;

            if (mcs_of[vi] < 0) {
                // outage: the in-flight segment is lost; one retry after a
                // fixed turnaround, a second loss drops the whole frame
                Segment& head = v.queue.front();
                if (!head.lost_once) {
                    head.lost_once = true;
                    head.retry_ready = t + params_.retry_turnaround_s;
                    head.bits_left = head.full_bits;  // retransmission resends everything
                } else {
                    drop_frame(v, head.frame_idx);
                }
                continue;
            }

            const double rate = mcs_[mcs_of[vi]].spectral_efficiency * params_.bandwidth_hz *
                                static_cast<double>(params_.spatial_layers) * share;
            double budget = rate * dt_;
            double used = 0.0;
            while (budget > 1e-9 && !v.queue.empty()) {
                Segment& head = v.queue.front();
                if (head.lost_once && head.retry_ready > t) break;  // parked for retry
                if (head.bits_left > budget) {
                    head.bits_left -= budget;
                    budget = 0.0;
                    break;
                }
                used += head.bits_left;
                budget -= head.bits_left;
                const double completion = t + used / rate;
                const bool recovered = head.lost_once;
                const std::int64_t slot = head.frame_idx;
                v.queue.pop_front();

                Frame& f = v.frames[slot];
                const double air_delay = completion + params_.propagation_s - f.enqueue_time;
                const double pdcp_delay =
                    air_delay + (recovered ? params_.pdcp_reorder_penalty_s : 0.0);
                v.rlc_samples.push_back(air_delay);
                v.pdcp_samples.push_back(pdcp_delay);
                if (recovered) {
                    ++v.win_seg_recovered;
                    ++f.segments_recovered;
                } else {
                    ++v.win_seg_first_pass;
                }
                f.max_rlc_delay = std::max(f.max_rlc_delay, air_delay);
                f.max_pdcp_delay = std::max(f.max_pdcp_delay, pdcp_delay);
                ++f.segments_done;
                if (f.segments_done == f.segments_total) {
                    conclude_frame_delivery(vi, v, f);
                }
            }
        }
    }
    next_sample_ += samples_per_window;

    std::vector<WindowStats> out(n);
    for (int vi = 0; vi < n; ++vi) {
        Vehicle& v = veh_[vi];
        WindowStats& w = out[vi];
        const double n_samples = static_cast<double>(samples_per_window);
        w.avg_sinr_db = v.win_sinr_sum / n_samples;
        w.avg_mcs_symbols = v.win_mcs_symbols_sum / n_samples;
        w.avg_subcarriers = v.win_active_samples > 0
                                ? v.win_subcarrier_sum / static_cast<double>(v.win_active_samples)
                                : total_subcarriers_;
        const double sentinel = params_.decision_interval_s;
        w.rlc = stats_of(v.rlc_samples, sentinel);
        w.pdcp = stats_of(v.pdcp_samples, sentinel);
        w.app = stats_of(v.app_samples, sentinel);
        const double seg_concluded =
            static_cast<double>(v.win_seg_first_pass + v.win_seg_recovered + v.win_seg_dropped);
        w.prr_rlc = ratio_or_zero(static_cast<double>(v.win_seg_first_pass), seg_concluded);
        w.prr_pdcp =
            ratio_or_zero(static_cast<double>(v.win_seg_first_pass + v.win_seg_recovered), seg_concluded);
        const double frames_concluded =
            static_cast<double>(v.win_frames_delivered + v.win_frames_dropped);
        w.prr_app = ratio_or_zero(static_cast<double>(v.win_frames_delivered), frames_concluded);
        w.frames_generated = v.win_generated;
        w.frames_delivered = v.win_frames_delivered;
        w.frames_dropped = v.win_frames_dropped;
        w.frames_in_flight = static_cast<int>(queued_now(vi));
        if (!v.app_samples.empty()) {
            double s = 0.0;
            for (double x : v.app_samples) s += x;
            w.mean_app_delay = s / static_cast<double>(v.app_samples.size());
        }
        compact_frames(v);
    }
    return out;
}

}  // namespace fedrl
