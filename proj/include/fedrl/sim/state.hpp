#pragma once

#include <array>
#include <vector>

#include "fedrl/sim/link_sim.hpp"

namespace fedrl {

inline constexpr int kStateDim = 18;
inline constexpr int kStateDimHomogeneous = kStateDim + 1;

// Fixed feature ordering:
//   0 avg SINR, 1 avg MCS constellation size, 2 avg allocated subcarriers,
//   3..6   RLC  delay (avg, min, max, std),
//   7..10  PDCP delay (avg, min, max, std),
//   11..14 APP  delay (avg, min, max, std),
//   15 PRR RLC, 16 PRR PDCP, 17 PRR APP.
struct StateVector {
    std::array<double, kStateDim> features{};

    // features followed by the constant 1 (for the linear learners)
    std::array<double, kStateDimHomogeneous> homogeneous() const {
        std::array<double, kStateDimHomogeneous> h{};
        for (int i = 0; i < kStateDim; ++i) h[i] = features[i];
        h[kStateDim] = 1.0;
        return h;
    }
};

// Per-feature affine scaling: scaled = (raw - offset) / scale. The constants
// are shared by every vehicle so that federated weight averaging operates on
// one common feature basis.
struct FeatureScaling {
    std::array<double, kStateDim> offset{};
    std::array<double, kStateDim> scale{};

    FeatureScaling() {
        offset.fill(0.0);
        scale.fill(1.0);
    }

    static FeatureScaling identity() { return FeatureScaling(); }
    static FeatureScaling defaults();
};

// Deterministic 18-feature observation. Throws NumericError when a scaled
// feature is not finite.
StateVector build_state_vector(const WindowStats& stats, const FeatureScaling& scaling);

}  // namespace fedrl
