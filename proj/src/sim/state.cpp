#include "fedrl/sim/state.hpp"

#include <cmath>

#include "fedrl/errors.hpp"

namespace fedrl {

FeatureScaling FeatureScaling::defaults() {
    FeatureScaling s;
    s.scale[0] = 30.0;   // SINR dB
    s.scale[1] = 64.0;   // constellation size
    s.scale[2] = 416.0;  // subcarriers in 50 MHz / 120 kHz
    for (int base : {3, 7, 11}) {
        s.scale[base + 0] = 0.1;   // avg delay, seconds
        s.scale[base + 1] = 0.1;   // min
        s.scale[base + 2] = 0.1;   // max
        s.scale[base + 3] = 0.05;  // std
    }
    // PRRs already in [0,1]
    return s;
}

StateVector build_state_vector(const WindowStats& stats, const FeatureScaling& scaling) {
    StateVector sv;
    auto& f = sv.features;
    f[0] = stats.avg_sinr_db;
    f[1] = stats.avg_mcs_symbols;
    f[2] = stats.avg_subcarriers;
    const LayerDelayStats* layers[3] = {&stats.rlc, &stats.pdcp, &stats.app};
    for (int l = 0; l < 3; ++l) {
        const int base = 3 + 4 * l;
        f[base + 0] = layers[l]->avg;
        f[base + 1] = layers[l]->min;
        f[base + 2] = layers[l]->max;
        f[base + 3] = layers[l]->std;
    }
    f[15] = stats.prr_rlc;
    f[16] = stats.prr_pdcp;
    f[17] = stats.prr_app;

    for (int i = 0; i < kStateDim; ++i) {
        f[i] = (f[i] - scaling.offset[i]) / scaling.scale[i];
        if (!std::isfinite(f[i])) {
            throw NumericError("state feature " + std::to_string(i) + " is not finite after scaling");
        }
    }
    return sv;
}

}  // namespace fedrl
