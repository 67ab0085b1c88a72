#pragma once

#include "fedrl/sim/compression.hpp"

namespace fedrl {

// R = m_a when the window's application delay beats the latency requirement
// (strict inequality), otherwise -d. The delay enters in seconds so the
// penalty magnitude is commensurate with the mAP term; penalty_scale
// rescales it if desired.
double compute_reward(double app_delay_s, const CompressionConfig& action, double d_kpi_s,
                      double penalty_scale = 1.0);

}  // namespace fedrl
