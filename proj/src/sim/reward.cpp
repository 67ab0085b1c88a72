#include "fedrl/sim/reward.hpp"

namespace fedrl {

double compute_reward(double app_delay_s, const CompressionConfig& action, double d_kpi_s,
                      double penalty_scale) {
    if (app_delay_s < d_kpi_s) {
        return action.map_score;
    }
    return -app_delay_s * penalty_scale;
}

}  // namespace fedrl
