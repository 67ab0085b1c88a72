#pragma once

#include <optional>
#include <vector>

namespace fedrl {

// Link-adaptation table entry. A measured SINR maps to the highest entry
// whose threshold it meets; below the lowest threshold the link is in outage.
struct McsEntry {
    double min_sinr = 0.0;            // dB, inclusive threshold
    double spectral_efficiency = 0.0; // bits/symbol (incl. code rate)
    int modulation_symbols = 0;       // constellation size (4, 16, 64, ...)
    double code_rate = 0.0;
};

// NR-flavoured 15-entry CQI-style table.
std::vector<McsEntry> default_mcs_table();

// Validates: non-empty, min_sinr strictly increasing, SE non-decreasing.
void validate_mcs_table(const std::vector<McsEntry>& table);

// Highest entry with min_sinr <= sinr; nullopt = outage.
std::optional<McsEntry> sinr_to_mcs(double sinr_db, const std::vector<McsEntry>& table);

}  // namespace fedrl
