#include "fedrl/sim/mcs.hpp"

#include "fedrl/errors.hpp"

namespace fedrl {

std::vector<McsEntry> default_mcs_table() {
    // min_sinr dB, bits/symbol, constellation, code rate; QPSK through
    // 1024-QAM, NR-flavoured efficiencies
    static const McsEntry kTable[] = {
        {-6.7, 0.1523, 4, 0.0762},  {-4.7, 0.2344, 4, 0.1172},
        {-2.3, 0.3770, 4, 0.1885},  {0.2, 0.6016, 4, 0.3008},
        {2.4, 0.9000, 4, 0.4500},   {4.3, 1.1758, 4, 0.5879},
        {5.9, 1.4766, 16, 0.3691},  {8.1, 1.9141, 16, 0.4785},
        {10.3, 2.4063, 16, 0.6016}, {11.7, 2.7305, 64, 0.4551},
        {14.1, 3.3223, 64, 0.5537}, {16.3, 3.9023, 64, 0.6504},
        {18.7, 4.5234, 64, 0.7539}, {21.0, 5.1152, 64, 0.8525},
        {22.7, 5.5547, 64, 0.9258}, {24.5, 6.2266, 256, 0.7783},
        {26.5, 7.4063, 256, 0.9258}, {28.5, 8.5039, 1024, 0.8504},
        {30.5, 9.4551, 1024, 0.9455},
    };
    std::vector<McsEntry> table(std::begin(kTable), std::end(kTable));
    validate_mcs_table(table);
    return table;
}

void validate_mcs_table(const std::vector<McsEntry>& table) {
    if (table.empty()) {
        throw SchemaError("MCS table must be non-empty");
    }
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (!(table[i].min_sinr > table[i - 1].min_sinr)) {
            throw SchemaError("MCS table min_sinr must be strictly increasing at row " +
                              std::to_string(i));
        }
        if (table[i].spectral_efficiency < table[i - 1].spectral_efficiency) {
            throw SchemaError("MCS table spectral efficiency must be non-decreasing at row " +
                              std::to_string(i));
        }
    }
}

std::optional<McsEntry> sinr_to_mcs(double sinr_db, const std::vector<McsEntry>& table) {
    if (sinr_db < table.front().min_sinr) {
        return std::nullopt;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (table[i].min_sinr <= sinr_db) best = i;
    }
    return table[best];
}

}  // namespace fedrl
