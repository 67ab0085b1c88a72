#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedrl {

// One Draco-style compression configuration: the RL action. Nine of them
// exist, one per (level c, quantization bits q) pair. compression_time and
// map_score come from the measurement table shipped with the project
// (overridable from a CSV file).
struct CompressionConfig {
    int id = 0;                    // action index 0..8, table row order
    int level = 0;                 // c in {0, 5, 10}
    int quant_bits = 0;            // q in {8, 9, 10}
    double compression_time = 0.0; // seconds
    double map_score = 0.0;        // detector quality after (de)compression, [0,1]

    // Conventional label, e.g. q=8,c=0 -> "8-00", q=10,c=5 -> "10-05".
    std::string name() const;
};

// Default table: rows ordered by (c, q), c outer.
std::vector<CompressionConfig> default_compression_table();

// Raw table row as parsed from CSV (or supplied programmatically).
struct CompressionTableRow {
    int level = 0;
    int quant_bits = 0;
    double time_ms = 0.0;
    double map = 0.0;
};

// Validates and converts 9 rows into configs indexed 0..8 in row order.
// Throws SchemaError naming the offending row on: row count != 9,
// duplicate (c,q), non-positive time, map outside [0,1].
std::vector<CompressionConfig> load_compression_table(const std::vector<CompressionTableRow>& rows);

// CSV with header `c,q,time_ms,map`. Throws IoError / SchemaError.
std::vector<CompressionConfig> load_compression_table_csv(const std::string& path);

// Per-level entropy-coding factor of the compressed-size model.
struct SizeModel {
    // parallel arrays: levels[i] has factor eta[i] > 0
    std::vector<int> levels{0, 5, 10};
    std::vector<double> eta{0.55, 0.40, 0.30};

    double eta_for_level(int level) const;  // ConfigError on unknown level
};

// bytes = ceil(points * 3 * q / 8 * eta(c))
std::int64_t compressed_frame_size(const CompressionConfig& config, std::int64_t points,
                                   const SizeModel& size_model);

}  // namespace fedrl
