#include "fedrl/sim/compression.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fedrl/errors.hpp"

namespace fedrl {

std::string CompressionConfig::name() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%d-%02d", quant_bits, level);
    return buf;
}

std::vector<CompressionConfig> default_compression_table() {
    // Measured Draco compression time (ms) and post-compression detection
    // quality per (c,q) configuration.
    static const CompressionTableRow kRows[] = {
        {0, 8, 5.17, 0.257},  {0, 9, 5.22, 0.580},  {0, 10, 5.50, 0.686},
        {5, 8, 5.34, 0.257},  {5, 9, 6.97, 0.572},  {5, 10, 8.52, 0.683},
        {10, 8, 8.21, 0.257}, {10, 9, 9.62, 0.574}, {10, 10, 11.58, 0.683},
    };
    return load_compression_table(std::vector<CompressionTableRow>(std::begin(kRows), std::end(kRows)));
}

std::vector<CompressionConfig> load_compression_table(const std::vector<CompressionTableRow>& rows) {
    if (rows.size() != 9) {
        throw SchemaError("compression table must have 9 rows, got " + std::to_string(rows.size()));
    }
    std::set<std::pair<int, int>> seen;
    std::vector<CompressionConfig> configs;
    configs.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const std::string where = "compression table row " + std::to_string(i);
        if (!seen.insert({r.level, r.quant_bits}).second) {
            throw SchemaError(where + ": duplicate configuration (c=" + std::to_string(r.level) +
                              ",q=" + std::to_string(r.quant_bits) + ")");
        }
        if (!(r.time_ms > 0.0)) {
            throw SchemaError(where + ": non-positive compression time " + std::to_string(r.time_ms));
        }
        if (!(r.map >= 0.0 && r.map <= 1.0)) {
            throw SchemaError(where + ": map outside [0,1]: " + std::to_string(r.map));
        }
        CompressionConfig c;
        c.id = static_cast<int>(i);
        c.level = r.level;
        c.quant_bits = r.quant_bits;
        c.compression_time = r.time_ms * 1e-3;
        c.map_score = r.map;
        configs.push_back(c);
    }
    return configs;
}

std::vector<CompressionConfig> load_compression_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open compression table: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError(path + ": empty file");
    }
    // tolerate trailing CR from foreign line endings
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "c,q,time_ms,map") {
        throw SchemaError(path + ": expected header `c,q,time_ms,map`, got `" + line + "`");
    }
    std::vector<CompressionTableRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        CompressionTableRow r;
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(ss >> r.level >> c1 >> r.quant_bits >> c2 >> r.time_ms >> c3 >> r.map) ||
            c1 != ',' || c2 != ',' || c3 != ',') {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": malformed row `" + line + "`");
        }
        rows.push_back(r);
    }
    return load_compression_table(rows);
}

double SizeModel::eta_for_level(int level) const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == level) {
            if (!(eta[i] > 0.0)) {
                throw ConfigError("size model: eta for level " + std::to_string(level) +
                                  " must be positive");
            }
            return eta[i];
        }
    }
    throw ConfigError("size model: unknown compression level " + std::to_string(level));
}

std::int64_t compressed_frame_size(const CompressionConfig& config, std::int64_t points,
                                   const SizeModel& size_model) {
    if (points <= 0) {
        throw ConfigError("compressed_frame_size: points must be positive");
    }
    const double eta = size_model.eta_for_level(config.level);
    const double raw = static_cast<double>(points) * 3.0 * config.quant_bits / 8.0;
    return static_cast<std::int64_t>(std::ceil(raw * eta));
}

}  // namespace fedrl
