#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "phaseplane/density_energy.hpp"
#include "phaseplane/experiments.hpp"

namespace phaseplane {

// FNV-1a over the canonical config serialization; artifact names embed the
// first 16 hex digits.
std::uint64_t fnv1a(const std::string& data);
std::string hash_hex(std::uint64_t value, int digits = 16);

// Round-trip double formatting shared by every artifact writer.
std::string format_double(double value);

// Write-then-rename; artifacts appear atomically.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// CSV with the fixed header (experiment, seed, size, lhs, rhs, ratio).
std::string ratio_report_csv(const RatioReport& report);
// JSON summary {experiment, rows, max, p95, drift, notes...}.
std::string ratio_report_summary_json(const RatioReport& report);

// Tile-collection artifact: {grid: {t, r}, tiles: [{kI, nI, kW, nW}],
// universe: {...}} with stable field order; forests add a "trees" array of
// {top, members} entries (member indices into the tiles array).
std::string tiles_json(const GeneratedForest& forest);
GeneratedForest forest_from_json(const std::string& text);

// Decomposition artifacts: JSON (levels, tree tops, tallies, constants) and
// the CSV summary (n, j, interval, density, energy).
std::string decomposition_json(const TileDecomposition& dec);
std::string decomposition_csv(const TileDecomposition& dec,
                              const DensityEvaluator& density_eval,
                              const EnergyEvaluator& energy_eval);

}  // namespace phaseplane
