#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "replidyn/historic.hpp"
#include "replidyn/replicator.hpp"

namespace replidyn {

// Shortest round-trip decimal for a double.
std::string format_double(double v);

// Atomic write: temp file in the target directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

// Orbit CSV: header `n,x1,...,xm,drift`, one row per stored (thinned) state.
// Doubles print as shortest round-trip decimals; extended-precision values
// print with precision_bits/3 significant digits.
void write_orbit_csv(const Orbit& orbit, const std::filesystem::path& path);

// Trapping CSV per region: `epoch,p,q,r,lambda_hat,mu_hat` where p,q,r is the
// epoch's three-region triple and the ratios are this region's finite-prefix
// gap statistics at that epoch (empty before epoch 2).
void write_trapping_csv(const TrappingAnalysis& analysis, int region,
                        const std::filesystem::path& path);

// Time-average CSV: `n,s,a1,...,am`, thinned rows for each order s.
void write_averages_csv(const TimeAverageStack& stack, const std::filesystem::path& path);

// FNV-1a content hash, for determinism checks and reports.
std::string fnv1a64_of_file(const std::filesystem::path& path);

}  // namespace replidyn
