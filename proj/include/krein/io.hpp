#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "krein/bridge.hpp"
#include "krein/hki.hpp"
#include "krein/kdv5.hpp"
#include "krein/krein_matrix.hpp"
#include "krein/pencil.hpp"
#include "krein/spectrum.hpp"

namespace krein::io {

/// 17-significant-digit decimal form; round-trips a double exactly.
std::string format_full(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// --- pencils ---------------------------------------------------------------
// {degree, dimension, coefficients: [[re,im]...] row-major per matrix};
// floating-point payloads are decimal strings so reruns diff byte-identically.
std::string pencil_to_json(const StarEvenPencil& p);
StarEvenPencil pencil_from_json(const std::string& text);

// --- spectra -----------------------------------------------------------------
std::string spectrum_to_json(const SpectrumReport& rep);
/// CSV: re, im, algebraic, geometric, krein_index (blank if unset),
/// essential_band, origin_cluster, residual.
std::string spectrum_to_csv(const SpectrumReport& rep);

// --- Krein curves ------------------------------------------------------------
/// CSV columns: z, valid, r_1..r_{n_S}.
std::string curves_to_csv(const KreinCurveSet& curves);
/// JSON: zeros (z, branch, slope, signature), poles (z, removable), discontinuities.
std::string curves_to_json(const KreinCurveSet& curves);

// --- index reports -----------------------------------------------------------
std::string index_report_to_json(const IndexReport& rep);
std::string census_check_to_json(const CensusCheck& check);

// --- fifth-order dispersion application --------------------------------------
/// CSV columns: mu, then one z_n column per curve (header z(n)).
std::string dispersion_to_csv(const std::vector<DispersionCurve>& curves);
std::string collisions_to_csv(const std::vector<CollisionPrediction>& collisions);
/// CSV columns: mu, max_re, n_a0.
std::string scan_to_csv(const BlochScan& scan);
std::string wave_to_json(const PeriodicWave& wave);
PeriodicWave wave_from_json(const std::string& text);

// --- bridge application --------------------------------------------------------
std::string profile_to_json(const PulseProfile& profile, const BridgeGrid& grid);
std::pair<PulseProfile, BridgeGrid> profile_from_json(const std::string& text);
/// CSV columns: x, u.
std::string profile_to_csv(const PulseProfile& profile, const BridgeGrid& grid);
std::string a0_report_to_json(const A0Report& rep);
std::string krein_diagonal_to_json(const KreinDiagonalReport& rep);

// --- manifest and structured errors -------------------------------------------
std::string manifest_to_json(const std::string& scenario,
                             const std::map<std::string, std::string>& parameters,
                             const std::vector<std::string>& artifacts, long seed);
std::string error_to_json(const std::string& code, const std::string& message);

}  // namespace krein::io
