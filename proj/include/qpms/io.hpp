#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpms/comb.hpp"
#include "qpms/engine.hpp"
#include "qpms/medium.hpp"
#include "qpms/modes.hpp"

namespace qpms {

struct CountsMatrix;
struct SelectivityReport;
struct TrendReport;

using json = nlohmann::json;

// Serialization. Readers are strict: unknown keys and wrong types raise a
// ValidationError naming the JSON pointer of the offending field.
void to_json(json& j, const SpatialGrid& g);
void to_json(json& j, const TemporalGrid& g);
void to_json(json& j, const CrystalSpec& c);
void to_json(json& j, const DetectorModel& d);
void to_json(json& j, const BeamSettings& b);
void to_json(json& j, const ModeLabel& label);
void to_json(json& j, const CombSpec& comb);

SpatialGrid read_spatial_grid(const json& j, const std::string& path);
TemporalGrid read_temporal_grid(const json& j, const std::string& path);
CrystalSpec read_crystal(const json& j, const std::string& path);
DetectorModel read_detector(const json& j, const std::string& path);
BeamSettings read_beam(const json& j, const std::string& path, double default_wavelength_nm);
/// Accepts either a compact tag string ("X1T0", "T+") or an object
/// {"name", "terms": [{"l", "m", "coeff_re", "coeff_im"}]}.
ModeLabel read_mode_label(const json& j, const std::string& path, Role role);
CombSpec read_comb(const json& j, const std::string& path);

// Exports. Doubles are printed in shortest round-trip form so reruns are byte-identical.
std::string counts_csv(const CountsMatrix& m);
json counts_json(const CountsMatrix& m);
json selectivity_json(const SelectivityReport& report, const CountsMatrix& m);
std::string selectivity_table(const SelectivityReport& report, const CountsMatrix& m);
json trend_json(const TrendReport& report);
std::string delay_trace_csv(const DelayTrace& trace);
std::string spectral_csv(const CombSpec& comb);
/// Binary 8-bit PGM of a row-major nx x ny image scaled by `max_value`.
std::string pgm_image(const std::vector<double>& image, std::size_t nx, std::size_t ny, double max_value);
std::string matrix_csv(const std::vector<double>& image, std::size_t nx, std::size_t ny);

std::string sha256_hex(const std::string& data);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace qpms
