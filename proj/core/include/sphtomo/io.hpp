#pragma once

// Text file formats. Every floating-point value is written with 17
// significant digits, so write -> read -> write is byte-stable. Writes go to
// a temporary file in the target directory and are renamed into place.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sphtomo/analysis.hpp"
#include "sphtomo/forward_model.hpp"
#include "sphtomo/spin_state.hpp"

namespace sphtomo::io {

/// Canonical text for a double ({:.17g}).
[[nodiscard]] std::string format_double(double x);

// measurement CSV: theta,phi,weight,two_j,two_m (weight may be empty)
[[nodiscard]] std::vector<MeasurementRecord> parse_measurements(const std::filesystem::path& path);
/// source is used in diagnostics ("source:line: ...").
[[nodiscard]] std::vector<MeasurementRecord> parse_measurements_text(std::string_view text,
                                                                     std::string_view source);
[[nodiscard]] std::string format_measurements(const std::vector<MeasurementRecord>& records);
void write_measurements(const std::filesystem::path& path,
                        const std::vector<MeasurementRecord>& records);

struct CoefficientFile {
  SphericalState state;
  double sigma_n = 0.0;
  double mean_two_j = 0.0;
};

// coefficient CSV: '# key=value' metadata, then k,q,re,im for q >= 0
[[nodiscard]] std::string format_coefficients(const CoefficientFile& c);
void write_coefficients(const std::filesystem::path& path, const CoefficientFile& c);
[[nodiscard]] CoefficientFile parse_coefficients_text(std::string_view text, std::string_view source);
[[nodiscard]] CoefficientFile read_coefficients(const std::filesystem::path& path);

[[nodiscard]] std::string format_spectrum(const std::vector<double>& c);
void write_spectrum(const std::filesystem::path& path, const std::vector<double>& c);

[[nodiscard]] std::string format_grid(const WignerGrid& g);
void write_grid(const std::filesystem::path& path, const WignerGrid& g);

/// Plain P2 image, one row per theta (north at the top), one column per phi.
/// W is mapped affinely from [wmin, wmax] onto 0 ... 65535; the exact
/// bounds are kept in a comment line.
[[nodiscard]] std::string format_pgm(const WignerGrid& g);
void write_pgm(const std::filesystem::path& path, const WignerGrid& g);

[[nodiscard]] std::string format_squeezing(const SqueezingReport& r);
void write_squeezing(const std::filesystem::path& path, const SqueezingReport& r);
/// Short human-readable summary of a squeezing report.
[[nodiscard]] std::string squeezing_summary(const SqueezingReport& r);

[[nodiscard]] std::string read_text(const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace sphtomo::io
