#include "commands.hpp"

#include <charconv>
#include <filesystem>
#include <utility>

#include <fmt/format.h>

#include "sphtomo/analysis.hpp"
#include "sphtomo/error.hpp"
#include "sphtomo/io.hpp"
#include "sphtomo/tomography.hpp"

namespace sphtomo::cli {

namespace fs = std::filesystem;

namespace {

double parse_real(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ValidationError(fmt::format("{}: '{}' is not a number", what, s));
  return v;
}

std::pair<int, int> parse_grid(std::string_view text) {
  const auto x = text.find('x');
  int n = 0, m = 0;
  const auto ok = [](std::string_view s, int& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size() && out > 0;
  };
  if (x == std::string_view::npos || !ok(text.substr(0, x), n) || !ok(text.substr(x + 1), m))
    throw ValidationError(
        fmt::format("--grid: expected NxM with positive integers (theta rows x phi columns), got '{}'", text));
  return {n, m};
}

void require_input(const std::string& path, std::string_view hint) {
  if (!fs::exists(path)) throw IoError(fmt::format("{}: no such file; {}", path, hint));
}

ReconstructionMode parse_mode(std::string_view s) {
  if (s == "full-sphere") return ReconstructionMode::full_sphere;
  if (s == "in-plane") return ReconstructionMode::in_plane;
  throw ValidationError(fmt::format("--mode: expected full-sphere or in-plane, got '{}'", s));
}

}  // namespace

NoiseModel NoiseFlags::model() const {
  NoiseModel n;
  n.sigma_N = sigma_n;
  n.sigma_Omega = sigma_omega;
  const std::string_view p = phase_noise;
  if (p == "none") {
    n.phase_kind = PhaseNoiseKind::none;
  } else if (p.starts_with("const:")) {
    n.phase_kind = PhaseNoiseKind::constant;
    n.sigma_phi = parse_real(p.substr(6), "--phase-noise const");
  } else if (p.starts_with("model:")) {
    n.phase_kind = PhaseNoiseKind::model;
    n.sigma_ph_deg = parse_real(p.substr(6), "--phase-noise model");
  } else {
    throw ValidationError(fmt::format("--phase-noise: expected none, const:<rad> or model:<deg>, got '{}'", p));
  }
  if (phase_form == "squared")
    n.phase_form = PhaseModelForm::squared;
  else if (phase_form == "linear")
    n.phase_form = PhaseModelForm::linear;
  else
    throw ValidationError(fmt::format("--phase-model-form: expected squared or linear, got '{}'", phase_form));
  n.validate();
  return n;
}

void run_simulate(const SimulateArgs& a) {
  const NoiseModel noise = a.noise.model();
  if (a.axes < 1) throw ValidationError("--axes must be positive");
  if (a.shots < 1) throw ValidationError("--shots must be positive");
  if (a.two_j < 0) throw ValidationError("--two-j must be non-negative");

  SphericalState state = [&] {
    if (a.state == "coherent") return coherent_state(a.two_j, a.theta0, a.phi0, 0.0, a.two_j);
    if (a.state == "dicke") return dicke_basis_state(a.two_j, a.two_m.value_or(a.two_j), a.two_j);
    if (a.state == "oat") return oat_squeezed_state(a.two_j, a.chi, a.two_j);
    if (a.state == "mixed") return mixed_state(a.two_j, a.two_j);
    throw ValidationError(fmt::format("--state: expected coherent, dicke, oat or mixed, got '{}'", a.state));
  }();

  const auto axes = a.axis_plane ? in_plane_axes(a.axes) : hemisphere_axes(a.axes);
  const auto records = sample_measurements(state, axes, a.shots, noise, a.seed);
  io::write_measurements(a.output, records);
  fmt::print("simulate: {} state, 2j = {}, {} {} axes x {} shots -> {} ({} records)\n", a.state, a.two_j,
             a.axes, a.axis_plane ? "in-plane" : "hemisphere", a.shots, a.output, records.size());
}

void run_reconstruct(const ReconstructArgs& a) {
  ReconstructionConfig cfg;
  cfg.mode = parse_mode(a.mode);
  cfg.kmax = a.kmax;
  cfg.two_j_ref = a.two_j_ref;
  cfg.noise = a.noise.model();
  cfg.fold_north = a.fold_north;
  if (cfg.fold_north && cfg.mode != ReconstructionMode::in_plane)
    throw ValidationError("--fold-north applies to in-plane reconstructions only");
  const auto [n_theta, n_phi] = parse_grid(a.grid);

  require_input(a.input, "run `sphtomo simulate` first or pass --input <file>");
  auto records = io::parse_measurements(a.input);
  if (records.empty()) throw ValidationError(fmt::format("{}: no measurement records", a.input));

  if (a.weights == "voronoi" || a.weights == "uniform") {
    compute_weights(records, cfg.mode, a.weights == "voronoi" ? WeightScheme::voronoi : WeightScheme::uniform);
  } else if (a.weights == "file") {
    for (const auto& r : records)
      if (!r.weight) throw ValidationError(fmt::format("{}: --weights file needs a weight on every row", a.input));
  } else {
    throw ValidationError(fmt::format("--weights: expected uniform, voronoi or file, got '{}'", a.weights));
  }

  const auto rec = reconstruct(records, cfg);
  const auto grid = wigner_grid(rec.state, n_theta, n_phi);

  // everything is computed before the first file is touched
  const std::string coeff_text = io::format_coefficients({rec.state, cfg.noise.sigma_N, rec.mean_two_j});
  const std::string spectrum_text = io::format_spectrum(power_spectrum(rec.state));
  const std::string grid_text = io::format_grid(grid);
  const std::string base = a.prefix;
  io::write_text_atomic(base + ".coeffs.csv", coeff_text);
  io::write_text_atomic(base + ".spectrum.csv", spectrum_text);
  io::write_text_atomic(base + ".grid.csv", grid_text);

  fmt::print("reconstruct: {} records on {} distinct axes, {} mode, kmax = {}, 2j_ref = {}\n", records.size(),
             rec.distinct_axes, a.mode, rec.state.kmax(), rec.state.two_j_ref());
  if (rec.skipped_terms > 0)
    fmt::print("reconstruct: {} (record, k) terms skipped where k > 2 j_n\n", rec.skipped_terms);
  fmt::print("reconstruct: wrote {0}.coeffs.csv, {0}.spectrum.csv, {0}.grid.csv\n", base);
}

void run_analyze(const AnalyzeArgs& a) {
  if (a.azimuths < 1) throw ValidationError("--azimuths must be positive");
  require_input(a.input, "run `sphtomo reconstruct` first or pass --input <file>");
  const auto c = io::read_coefficients(a.input);
  const double sigma_n = a.sigma_n.value_or(c.sigma_n);
  if (!(sigma_n >= 0.0)) throw ValidationError("--sigma-n must be non-negative");

  const auto report = squeezing_scan(c.state, scan_azimuths(a.azimuths), sigma_n, 0.5 * c.mean_two_j);
  if (a.require_fit && report.failed_fits > 0)
    throw NumericalError(fmt::format("Gaussian fit did not converge at {} of {} azimuths", report.failed_fits,
                                     report.variance_curve.size()));
  io::write_squeezing(a.output, report);
  fmt::print("{}", io::squeezing_summary(report));
  fmt::print("analyze: wrote {}\n", a.output);
}

void run_render(const RenderArgs& a) {
  const auto [n_theta, n_phi] = parse_grid(a.grid);
  require_input(a.input, "run `sphtomo reconstruct` first or pass --input <file>");
  const auto c = io::read_coefficients(a.input);
  const auto grid = wigner_grid(c.state, n_theta, n_phi);
  const std::string pgm = io::format_pgm(grid);
  const std::string csv = a.grid_csv.empty() ? std::string{} : io::format_grid(grid);
  io::write_text_atomic(a.output, pgm);
  if (!a.grid_csv.empty()) io::write_text_atomic(a.grid_csv, csv);
  fmt::print("render: {}x{} grid -> {}{}\n", n_theta, n_phi, a.output,
             a.grid_csv.empty() ? "" : fmt::format(", {}", a.grid_csv));
}

}  // namespace sphtomo::cli
