#pragma once

#include <optional>
#include <string>

#include "sphtomo/forward_model.hpp"

namespace sphtomo::cli {

struct NoiseFlags {
  double sigma_n = 0.0;
  double sigma_omega = 0.0;
  std::string phase_noise = "none";  // none | const:<rad> | model:<deg>
  std::string phase_form = "squared";

  [[nodiscard]] NoiseModel model() const;
};

struct SimulateArgs {
  std::string state = "coherent";
  int two_j = 40;
  std::optional<int> two_m;
  double chi = 0.0;
  double theta0 = 0.0;
  double phi0 = 0.0;
  bool axis_plane = false;
  int axes = 24;
  int shots = 400;
  NoiseFlags noise;
  std::uint64_t seed = 1;
  std::string output = "measurements.csv";
};

struct ReconstructArgs {
  std::string input = "measurements.csv";
  std::string mode = "full-sphere";
  std::optional<int> kmax;
  std::optional<int> two_j_ref;
  NoiseFlags noise;
  bool fold_north = false;
  std::string weights = "voronoi";
  std::string grid = "64x128";
  std::string prefix = "reconstruction";
};

struct AnalyzeArgs {
  std::string input = "reconstruction.coeffs.csv";
  int azimuths = 180;
  std::optional<double> sigma_n;
  bool require_fit = false;
  std::string output = "squeezing.csv";
};

struct RenderArgs {
  std::string input = "reconstruction.coeffs.csv";
  std::string grid = "64x128";
  std::string output = "wigner.pgm";
  std::string grid_csv;
};

void run_simulate(const SimulateArgs& a);
void run_reconstruct(const ReconstructArgs& a);
void run_analyze(const AnalyzeArgs& a);
void run_render(const RenderArgs& a);
/// Returns the number of failed checks.
int run_selftest();

}  // namespace sphtomo::cli
