#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sphtomo/spin_state.hpp"

namespace sphtomo {

/// C_k = (2k+1)^{-1} sum_q |rho_kq|^2, k = 0 ... kmax.
[[nodiscard]] std::vector<double> power_spectrum(const SphericalState& s);

struct Moments {
  double mean_m = 0.0;
  double mean_m2 = 0.0;
  [[nodiscard]] double variance() const noexcept { return mean_m2 - mean_m * mean_m; }
};

/// <m> and <m^2> along the axis (theta, phi), read off the k = 0, 1, 2
/// partial waves with the state's two_j_ref.
[[nodiscard]] Moments moments(const SphericalState& s, double theta, double phi);

/// <m^2> of a coherent state along a perpendicular axis in the presence of
/// atom-number noise sigma_N:
///   j(j+1)/3 - j(2j-1)/6 exp(-6 sigma_N^2 / (2j(2j-1))).
[[nodiscard]] double coherent_reference_variance(int two_j, double sigma_N);

struct GaussianFit {
  double amplitude = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  int iterations = 0;
  bool ok = false;  ///< converged with variance > 0
};

/// Unweighted least-squares fit of A exp(-(m - mu)^2 / (2V)) to p_m,
/// m = -j ... +j with j = (p.size() - 1) / 2. Negative entries are allowed.
[[nodiscard]] GaussianFit gaussian_fit(std::span<const double> p);

struct VariancePoint {
  double phi = 0.0;
  double v_direct = 0.0;
  double v_fit = 0.0;  ///< equals v_direct when the fit failed
  bool fit_ok = false;
  std::optional<double> db_direct;  ///< empty if the log argument is not positive
  std::optional<double> db_fit;
};

struct SqueezingReport {
  double phi_s = 0.0;
  std::vector<VariancePoint> variance_curve;
  double v_coh = 0.0;
  double sigma_N = 0.0;
  std::optional<double> squeezing_db;         ///< headline, from the fit curve
  std::optional<double> squeezing_db_direct;  ///< same axis, direct moments
  double v_min = 0.0;
  int failed_fits = 0;
};

/// Projection variance in the equatorial plane for each phi. V_fit drives
/// the minimum; dB values are 10 log10((V - sigma_N^2/2) / (j_mean/2)).
[[nodiscard]] SqueezingReport squeezing_scan(const SphericalState& s, std::span<const double> phis,
                                             double sigma_N, double j_mean);

/// n azimuths phi_i = -pi/2 + i pi / n.
[[nodiscard]] std::vector<double> scan_azimuths(int n);

}  // namespace sphtomo
