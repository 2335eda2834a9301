#pragma once

// Record sets whose sums reproduce the continuous reconstruction integrals
// exactly, built from oracle probabilities of an explicit density matrix.

#include <algorithm>
#include <vector>

#include "oracles.hpp"
#include "sphtomo/forward_model.hpp"

namespace fixture {

/// One record per (axis, m) with c = p_m / A on A equally spaced equatorial axes.
inline std::vector<sphtomo::MeasurementRecord> exact_inplane(const Eigen::MatrixXcd& rho, int two_j, int axes,
                                                             double phi_offset = 0.0) {
  std::vector<sphtomo::MeasurementRecord> out;
  for (int a = 0; a < axes; ++a) {
    const double phi = phi_offset + a * oracle::pi / axes;
    const auto p = oracle::probabilities(rho, two_j, oracle::pi / 2, phi);
    for (int i = 0; i <= two_j; ++i)
      out.push_back({oracle::pi / 2, phi, std::max(0.0, p[static_cast<std::size_t>(i)]) / axes, two_j, 2 * i - two_j});
  }
  return out;
}

/// Product rule over the northern hemisphere: Gauss-Legendre in cos(theta)
/// times a uniform rule in phi; c = w p_m / (2 pi).
template <int NX = 64>
std::vector<sphtomo::MeasurementRecord> exact_hemisphere(const Eigen::MatrixXcd& rho, int two_j, int n_phi) {
  std::vector<double> x, w;
  oracle::gauss_legendre<NX>(0.0, 1.0, x, w);
  std::vector<sphtomo::MeasurementRecord> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double theta = std::acos(x[i]);
    for (int l = 0; l < n_phi; ++l) {
      const double phi = 2.0 * oracle::pi * l / n_phi;
      const double c = w[i] * (2.0 * oracle::pi / n_phi) / (2.0 * oracle::pi);
      const auto p = oracle::probabilities(rho, two_j, theta, phi);
      for (int m = 0; m <= two_j; ++m)
        out.push_back({theta, phi, c * std::max(0.0, p[static_cast<std::size_t>(m)]), two_j, 2 * m - two_j});
    }
  }
  return out;
}

}  // namespace fixture
