#pragma once

// Filtered backprojection of spherical Wigner-function coefficients from
// Stern-Gerlach records.
//
// Each record (theta_n, phi_n, c_n, j_n, m_n) contributes
//   rho_kq += F_kq c_n D^k_{q0}(phi_n, theta_n, 0) tau_k^{j_n, m_n} g_kq(n)
// where F_kq is the filter (2k+1 for full-sphere data, a Pochhammer product
// times pi for axes confined to the equatorial plane) and g_kq(n) collects
// the noise damping. The sum runs in a fixed order with compensated
// accumulation, so results are bitwise independent of the thread count.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sphtomo/forward_model.hpp"
#include "sphtomo/spin_state.hpp"

namespace sphtomo {

enum class ReconstructionMode { full_sphere, in_plane };
enum class WeightScheme { uniform, voronoi };

struct ReconstructionConfig {
  std::optional<int> kmax;  ///< user cap; default min(2 min j_n, A - 1 in-plane)
  ReconstructionMode mode = ReconstructionMode::full_sphere;
  NoiseModel noise;
  bool fold_north = false;
  std::optional<int> two_j_ref;  ///< default round(mean two_j_n)
};

struct Reconstruction {
  SphericalState state;
  std::size_t skipped_terms = 0;  ///< (record, k) pairs dropped because k > 2 j_n
  int distinct_axes = 0;
  double mean_two_j = 0.0;
};

/// Assigns c_n (summing to one, independent of the outcomes m_n).
/// voronoi: each distinct axis gets the share of axis space closer to it
/// than to any other axis (arc length on the half circle in-plane; solid
/// angle on the projective hemisphere for full-sphere data), split equally
/// among its records. uniform: c_n = 1/M.
void compute_weights(std::span<MeasurementRecord> records, ReconstructionMode mode,
                     WeightScheme scheme = WeightScheme::voronoi);

/// Damping of partial wave (k, q) for one record with total spin two_j:
/// exp(-sigma_N^2 k(k+1)/(2j(2j-1))) exp(-sigma_Omega^2 k(k+1)/4), times
/// exp(-q^2 sigma_phi(phi)^2 / 2) when phase noise is configured.
[[nodiscard]] double damping_factor(int k, int q, const Axis& axis, const NoiseModel& noise,
                                    int two_j);

/// alpha of the uniform smoothing rho_kq -> rho_kq exp(-alpha k(k+1)).
[[nodiscard]] double uniform_damping_alpha(const NoiseModel& noise, int two_j);
[[nodiscard]] SphericalState smooth(const SphericalState& s, double alpha);

/// Number of distinct axes; in-plane axes are compared modulo pi in phi.
[[nodiscard]] int count_distinct_axes(std::span<const MeasurementRecord> records,
                                      ReconstructionMode mode);
[[nodiscard]] int default_kmax(std::span<const MeasurementRecord> records,
                               ReconstructionMode mode, std::optional<int> user_cap);

[[nodiscard]] Reconstruction fbp_full(std::span<const MeasurementRecord> records,
                                      const ReconstructionConfig& config);
[[nodiscard]] Reconstruction fbp_inplane(std::span<const MeasurementRecord> records,
                                         const ReconstructionConfig& config);

/// Completes an even-parity (in-plane) reconstruction under the assumption
/// that the state lives on the northern hemisphere.
[[nodiscard]] SphericalState fold_northern(const SphericalState& s);

/// Dispatches on config.mode and applies fold_northern when requested.
[[nodiscard]] Reconstruction reconstruct(std::span<const MeasurementRecord> records,
                                         const ReconstructionConfig& config);

/// Single-record contribution Xi_{jm}(x), x = cos of the angle to the axis.
/// damping, if non-empty, multiplies partial wave k by damping[k].
[[nodiscard]] double xi_contribution(int two_j, int two_m, double x, int kmax,
                                     std::span<const double> damping = {});

/// W(theta, phi) assembled directly as sum_n c_n Xi_{j_n m_n}(cos eta_n),
/// undamped, truncated at kmax.
[[nodiscard]] double assemble_wigner(std::span<const MeasurementRecord> records, double theta,
                                     double phi, int kmax);

}  // namespace sphtomo
