#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sphtomo {

/// Spherical-harmonic coefficients rho_kq of a spin-j Wigner function,
///   W(theta, phi) = sum_{k <= kmax} sum_q rho_kq Y_kq(theta, phi).
///
/// Only q >= 0 is stored; negative q follow from the reality condition
/// rho_{k,-q} = (-1)^q conj(rho_kq), so W is real by construction and
/// rho_k0 is real for every k.
class SphericalState {
 public:
  SphericalState() = default;
  SphericalState(int two_j_ref, int kmax);

  [[nodiscard]] int two_j_ref() const noexcept { return two_j_ref_; }
  [[nodiscard]] int kmax() const noexcept { return kmax_; }
  [[nodiscard]] double j_ref() const noexcept { return 0.5 * two_j_ref_; }

  /// rho_kq for any |q| <= k <= kmax.
  [[nodiscard]] std::complex<double> operator()(int k, int q) const;
  /// Sets rho_kq (and thereby rho_{k,-q}). For q = 0 the imaginary part
  /// must vanish to rounding; it is dropped.
  void set(int k, int q, std::complex<double> value);
  void add(int k, int q, std::complex<double> value);

  /// Stored q >= 0 coefficients, index k(k+1)/2 + q.
  [[nodiscard]] std::span<const std::complex<double>> data() const noexcept { return coeffs_; }
  [[nodiscard]] std::span<std::complex<double>> data() noexcept { return coeffs_; }
  [[nodiscard]] static std::size_t index(int k, int q) noexcept {
    return static_cast<std::size_t>(k) * (k + 1) / 2 + static_cast<std::size_t>(q);
  }

  /// Copy keeping only k <= kmax.
  [[nodiscard]] SphericalState truncated(int kmax) const;
  void set_two_j_ref(int two_j_ref);

 private:
  int two_j_ref_ = 0;
  int kmax_ = 0;
  std::vector<std::complex<double>> coeffs_;
};

/// Density matrix in the Dicke basis |j,m>, rows/columns ordered m = -j ... +j.
struct DickeState {
  int two_j = 0;
  Eigen::MatrixXcd matrix;

  DickeState() = default;
  DickeState(int two_j, Eigen::MatrixXcd matrix);

  [[nodiscard]] static int index(int two_j, int two_m) noexcept { return (two_m + two_j) / 2; }
  [[nodiscard]] std::complex<double> at(int two_m, int two_mp) const {
    return matrix(index(two_j, two_m), index(two_j, two_mp));
  }
  [[nodiscard]] bool is_hermitian(double tol = 1e-12) const;
};

/// Wigner function sampled on a latitude-longitude grid at cell centers:
/// theta_i = (i + 1/2) pi / n_theta, phi_l = (l + 1/2) 2 pi / n_phi.
class WignerGrid {
 public:
  WignerGrid(int n_theta, int n_phi);

  [[nodiscard]] int n_theta() const noexcept { return n_theta_; }
  [[nodiscard]] int n_phi() const noexcept { return n_phi_; }
  [[nodiscard]] double theta(int i) const noexcept;
  [[nodiscard]] double phi(int l) const noexcept;
  [[nodiscard]] double& at(int i, int l) noexcept {
    return values_[static_cast<std::size_t>(i) * n_phi_ + l];
  }
  [[nodiscard]] double at(int i, int l) const noexcept {
    return values_[static_cast<std::size_t>(i) * n_phi_ + l];
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// Quadrature weight of node (i, l) for integrals over the sphere.
  /// Fejer's first rule in cos(theta) (its nodes are exactly the cell
  /// centers) times the uniform rule in phi; band-limited integrands of
  /// degree < n_theta, n_phi are integrated exactly.
  [[nodiscard]] double weight(int i, int l) const noexcept;
  /// \int W f dOmega for f(theta, phi) evaluated at the nodes.
  template <typename F>
  [[nodiscard]] double integrate(F&& f) const {
    double sum = 0.0;
    for (int i = 0; i < n_theta_; ++i)
      for (int l = 0; l < n_phi_; ++l) sum += weight(i, l) * at(i, l) * f(theta(i), phi(l));
    return sum;
  }
  [[nodiscard]] double integral() const {
    return integrate([](double, double) { return 1.0; });
  }

 private:
  int n_theta_;
  int n_phi_;
  std::vector<double> theta_weights_;
  std::vector<double> values_;
};

[[nodiscard]] SphericalState dicke_to_spherical(const DickeState& d, int kmax);
[[nodiscard]] DickeState spherical_to_dicke(const SphericalState& s);

[[nodiscard]] double wigner_eval(const SphericalState& s, double theta, double phi);
[[nodiscard]] WignerGrid wigner_grid(const SphericalState& s, int n_theta, int n_phi);

/// {<S_x>, <S_y>, <S_z>} from the center of mass of a sampled Wigner function.
[[nodiscard]] std::array<double, 3> spin_expectation_from_grid(const WignerGrid& grid, int two_j);

/// Coherent state along (theta0, phi0), with the imaging-noise damping
/// exp(-sigma_N^2 k(k+1) / (2j(2j-1))) applied to each partial wave.
[[nodiscard]] SphericalState coherent_state(int two_j, double theta0, double phi0,
                                            double sigma_N, int kmax);
/// Dicke state |j,m><j,m|: rho_kq = delta_q0 tau_k^{j,m}.
[[nodiscard]] SphericalState dicke_basis_state(int two_j, int two_m, int kmax);
/// Maximally mixed state: only rho_00 = (2j+1)^{-1/2}.
[[nodiscard]] SphericalState mixed_state(int two_j, int kmax);

/// Wigner small-d matrix d^j_{m'm}(beta), built by coupling spin-1/2 factors
/// one at a time. Indices ordered m = -j ... +j.
[[nodiscard]] Eigen::MatrixXd wigner_small_d(int two_j, double beta);

/// One-axis-twisted state (test fixture): coherent state along +x, twisted
/// by exp(-i chi J_z^2), then rotated so the mean spin points along +z.
/// The squeezed and anti-squeezed axes lie in the xy plane.
[[nodiscard]] DickeState oat_squeezed_dicke(int two_j, double chi);
[[nodiscard]] SphericalState oat_squeezed_state(int two_j, double chi, int kmax);

}  // namespace sphtomo
