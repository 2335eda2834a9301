#pragma once

// Angular special functions for spin-j tomography.
//
// Spins and projections are carried as doubled integers (two_j = 2j,
// two_m = 2m) so that half-integer labels stay exact. Every factorial-like
// quantity is evaluated in the log domain; this is what keeps the
// coefficient recursions usable at j in the hundreds and beyond.
//
// Phase conventions: Condon-Shortley throughout. Spherical harmonics are
//   Y_kq(theta, phi) = Ybar_k^q(cos theta) e^{i q phi},
// with Ybar the fully normalized associated Legendre function, and the
// rotation elements are D^k_{q0}(phi, theta, 0) = sqrt(4pi/(2k+1)) Y_kq^*.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sphtomo {

/// Total spin and projection as doubled integers.
struct SpinLabel {
  int two_j = 0;
  int two_m = 0;

  [[nodiscard]] double j() const noexcept { return 0.5 * two_j; }
  [[nodiscard]] double m() const noexcept { return 0.5 * two_m; }
  [[nodiscard]] bool valid() const noexcept;
  /// Throws DomainError unless |two_m| <= two_j and the parities agree.
  void validate() const;
};

/// Partial-wave index (k, q) with |q| <= k.
struct PartialWaveIndex {
  int k = 0;
  int q = 0;
};

// ---------------------------------------------------------------------------
// log-domain helpers

/// ln Gamma(x) for x > 0, reentrant.
[[nodiscard]] double log_gamma(double x);
/// ln n! for n >= 0.
[[nodiscard]] double log_factorial(int n);
/// ln n!! for n >= -1 (with (-1)!! = 0!! = 1).
[[nodiscard]] double log_double_factorial(int n);

// ---------------------------------------------------------------------------
// Clebsch-Gordan coefficients

/// tau_k^{j,m} = (-1)^{j-m} <j,m; j,-m | k,0>, the coefficient that maps a
/// Dicke population onto the q = 0 partial wave. Seeded at m = j in the
/// log domain and recursed downward in m; negative m by reflection.
[[nodiscard]] double cg_tau(SpinLabel spin, int k);

/// <j1,m1; j2,m2 | J,M> from the Racah sum (all labels doubled).
/// Returns exactly 0 when M != m1 + m2 or the triangle rule fails.
[[nodiscard]] double cg_general(int two_j1, int two_m1, int two_j2, int two_m2,
                                int two_J, int two_M);

/// t_{kq}^{j m m'} = (-1)^{j-m-q} <j,m; j,-m' | k,q>; nonzero only for q = m - m'.
[[nodiscard]] double t_coefficient(int two_j, int two_m, int two_mp, int k, int q);

/// Table of tau_k^{j,m} for fixed j, all 0 <= k <= kmax and all m.
/// Immutable after construction; cheap to share between threads.
class TauTable {
 public:
  TauTable() = default;
  TauTable(int two_j, int kmax);

  [[nodiscard]] int two_j() const noexcept { return two_j_; }
  [[nodiscard]] int kmax() const noexcept { return kmax_; }
  [[nodiscard]] int dim() const noexcept { return two_j_ + 1; }

  /// tau_k^{j,m}; two_m must be a valid projection for this j.
  [[nodiscard]] double operator()(int k, int two_m) const noexcept {
    return values_[static_cast<std::size_t>(k) * dim() + (two_m + two_j_) / 2];
  }
  /// All m for one k, ordered m = -j ... +j.
  [[nodiscard]] std::span<const double> row(int k) const noexcept {
    return {values_.data() + static_cast<std::size_t>(k) * dim(),
            static_cast<std::size_t>(dim())};
  }

 private:
  int two_j_ = 0;
  int kmax_ = -1;
  std::vector<double> values_;
};

/// Writes tau_k^{j,m} for m = -j ... +j into out (size two_j + 1).
void cg_tau_column(int two_j, int k, std::span<double> out);

// ---------------------------------------------------------------------------
// Legendre functions and rotation elements

/// P_k(x) by upward recurrence. Throws DomainError for |x| > 1.
[[nodiscard]] double legendre_p(int k, double x);
/// P_0(x) ... P_kmax(x).
[[nodiscard]] std::vector<double> legendre_p_all(int kmax, double x);

/// Fully normalized associated Legendre values Ybar_k^q(x), 0 <= q <= k <= kmax,
/// such that Y_kq(theta, phi) = Ybar_k^q(cos theta) e^{i q phi}.
class NormalizedLegendreTable {
 public:
  NormalizedLegendreTable() = default;
  /// x = cos(theta); s = sin(theta) >= 0 is passed separately to keep
  /// full precision near the poles.
  NormalizedLegendreTable(int kmax, double x, double s);
  static NormalizedLegendreTable from_theta(int kmax, double theta);

  [[nodiscard]] int kmax() const noexcept { return kmax_; }
  [[nodiscard]] double operator()(int k, int q) const noexcept {
    return values_[static_cast<std::size_t>(k) * (k + 1) / 2 + q];
  }

 private:
  int kmax_ = -1;
  std::vector<double> values_;
};

/// Ybar_k^q(cos theta) for a single (k, q), q >= 0.
[[nodiscard]] double normalized_legendre(int k, int q, double theta);

/// D^k_{q0}(phi, theta, 0).
[[nodiscard]] std::complex<double> rot_element(int k, int q, double theta, double phi);

/// Gamma(a + 1/2) / Gamma(a). Throws DomainError for a <= 0.
[[nodiscard]] double pochhammer_half(double a);

/// Hemispherical overlap 2 \int_{north} Y_kq^* Y_k'q dOmega, closed form.
[[nodiscard]] double hemi_overlap(int k, int k_prime, int q);

}  // namespace sphtomo
