#include "sphtomo/spin_state.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sphtomo/error.hpp"
#include "sphtomo/special_fn.hpp"

namespace sphtomo {

namespace {

constexpr double kPi = std::numbers::pi;

std::complex<double> mirror(int q, std::complex<double> v) {
  return (q % 2 == 0) ? std::conj(v) : -std::conj(v);
}

double sigma_n_damping(int two_j, int k, double sigma_N) {
  if (sigma_N == 0.0 || k == 0) return 1.0;
  if (two_j < 2) throw DomainError("imaging-noise damping needs j >= 1");
  const double jj = static_cast<double>(two_j) * (two_j - 1);
  return std::exp(-sigma_N * sigma_N * k * (k + 1.0) / jj);
}

}  // namespace

// ---------------------------------------------------------------------------

SphericalState::SphericalState(int two_j_ref, int kmax) : two_j_ref_(two_j_ref), kmax_(kmax) {
  if (two_j_ref < 0) throw DomainError("SphericalState: negative two_j_ref");
  if (kmax < 0 || kmax > two_j_ref)
    throw DomainError("SphericalState: need 0 <= kmax <= two_j_ref (kmax=" + std::to_string(kmax) +
                      ", two_j_ref=" + std::to_string(two_j_ref) + ")");
  coeffs_.assign(index(kmax + 1, 0), {0.0, 0.0});
}

std::complex<double> SphericalState::operator()(int k, int q) const {
  if (k < 0 || k > kmax_ || std::abs(q) > k) throw DomainError("SphericalState: (k, q) out of range");
  const auto v = coeffs_[index(k, std::abs(q))];
  return q >= 0 ? v : mirror(q, v);
}

void SphericalState::set(int k, int q, std::complex<double> value) {
  if (k < 0 || k > kmax_ || std::abs(q) > k) throw DomainError("SphericalState: (k, q) out of range");
  if (q == 0) {
    if (std::abs(value.imag()) > 1e-9 * std::max(1.0, std::abs(value)))
      throw DomainError("SphericalState: rho_k0 must be real");
    value = {value.real(), 0.0};
  }
  coeffs_[index(k, std::abs(q))] = q >= 0 ? value : mirror(q, value);
}

void SphericalState::add(int k, int q, std::complex<double> value) {
  set(k, q, (*this)(k, q) + value);
}

SphericalState SphericalState::truncated(int kmax) const {
  if (kmax > kmax_) throw DomainError("SphericalState::truncated: kmax exceeds stored kmax");
  SphericalState out(two_j_ref_, kmax);
  std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
  return out;
}

void SphericalState::set_two_j_ref(int two_j_ref) {
  if (two_j_ref < kmax_) throw DomainError("SphericalState: two_j_ref below kmax");
  two_j_ref_ = two_j_ref;
}

// ---------------------------------------------------------------------------

DickeState::DickeState(int two_j_, Eigen::MatrixXcd matrix_)
    : two_j(two_j_), matrix(std::move(matrix_)) {
  if (two_j < 0) throw DomainError("DickeState: negative two_j");
  if (matrix.rows() != two_j + 1 || matrix.cols() != two_j + 1)
    throw DomainError("DickeState: matrix dimension must be 2j+1");
}

bool DickeState::is_hermitian(double tol) const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------

WignerGrid::WignerGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 2 || n_phi < 2) throw DomainError("WignerGrid: grid dimensions must be >= 2");
  values_.assign(static_cast<std::size_t>(n_theta) * n_phi, 0.0);
  theta_weights_.resize(static_cast<std::size_t>(n_theta));
  for (int i = 0; i < n_theta; ++i) {
    double s = 0.0;
    for (int l = 1; l <= n_theta / 2; ++l)
      s += std::cos(2.0 * l * theta(i)) / (4.0 * l * l - 1.0);
    theta_weights_[static_cast<std::size_t>(i)] = (2.0 / n_theta) * (1.0 - 2.0 * s);
  }
}

double WignerGrid::theta(int i) const noexcept { return (i + 0.5) * kPi / n_theta_; }
double WignerGrid::phi(int l) const noexcept { return (l + 0.5) * 2.0 * kPi / n_phi_; }

double WignerGrid::weight(int i, int /*l*/) const noexcept {
  return theta_weights_[static_cast<std::size_t>(i)] * 2.0 * kPi / n_phi_;
}

// ---------------------------------------------------------------------------

SphericalState dicke_to_spherical(const DickeState& d, int kmax) {
  if (kmax < 0 || kmax > d.two_j) throw DomainError("dicke_to_spherical: need 0 <= kmax <= 2j");
  SphericalState s(d.two_j, kmax);
  const int two_j = d.two_j;
  for (int k = 0; k <= kmax; ++k) {
    for (int q = 0; q <= k; ++q) {
      std::complex<double> sum{0.0, 0.0};
      for (int two_m = -two_j; two_m <= two_j; two_m += 2) {
        const int two_mp = two_m - 2 * q;
        if (two_mp < -two_j) continue;
        sum += d.at(two_m, two_mp) * t_coefficient(two_j, two_m, two_mp, k, q);
      }
      s.set(k, q, sum);
    }
  }
  return s;
}

DickeState spherical_to_dicke(const SphericalState& s) {
  const int two_j = s.two_j_ref();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(two_j + 1, two_j + 1);
  for (int two_m = -two_j; two_m <= two_j; two_m += 2) {
    for (int two_mp = -two_j; two_mp <= two_j; two_mp += 2) {
      const int q = (two_m - two_mp) / 2;
      std::complex<double> sum{0.0, 0.0};
      for (int k = std::abs(q); k <= s.kmax(); ++k)
        sum += s(k, q) * t_coefficient(two_j, two_m, two_mp, k, q);
      m(DickeState::index(two_j, two_m), DickeState::index(two_j, two_mp)) = sum;
    }
  }
  return DickeState(two_j, std::move(m));
}

// ---------------------------------------------------------------------------

namespace {

// a_q(theta) = sum_k rho_kq Ybar_k^q(cos theta), q = 0 ... kmax
std::vector<std::complex<double>> azimuthal_amplitudes(const SphericalState& s,
                                                       const NormalizedLegendreTable& table) {
  std::vector<std::complex<double>> a(static_cast<std::size_t>(s.kmax()) + 1, {0.0, 0.0});
  const auto coeffs = s.data();
  for (int k = 0; k <= s.kmax(); ++k)
    for (int q = 0; q <= k; ++q) a[static_cast<std::size_t>(q)] += coeffs[SphericalState::index(k, q)] * table(k, q);
  return a;
}

double synthesize(std::span<const std::complex<double>> a, double phi) {
  double w = a[0].real();
  for (std::size_t q = 1; q < a.size(); ++q) {
    const std::complex<double> e = std::polar(1.0, static_cast<double>(q) * phi);
    w += 2.0 * (a[q] * e).real();
  }
  return w;
}

}  // namespace

double wigner_eval(const SphericalState& s, double theta, double phi) {
  const auto table = NormalizedLegendreTable::from_theta(s.kmax(), theta);
  const auto a = azimuthal_amplitudes(s, table);
  return synthesize(a, phi);
}

WignerGrid wigner_grid(const SphericalState& s, int n_theta, int n_phi) {
  WignerGrid grid(n_theta, n_phi);
  const int kmax = s.kmax();
  // e^{i q phi_l} is shared by every row
  std::vector<std::complex<double>> phase(static_cast<std::size_t>(n_phi) * (kmax + 1));
  for (int l = 0; l < n_phi; ++l)
    for (int q = 0; q <= kmax; ++q)
      phase[static_cast<std::size_t>(l) * (kmax + 1) + q] = std::polar(1.0, q * grid.phi(l));

  for (int i = 0; i < n_theta; ++i) {
    const auto table = NormalizedLegendreTable::from_theta(kmax, grid.theta(i));
    const auto a = azimuthal_amplitudes(s, table);
    for (int l = 0; l < n_phi; ++l) {
      const auto* e = &phase[static_cast<std::size_t>(l) * (kmax + 1)];
      double w = a[0].real();
      for (int q = 1; q <= kmax; ++q) w += 2.0 * (a[static_cast<std::size_t>(q)] * e[q]).real();
      grid.at(i, l) = w;
    }
  }
  return grid;
}

std::array<double, 3> spin_expectation_from_grid(const WignerGrid& grid, int two_j) {
  const double j = 0.5 * two_j;
  const double pref = std::sqrt(j * (j + 1.0) * (2.0 * j + 1.0) / (4.0 * kPi));
  return {
      pref * grid.integrate([](double t, double p) { return std::sin(t) * std::cos(p); }),
      pref * grid.integrate([](double t, double p) { return std::sin(t) * std::sin(p); }),
      pref * grid.integrate([](double t, double) { return std::cos(t); }),
  };
}

// ---------------------------------------------------------------------------

SphericalState coherent_state(int two_j, double theta0, double phi0, double sigma_N, int kmax) {
  if (!(theta0 >= 0.0 && theta0 <= kPi)) throw DomainError("coherent_state: theta0 outside [0, pi]");
  if (!(sigma_N >= 0.0)) throw DomainError("coherent_state: sigma_N must be non-negative");
  SphericalState s(two_j, kmax);
  const TauTable tau(two_j, kmax);
  const auto table = NormalizedLegendreTable::from_theta(kmax, theta0);
  for (int k = 0; k <= kmax; ++k) {
    const double pole = tau(k, two_j) * sigma_n_damping(two_j, k, sigma_N);
    const double norm = std::sqrt(4.0 * kPi / (2.0 * k + 1.0));
    for (int q = 0; q <= k; ++q) {
      // D^k_{q0}(phi0, theta0, 0) = sqrt(4pi/(2k+1)) Ybar_k^q e^{-i q phi0}
      s.set(k, q, std::polar(norm * table(k, q) * pole, -q * phi0));
    }
  }
  return s;
}

SphericalState dicke_basis_state(int two_j, int two_m, int kmax) {
  SpinLabel{two_j, two_m}.validate();
  SphericalState s(two_j, kmax);
  const TauTable tau(two_j, kmax);
  for (int k = 0; k <= kmax; ++k) s.set(k, 0, tau(k, two_m));
  return s;
}

SphericalState mixed_state(int two_j, int kmax) {
  SphericalState s(two_j, kmax);
  s.set(0, 0, 1.0 / std::sqrt(two_j + 1.0));
  return s;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd wigner_small_d(int two_j, double beta) {
  if (two_j < 0) throw DomainError("wigner_small_d: negative two_j");
  const double c = std::cos(0.5 * beta);
  const double s = std::sin(0.5 * beta);
  // d^{1/2}_{s's}, index 0 -> -1/2, 1 -> +1/2
  const double half[2][2] = {{c, s}, {-s, c}};

  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(1, 1);
  for (int tj = 1; tj <= two_j; ++tj) {
    const int n = tj + 1;
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n, n);
    const auto coupling = [tj](int two_m, int spin) {  // spin: 0 -> -1/2, 1 -> +1/2
      return spin == 1 ? std::sqrt((tj + two_m) / (2.0 * tj)) : std::sqrt((tj - two_m) / (2.0 * tj));
    };
    for (int a = 0; a < n; ++a) {
      const int two_mp = 2 * a - tj;
      for (int b = 0; b < n; ++b) {
        const int two_m = 2 * b - tj;
        double sum = 0.0;
        for (int sp = 0; sp < 2; ++sp) {
          const int child_mp = two_mp - (2 * sp - 1);  // m' - s'
          if (std::abs(child_mp) > tj - 1) continue;
          const double cp = coupling(two_mp, sp);
          for (int sb = 0; sb < 2; ++sb) {
            const int child_m = two_m - (2 * sb - 1);
            if (std::abs(child_m) > tj - 1) continue;
            sum += cp * coupling(two_m, sb) * d((child_mp + tj - 1) / 2, (child_m + tj - 1) / 2) *
                   half[sp][sb];
          }
        }
        next(a, b) = sum;
      }
    }
    d = std::move(next);
  }
  return d;
}

DickeState oat_squeezed_dicke(int two_j, double chi) {
  if (two_j > 400) throw DomainError("oat_squeezed_state: two_j > 400 is beyond the desk-scale fixture");
  if (two_j < 0) throw DomainError("oat_squeezed_state: negative two_j");
  const int n = two_j + 1;
  const Eigen::MatrixXd to_x = wigner_small_d(two_j, 0.5 * kPi);
  const Eigen::VectorXcd psi = to_x.col(n - 1).cast<std::complex<double>>();  // R_y(pi/2)|j,j>

  Eigen::VectorXcd twisted = psi;
  for (int a = 0; a < n; ++a) {
    const double m = 0.5 * (2 * a - two_j);
    twisted(a) *= std::polar(1.0, -chi * m * m);
  }
  const Eigen::MatrixXcd back = wigner_small_d(two_j, -0.5 * kPi).cast<std::complex<double>>();
  const Eigen::VectorXcd rotated = back * twisted;
  return DickeState(two_j, rotated * rotated.adjoint());
}

SphericalState oat_squeezed_state(int two_j, double chi, int kmax) {
  return dicke_to_spherical(oat_squeezed_dicke(two_j, chi), kmax);
}

}  // namespace sphtomo
