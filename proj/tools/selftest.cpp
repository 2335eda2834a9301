// Quick consistency checks of an installed build against small independent
// oracles: Racah sums, orthogonality, round trips and exact-data recovery.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "commands.hpp"
#include "sphtomo/analysis.hpp"
#include "sphtomo/special_fn.hpp"
#include "sphtomo/spin_state.hpp"
#include "sphtomo/tomography.hpp"

namespace sphtomo::cli {

namespace {

constexpr double kPi = std::numbers::pi;

long double fact(int n) { return std::tgamma(static_cast<long double>(n) + 1.0L); }

// <j1 m1; j2 m2 | J M> by the Racah formula, doubled arguments
double racah_cg(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  if (tm1 + tm2 != tM || std::abs(tM) > tJ) return 0.0;
  if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2 || (tj1 + tj2 + tJ) % 2) return 0.0;
  const int a = (tj1 + tj2 - tJ) / 2, b = (tj1 - tj2 + tJ) / 2, c = (-tj1 + tj2 + tJ) / 2;
  const int d = (tj1 + tj2 + tJ) / 2 + 1;
  const long double pre =
      std::sqrt((tJ + 1.0L) * fact(a) * fact(b) * fact(c) / fact(d) * fact((tj1 + tm1) / 2) *
                fact((tj1 - tm1) / 2) * fact((tj2 + tm2) / 2) * fact((tj2 - tm2) / 2) *
                fact((tJ + tM) / 2) * fact((tJ - tM) / 2));
  long double sum = 0.0L;
  for (int z = 0; z <= d; ++z) {
    const int e[6] = {z, a - z, (tj1 - tm1) / 2 - z, (tj2 + tm2) / 2 - z, (tJ - tj2 + tm1) / 2 + z,
                      (tJ - tj1 - tm2) / 2 + z};
    if (std::any_of(std::begin(e), std::end(e), [](int v) { return v < 0; })) continue;
    long double den = 1.0L;
    for (int v : e) den *= fact(v);
    sum += (z % 2 ? -1.0L : 1.0L) / den;
  }
  return static_cast<double>(pre * sum);
}

struct Check {
  std::string name;
  double tol;
  std::function<double()> err;
};

double tau_vs_racah() {
  double err = 0.0;
  for (int tj = 0; tj <= 16; ++tj)
    for (int tm = -tj; tm <= tj; tm += 2)
      for (int k = 0; k <= tj; ++k) {
        const int sign = ((tj - tm) / 2) % 2 ? -1 : 1;
        err = std::max(err, std::abs(cg_tau({tj, tm}, k) - sign * racah_cg(tj, tm, tj, -tm, 2 * k, 0)));
      }
  return err;
}

double tau_orthogonality() {
  const int tj = 200;
  const TauTable t(tj, tj);
  double err = 0.0;
  for (int k = 0; k <= tj; k += 7)
    for (int kp = 0; kp <= tj; kp += 11) {
      double s = 0.0;
      for (int tm = -tj; tm <= tj; tm += 2) s += t(k, tm) * t(kp, tm);
      err = std::max(err, std::abs(s - (k == kp ? 1.0 : 0.0)));
    }
  return err;
}

double dicke_round_trip() {
  const int tj = 7;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(tj + 1, tj + 1);
  for (int r = 0; r <= tj; ++r)
    for (int c = 0; c <= tj; ++c) a(r, c) = {g(rng), g(rng)};
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace().real();
  const DickeState d(tj, rho);
  const auto back = spherical_to_dicke(dicke_to_spherical(d, tj));
  return (back.matrix - rho).cwiseAbs().maxCoeff();
}

double coherent_variance() {
  const auto s = coherent_state(40, 0.0, 0.0, 0.0, 40);
  double err = 0.0;
  for (double phi : {-1.2, 0.0, 0.4, 2.0}) err = std::max(err, std::abs(moments(s, kPi / 2, phi).variance() - 10.0));
  return err;
}

double inplane_recovery() {
  const int tj = 10, axes = 16;
  const auto truth = coherent_state(tj, 1.1, 0.3, 0.0, tj);
  std::vector<MeasurementRecord> rec;
  for (int a = 0; a < axes; ++a) {
    const double phi = a * kPi / axes;
    const auto p = projection_probabilities(truth, kPi / 2, phi);
    for (int i = 0; i <= tj; ++i)
      rec.push_back({kPi / 2, phi, std::max(0.0, p[static_cast<std::size_t>(i)]) / axes, tj, 2 * i - tj});
  }
  ReconstructionConfig cfg;
  cfg.mode = ReconstructionMode::in_plane;
  const auto r = reconstruct(rec, cfg).state;
  double err = 0.0;
  for (int k = 0; k <= r.kmax(); ++k)
    for (int q = -k; q <= k; ++q)
      if ((k + q) % 2 == 0) err = std::max(err, std::abs(r(k, q) - truth(k, q)));
  return err;
}

double overlap_quadrature() {
  // 2 \int_north conj(Y_kq) Y_k'q dOmega by composite Simpson in cos(theta)
  const int n = 20000;
  double err = 0.0;
  for (int q = 0; q <= 8; ++q)
    for (int k = q; k <= 8; ++k)
      for (int kp = q; kp <= 8; ++kp) {
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
          const double x = static_cast<double>(i) / n;
          const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
          const double th = std::acos(x);
          s += w * (rot_element(k, q, th, 0.0) * std::conj(rot_element(kp, q, th, 0.0))).real();
        }
        s *= std::sqrt((2.0 * k + 1.0) * (2.0 * kp + 1.0)) / (3.0 * n);
        err = std::max(err, std::abs(s - hemi_overlap(k, kp, q)));
      }
  return err;
}

}  // namespace

int run_selftest() {
  const std::vector<Check> checks{
      {"tau against Racah sums (2j <= 16)", 1e-12, tau_vs_racah},
      {"tau orthogonality (j = 100)", 1e-10, tau_orthogonality},
      {"Dicke <-> spherical round trip", 1e-12, dicke_round_trip},
      {"coherent perpendicular variance j/2", 1e-10, coherent_variance},
      {"in-plane recovery from exact data", 1e-10, inplane_recovery},
      {"hemisphere overlaps against quadrature", 1e-8, overlap_quadrature},
  };
  int failed = 0;
  for (const auto& c : checks) {
    const double e = c.err();
    const bool ok = e <= c.tol;
    failed += ok ? 0 : 1;
    fmt::print("{} {:<40} max err {:.2e} (tol {:.0e})\n", ok ? "PASS" : "FAIL", c.name, e, c.tol);
  }
  fmt::print("{}/{} checks passed\n", checks.size() - static_cast<std::size_t>(failed), checks.size());
  return failed;
}

}  // namespace sphtomo::cli
