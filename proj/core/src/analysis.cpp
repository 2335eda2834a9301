#include "sphtomo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "sphtomo/error.hpp"
#include "sphtomo/forward_model.hpp"
#include "sphtomo/special_fn.hpp"

namespace sphtomo {

namespace {

constexpr double kPi = std::numbers::pi;

double rising(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x + i;
  return r;
}

// a_k = sum_q conj(D^k_{q0}(phi, theta, 0)) rho_kq
double axis_component(const SphericalState& s, const NormalizedLegendreTable& t, int k, double phi) {
  if (k > s.kmax()) return 0.0;
  double w = s(k, 0).real() * t(k, 0);
  for (int q = 1; q <= k; ++q) w += 2.0 * (s(k, q) * std::polar(t(k, q), q * phi)).real();
  return std::sqrt(4.0 * kPi / (2.0 * k + 1.0)) * w;
}

std::optional<double> to_db(double v, double sigma_N, double v_coh) {
  const double arg = (v - 0.5 * sigma_N * sigma_N) / v_coh;
  if (!(arg > 0.0) || !std::isfinite(arg)) return std::nullopt;
  return 10.0 * std::log10(arg);
}

}  // namespace

std::vector<double> power_spectrum(const SphericalState& s) {
  std::vector<double> c(static_cast<std::size_t>(s.kmax()) + 1, 0.0);
  for (int k = 0; k <= s.kmax(); ++k) {
    double sum = std::norm(s(k, 0));
    for (int q = 1; q <= k; ++q) sum += 2.0 * std::norm(s(k, q));
    c[static_cast<std::size_t>(k)] = sum / (2.0 * k + 1.0);
  }
  return c;
}

Moments moments(const SphericalState& s, double theta, double phi) {
  const double j = s.j_ref();
  const double two_j = s.two_j_ref();
  const auto t = NormalizedLegendreTable::from_theta(std::min(2, s.kmax()), theta);
  Moments m;
  m.mean_m = std::sqrt(rising(two_j, 3) / 12.0) * axis_component(s, t, 1, phi);
  m.mean_m2 = j * (j + 1.0) * std::sqrt(two_j + 1.0) / 3.0 * s(0, 0).real() +
              std::sqrt(rising(two_j - 1.0, 5) / 180.0) * axis_component(s, t, 2, phi);
  return m;
}

double coherent_reference_variance(int two_j, double sigma_N) {
  if (two_j < 2) {
    if (sigma_N > 0.0) throw DomainError("coherent_reference_variance: needs j >= 1 with imaging noise");
    return 0.5 * 0.5 * two_j;  // j = 0 or 1/2: exactly j/2
  }
  const double j = 0.5 * two_j;
  const double n = two_j * (two_j - 1.0);
  return j * (j + 1.0) / 3.0 - j * (two_j - 1.0) / 6.0 * std::exp(-6.0 * sigma_N * sigma_N / n);
}

GaussianFit gaussian_fit(std::span<const double> p) {
  if (p.size() < 5) throw ValidationError("gaussian_fit: need at least 5 points");
  const std::size_t n = p.size();
  const double j = 0.5 * static_cast<double>(n - 1);
  const auto mval = [j](std::size_t i) { return static_cast<double>(i) - j; };

  // initial guess from the positive part
  double w = 0.0, mu = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::max(p[i], 0.0);
    w += v;
    mu += v * mval(i);
    peak = std::max(peak, p[i]);
  }
  GaussianFit fit;
  if (!(w > 0.0)) return fit;
  mu /= w;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += std::max(p[i], 0.0) * (mval(i) - mu) * (mval(i) - mu);
  var = std::max(var / w, 0.25);

  Eigen::Vector3d x(peak, mu, var);
  const auto cost_at = [&](const Eigen::Vector3d& y) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = mval(i) - y[1];
      const double r = y[0] * std::exp(-d * d / (2.0 * y[2])) - p[i];
      c += r * r;
    }
    return c;
  };

  double cost = cost_at(x);
  double lambda = 1e-3;
  bool converged = false;
  int it = 0;
  for (; it < 200 && !converged; ++it) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = mval(i) - x[1];
      const double g = std::exp(-d * d / (2.0 * x[2]));
      const double r = x[0] * g - p[i];
      const Eigen::Vector3d row(g, x[0] * g * d / x[2], x[0] * g * d * d / (2.0 * x[2] * x[2]));
      jtj += row * row.transpose();
      jtr += row * r;
    }
    // Levenberg steps until one lowers the cost or damping saturates
    while (true) {
      Eigen::Matrix3d a = jtj;
      for (int c = 0; c < 3; ++c) a(c, c) += lambda * std::max(jtj(c, c), 1e-300);
      const Eigen::Vector3d step = a.ldlt().solve(-jtr);
      const Eigen::Vector3d trial = x + step;
      const double trial_cost = trial[2] > 0.0 ? cost_at(trial) : std::numeric_limits<double>::infinity();
      if (step.allFinite() && trial_cost <= cost) {
        // the centre is measured against the width, since it may sit at zero
        const Eigen::Vector3d scale(std::abs(trial[0]), std::sqrt(trial[2]), trial[2]);
        double rel = 0.0;
        for (int c = 0; c < 3; ++c) rel = std::max(rel, std::abs(step[c]) / std::max(scale[c], 1e-300));
        x = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        converged = rel < 1e-9;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16) {
        // no descent direction left: x is a local minimum to working precision
        converged = true;
        break;
      }
    }
  }
  fit.amplitude = x[0];
  fit.mean = x[1];
  fit.variance = x[2];
  fit.iterations = it;
  fit.ok = converged && x[2] > 0.0 && x.allFinite();
  return fit;
}

SqueezingReport squeezing_scan(const SphericalState& s, std::span<const double> phis, double sigma_N,
                               double j_mean) {
  if (s.kmax() < 2) throw ValidationError("squeezing_scan: needs kmax >= 2");
  if (!(j_mean > 0.0)) throw ValidationError("squeezing_scan: mean spin must be positive");
  if (phis.empty()) throw ValidationError("squeezing_scan: no azimuths given");

  SqueezingReport report;
  report.v_coh = 0.5 * j_mean;
  report.sigma_N = sigma_N;
  report.variance_curve.resize(phis.size());
  const Projector proj(s);
  detail::parallel_for(phis.size(), [&](std::size_t i) {
    auto& pt = report.variance_curve[i];
    pt.phi = phis[i];
    pt.v_direct = moments(s, 0.5 * kPi, pt.phi).variance();
    const auto p = proj.probabilities(0.5 * kPi, pt.phi);
    GaussianFit fit;
    if (p.size() >= 5) fit = gaussian_fit(p);
    pt.fit_ok = fit.ok;
    pt.v_fit = fit.ok ? fit.variance : pt.v_direct;
    pt.db_direct = to_db(pt.v_direct, sigma_N, report.v_coh);
    pt.db_fit = to_db(pt.v_fit, sigma_N, report.v_coh);
  });

  std::size_t best = 0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const auto& pt = report.variance_curve[i];
    if (!pt.fit_ok) ++report.failed_fits;
    const auto& b = report.variance_curve[best];
    if (pt.v_fit < b.v_fit || (pt.v_fit == b.v_fit && std::abs(pt.phi) < std::abs(b.phi))) best = i;
  }
  const auto& b = report.variance_curve[best];
  report.phi_s = b.phi;
  report.v_min = b.v_fit;
  report.squeezing_db = b.db_fit;
  report.squeezing_db_direct = b.db_direct;
  return report;
}

std::vector<double> scan_azimuths(int n) {
  if (n < 1) throw ValidationError("scan_azimuths: need at least one azimuth");
  std::vector<double> phis(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) phis[static_cast<std::size_t>(i)] = -0.5 * kPi + i * kPi / n;
  return phis;
}

}  // namespace sphtomo
