#include "sphtomo/forward_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "parallel.hpp"
#include "sphtomo/error.hpp"

namespace sphtomo {

namespace {

constexpr double kPi = std::numbers::pi;

// SplitMix64 over a per-axis counter. Distributions are written out here so
// that a given seed yields the same records with any standard library.
class AxisStream {
 public:
  AxisStream(std::uint64_t seed, std::uint64_t axis)
      : state_(mix(seed ^ mix(axis + 0x9e3779b97f4a7c15ULL))) {}

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  std::uint64_t state_;
};

using Vec3 = std::array<double, 3>;

Vec3 direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Axis to_axis(const Vec3& v) {
  const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double z = std::clamp(v[2] / r, -1.0, 1.0);
  return {std::acos(z), std::atan2(v[1], v[0])};
}

// Clean, renormalized distribution ready for categorical sampling.
std::vector<double> sampling_distribution(const Projector& proj, double theta, double phi) {
  auto p = proj.probabilities(theta, phi);
  double total = 0.0;
  for (double& v : p) {
    if (v < -1e-8)
      throw ValidationError("sample_measurements: state has negative projection probability " +
                            std::to_string(v) + "; refusing to sample an unphysical state");
    if (v < 0.0) v = 0.0;
    total += v;
  }
  if (!(total > 0.0)) throw ValidationError("sample_measurements: projection probabilities sum to zero");
  double running = 0.0;
  for (double& v : p) {
    running += v / total;
    v = running;
  }
  p.back() = 1.0;
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------

void NoiseModel::validate() const {
  const auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError(std::string("noise model: ") + name + " must be finite and non-negative");
  };
  check(sigma_N, "sigma_N");
  check(sigma_Omega, "sigma_Omega");
  check(sigma_phi, "sigma_phi");
  check(sigma_ph_deg, "sigma_ph");
}

double NoiseModel::sigma_phi_at(double phi) const {
  switch (phase_kind) {
    case PhaseNoiseKind::none:
      return 0.0;
    case PhaseNoiseKind::constant:
      return sigma_phi;
    case PhaseNoiseKind::model: {
      const double wrapped = std::remainder(phi, 2.0 * kPi);  // (-pi, pi]
      const double amp = sigma_ph_deg * kPi / 180.0;
      const double scale = phase_form == PhaseModelForm::squared ? amp * amp : amp;
      return scale * std::sin(std::abs(wrapped)) / std::numbers::sqrt2;
    }
  }
  return 0.0;
}

void MeasurementRecord::validate() const {
  if (!std::isfinite(theta) || !std::isfinite(phi))
    throw ValidationError("measurement record: non-finite axis angle");
  if (!(theta >= -1e-12 && theta <= kPi + 1e-12))
    throw ValidationError("measurement record: theta outside [0, pi]");
  if (two_j < 0) throw ValidationError("measurement record: two_j must be non-negative");
  if (std::abs(two_m) > two_j)
    throw ValidationError("measurement record: |two_m| <= two_j violated (two_j=" +
                          std::to_string(two_j) + ", two_m=" + std::to_string(two_m) + ")");
  if ((two_j - two_m) % 2 != 0)
    throw ValidationError("measurement record: two_m must have the parity of two_j (two_j=" +
                          std::to_string(two_j) + ", two_m=" + std::to_string(two_m) + ")");
  if (weight && (!std::isfinite(*weight) || *weight < 0.0))
    throw ValidationError("measurement record: weight must be finite and non-negative");
}

std::vector<Axis> in_plane_axes(int count) {
  if (count < 1) throw ValidationError("in_plane_axes: need at least one axis");
  std::vector<Axis> axes(static_cast<std::size_t>(count));
  for (int a = 0; a < count; ++a) axes[static_cast<std::size_t>(a)] = {0.5 * kPi, a * kPi / count};
  return axes;
}

std::vector<Axis> hemisphere_axes(int count) {
  if (count < 1) throw ValidationError("hemisphere_axes: need at least one axis");
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Axis> axes(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (i + 0.5) / count;
    const double phi = std::remainder(i * golden, 2.0 * kPi);
    axes[static_cast<std::size_t>(i)] = {std::acos(z), phi < 0.0 ? phi + 2.0 * kPi : phi};
  }
  return axes;
}

// ---------------------------------------------------------------------------

Projector::Projector(const SphericalState& state)
    : state_(state), tau_(state.two_j_ref(), state.kmax()) {}

std::vector<double> Projector::probabilities(double theta, double phi) const {
  const int kmax = state_.kmax();
  const auto table = NormalizedLegendreTable::from_theta(kmax, theta);
  // a_k = sum_q conj(D^k_{q0}) rho_kq = sqrt(4pi/(2k+1)) sum_q rho_kq Y_kq
  std::vector<double> a(static_cast<std::size_t>(kmax) + 1, 0.0);
  const auto coeffs = state_.data();
  for (int k = 0; k <= kmax; ++k) {
    double w = coeffs[SphericalState::index(k, 0)].real() * table(k, 0);
    for (int q = 1; q <= k; ++q)
      w += 2.0 * (coeffs[SphericalState::index(k, q)] * std::polar(table(k, q), q * phi)).real();
    a[static_cast<std::size_t>(k)] = std::sqrt(4.0 * kPi / (2.0 * k + 1.0)) * w;
  }
  const int dim = tau_.dim();
  std::vector<double> p(static_cast<std::size_t>(dim), 0.0);
  for (int k = 0; k <= kmax; ++k) {
    const auto row = tau_.row(k);
    const double ak = a[static_cast<std::size_t>(k)];
    for (int i = 0; i < dim; ++i) p[static_cast<std::size_t>(i)] += ak * row[static_cast<std::size_t>(i)];
  }
  return p;
}

std::vector<double> projection_probabilities(const SphericalState& s, double theta, double phi) {
  return Projector(s).probabilities(theta, phi);
}

// ---------------------------------------------------------------------------

std::vector<MeasurementRecord> sample_measurements(const SphericalState& s,
                                                   std::span<const Axis> axes,
                                                   int shots_per_axis, const NoiseModel& noise,
                                                   std::uint64_t seed) {
  noise.validate();
  if (shots_per_axis < 1) throw ValidationError("sample_measurements: shots per axis must be >= 1");
  if (axes.empty()) throw ValidationError("sample_measurements: no axes given");

  const Projector proj(s);
  const int two_j = s.two_j_ref();
  const std::size_t shots = static_cast<std::size_t>(shots_per_axis);
  const std::size_t total = axes.size() * shots;
  const double weight = 1.0 / static_cast<double>(total);
  const bool jitter = noise.sigma_Omega > 0.0 || noise.has_phase_noise();
  const double pointing = noise.sigma_Omega / std::numbers::sqrt2;  // per tangent component
  const double number_sigma = noise.sigma_N;

  std::vector<MeasurementRecord> records(total);
  detail::parallel_for(axes.size(), [&](std::size_t a) {
    const Axis axis = axes[a];
    AxisStream rng(seed, a);
    const auto clean = sampling_distribution(proj, axis.theta, axis.phi);

    const Vec3 n = direction(axis.theta, axis.phi);
    const Vec3 e1{std::cos(axis.theta) * std::cos(axis.phi),
                  std::cos(axis.theta) * std::sin(axis.phi), -std::sin(axis.theta)};
    const Vec3 e2{-std::sin(axis.phi), std::cos(axis.phi), 0.0};
    const double sigma_az = noise.sigma_phi_at(axis.phi);

    for (std::size_t shot = 0; shot < shots; ++shot) {
      std::vector<double> jittered;
      const std::vector<double>* cdf = &clean;
      if (jitter) {
        Axis actual = axis;
        if (pointing > 0.0) {
          const double g1 = pointing * rng.normal();
          const double g2 = pointing * rng.normal();
          actual = to_axis({n[0] + g1 * e1[0] + g2 * e2[0], n[1] + g1 * e1[1] + g2 * e2[1],
                            n[2] + g1 * e1[2] + g2 * e2[2]});
        }
        if (sigma_az > 0.0) actual.phi += sigma_az * rng.normal();
        jittered = sampling_distribution(proj, actual.theta, actual.phi);
        cdf = &jittered;
      }
      const double u = rng.uniform();
      const auto it = std::upper_bound(cdf->begin(), cdf->end(), u);
      const int idx = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf->begin(), two_j));
      int rec_two_j = two_j;
      int rec_two_m = 2 * idx - two_j;

      if (number_sigma > 0.0) {
        // independent atom-number errors on both populations
        const int d_up = static_cast<int>(std::lround(number_sigma * rng.normal()));
        const int d_down = static_cast<int>(std::lround(number_sigma * rng.normal()));
        rec_two_j += d_up + d_down;
        rec_two_m += d_up - d_down;
        if (rec_two_j < 0) rec_two_j = (-rec_two_j) % 2;
        if (rec_two_m > rec_two_j) rec_two_m = rec_two_j;
        if (rec_two_m < -rec_two_j) rec_two_m = -rec_two_j;
      }
      auto& rec = records[a * shots + shot];
      rec.theta = axis.theta;
      rec.phi = axis.phi;
      rec.weight = weight;
      rec.two_j = rec_two_j;
      rec.two_m = rec_two_m;
    }
  });
  return records;
}

}  // namespace sphtomo
