#include "sphtomo/tomography.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <limits>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <unordered_map>

#include "parallel.hpp"
#include "sphtomo/error.hpp"
#include "sphtomo/special_fn.hpp"

namespace sphtomo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAxisTolerance = 1e-9;
constexpr double kPlaneTolerance = 1e-6;
constexpr std::size_t kGroupsPerBlock = 64;

double wrap_half_turn(double phi) {
  double u = std::fmod(phi, kPi);
  if (u < 0.0) u += kPi;
  if (u >= kPi - kAxisTolerance) u = 0.0;
  return u;
}

struct AxisGroup {
  Axis axis;
  std::vector<std::size_t> members;
};

// Records sharing exactly the same (theta, phi), in order of first appearance.
std::vector<AxisGroup> group_by_axis(std::span<const MeasurementRecord> records) {
  struct KeyHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.first * 0x9e3779b97f4a7c15ULL ^ k.second);
    }
  };
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::size_t, KeyHash> index;
  std::vector<AxisGroup> groups;
  for (std::size_t n = 0; n < records.size(); ++n) {
    const auto key = std::make_pair(std::bit_cast<std::uint64_t>(records[n].theta),
                                    std::bit_cast<std::uint64_t>(records[n].phi));
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.push_back({{records[n].theta, records[n].phi}, {}});
    groups[it->second].members.push_back(n);
  }
  return groups;
}

using Vec3 = std::array<double, 3>;

Vec3 direction(const Axis& a) {
  return {std::sin(a.theta) * std::cos(a.phi), std::sin(a.theta) * std::sin(a.phi),
          std::cos(a.theta)};
}

// Distinct directions modulo sign (an axis and its opposite are the same
// measurement with m -> -m).
std::vector<Vec3> distinct_directions(std::span<const MeasurementRecord> records,
                                      std::vector<std::size_t>& owner) {
  std::vector<Vec3> dirs;
  owner.resize(records.size());
  for (std::size_t n = 0; n < records.size(); ++n) {
    const Vec3 v = direction({records[n].theta, records[n].phi});
    std::size_t found = dirs.size();
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const double dot = v[0] * dirs[d][0] + v[1] * dirs[d][1] + v[2] * dirs[d][2];
      if (std::abs(dot) > 1.0 - kAxisTolerance) {
        found = d;
        break;
      }
    }
    if (found == dirs.size()) dirs.push_back(v);
    owner[n] = found;
  }
  return dirs;
}

// Folded azimuths in [0, pi), merged within tolerance; owner[n] = index.
std::vector<double> distinct_azimuths(std::span<const MeasurementRecord> records,
                                      std::vector<std::size_t>& owner) {
  std::vector<double> folded(records.size());
  for (std::size_t n = 0; n < records.size(); ++n) folded[n] = wrap_half_turn(records[n].phi);
  std::vector<double> sorted = folded;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> unique;
  for (double u : sorted)
    if (unique.empty() || u - unique.back() > kAxisTolerance) unique.push_back(u);
  owner.resize(records.size());
  for (std::size_t n = 0; n < records.size(); ++n) {
    auto it = std::lower_bound(unique.begin(), unique.end(), folded[n] - kAxisTolerance);
    owner[n] = static_cast<std::size_t>(it - unique.begin());
  }
  return unique;
}

void require_weights(std::span<const MeasurementRecord> records) {
  if (records.empty()) throw ValidationError("reconstruction: no measurement records");
  for (std::size_t n = 0; n < records.size(); ++n) {
    records[n].validate();
    if (!records[n].weight)
      throw ValidationError("reconstruction: record " + std::to_string(n) +
                            " has no weight; assign weights first");
  }
}

int resolve_two_j_ref(std::span<const MeasurementRecord> records, const ReconstructionConfig& config,
                      int kmax, double& mean_two_j) {
  double sum = 0.0;
  for (const auto& r : records) sum += r.two_j;
  mean_two_j = sum / static_cast<double>(records.size());
  const int two_j_ref = config.two_j_ref ? *config.two_j_ref : static_cast<int>(std::lround(mean_two_j));
  if (two_j_ref < kmax)
    throw ValidationError("reconstruction: two_j_ref=" + std::to_string(two_j_ref) +
                          " is below kmax=" + std::to_string(kmax));
  return two_j_ref;
}

// Shared backprojection kernel. filter(k, q) multiplies each partial wave;
// table(group) supplies the normalized Legendre values at the group's axis.
template <typename Filter, typename TableFor>
SphericalState backproject(std::span<const MeasurementRecord> records, int kmax, int two_j_ref,
                           const NoiseModel& noise, bool use_phase_noise, Filter&& filter,
                           TableFor&& table_for, std::size_t& skipped) {
  const auto groups = group_by_axis(records);

  // per-j tables and imaging-noise damping, built before any threads start
  std::map<int, TauTable> tau;
  std::map<int, std::vector<double>> number_damp;
  const NoiseModel number_only{noise.sigma_N};
  skipped = 0;
  for (const auto& r : records) {
    if (!tau.contains(r.two_j)) {
      const int kr = std::min(kmax, r.two_j);
      tau.emplace(r.two_j, TauTable(r.two_j, kr));
      std::vector<double> d(static_cast<std::size_t>(kr) + 1);
      for (int k = 0; k <= kr; ++k)
        d[static_cast<std::size_t>(k)] = damping_factor(k, 0, {}, number_only, r.two_j);
      number_damp.emplace(r.two_j, std::move(d));
    }
    if (r.two_j < kmax) skipped += static_cast<std::size_t>(kmax - r.two_j);
  }

  std::vector<double> omega_damp(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k)
    omega_damp[static_cast<std::size_t>(k)] =
        std::exp(-noise.sigma_Omega * noise.sigma_Omega * k * (k + 1.0) / 4.0);

  const std::size_t ncoeff = SphericalState::index(kmax + 1, 0);
  const std::size_t nblocks = (groups.size() + kGroupsPerBlock - 1) / kGroupsPerBlock;
  std::vector<std::vector<detail::CompensatedSum>> block_sums(nblocks);

  detail::parallel_for(nblocks, [&](std::size_t b) {
    auto& acc = block_sums[b];
    acc.assign(2 * ncoeff, {});
    std::vector<detail::CompensatedSum> partial(static_cast<std::size_t>(kmax) + 1);
    const std::size_t g_end = std::min(groups.size(), (b + 1) * kGroupsPerBlock);
    for (std::size_t g = b * kGroupsPerBlock; g < g_end; ++g) {
      const auto& group = groups[g];
      std::fill(partial.begin(), partial.end(), detail::CompensatedSum{});
      for (std::size_t n : group.members) {
        const auto& r = records[n];
        const TauTable& t = tau.at(r.two_j);
        const auto& d = number_damp.at(r.two_j);
        const double c = *r.weight;
        const int kr = std::min(kmax, r.two_j);
        for (int k = 0; k <= kr; ++k)
          partial[static_cast<std::size_t>(k)].add(c * t(k, r.two_m) * d[static_cast<std::size_t>(k)]);
      }
      const NormalizedLegendreTable& ylm = table_for(group.axis);
      const double sigma_az = use_phase_noise ? noise.sigma_phi_at(group.axis.phi) : 0.0;
      for (int k = 0; k <= kmax; ++k) {
        const double bk = partial[static_cast<std::size_t>(k)].value() *
                          omega_damp[static_cast<std::size_t>(k)] *
                          std::sqrt(4.0 * kPi / (2.0 * k + 1.0));
        if (bk == 0.0) continue;
        for (int q = 0; q <= k; ++q) {
          const double f = filter(k, q);
          if (f == 0.0) continue;
          const double phase_damp = std::exp(-0.5 * q * q * sigma_az * sigma_az);
          const std::complex<double> v =
              std::polar(f * bk * ylm(k, q) * phase_damp, -q * group.axis.phi);
          const std::size_t i = SphericalState::index(k, q);
          acc[2 * i].add(v.real());
          acc[2 * i + 1].add(v.imag());
        }
      }
    }
  });

  SphericalState s(two_j_ref, kmax);
  auto out = s.data();
  for (std::size_t i = 0; i < ncoeff; ++i) {
    detail::CompensatedSum re;
    detail::CompensatedSum im;
    for (const auto& acc : block_sums) {
      re.add(acc[2 * i].value());
      im.add(acc[2 * i + 1].value());
    }
    out[i] = {re.value(), im.value()};
  }
  for (int k = 0; k <= kmax; ++k) out[SphericalState::index(k, 0)].imag(0.0);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

void compute_weights(std::span<MeasurementRecord> records, ReconstructionMode mode,
                     WeightScheme scheme) {
  if (records.empty()) throw ValidationError("compute_weights: no measurement records");
  const double total = static_cast<double>(records.size());
  if (scheme == WeightScheme::uniform) {
    for (auto& r : records) r.weight = 1.0 / total;
    return;
  }

  std::vector<std::size_t> owner;
  std::vector<double> share;  // fraction of axis space per distinct axis
  if (mode == ReconstructionMode::in_plane) {
    const auto az = distinct_azimuths(records, owner);
    const std::size_t a = az.size();
    share.resize(a);
    if (a == 1) {
      share[0] = 1.0;
    } else {
      for (std::size_t i = 0; i < a; ++i) {
        const double prev = i == 0 ? az[a - 1] - kPi : az[i - 1];
        const double next = i + 1 == a ? az[0] + kPi : az[i + 1];
        share[i] = 0.5 * (next - prev) / kPi;
      }
    }
  } else {
    const auto dirs = distinct_directions(records, owner);
    if (dirs.size() < 2)
      throw ValidationError("compute_weights: all axes coincide; no area partition in full-sphere mode");
    // Deterministic Fibonacci sampling of the sphere; each sample belongs to
    // the axis with the largest |cos| (antipodal points identified).
    const std::size_t samples = std::clamp<std::size_t>(256 * dirs.size(), 200000, 4000000);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    std::vector<std::size_t> counts(dirs.size(), 0);
    for (std::size_t i = 0; i < samples; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(samples);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double ph = golden * static_cast<double>(i);
      const double x = r * std::cos(ph);
      const double y = r * std::sin(ph);
      std::size_t best = 0;
      double best_dot = -1.0;
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        const double dot = std::abs(x * dirs[d][0] + y * dirs[d][1] + z * dirs[d][2]);
        if (dot > best_dot) {
          best_dot = dot;
          best = d;
        }
      }
      ++counts[best];
    }
    share.resize(dirs.size());
    for (std::size_t d = 0; d < dirs.size(); ++d)
      share[d] = static_cast<double>(counts[d]) / static_cast<double>(samples);
  }

  std::vector<std::size_t> members(share.size(), 0);
  for (std::size_t o : owner) ++members[o];
  double sum = 0.0;
  for (std::size_t n = 0; n < records.size(); ++n) {
    const double w = share[owner[n]] / static_cast<double>(members[owner[n]]);
    records[n].weight = w;
    sum += w;
  }
  for (auto& r : records) r.weight = *r.weight / sum;
}

double damping_factor(int k, int q, const Axis& axis, const NoiseModel& noise, int two_j) {
  const double kk = k * (k + 1.0);
  double d = 1.0;
  if (noise.sigma_N > 0.0 && k > 0) {
    if (two_j < 2) throw DomainError("damping_factor: imaging-noise damping needs j >= 1");
    d *= std::exp(-noise.sigma_N * noise.sigma_N * kk / (two_j * (two_j - 1.0)));
  }
  if (noise.sigma_Omega > 0.0) d *= std::exp(-noise.sigma_Omega * noise.sigma_Omega * kk / 4.0);
  if (noise.has_phase_noise() && q != 0) {
    const double s = noise.sigma_phi_at(axis.phi);
    d *= std::exp(-0.5 * q * q * s * s);
  }
  return d;
}

double uniform_damping_alpha(const NoiseModel& noise, int two_j) {
  double alpha = noise.sigma_Omega * noise.sigma_Omega / 4.0;
  if (noise.sigma_N > 0.0) {
    if (two_j < 2) throw DomainError("uniform_damping_alpha: imaging-noise damping needs j >= 1");
    alpha += noise.sigma_N * noise.sigma_N / (two_j * (two_j - 1.0));
  }
  return alpha;
}

SphericalState smooth(const SphericalState& s, double alpha) {
  SphericalState out = s;
  auto c = out.data();
  for (int k = 0; k <= s.kmax(); ++k) {
    const double f = std::exp(-alpha * k * (k + 1.0));
    for (int q = 0; q <= k; ++q) c[SphericalState::index(k, q)] *= f;
  }
  return out;
}

int count_distinct_axes(std::span<const MeasurementRecord> records, ReconstructionMode mode) {
  std::vector<std::size_t> owner;
  if (mode == ReconstructionMode::in_plane)
    return static_cast<int>(distinct_azimuths(records, owner).size());
  return static_cast<int>(distinct_directions(records, owner).size());
}

int default_kmax(std::span<const MeasurementRecord> records, ReconstructionMode mode,
                 std::optional<int> user_cap) {
  if (records.empty()) throw ValidationError("reconstruction: no measurement records");
  const int axes = count_distinct_axes(records, mode);
  if (user_cap) {
    if (*user_cap < 0) throw ValidationError("reconstruction: kmax must be non-negative");
    if (mode == ReconstructionMode::in_plane && *user_cap >= axes)
      throw ValidationError("in-plane reconstruction: kmax=" + std::to_string(*user_cap) +
                            " must be below the number of distinct axes A=" +
                            std::to_string(axes) + " (equal-spacing orthogonality holds only for k < A)");
    return *user_cap;
  }
  int kmax = std::numeric_limits<int>::max();
  for (const auto& r : records) kmax = std::min(kmax, r.two_j);
  if (mode == ReconstructionMode::in_plane) kmax = std::min(kmax, axes - 1);
  return kmax;
}

Reconstruction fbp_full(std::span<const MeasurementRecord> records, const ReconstructionConfig& config) {
  require_weights(records);
  config.noise.validate();
  if (config.noise.has_phase_noise())
    throw ValidationError("full-sphere reconstruction: azimuthal phase-noise damping applies to in-plane data only");
  const int kmax = default_kmax(records, ReconstructionMode::full_sphere, config.kmax);
  Reconstruction out;
  const int two_j_ref = resolve_two_j_ref(records, config, kmax, out.mean_two_j);
  out.distinct_axes = count_distinct_axes(records, ReconstructionMode::full_sphere);

  out.state = backproject(
      records, kmax, two_j_ref, config.noise, false,
      [](int k, int) { return 2.0 * k + 1.0; },
      [kmax](const Axis& axis) { return NormalizedLegendreTable::from_theta(kmax, axis.theta); },
      out.skipped_terms);
  return out;
}

Reconstruction fbp_inplane(std::span<const MeasurementRecord> records,
                           const ReconstructionConfig& config) {
  require_weights(records);
  config.noise.validate();
  for (std::size_t n = 0; n < records.size(); ++n) {
    if (std::abs(records[n].theta - 0.5 * kPi) > kPlaneTolerance)
      throw ValidationError("in-plane reconstruction: record " + std::to_string(n) +
                            " has theta=" + std::to_string(records[n].theta) +
                            ", not in the equatorial plane");
  }
  const int kmax = default_kmax(records, ReconstructionMode::in_plane, config.kmax);
  Reconstruction out;
  const int two_j_ref = resolve_two_j_ref(records, config, kmax, out.mean_two_j);
  out.distinct_axes = count_distinct_axes(records, ReconstructionMode::in_plane);

  std::vector<double> filter(SphericalState::index(kmax + 1, 0), 0.0);
  for (int k = 0; k <= kmax; ++k)
    for (int q = 0; q <= k; ++q)
      if ((k + q) % 2 == 0)
        filter[SphericalState::index(k, q)] =
            pochhammer_half(0.5 * (k - q + 1)) * pochhammer_half(0.5 * (k + q + 1)) * kPi;

  const NormalizedLegendreTable equator(kmax, 0.0, 1.0);
  out.state = backproject(
      records, kmax, two_j_ref, config.noise, true,
      [&filter](int k, int q) { return filter[SphericalState::index(k, q)]; },
      [&equator](const Axis&) -> const NormalizedLegendreTable& { return equator; },
      out.skipped_terms);
  return out;
}

SphericalState fold_northern(const SphericalState& s) {
  const int kmax = s.kmax();
  SphericalState out(s.two_j_ref(), kmax);
  for (int q = 0; q <= kmax; ++q) {
    for (int k = q; k <= kmax; ++k) {
      std::complex<double> sum{0.0, 0.0};
      for (int kp = q; kp <= kmax; ++kp) {
        const double u = hemi_overlap(k, kp, q);
        if (u != 0.0) sum += u * s(kp, q);
      }
      out.set(k, q, sum);
    }
  }
  return out;
}

Reconstruction reconstruct(std::span<const MeasurementRecord> records,
                           const ReconstructionConfig& config) {
  Reconstruction r = config.mode == ReconstructionMode::in_plane ? fbp_inplane(records, config)
                                                                  : fbp_full(records, config);
  if (config.fold_north) r.state = fold_northern(r.state);
  return r;
}

// ---------------------------------------------------------------------------

double xi_contribution(int two_j, int two_m, double x, int kmax, std::span<const double> damping) {
  SpinLabel{two_j, two_m}.validate();
  if (!(std::abs(x) <= 1.0)) throw DomainError("xi_contribution: |x| > 1");
  if (kmax < 0 || kmax > two_j) throw DomainError("xi_contribution: need 0 <= kmax <= 2j");
  if (!damping.empty() && damping.size() < static_cast<std::size_t>(kmax) + 1)
    throw DomainError("xi_contribution: damping vector shorter than kmax + 1");
  const TauTable tau(two_j, kmax);
  const auto p = legendre_p_all(kmax, x);
  double sum = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    double term = std::pow(2.0 * k + 1.0, 1.5) * tau(k, two_m) * p[static_cast<std::size_t>(k)];
    if (!damping.empty()) term *= damping[static_cast<std::size_t>(k)];
    sum += term;
  }
  return sum / std::sqrt(4.0 * kPi);
}

double assemble_wigner(std::span<const MeasurementRecord> records, double theta, double phi,
                       int kmax) {
  std::map<int, TauTable> tau;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  double sum = 0.0;
  for (const auto& r : records) {
    if (!r.weight) throw ValidationError("assemble_wigner: record without weight");
    const int kr = std::min(kmax, r.two_j);
    auto it = tau.find(r.two_j);
    if (it == tau.end()) it = tau.emplace(r.two_j, TauTable(r.two_j, std::min(kmax, r.two_j))).first;
    const double x = std::clamp(
        ct * std::cos(r.theta) + st * std::sin(r.theta) * std::cos(phi - r.phi), -1.0, 1.0);
    const auto p = legendre_p_all(kr, x);
    double xi = 0.0;
    for (int k = 0; k <= kr; ++k)
      xi += std::pow(2.0 * k + 1.0, 1.5) * it->second(k, r.two_m) * p[static_cast<std::size_t>(k)];
    sum += *r.weight * xi;
  }
  return sum / std::sqrt(4.0 * kPi);
}

}  // namespace sphtomo
