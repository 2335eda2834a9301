#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sphtomo/analysis.hpp"
#include "sphtomo/error.hpp"
#include "sphtomo/forward_model.hpp"

using namespace sphtomo;

namespace {

constexpr double kPi = oracle::pi;

bool same_records(const std::vector<MeasurementRecord>& a, const std::vector<MeasurementRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].theta != b[i].theta || a[i].phi != b[i].phi || a[i].two_j != b[i].two_j ||
        a[i].two_m != b[i].two_m || a[i].weight != b[i].weight)
      return false;
  return true;
}

}  // namespace

TEST(NoiseModel, Validation) {
  NoiseModel n;
  EXPECT_NO_THROW(n.validate());
  n.sigma_N = -1.0;
  EXPECT_THROW(n.validate(), ValidationError);
  n.sigma_N = 0.0;
  n.sigma_Omega = std::nan("");
  EXPECT_THROW(n.validate(), ValidationError);
}

TEST(NoiseModel, PhaseModelForms) {
  NoiseModel n;
  EXPECT_EQ(n.sigma_phi_at(1.0), 0.0);
  n.phase_kind = PhaseNoiseKind::constant;
  n.sigma_phi = 0.2;
  EXPECT_EQ(n.sigma_phi_at(2.0), 0.2);
  n.phase_kind = PhaseNoiseKind::model;
  n.sigma_ph_deg = 8.2;
  const double rad = 8.2 * kPi / 180.0;
  EXPECT_NEAR(n.sigma_phi_at(kPi / 2), rad * rad / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(n.sigma_phi_at(-kPi / 2), rad * rad / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(n.sigma_phi_at(0.0), 0.0, 1e-15);
  n.phase_form = PhaseModelForm::linear;
  EXPECT_NEAR(n.sigma_phi_at(kPi / 6), rad * 0.5 / std::sqrt(2.0), 1e-15);
}

TEST(MeasurementRecord, Validation) {
  MeasurementRecord r{kPi / 2, 0.0, std::nullopt, 40, 32};
  EXPECT_NO_THROW(r.validate());
  r.two_m = 31;
  EXPECT_THROW(r.validate(), ValidationError);
  r.two_m = 42;
  EXPECT_THROW(r.validate(), ValidationError);
  r.two_m = 0;
  r.weight = -0.1;
  EXPECT_THROW(r.validate(), ValidationError);
  r.weight = 0.1;
  r.theta = 4.0;
  EXPECT_THROW(r.validate(), ValidationError);
}

TEST(Axes, Generators) {
  const auto a = in_plane_axes(6);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_DOUBLE_EQ(a[3].phi, kPi / 2);
  EXPECT_DOUBLE_EQ(a[0].theta, kPi / 2);
  const auto h = hemisphere_axes(100);
  ASSERT_EQ(h.size(), 100u);
  for (const auto& ax : h) {
    EXPECT_LT(ax.theta, kPi / 2);
    EXPECT_GE(ax.phi, 0.0);
    EXPECT_LT(ax.phi, 2 * kPi);
  }
  EXPECT_THROW((void)in_plane_axes(0), ValidationError);
}

TEST(ProjectionProbabilities, Examples) {
  for (int tj : {2, 7}) {
    for (double v : projection_probabilities(mixed_state(tj, tj), 1.2, 0.3)) EXPECT_NEAR(v, 1.0 / (tj + 1), 1e-14);
  }
  const auto up = projection_probabilities(coherent_state(20, 0.0, 0.0, 0.0, 20), 0.0, 0.0);
  for (std::size_t i = 0; i < up.size(); ++i) EXPECT_NEAR(up[i], i == 20 ? 1.0 : 0.0, 1e-10);
  const auto half = projection_probabilities(coherent_state(1, 0.0, 0.0, 0.0, 1), kPi / 2, 0.8);
  EXPECT_NEAR(half[0], 0.5, 1e-15);
  EXPECT_NEAR(half[1], 0.5, 1e-15);
}

TEST(ProjectionProbabilities, SumIsTrace) {
  for (int tj : {3, 8, 15}) {
    const auto rho = oracle::random_hermitian(tj, tj);
    const auto s = dicke_to_spherical(DickeState(tj, rho), tj);
    const auto p = projection_probabilities(s, 0.9, 4.0);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), rho.trace().real(), 1e-10);
    EXPECT_NEAR(std::sqrt(tj + 1.0) * s(0, 0).real(), rho.trace().real(), 1e-12);
  }
}

TEST(ProjectionProbabilities, MatchesRotatedDensityMatrix) {
  for (int tj = 1; tj <= 10; ++tj) {
    const auto rho = oracle::random_density(tj, 40 + tj);
    const auto s = dicke_to_spherical(DickeState(tj, rho), tj);
    for (auto [t, p] : {std::pair{0.2, 0.1}, std::pair{1.7, 3.3}, std::pair{3.0, 5.9}}) {
      const auto a = projection_probabilities(s, t, p);
      const auto b = oracle::probabilities(rho, tj, t, p);
      for (std::size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], 1e-10) << tj;
    }
  }
}

TEST(Sampler, DeterministicInSeed) {
  const auto s = coherent_state(20, 1.0, 0.5, 0.0, 20);
  const auto axes = in_plane_axes(8);
  NoiseModel n;
  n.sigma_N = 1.5;
  n.sigma_Omega = 0.02;
  const auto a = sample_measurements(s, axes, 50, n, 7);
  const auto b = sample_measurements(s, axes, 50, n, 7);
  const auto c = sample_measurements(s, axes, 50, n, 8);
  EXPECT_TRUE(same_records(a, b));
  EXPECT_FALSE(same_records(a, c));
}

TEST(Sampler, AxisStreamsAreIndependentOfAxisList) {
  // records of an axis depend only on (seed, axis position)
  const auto s = coherent_state(10, 0.7, 0.0, 0.0, 10);
  const auto axes = in_plane_axes(6);
  const auto all = sample_measurements(s, axes, 20, {}, 3);
  auto first = sample_measurements(s, std::span(axes).first(2), 20, {}, 3);
  // the provisional 1/M weight depends on the total count
  for (auto& r : first) r.weight = 1.0 / 120;
  EXPECT_TRUE(same_records(first, {all.begin(), all.begin() + 40}));
}

TEST(Sampler, CoherentAlongOwnAxisAlwaysTop) {
  const std::vector<Axis> z{{0.0, 0.0}};
  const auto rec = sample_measurements(coherent_state(40, 0.0, 0.0, 0.0, 40), z, 10000, {}, 1);
  ASSERT_EQ(rec.size(), 10000u);
  for (const auto& r : rec) {
    ASSERT_EQ(r.two_j, 40);
    ASSERT_EQ(r.two_m, 40);
    ASSERT_DOUBLE_EQ(*r.weight, 1e-4);
  }
}

TEST(Sampler, MixedStateHistogramIsUniform) {
  const std::vector<Axis> ax{{0.4, 1.0}};
  const auto rec = sample_measurements(mixed_state(4, 4), ax, 100000, {}, 99);
  std::array<double, 5> counts{};
  for (const auto& r : rec) counts[static_cast<std::size_t>((r.two_m + 4) / 2)] += 1;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - 20000.0) * (c - 20000.0) / 20000.0;
  EXPECT_LT(chi2, 18.47);  // chi^2_4 at p = 0.001
}

TEST(Sampler, EmpiricalMomentsConverge) {
  const auto rho = oracle::random_density(10, 5);
  const auto s = dicke_to_spherical(DickeState(10, rho), 10);
  const Axis ax{1.1, 2.2};
  const auto exact = moments(s, ax.theta, ax.phi);
  for (int shots : {1000, 100000}) {
    const auto rec = sample_measurements(s, std::span(&ax, 1), shots, {}, 12);
    double m1 = 0.0, m2 = 0.0;
    for (const auto& r : rec) {
      m1 += 0.5 * r.two_m;
      m2 += 0.25 * r.two_m * r.two_m;
    }
    m1 /= shots;
    m2 /= shots;
    const double sd = std::sqrt(exact.variance() / shots);
    EXPECT_NEAR(m1, exact.mean_m, 5 * sd) << shots;
    EXPECT_NEAR(m2, exact.mean_m2, 5 * 25.0 / std::sqrt(shots)) << shots;
  }
}

TEST(Sampler, NumberNoiseStatistics) {
  NoiseModel n;
  n.sigma_N = 4.0;
  const std::vector<Axis> ax{{0.0, 0.0}};
  const auto rec = sample_measurements(coherent_state(200, 0.0, 0.0, 0.0, 200), ax, 40000, n, 5);
  double mj = 0.0, vj = 0.0;
  for (const auto& r : rec) {
    ASSERT_NO_THROW(r.validate());
    mj += 0.5 * r.two_j;
  }
  mj /= rec.size();
  for (const auto& r : rec) vj += (0.5 * r.two_j - mj) * (0.5 * r.two_j - mj);
  vj /= rec.size();
  EXPECT_NEAR(mj, 100.0, 0.1);
  // rounding each population adds 1/12 per population, i.e. 1/24 to var(j)
  EXPECT_NEAR(vj, 8.0 + 1.0 / 24.0, 0.3);
}

TEST(Sampler, PointingNoiseShortensMeanSpin) {
  NoiseModel n;
  n.sigma_Omega = 0.2;
  const std::vector<Axis> ax{{0.0, 0.0}};
  const auto rec = sample_measurements(coherent_state(40, 0.0, 0.0, 0.0, 40), ax, 20000, n, 8);
  double m = 0.0;
  for (const auto& r : rec) m += 0.5 * r.two_m;
  m /= rec.size();
  // <cos eta> ~ 1 - sigma_Omega^2 / 2 for small tilts
  EXPECT_NEAR(m, 20.0 * (1.0 - 0.02), 0.08);
}

TEST(Sampler, RejectsUnphysicalStates) {
  SphericalState s(4, 4);
  s.set(0, 0, 1.0 / std::sqrt(5.0));
  s.set(4, 0, 0.8);
  const std::vector<Axis> ax{{0.0, 0.0}};
  EXPECT_THROW((void)sample_measurements(s, ax, 10, {}, 1), ValidationError);
  EXPECT_THROW((void)sample_measurements(mixed_state(4, 4), ax, 0, {}, 1), ValidationError);
}
