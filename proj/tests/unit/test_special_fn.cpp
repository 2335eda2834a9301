#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sphtomo/error.hpp"
#include "sphtomo/special_fn.hpp"

using namespace sphtomo;

namespace {

constexpr double kPi = oracle::pi;

double ortho_error(int two_j, int k, int kp, const TauTable& t) {
  double s = 0.0;
  for (int tm = -two_j; tm <= two_j; tm += 2) s += t(k, tm) * t(kp, tm);
  return std::abs(s - (k == kp ? 1.0 : 0.0));
}

}  // namespace

TEST(SpinLabel, Invariants) {
  EXPECT_TRUE((SpinLabel{1, 1}.valid()));
  EXPECT_TRUE((SpinLabel{40, -32}.valid()));
  EXPECT_FALSE((SpinLabel{40, 31}.valid()));
  EXPECT_FALSE((SpinLabel{2, 4}.valid()));
  EXPECT_FALSE((SpinLabel{-1, 1}.valid()));
  EXPECT_THROW((SpinLabel{40, 31}.validate()), DomainError);
}

TEST(LogDomain, FactorialsMatchDirectProducts) {
  EXPECT_NEAR(log_factorial(0), 0.0, 1e-15);
  EXPECT_NEAR(log_factorial(10), std::log(3628800.0), 1e-12);
  EXPECT_NEAR(log_double_factorial(-1), 0.0, 1e-15);
  EXPECT_NEAR(log_double_factorial(7), std::log(105.0), 1e-12);
  EXPECT_NEAR(log_double_factorial(8), std::log(384.0), 1e-12);
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(kPi), 1e-14);
}

TEST(CgTau, Examples) {
  EXPECT_NEAR(cg_tau({1, 1}, 0), 0.7071068, 1e-7);
  EXPECT_NEAR(cg_tau({2, 0}, 2), -0.8164966, 1e-7);
  EXPECT_NEAR(cg_tau({40, 32}, 0), 0.1561738, 1e-7);
  EXPECT_NEAR(cg_tau({1, 1}, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cg_tau({2, 0}, 2), -std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(CgTau, DomainErrors) {
  EXPECT_THROW((void)cg_tau({2, 0}, 3), DomainError);
  EXPECT_THROW((void)cg_tau({2, 1}, 0), DomainError);
  EXPECT_THROW((void)cg_tau({2, 0}, -1), DomainError);
}

TEST(CgTau, MatchesLongDoubleRacahOracle) {
  for (int tj = 0; tj <= 30; ++tj)
    for (int tm = -tj; tm <= tj; tm += 2)
      for (int k = 0; k <= tj; ++k) {
        const double a = cg_tau({tj, tm}, k);
        const double b = oracle::tau(tj, tm, k);
        ASSERT_NEAR(a, b, 1e-12 + 1e-10 * std::abs(b)) << "two_j=" << tj << " two_m=" << tm << " k=" << k;
      }
}

TEST(CgTau, ReflectionIsExact) {
  for (int tj : {7, 40, 131, 400}) {
    const TauTable t(tj, tj);
    for (int k = 0; k <= tj; ++k)
      for (int tm = 1 - (tj % 2 == 0); tm <= tj; tm += 2) {
        if (tm == 0) continue;
        const double sign = k % 2 ? -1.0 : 1.0;
        ASSERT_EQ(t(k, -tm), sign * t(k, tm)) << tj << " " << tm << " " << k;
      }
  }
}

TEST(CgTau, TableAgreesWithPointwise) {
  const TauTable t(51, 51);
  for (int k = 0; k <= 51; k += 5)
    for (int tm = -51; tm <= 51; tm += 2) EXPECT_DOUBLE_EQ(t(k, tm), cg_tau({51, tm}, k));
}

TEST(CgTau, OrthogonalityExhaustiveSmallJ) {
  for (int tj = 0; tj <= 100; ++tj) {
    const TauTable t(tj, tj);
    double worst = 0.0;
    for (int k = 0; k <= tj; ++k)
      for (int kp = k; kp <= tj; ++kp) worst = std::max(worst, ortho_error(tj, k, kp, t));
    ASSERT_LT(worst, 1e-10) << "two_j=" << tj;
  }
}

TEST(CgTau, OrthogonalitySampledLargeJ) {
  std::mt19937_64 rng(11);
  for (int tj : {201, 300, 400}) {
    const TauTable t(tj, tj);
    std::uniform_int_distribution<int> pick(0, tj);
    for (int i = 0; i < 300; ++i) {
      const int k = pick(rng), kp = i % 3 == 0 ? k : pick(rng);
      ASSERT_LT(ortho_error(tj, k, kp, t), 1e-8) << tj << " " << k << " " << kp;
    }
  }
}

TEST(CgTau, ColumnValuesAreFiniteAtVeryLargeJ) {
  std::vector<double> col(2001);
  cg_tau_column(2000, 40, col);
  double norm = 0.0;
  for (double v : col) {
    ASSERT_TRUE(std::isfinite(v));
    norm += v * v;
  }
  EXPECT_NEAR(norm, 1.0, 1e-9);
}

TEST(CgGeneral, Examples) {
  EXPECT_NEAR(cg_general(1, 1, 1, -1, 0, 0), 0.7071068, 1e-7);
  EXPECT_NEAR(cg_general(2, 2, 2, -2, 2, 0), 0.7071068, 1e-7);
  EXPECT_EQ(cg_general(2, 2, 2, 0, 2, 0), 0.0);
  EXPECT_EQ(t_coefficient(4, 2, 0, 2, 0), 0.0);  // q != m - m'
}

TEST(CgGeneral, MatchesOracleOnGeneralLabels) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    std::uniform_int_distribution<int> jd(0, 24);
    const int tj1 = jd(rng), tj2 = jd(rng);
    std::uniform_int_distribution<int> Jd(std::abs(tj1 - tj2) / 2, (tj1 + tj2) / 2);
    const int tJ = std::abs(tj1 - tj2) + 2 * (Jd(rng) - std::abs(tj1 - tj2) / 2);
    const int tm1 = -tj1 + 2 * std::uniform_int_distribution<int>(0, tj1)(rng);
    const int tm2 = -tj2 + 2 * std::uniform_int_distribution<int>(0, tj2)(rng);
    if (std::abs(tm1 + tm2) > tJ) {
      EXPECT_THROW((void)cg_general(tj1, tm1, tj2, tm2, tJ, tm1 + tm2), DomainError);
      continue;
    }
    const double a = cg_general(tj1, tm1, tj2, tm2, tJ, tm1 + tm2);
    const double b = oracle::cg(tj1, tm1, tj2, tm2, tJ, tm1 + tm2);
    ASSERT_NEAR(a, b, 1e-12) << tj1 << " " << tm1 << " " << tj2 << " " << tm2 << " " << tJ;
  }
}

TEST(CgGeneral, TCoefficientMatchesOracle) {
  for (int tj : {1, 2, 5, 8})
    for (int tm = -tj; tm <= tj; tm += 2)
      for (int tmp = -tj; tmp <= tj; tmp += 2)
        for (int k = 0; k <= tj; ++k)
          for (int q = -k; q <= k; ++q)
            ASSERT_NEAR(t_coefficient(tj, tm, tmp, k, q), oracle::t(tj, tm, tmp, k, q), 1e-13);
}

TEST(Legendre, Examples) {
  EXPECT_DOUBLE_EQ(legendre_p(3, 0.5), -0.4375);
  EXPECT_DOUBLE_EQ(legendre_p(2, 0.0), -0.5);
  EXPECT_THROW((void)legendre_p(2, 1.0000001), DomainError);
}

TEST(Legendre, EndpointsExact) {
  for (int k = 0; k <= 3000; k += 7) {
    ASSERT_EQ(legendre_p(k, 1.0), 1.0);
    ASSERT_EQ(legendre_p(k, -1.0), k % 2 ? -1.0 : 1.0);
  }
}

TEST(Legendre, MatchesBoost) {
  const auto all = legendre_p_all(60, 0.37);
  for (int k = 0; k <= 60; ++k) EXPECT_NEAR(all[static_cast<std::size_t>(k)], boost::math::legendre_p(k, 0.37), 1e-13);
}

TEST(RotElement, Examples) {
  EXPECT_NEAR(rot_element(2, 0, kPi / 2, 1.3).real(), -0.5, 1e-15);
  EXPECT_NEAR(rot_element(2, 0, kPi / 2, 1.3).imag(), 0.0, 1e-15);
  EXPECT_NEAR(rot_element(1, 1, kPi / 2, 0.0).real(), -0.7071068, 1e-7);
  EXPECT_EQ(std::abs(rot_element(3, 2, 0.0, 0.0)), 0.0);
  EXPECT_NEAR(rot_element(3, 0, 0.0, 0.0).real(), 1.0, 1e-15);
}

TEST(RotElement, MatchesBoostSphericalHarmonics) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> th(0.0, kPi), ph(0.0, 2 * kPi);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = th(rng), p = ph(rng);
    for (int k = 0; k <= 40; ++k)
      for (int q = -k; q <= k; ++q) {
        const auto a = rot_element(k, q, t, p);
        const auto b = oracle::rot(k, q, t, p);
        ASSERT_NEAR(std::abs(a - b), 0.0, 1e-12) << k << " " << q;
      }
  }
}

TEST(RotElement, NegativeQSymmetry) {
  for (int k = 1; k <= 10; ++k)
    for (int q = 1; q <= k; ++q) {
      const auto a = rot_element(k, -q, 0.7, 2.1);
      const auto b = (q % 2 ? -1.0 : 1.0) * std::conj(rot_element(k, q, 0.7, 2.1));
      EXPECT_NEAR(std::abs(a - b), 0.0, 1e-14);
    }
}

TEST(RotElement, RowUnitarity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> th(0.0, kPi), ph(0.0, 2 * kPi);
  for (int trial = 0; trial < 5; ++trial) {
    const double t = th(rng), p = ph(rng);
    const auto table = NormalizedLegendreTable::from_theta(500, t);
    for (int k = 0; k <= 500; ++k) {
      double s = table(k, 0) * table(k, 0);
      for (int q = 1; q <= k; ++q) s += 2.0 * table(k, q) * table(k, q);
      ASSERT_NEAR(s * 4.0 * kPi / (2.0 * k + 1.0), 1.0, 1e-10) << "k=" << k << " theta=" << t;
    }
    (void)p;
  }
}

TEST(RotElement, StableAtVeryHighDegree) {
  const auto table = NormalizedLegendreTable::from_theta(2500, 0.3);
  double s = 0.0;
  const int k = 2500;
  s = table(k, 0) * table(k, 0);
  for (int q = 1; q <= k; ++q) {
    ASSERT_TRUE(std::isfinite(table(k, q)));
    s += 2.0 * table(k, q) * table(k, q);
  }
  EXPECT_NEAR(s * 4.0 * kPi / (2.0 * k + 1.0), 1.0, 1e-9);
}

TEST(Pochhammer, Examples) {
  EXPECT_NEAR(pochhammer_half(1.0), std::sqrt(kPi) / 2.0, 1e-15);
  EXPECT_NEAR(pochhammer_half(0.5), 1.0 / std::sqrt(kPi), 1e-15);
  EXPECT_NEAR(pochhammer_half(10.0), 3.1231, 1e-4);
  const double approx = std::sqrt(10.0) - 1.0 / (8.0 * std::sqrt(10.0));
  EXPECT_NEAR(pochhammer_half(10.0) / approx, 1.0, 1e-3);
  EXPECT_THROW((void)pochhammer_half(0.0), DomainError);
  EXPECT_THROW((void)pochhammer_half(-1.0), DomainError);
}

TEST(HemiOverlap, Examples) {
  EXPECT_EQ(hemi_overlap(7, 7, 3), 1.0);
  EXPECT_NEAR(hemi_overlap(0, 1, 0), 0.8660254, 1e-7);
  EXPECT_EQ(hemi_overlap(0, 2, 0), 0.0);
  EXPECT_THROW((void)hemi_overlap(2, 3, 3), DomainError);
}

TEST(HemiOverlap, SymmetricAndMatchesQuadrature) {
  for (int q = 0; q <= 30; ++q)
    for (int k = q; k <= 30; ++k)
      for (int kp = q; kp <= 30; ++kp) {
        const double a = hemi_overlap(k, kp, q);
        ASSERT_EQ(a, hemi_overlap(kp, k, q));
        ASSERT_NEAR(a, oracle::hemi_overlap(k, kp, q), 1e-10) << k << " " << kp << " " << q;
      }
}

TEST(HemiOverlap, NegativeQMatchesPositive) {
  for (int k = 1; k <= 8; ++k)
    for (int kp = 1; kp <= 8; ++kp)
      for (int q = 1; q <= std::min(k, kp); ++q)
        EXPECT_NEAR(hemi_overlap(k, kp, -q), hemi_overlap(k, kp, q), 1e-14);
}
