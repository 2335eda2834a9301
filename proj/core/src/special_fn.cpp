#include "sphtomo/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>

#include "sphtomo/error.hpp"

namespace sphtomo {

namespace {

constexpr double kBigScale = 1e200;
constexpr double kSmallScale = 1e-200;
const double kLogBigScale = std::log(kBigScale);

[[noreturn]] void domain_fail(const std::string& what) { throw DomainError(what); }

long double log_factorial_ld(std::int64_t n) {
  int sign = 0;
  return ::lgammal_r(static_cast<long double>(n) + 1.0L, &sign);
}

// value = mantissa * exp(log_scale), evaluated without overflow or premature underflow.
double unscale(double mantissa, double log_scale) {
  if (mantissa == 0.0) return 0.0;
  if (log_scale > -700.0 && log_scale < 700.0) return mantissa * std::exp(log_scale);
  const double mag = std::exp(std::log(std::abs(mantissa)) + log_scale);
  return mantissa < 0.0 ? -mag : mag;
}

// ln tau_k^{j,j}
double log_tau_top(int two_j, int k) {
  const double j2 = two_j;
  const int n = 2 * two_j + 1;
  const int r = two_j - k;
  const double log_binom = log_factorial(n) - log_factorial(r) - log_factorial(n - r);
  const double log_poch = log_gamma(j2 + 1.5) - log_gamma(j2 + 1.0);
  return 0.25 * std::log(std::numbers::pi) + 0.5 * std::log(2.0 * k + 1.0) -
         (j2 + 0.5) * std::numbers::ln2 + 0.5 * (log_binom - log_poch);
}

// Fills tau_k^{j,m} for two_m = two_j, two_j - 2, ..., down to two_m_stop (>= 0),
// writing into out indexed by (two_m + two_j) / 2.
void tau_downward(int two_j, int k, int two_m_stop, std::span<double> out) {
  const double log_seed = log_tau_top(two_j, k);
  const auto at = [two_j](int two_m) { return static_cast<std::size_t>((two_m + two_j) / 2); };
  const std::int64_t jj = static_cast<std::int64_t>(two_j) * (two_j + 2);  // 4 j(j+1)
  const std::int64_t kk = 4LL * k * (k + 1);                                // 4 k(k+1)

  double log_scale = log_seed;
  double v2 = 1.0;  // tau at m + 2 (scaled)
  double v1 = 1.0;  // tau at m + 1 (scaled)
  out[at(two_j)] = unscale(1.0, log_scale);
  if (two_j - 2 < two_m_stop) return;

  v2 = 1.0;
  v1 = 1.0 - static_cast<double>(k) * (k + 1) / static_cast<double>(two_j);
  out[at(two_j - 2)] = unscale(v1, log_scale);

  for (int two_m = two_j - 4; two_m >= two_m_stop; two_m -= 2) {
    const std::int64_t M = two_m;
    const std::int64_t a = 2 * jj - 2 * (M + 2) * (M + 2) - kk;
    const std::int64_t b = jj - (M + 2) * (M + 4);
    const std::int64_t d = jj - M * (M + 2);
    const double v = (static_cast<double>(a) * v1 - static_cast<double>(b) * v2) /
                     static_cast<double>(d);
    v2 = v1;
    v1 = v;
    const double mag = std::max(std::abs(v1), std::abs(v2));
    if (mag > kBigScale) {
      v1 /= kBigScale;
      v2 /= kBigScale;
      log_scale += kLogBigScale;
    } else if (mag < kSmallScale && mag > 0.0) {
      v1 *= kBigScale;
      v2 *= kBigScale;
      log_scale -= kLogBigScale;
    }
    out[at(two_m)] = unscale(v1, log_scale);
  }
}

// Normalized associated Legendre column Ybar_k^q(x) for k = q ... kmax,
// computed from a log-domain sectoral seed so nothing underflows early.
template <typename Sink>
void legendre_column(int kmax, int q, double x, double s, Sink&& sink) {
  if (q > 0 && s == 0.0) {
    for (int k = q; k <= kmax; ++k) sink(k, 0.0);
    return;
  }
  double log_scale = -0.5 * std::log(4.0 * std::numbers::pi);
  for (int i = 1; i <= q; ++i) log_scale += 0.5 * std::log((2.0 * i + 1.0) / (2.0 * i));
  if (q > 0) log_scale += q * std::log(s);

  double factor = std::exp(log_scale);
  bool factor_ok = log_scale > -700.0 && log_scale < 700.0;
  const auto emit = [&](int k, double v) {
    sink(k, factor_ok ? v * factor : unscale(v, log_scale));
  };

  double y2 = (q % 2 == 0) ? 1.0 : -1.0;
  emit(q, y2);
  if (q == kmax) return;
  double y1 = x * std::sqrt(2.0 * q + 3.0) * y2;
  emit(q + 1, y1);

  const double qq = static_cast<double>(q) * q;
  for (int k = q + 2; k <= kmax; ++k) {
    const double kd = k;
    const double a = std::sqrt((4.0 * kd * kd - 1.0) / (kd * kd - qq));
    const double b = std::sqrt(((kd - 1.0) * (kd - 1.0) - qq) / (4.0 * (kd - 1.0) * (kd - 1.0) - 1.0));
    const double y = a * (x * y1 - b * y2);
    y2 = y1;
    y1 = y;
    if (std::max(std::abs(y1), std::abs(y2)) > kBigScale) {
      y1 /= kBigScale;
      y2 /= kBigScale;
      log_scale += kLogBigScale;
      factor = std::exp(log_scale);
      factor_ok = log_scale > -700.0 && log_scale < 700.0;
    }
    emit(k, y1);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

bool SpinLabel::valid() const noexcept {
  return two_j >= 0 && std::abs(two_m) <= two_j && ((two_j - two_m) % 2 == 0);
}

void SpinLabel::validate() const {
  if (two_j < 0) domain_fail("spin label: two_j must be non-negative, got " + std::to_string(two_j));
  if (std::abs(two_m) > two_j)
    domain_fail("spin label: |two_m| <= two_j violated (two_j=" + std::to_string(two_j) +
                ", two_m=" + std::to_string(two_m) + ")");
  if ((two_j - two_m) % 2 != 0)
    domain_fail("spin label: two_m must have the parity of two_j (two_j=" +
                std::to_string(two_j) + ", two_m=" + std::to_string(two_m) + ")");
}

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_factorial(int n) {
  if (n < 0) domain_fail("log_factorial: negative argument");
  return log_gamma(n + 1.0);
}

double log_double_factorial(int n) {
  if (n < -1) domain_fail("log_double_factorial: argument below -1");
  if (n <= 0) return 0.0;
  if (n % 2 == 0) {
    const int p = n / 2;
    return log_factorial(p) + p * std::numbers::ln2;
  }
  const int p = (n + 1) / 2;  // n = 2p - 1
  return log_factorial(2 * p) - p * std::numbers::ln2 - log_factorial(p);
}

// ---------------------------------------------------------------------------

double cg_tau(SpinLabel spin, int k) {
  spin.validate();
  if (k < 0 || k > spin.two_j)
    domain_fail("cg_tau: need 0 <= k <= 2j (k=" + std::to_string(k) +
                ", two_j=" + std::to_string(spin.two_j) + ")");
  const int abs_m = std::abs(spin.two_m);
  std::vector<double> col(static_cast<std::size_t>(spin.two_j) + 1, 0.0);
  if (abs_m == 0 && k % 2 == 1) return 0.0;
  tau_downward(spin.two_j, k, abs_m, col);
  const double v = col[static_cast<std::size_t>((abs_m + spin.two_j) / 2)];
  return (spin.two_m < 0 && k % 2 == 1) ? -v : v;
}

void cg_tau_column(int two_j, int k, std::span<double> out) {
  if (two_j < 0) domain_fail("cg_tau_column: negative two_j");
  if (k < 0 || k > two_j) domain_fail("cg_tau_column: need 0 <= k <= 2j");
  if (out.size() != static_cast<std::size_t>(two_j) + 1)
    domain_fail("cg_tau_column: output span must have two_j + 1 entries");
  const int stop = two_j % 2;
  tau_downward(two_j, k, stop, out);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  if (stop == 0 && k % 2 == 1) out[static_cast<std::size_t>(two_j / 2)] = 0.0;
  for (int two_m = -two_j; two_m < 0; two_m += 2) {
    out[static_cast<std::size_t>((two_m + two_j) / 2)] =
        sign * out[static_cast<std::size_t>((-two_m + two_j) / 2)];
  }
}

TauTable::TauTable(int two_j, int kmax) : two_j_(two_j), kmax_(kmax) {
  if (two_j < 0) domain_fail("TauTable: negative two_j");
  if (kmax < 0 || kmax > two_j) domain_fail("TauTable: need 0 <= kmax <= 2j");
  values_.assign(static_cast<std::size_t>(kmax + 1) * dim(), 0.0);
  for (int k = 0; k <= kmax; ++k) {
    cg_tau_column(two_j, k,
                  std::span<double>(values_.data() + static_cast<std::size_t>(k) * dim(),
                                    static_cast<std::size_t>(dim())));
  }
}

double cg_general(int two_j1, int two_m1, int two_j2, int two_m2, int two_J, int two_M) {
  if (!SpinLabel{two_j1, two_m1}.valid() || !SpinLabel{two_j2, two_m2}.valid() ||
      !SpinLabel{two_J, two_M}.valid())
    domain_fail("cg_general: malformed angular-momentum labels");
  if (two_m1 + two_m2 != two_M) return 0.0;
  if (two_J < std::abs(two_j1 - two_j2) || two_J > two_j1 + two_j2) return 0.0;
  if ((two_j1 + two_j2 + two_J) % 2 != 0) return 0.0;

  // integer combinations
  const std::int64_t a = (two_j1 + two_j2 - two_J) / 2;  // j1+j2-J
  const std::int64_t b = (two_j1 - two_m1) / 2;          // j1-m1
  const std::int64_t c = (two_j2 + two_m2) / 2;          // j2+m2
  const std::int64_t d = (two_J - two_j2 + two_m1) / 2;  // J-j2+m1
  const std::int64_t e = (two_J - two_j1 - two_m2) / 2;  // J-j1-m2

  const long double log_pref =
      0.5L * (std::log(static_cast<long double>(two_J + 1)) +
              log_factorial_ld((two_J + two_j1 - two_j2) / 2) +
              log_factorial_ld((two_J - two_j1 + two_j2) / 2) + log_factorial_ld(a) -
              log_factorial_ld((two_j1 + two_j2 + two_J) / 2 + 1) +
              log_factorial_ld((two_J + two_M) / 2) + log_factorial_ld((two_J - two_M) / 2) +
              log_factorial_ld(b) + log_factorial_ld((two_j1 + two_m1) / 2) +
              log_factorial_ld((two_j2 - two_m2) / 2) + log_factorial_ld(c));

  const std::int64_t lo = std::max<std::int64_t>({0, -d, -e});
  const std::int64_t hi = std::min({a, b, c});
  if (lo > hi) return 0.0;

  std::vector<long double> logs;
  logs.reserve(static_cast<std::size_t>(hi - lo + 1));
  long double log_max = -std::numeric_limits<long double>::infinity();
  for (std::int64_t s = lo; s <= hi; ++s) {
    const long double l = log_pref - (log_factorial_ld(s) + log_factorial_ld(a - s) +
                                      log_factorial_ld(b - s) + log_factorial_ld(c - s) +
                                      log_factorial_ld(d + s) + log_factorial_ld(e + s));
    logs.push_back(l);
    log_max = std::max(log_max, l);
  }
  long double sum = 0.0L;
  for (std::int64_t s = lo; s <= hi; ++s) {
    const long double term = std::exp(logs[static_cast<std::size_t>(s - lo)] - log_max);
    sum += (s % 2 == 0) ? term : -term;
  }
  return static_cast<double>(sum * std::exp(log_max));
}

double t_coefficient(int two_j, int two_m, int two_mp, int k, int q) {
  if (two_m - two_mp != 2 * q) return 0.0;
  if (k < 0 || k > two_j || std::abs(q) > k) return 0.0;
  const double cg = cg_general(two_j, two_m, two_j, -two_mp, 2 * k, 2 * q);
  // (-1)^{j - m - q}; j - m is an integer
  const int phase = (two_j - two_m) / 2 - q;
  return (phase % 2 == 0) ? cg : -cg;
}

// ---------------------------------------------------------------------------

double legendre_p(int k, double x) {
  if (k < 0) domain_fail("legendre_p: negative degree");
  if (!(std::abs(x) <= 1.0)) domain_fail("legendre_p: |x| > 1");
  if (k == 0) return 1.0;
  double p0 = 1.0;
  double p1 = x;
  for (int n = 1; n < k; ++n) {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<double> legendre_p_all(int kmax, double x) {
  if (kmax < 0) domain_fail("legendre_p_all: negative degree");
  if (!(std::abs(x) <= 1.0)) domain_fail("legendre_p_all: |x| > 1");
  std::vector<double> p(static_cast<std::size_t>(kmax) + 1);
  p[0] = 1.0;
  if (kmax >= 1) p[1] = x;
  for (int n = 1; n < kmax; ++n)
    p[n + 1] = ((2.0 * n + 1.0) * x * p[n] - n * p[n - 1]) / (n + 1.0);
  return p;
}

NormalizedLegendreTable::NormalizedLegendreTable(int kmax, double x, double s) : kmax_(kmax) {
  if (kmax < 0) domain_fail("NormalizedLegendreTable: negative kmax");
  values_.assign(static_cast<std::size_t>(kmax + 1) * (kmax + 2) / 2, 0.0);
  for (int q = 0; q <= kmax; ++q) {
    legendre_column(kmax, q, x, s, [&](int k, double v) {
      values_[static_cast<std::size_t>(k) * (k + 1) / 2 + q] = v;
    });
  }
}

NormalizedLegendreTable NormalizedLegendreTable::from_theta(int kmax, double theta) {
  return NormalizedLegendreTable(kmax, std::cos(theta), std::abs(std::sin(theta)));
}

double normalized_legendre(int k, int q, double theta) {
  if (q < 0 || q > k) domain_fail("normalized_legendre: need 0 <= q <= k");
  double result = 0.0;
  legendre_column(k, q, std::cos(theta), std::abs(std::sin(theta)), [&](int kk, double v) {
    if (kk == k) result = v;
  });
  return result;
}

std::complex<double> rot_element(int k, int q, double theta, double phi) {
  if (k < 0 || std::abs(q) > k) domain_fail("rot_element: need |q| <= k");
  if (!(theta >= 0.0 && theta <= std::numbers::pi))
    domain_fail("rot_element: theta must lie in [0, pi]");
  const int aq = std::abs(q);
  const double norm = std::sqrt(4.0 * std::numbers::pi / (2.0 * k + 1.0));
  const double y = norm * normalized_legendre(k, aq, theta);
  const std::complex<double> d = std::polar(y, -aq * phi);
  if (q >= 0) return d;
  return (aq % 2 == 0) ? std::conj(d) : -std::conj(d);
}

double pochhammer_half(double a) {
  if (!(a > 0.0)) domain_fail("pochhammer_half: argument must be positive");
  return std::exp(log_gamma(a + 0.5) - log_gamma(a));
}

double hemi_overlap(int k, int k_prime, int q) {
  if (k < 0 || k_prime < 0) domain_fail("hemi_overlap: negative degree");
  q = std::abs(q);
  if (q > std::min(k, k_prime)) domain_fail("hemi_overlap: need |q| <= min(k, k')");
  if (k == k_prime) return 1.0;
  const bool k_even = (k - q) % 2 == 0;
  const bool kp_even = (k_prime - q) % 2 == 0;
  if (k_even == kp_even) return 0.0;
  if (!k_even) return hemi_overlap(k_prime, k, q);

  // k - q even, k' - q odd
  const int diff = k - k_prime;  // odd
  const int half = (diff - 1) / 2;
  double sign = (half % 2 == 0) ? 1.0 : -1.0;
  if (diff < 0) sign = -sign;

  const double log_mag =
      (q - 0.5 * (k + k_prime - 1)) * std::numbers::ln2 +
      0.5 * std::log((2.0 * k + 1.0) * (2.0 * k_prime + 1.0)) - std::log(std::abs(diff)) -
      std::log(k + k_prime + 1.0) +
      0.5 * (log_factorial(k - q) + log_factorial(k_prime - q) - log_factorial(k + q) -
             log_factorial(k_prime + q)) +
      log_double_factorial(k_prime + q) + log_double_factorial(k + q - 1) -
      log_factorial((k_prime - q - 1) / 2) - log_factorial((k - q) / 2);
  return sign * std::exp(log_mag);
}

}  // namespace sphtomo
