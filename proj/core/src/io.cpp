#include "sphtomo/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <unistd.h>

#include "sphtomo/error.hpp"

namespace sphtomo::io {

namespace {

constexpr std::string_view kMeasurementHeader = "theta,phi,weight,two_j,two_m";
constexpr std::string_view kCoefficientHeader = "k,q,re,im";
constexpr std::size_t kMaxDiagnostics = 20;

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_number(std::string_view s, int& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Iterates over lines with 1-based numbers; comment and blank lines are
// passed to on_comment (may be null) instead of on_line.
template <typename OnLine, typename OnComment>
void for_each_line(std::string_view text, OnLine&& on_line, OnComment&& on_comment) {
  std::size_t number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    ++number;
    if (line.empty()) {
    } else if (line.front() == '#') {
      on_comment(number, line);
    } else {
      on_line(number, line);
    }
    start = end + 1;
  }
}

class Diagnostics {
 public:
  explicit Diagnostics(std::string_view source) : source_(source) {}

  void add(std::size_t line, const std::string& message) {
    ++count_;
    if (count_ <= kMaxDiagnostics) text_ += fmt::format("{}:{}: {}\n", source_, line, message);
  }
  void throw_if_any() const {
    if (count_ == 0) return;
    std::string msg = text_;
    if (count_ > kMaxDiagnostics) msg += fmt::format("... {} more error(s)\n", count_ - kMaxDiagnostics);
    if (!msg.empty() && msg.back() == '\n') msg.pop_back();
    throw ValidationError(msg);
  }

 private:
  std::string source_;
  std::string text_;
  std::size_t count_ = 0;
};

}  // namespace

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += fmt::format(".tmp{}", static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError(fmt::format("error writing '{}'", tmp.string()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(fmt::format("cannot move output into place at '{}'", path.string()));
  }
}

// ---------------------------------------------------------------------------
// measurements

std::vector<MeasurementRecord> parse_measurements_text(std::string_view text, std::string_view source) {
  Diagnostics diag(source);
  std::vector<MeasurementRecord> records;
  bool have_header = false;
  for_each_line(
      text,
      [&](std::size_t n, std::string_view line) {
        if (!have_header) {
          if (line != kMeasurementHeader) {
            diag.add(n, fmt::format("expected header '{}', found '{}'", kMeasurementHeader, line));
          }
          have_header = true;
          return;
        }
        const auto f = split(line, ',');
        if (f.size() != 5) {
          diag.add(n, fmt::format("expected 5 fields, found {}", f.size()));
          return;
        }
        MeasurementRecord r;
        double w = 0.0;
        if (!parse_number(f[0], r.theta)) return diag.add(n, fmt::format("bad theta '{}'", f[0]));
        if (!parse_number(f[1], r.phi)) return diag.add(n, fmt::format("bad phi '{}'", f[1]));
        if (!f[2].empty()) {
          if (!parse_number(f[2], w)) return diag.add(n, fmt::format("bad weight '{}'", f[2]));
          r.weight = w;
        }
        if (!parse_number(f[3], r.two_j)) return diag.add(n, fmt::format("bad two_j '{}'", f[3]));
        if (!parse_number(f[4], r.two_m)) return diag.add(n, fmt::format("bad two_m '{}'", f[4]));
        try {
          r.validate();
        } catch (const ValidationError& e) {
          return diag.add(n, e.what());
        }
        records.push_back(r);
      },
      [](std::size_t, std::string_view) {});
  if (!have_header) diag.add(1, fmt::format("empty file; expected header '{}'", kMeasurementHeader));
  diag.throw_if_any();
  return records;
}

std::vector<MeasurementRecord> parse_measurements(const std::filesystem::path& path) {
  return parse_measurements_text(read_text(path), path.string());
}

std::string format_measurements(const std::vector<MeasurementRecord>& records) {
  std::string out(kMeasurementHeader);
  out += '\n';
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{}\n", format_double(r.theta), format_double(r.phi),
                       r.weight ? format_double(*r.weight) : std::string(), r.two_j, r.two_m);
  }
  return out;
}

void write_measurements(const std::filesystem::path& path, const std::vector<MeasurementRecord>& records) {
  write_text_atomic(path, format_measurements(records));
}

// ---------------------------------------------------------------------------
// coefficients

std::string format_coefficients(const CoefficientFile& c) {
  const auto& s = c.state;
  std::string out = fmt::format("# two_j_ref={}\n# kmax={}\n# sigma_n={}\n# mean_two_j={}\n", s.two_j_ref(),
                                s.kmax(), format_double(c.sigma_n), format_double(c.mean_two_j));
  out += kCoefficientHeader;
  out += '\n';
  for (int k = 0; k <= s.kmax(); ++k)
    for (int q = 0; q <= k; ++q) {
      const auto v = s(k, q);
      out += fmt::format("{},{},{},{}\n", k, q, format_double(v.real()), format_double(v.imag()));
    }
  return out;
}

void write_coefficients(const std::filesystem::path& path, const CoefficientFile& c) {
  write_text_atomic(path, format_coefficients(c));
}

CoefficientFile parse_coefficients_text(std::string_view text, std::string_view source) {
  Diagnostics diag(source);
  std::map<std::string, std::string, std::less<>> meta;
  struct Entry {
    std::size_t line;
    int k, q;
    double re, im;
  };
  std::vector<Entry> entries;
  bool have_header = false;
  for_each_line(
      text,
      [&](std::size_t n, std::string_view line) {
        if (!have_header) {
          if (line != kCoefficientHeader)
            diag.add(n, fmt::format("expected header '{}', found '{}'", kCoefficientHeader, line));
          have_header = true;
          return;
        }
        const auto f = split(line, ',');
        Entry e{n, 0, 0, 0.0, 0.0};
        if (f.size() != 4 || !parse_number(f[0], e.k) || !parse_number(f[1], e.q) ||
            !parse_number(f[2], e.re) || !parse_number(f[3], e.im))
          return diag.add(n, "expected 'k,q,re,im' with integer k, q and finite re, im");
        if (e.k < 0 || e.q < 0 || e.q > e.k) return diag.add(n, "need 0 <= q <= k");
        entries.push_back(e);
      },
      [&](std::size_t, std::string_view line) {
        line.remove_prefix(1);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) return;
        meta.emplace(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
      });
  if (!have_header) diag.add(1, fmt::format("empty file; expected header '{}'", kCoefficientHeader));

  const auto get_int = [&](std::string_view key, int& out) {
    const auto it = meta.find(key);
    if (it == meta.end() || !parse_number(it->second, out))
      diag.add(1, fmt::format("missing or malformed metadata '# {}=...'", key));
  };
  const auto get_double = [&](std::string_view key, double& out) {
    const auto it = meta.find(key);
    if (it != meta.end() && !parse_number(it->second, out))
      diag.add(1, fmt::format("malformed metadata '# {}={}'", key, it->second));
  };
  int two_j_ref = 0, kmax = -1;
  CoefficientFile c;
  get_int("two_j_ref", two_j_ref);
  get_int("kmax", kmax);
  get_double("sigma_n", c.sigma_n);
  c.mean_two_j = two_j_ref;
  get_double("mean_two_j", c.mean_two_j);
  diag.throw_if_any();
  if (kmax < 0 || two_j_ref < 0) throw ValidationError(fmt::format("{}: kmax and two_j_ref must be >= 0", source));

  c.state = SphericalState(two_j_ref, kmax);
  std::vector<char> seen(SphericalState::index(kmax + 1, 0), 0);
  for (const auto& e : entries) {
    if (e.k > kmax) {
      diag.add(e.line, fmt::format("k={} exceeds kmax={}", e.k, kmax));
      continue;
    }
    auto& flag = seen[SphericalState::index(e.k, e.q)];
    if (flag) {
      diag.add(e.line, fmt::format("duplicate entry k={}, q={}", e.k, e.q));
      continue;
    }
    flag = 1;
    try {
      c.state.set(e.k, e.q, {e.re, e.im});
    } catch (const std::exception& ex) {
      diag.add(e.line, ex.what());
    }
  }
  for (int k = 0; k <= kmax; ++k)
    for (int q = 0; q <= k; ++q)
      if (!seen[SphericalState::index(k, q)]) {
        diag.add(1, fmt::format("missing entry k={}, q={}", k, q));
        k = kmax + 1;
        break;
      }
  diag.throw_if_any();
  return c;
}

CoefficientFile read_coefficients(const std::filesystem::path& path) {
  return parse_coefficients_text(read_text(path), path.string());
}

// ---------------------------------------------------------------------------
// spectra, grids, images

std::string format_spectrum(const std::vector<double>& c) {
  std::string out = "k,C_k\n";
  for (std::size_t k = 0; k < c.size(); ++k) out += fmt::format("{},{}\n", k, format_double(c[k]));
  return out;
}

void write_spectrum(const std::filesystem::path& path, const std::vector<double>& c) {
  write_text_atomic(path, format_spectrum(c));
}

std::string format_grid(const WignerGrid& g) {
  std::string out = "theta,phi,W\n";
  for (int i = 0; i < g.n_theta(); ++i)
    for (int l = 0; l < g.n_phi(); ++l)
      out += fmt::format("{},{},{}\n", format_double(g.theta(i)), format_double(g.phi(l)),
                         format_double(g.at(i, l)));
  return out;
}

void write_grid(const std::filesystem::path& path, const WignerGrid& g) {
  write_text_atomic(path, format_grid(g));
}

std::string format_pgm(const WignerGrid& g) {
  const auto v = g.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double wmin = *lo;
  const double wmax = *hi;
  const double span = wmax - wmin;
  std::string out = fmt::format("P2\n# wmin={} wmax={}\n{} {}\n65535\n", format_double(wmin),
                                format_double(wmax), g.n_phi(), g.n_theta());
  for (int i = 0; i < g.n_theta(); ++i) {
    std::size_t width = 0;
    for (int l = 0; l < g.n_phi(); ++l) {
      const long px = span > 0.0 ? std::lround((g.at(i, l) - wmin) / span * 65535.0) : 0;
      const std::string cell = fmt::format("{}", std::clamp(px, 0L, 65535L));
      // plain PGM lines stay within 70 characters
      if (width > 0 && width + 1 + cell.size() > 70) {
        out += '\n';
        width = 0;
      }
      if (width > 0) {
        out += ' ';
        ++width;
      }
      out += cell;
      width += cell.size();
    }
    out += '\n';
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const WignerGrid& g) {
  write_text_atomic(path, format_pgm(g));
}

// ---------------------------------------------------------------------------
// squeezing

namespace {

std::string optional_db(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string format_squeezing(const SqueezingReport& r) {
  std::string out = fmt::format("# phi_s={}\n# v_coh={}\n# v_min={}\n# sigma_n={}\n# squeezing_db={}\n",
                                format_double(r.phi_s), format_double(r.v_coh), format_double(r.v_min),
                                format_double(r.sigma_N),
                                r.squeezing_db ? format_double(*r.squeezing_db) : "nonpositive");
  out += "phi,v_direct,v_fit,fit_ok,db_direct,db_fit\n";
  for (const auto& p : r.variance_curve)
    out += fmt::format("{},{},{},{},{},{}\n", format_double(p.phi), format_double(p.v_direct),
                       format_double(p.v_fit), p.fit_ok ? 1 : 0, optional_db(p.db_direct),
                       optional_db(p.db_fit));
  return out;
}

void write_squeezing(const std::filesystem::path& path, const SqueezingReport& r) {
  write_text_atomic(path, format_squeezing(r));
}

std::string squeezing_summary(const SqueezingReport& r) {
  constexpr double deg = 180.0 / std::numbers::pi;
  const auto db = [](const std::optional<double>& v) {
    return v ? fmt::format("{:+.2f} dB", *v) : std::string("n/a (variance below noise floor)");
  };
  std::string out;
  out += fmt::format("minimum-variance axis   phi_s = {:.2f} deg\n", r.phi_s * deg);
  out += fmt::format("variance (fit)          V     = {:.4f}\n", r.v_min);
  out += fmt::format("coherent reference      V_coh = {:.4f}\n", r.v_coh);
  out += fmt::format("squeezing (fit)         {}\n", db(r.squeezing_db));
  out += fmt::format("squeezing (moments)     {}\n", db(r.squeezing_db_direct));
  if (r.failed_fits > 0)
    out += fmt::format("{} of {} fits failed; direct moments used there\n", r.failed_fits,
                       r.variance_curve.size());
  return out;
}

}  // namespace sphtomo::io
