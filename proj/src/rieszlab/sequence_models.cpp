#include "rieszlab/sequence_models.hpp"

#include <cmath>
#include <stdexcept>

namespace rieszlab {

namespace {

[[noreturn]] void fail_invalid(const std::string& what) {
  throw std::invalid_argument(what);
}

void require(bool ok, const char* what) {
  if (!ok) fail_invalid(what);
}

}  // namespace

// --- Spectrum ----------------------------------------------------------------

Spectrum Spectrum::linear() {
  Spectrum s;
  s.kind = SpectrumKind::linear;
  return s;
}

Spectrum Spectrum::affine(double c, double d) {
  require(c > 0.0, "affine spectrum needs slope c > 0");
  require(c + d > 0.0, "affine spectrum needs mu_1 = c + d > 0");
  Spectrum s;
  s.kind = SpectrumKind::affine;
  s.c = c;
  s.d = d;
  return s;
}

Spectrum Spectrum::power(double c, double gamma) {
  require(c > 0.0, "power spectrum needs scale c > 0");
  require(gamma > 0.0, "power spectrum needs exponent gamma > 0");
  Spectrum s;
  s.kind = SpectrumKind::power;
  s.c = c;
  s.gamma = gamma;
  return s;
}

Spectrum Spectrum::geometric(double c, double q) {
  require(c > 0.0, "geometric spectrum needs scale c > 0");
  require(q > 1.0, "geometric spectrum needs ratio q > 1");
  Spectrum s;
  s.kind = SpectrumKind::geometric;
  s.c = c;
  s.q = q;
  return s;
}

Spectrum Spectrum::explicit_list(std::vector<double> mu_values) {
  require(!mu_values.empty(), "explicit spectrum needs at least one entry");
  require(mu_values.front() > 0.0, "explicit spectrum needs mu_1 > 0");
  for (std::size_t i = 1; i < mu_values.size(); ++i) {
    require(mu_values[i] > mu_values[i - 1],
            "explicit spectrum must be strictly increasing");
  }
  Spectrum s;
  s.kind = SpectrumKind::explicit_list;
  s.values = std::move(mu_values);
  return s;
}

double mu(const Spectrum& spec, Index n) {
  require(n >= 1, "mu: index must be >= 1");
  switch (spec.kind) {
    case SpectrumKind::linear:
      return static_cast<double>(n);
    case SpectrumKind::affine:
      return spec.c * static_cast<double>(n) + spec.d;
    case SpectrumKind::power:
      return spec.c * std::pow(static_cast<double>(n), spec.gamma);
    case SpectrumKind::geometric:
      return spec.c * std::pow(spec.q, static_cast<double>(n - 1));
    case SpectrumKind::explicit_list:
      if (n > static_cast<Index>(spec.values.size())) {
        throw std::out_of_range("mu: index beyond explicit spectrum length");
      }
      return spec.values[static_cast<std::size_t>(n - 1)];
  }
  fail_invalid("mu: unknown spectrum kind");
}

// --- WeightSequence ----------------------------------------------------------

WeightSequence WeightSequence::zero() { return WeightSequence{}; }

WeightSequence WeightSequence::power(double alpha) {
  require(alpha > 0.0, "power weights need exponent alpha > 0");
  WeightSequence w;
  w.kind = WeightKind::power;
  w.alpha = alpha;
  return w;
}

WeightSequence WeightSequence::sqrtlog_loglog(double a) {
  require(a > 0.0, "sqrtlog-loglog weights need exponent a > 0");
  WeightSequence w;
  w.kind = WeightKind::sqrtlog_loglog;
  w.a = a;
  return w;
}

WeightSequence WeightSequence::log_power(double a) {
  require(a > 0.0, "log-power weights need exponent a > 0");
  WeightSequence w;
  w.kind = WeightKind::log_power;
  w.a = a;
  return w;
}

WeightSequence WeightSequence::gap_supported(double a,
                                             std::vector<double> t_values) {
  require(a > 1.0, "gap-supported weights need spacing exponent a > 1");
  for (double t : t_values) {
    require(t >= 0.0, "gap-supported weights need t values >= 0");
  }
  // Support positions must be distinct; guaranteed for a > 1 but checked.
  Index prev = 0;
  for (Index m = 1; m <= static_cast<Index>(t_values.size()); ++m) {
    Index b = gap_support_position(a, m);
    require(b > prev, "gap-supported positions b_m collide");
    prev = b;
  }
  WeightSequence w;
  w.kind = WeightKind::gap_supported;
  w.a = a;
  w.values = std::move(t_values);
  return w;
}

WeightSequence WeightSequence::counterexample() {
  WeightSequence w;
  w.kind = WeightKind::counterexample;
  return w;
}

WeightSequence WeightSequence::explicit_list(std::vector<double> omegas) {
  for (double v : omegas) {
    require(v >= 0.0, "explicit weights must be nonnegative");
  }
  WeightSequence w;
  w.kind = WeightKind::explicit_list;
  w.values = std::move(omegas);
  return w;
}

Index WeightSequence::support_end() const {
  switch (kind) {
    case WeightKind::zero:
      return 0;
    case WeightKind::gap_supported:
      return values.empty()
                 ? 0
                 : gap_support_position(a, static_cast<Index>(values.size()));
    case WeightKind::explicit_list:
      return static_cast<Index>(values.size());
    default:
      return std::numeric_limits<Index>::max();
  }
}

Index gap_support_position(double a, Index m) {
  require(m >= 1, "gap support position needs m >= 1");
  return static_cast<Index>(std::floor(std::pow(static_cast<double>(m), a)));
}

double counterexample_s(Index k) {
  require(k >= 1, "counterexample s_k needs k >= 1");
  Index m = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(k))));
  bool square = (m * m == k) || ((m + 1) * (m + 1) == k) ||
                (m >= 1 && (m - 1) * (m - 1) == k);
  if (!square) return 0.0;
  return std::sqrt(1.0 - 1.0 / static_cast<double>(k));
}

double counterexample_t(Index j) {
  require(j >= 1, "counterexample t_j needs j >= 1");
  Index k = (j % 2 == 1) ? (j + 1) / 2 : j / 2;
  return counterexample_s(k);
}

namespace {

// gap_supported: recover m with b_m = j, or 0 if j is off the support.
Index gap_support_inverse(double a, Index j, Index m_count) {
  double guess = std::pow(static_cast<double>(j), 1.0 / a);
  Index m0 = static_cast<Index>(std::llround(guess));
  for (Index m = std::max<Index>(1, m0 - 2); m <= m0 + 2; ++m) {
    if (m > m_count) break;
    if (gap_support_position(a, m) == j) return m;
  }
  return 0;
}

}  // namespace

double omega(const WeightSequence& w, Index j) {
  require(j >= 1, "omega: index must be >= 1");
  switch (w.kind) {
    case WeightKind::zero:
      return 0.0;
    case WeightKind::power:
      return std::pow(static_cast<double>(j), -w.alpha);
    case WeightKind::sqrtlog_loglog: {
      // log log j > 0 first holds at j = 3; extend by constancy below that.
      Index jj = std::max<Index>(j, 3);
      double lj = std::log(static_cast<double>(jj));
      return std::pow(lj, -0.5) * std::pow(std::log(lj), -w.a);
    }
    case WeightKind::log_power: {
      Index jj = std::max<Index>(j, 2);
      return std::pow(std::log(static_cast<double>(jj)), -w.a);
    }
    case WeightKind::gap_supported: {
      Index m = gap_support_inverse(w.a, j, static_cast<Index>(w.values.size()));
      if (m == 0) return 0.0;
      return std::sqrt(w.values[static_cast<std::size_t>(m - 1)]);
    }
    case WeightKind::counterexample:
      return std::sqrt(counterexample_t(j) / 2.0);
    case WeightKind::explicit_list:
      if (j > static_cast<Index>(w.values.size())) return 0.0;
      return w.values[static_cast<std::size_t>(j - 1)];
  }
  fail_invalid("omega: unknown weight kind");
}

// --- GapData -------------------------------------------------------------------

GapData gaps(const Spectrum& spec, Index n) {
  require(n >= 1, "gaps: index must be >= 1");
  if (spec.bounded() && n + 1 > spec.max_index()) {
    throw std::out_of_range("gaps: explicit spectrum too short for r_plus");
  }
  GapData g;
  g.n = n;
  g.r_plus = mu(spec, n + 1) - mu(spec, n);
  if (n == 1) {
    g.r_minus = std::numeric_limits<double>::infinity();
    g.r = g.r_plus / 2.0;  // no left neighbor: half the right gap
  } else {
    g.r_minus = mu(spec, n) - mu(spec, n - 1);
    g.r = std::min(g.r_minus, g.r_plus) / 2.0;
  }
  return g;
}

// --- Region -----------------------------------------------------------------

bool Region::contains(std::complex<double> z) const {
  if (kind == Kind::box) {
    return z.real() > -h1 && z.real() <= right && std::abs(z.imag()) <= h2;
  }
  return std::abs(z - std::complex<double>(center, 0.0)) < radius;
}

std::vector<Region> regions(const Spectrum& spec, Index N0, double h1,
                            double h2, Index n_max) {
  require(N0 >= 1, "regions: N0 must be >= 1");
  require(n_max > N0, "regions: n_max must exceed N0");
  require(h1 > 0.0 && h2 > 0.0, "regions: box half-widths must be positive");
  std::vector<Region> out;
  Region box;
  box.kind = Region::Kind::box;
  box.h1 = h1;
  box.h2 = h2;
  box.right = mu(spec, N0) + gaps(spec, N0).r;
  out.push_back(box);
  for (Index k = N0 + 1; k <= n_max; ++k) {
    Region disc;
    disc.kind = Region::Kind::disc;
    disc.index = k;
    disc.center = mu(spec, k);
    disc.radius = gaps(spec, k).r;
    out.push_back(disc);
  }
  return out;
}

// --- TailBound / schatten_sum -------------------------------------------------

std::string to_string(TailMethod method) {
  switch (method) {
    case TailMethod::integral_test:
      return "integral_test";
    case TailMethod::geometric_comparison:
      return "geometric_comparison";
    case TailMethod::declared_zero:
      return "declared_zero";
    case TailMethod::none:
      return "none";
  }
  return "none";
}

TailBound schatten_sum(const Spectrum& spec, double p, Index depth) {
  require(p > 0.0, "schatten_sum: p must be positive");
  require(depth >= 1, "schatten_sum: depth must be >= 1");

  TailBound out;
  Index top = std::min(depth, spec.max_index());
  double sum = 0.0;
  for (Index n = 1; n <= top; ++n) {
    sum += std::pow(mu(spec, n), -p);
  }
  out.value = sum;

  switch (spec.kind) {
    case SpectrumKind::linear:
    case SpectrumKind::affine: {
      double c = spec.kind == SpectrumKind::linear ? 1.0 : spec.c;
      double d = spec.kind == SpectrumKind::linear ? 0.0 : spec.d;
      if (p > 1.0) {
        double edge = c * static_cast<double>(depth) + d;
        out.tail_upper = round_up(std::pow(edge, 1.0 - p) / (c * (p - 1.0)));
        out.method = TailMethod::integral_test;
      } else {
        out.tail_upper = std::numeric_limits<double>::infinity();
        out.known_divergent = true;
      }
      break;
    }
    case SpectrumKind::power: {
      double pg = p * spec.gamma;
      if (pg > 1.0) {
        out.tail_upper = round_up(
            std::pow(spec.c, -p) *
            std::pow(static_cast<double>(depth), 1.0 - pg) / (pg - 1.0));
        out.method = TailMethod::integral_test;
      } else {
        out.tail_upper = std::numeric_limits<double>::infinity();
        out.known_divergent = true;
      }
      break;
    }
    case SpectrumKind::geometric: {
      double ratio = std::pow(spec.q, -p);
      out.tail_upper = round_up(std::pow(spec.c, -p) *
                                std::pow(ratio, static_cast<double>(depth)) /
                                (1.0 - ratio));
      out.method = TailMethod::geometric_comparison;
      break;
    }
    case SpectrumKind::explicit_list: {
      // Finite spectrum: anything past the list is absent, so the enclosure
      // closes with the exact remainder of the list (zero once depth covers it).
      double rest = 0.0;
      for (Index n = top + 1; n <= spec.max_index(); ++n) {
        rest += std::pow(mu(spec, n), -p);
      }
      out.tail_upper = round_up(rest);
      out.method = TailMethod::declared_zero;
      break;
    }
  }
  return out;
}

}  // namespace rieszlab
