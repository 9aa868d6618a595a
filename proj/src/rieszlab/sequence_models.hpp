// sequence_models: spectra mu_n, weight sequences omega_j, gap quantities,
// enclosure regions, and tail-bounded partial sums.
#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace rieszlab {

using Index = std::int64_t;

// Multiply a nonnegative bound upward so downstream comparisons never fail
// on the last floating-point ulp.
inline double round_up(double x) { return x > 0.0 ? x * (1.0 + 1e-12) : x; }

// ---------------------------------------------------------------------------
// Spectrum: strictly increasing, strictly positive diagonal entries mu_n.
// ---------------------------------------------------------------------------

enum class SpectrumKind { linear, affine, power, geometric, explicit_list };

struct Spectrum {
  SpectrumKind kind = SpectrumKind::linear;
  double c = 1.0;              // scale for affine/power/geometric
  double d = 0.0;              // offset for affine
  double gamma = 1.0;          // exponent for power
  double q = 2.0;              // ratio for geometric (mu_n = c * q^(n-1))
  std::vector<double> values;  // explicit_list entries, index 1 at values[0]

  static Spectrum linear();
  static Spectrum affine(double c, double d);
  static Spectrum power(double c, double gamma);
  static Spectrum geometric(double c, double q);
  static Spectrum explicit_list(std::vector<double> mu_values);

  bool bounded() const { return kind == SpectrumKind::explicit_list; }
  // Largest representable index (list length, or effectively unbounded).
  Index max_index() const {
    return bounded() ? static_cast<Index>(values.size())
                     : std::numeric_limits<Index>::max();
  }
};

double mu(const Spectrum& spec, Index n);

// ---------------------------------------------------------------------------
// WeightSequence: nonnegative omega_j controlling |v(psi_j, psi_k)| <= w_j w_k.
// ---------------------------------------------------------------------------

enum class WeightKind {
  zero,
  power,           // omega_j = j^(-alpha)
  sqrtlog_loglog,  // omega_j = (log j)^(-1/2) (log log j)^(-a), extended at small j
  log_power,       // omega_j = (log j)^(-a), extended at j = 1
  gap_supported,   // omega_{b_m}^2 = t_m at b_m = floor(m^a), zero elsewhere
  counterexample,  // omega_j^2 = t_j / 2 with paired block coefficients
  explicit_list    // omega_j given directly; zero beyond the list
};

struct WeightSequence {
  WeightKind kind = WeightKind::zero;
  double alpha = 1.0;          // power exponent
  double a = 1.0;              // log-family exponent / gap-support spacing
  std::vector<double> values;  // gap_supported t-values or explicit omegas

  static WeightSequence zero();
  static WeightSequence power(double alpha);
  static WeightSequence sqrtlog_loglog(double a);
  static WeightSequence log_power(double a);
  static WeightSequence gap_supported(double a, std::vector<double> t_values);
  static WeightSequence counterexample();
  static WeightSequence explicit_list(std::vector<double> omegas);

  // True if omega_j = 0 for all j beyond support_end().
  bool finitely_supported() const {
    return kind == WeightKind::zero || kind == WeightKind::gap_supported ||
           kind == WeightKind::explicit_list;
  }
  Index support_end() const;
};

double omega(const WeightSequence& w, Index j);

// Support position b_m = floor(m^a) of the gap-supported family.
Index gap_support_position(double a, Index m);

// Block coefficient t_j of the counterexample family: t_{2k-1} = t_{2k} = s_k
// with s_k = sqrt(1 - 1/k) at perfect squares k and s_k = 0 otherwise.
double counterexample_t(Index j);
double counterexample_s(Index k);

// ---------------------------------------------------------------------------
// GapData: one-sided gaps and the half-min gap r_n.
// ---------------------------------------------------------------------------

struct GapData {
  Index n = 0;
  double r_plus = 0.0;   // mu_{n+1} - mu_n
  double r_minus = 0.0;  // mu_n - mu_{n-1}; +infinity at n = 1
  double r = 0.0;        // min(r_minus, r_plus) / 2
};

GapData gaps(const Spectrum& spec, Index n);

// ---------------------------------------------------------------------------
// Region: the low-energy box and the per-eigenvalue discs.
// ---------------------------------------------------------------------------

struct Region {
  enum class Kind { box, disc };
  Kind kind = Kind::disc;
  // box: Re z in (-h1, right], |Im z| <= h2
  double h1 = 0.0;
  double h2 = 0.0;
  double right = 0.0;
  // disc: open ball of the given radius around (center, 0); index is its k
  Index index = 0;
  double center = 0.0;
  double radius = 0.0;

  bool contains(std::complex<double> z) const;
};

// Box around mu_1..mu_N0 followed by discs for N0 < k <= n_max.
std::vector<Region> regions(const Spectrum& spec, Index N0, double h1,
                            double h2, Index n_max);

// ---------------------------------------------------------------------------
// TailBound: enclosure [value, value + tail_upper] for nonnegative series.
// ---------------------------------------------------------------------------

enum class TailMethod { integral_test, geometric_comparison, declared_zero, none };

struct TailBound {
  double value = 0.0;
  double tail_upper = 0.0;
  TailMethod method = TailMethod::none;
  bool known_divergent = false;

  bool conclusive() const { return method != TailMethod::none; }
  double upper() const { return value + tail_upper; }
};

std::string to_string(TailMethod method);

// Partial sum of mu_n^(-p) over n <= depth with a family-specific tail bound.
TailBound schatten_sum(const Spectrum& spec, double p, Index depth);

}  // namespace rieszlab
