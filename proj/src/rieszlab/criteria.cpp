#include "rieszlab/criteria.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rieszlab {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double sq(double x) { return x * x; }

// omega_j^2, the summand weight everywhere below.
double weight_t(const WeightSequence& w, Index j) { return sq(omega(w, j)); }

bool linear_like(const Spectrum& s) {
  return s.kind == SpectrumKind::linear || s.kind == SpectrumKind::affine;
}

// Slope m with mu_j >= m * j for linear/affine spectra (m > 0).
double linear_minorant(const Spectrum& s) {
  return s.kind == SpectrumKind::linear ? 1.0 : s.c + std::min(s.d, 0.0);
}

double unit_gap(const Spectrum& s) {
  return s.kind == SpectrumKind::linear ? 1.0 : s.c;
}

// Upper bound for sum_{j > D} 1 / mu_j where it converges.
std::pair<double, TailMethod> mu_inverse_tail(const Spectrum& spec, Index D) {
  switch (spec.kind) {
    case SpectrumKind::power:
      if (spec.gamma > 1.0) {
        return {std::pow(static_cast<double>(D), 1.0 - spec.gamma) /
                    (spec.c * (spec.gamma - 1.0)),
                TailMethod::integral_test};
      }
      return {0.0, TailMethod::none};
    case SpectrumKind::geometric:
      return {std::pow(spec.q, -static_cast<double>(D)) /
                  (spec.c * (1.0 - 1.0 / spec.q)),
              TailMethod::geometric_comparison};
    default:
      return {0.0, TailMethod::none};
  }
}

// Upper bound for sum_{j > D} omega_j^2 / mu_j with the method that proves it.
std::pair<double, TailMethod> rho_tail_upper(const Spectrum& spec,
                                             const WeightSequence& w, Index D) {
  if (spec.bounded()) {
    double rest = 0.0;
    for (Index j = D + 1; j <= spec.max_index(); ++j) {
      rest += weight_t(w, j) / mu(spec, j);
    }
    return {round_up(rest), TailMethod::declared_zero};
  }
  if (w.finitely_supported()) {
    double rest = 0.0;
    for (Index j = D + 1; j <= w.support_end(); ++j) {
      rest += weight_t(w, j) / mu(spec, j);
    }
    return {round_up(rest), TailMethod::declared_zero};
  }

  if (linear_like(spec)) {
    const double m = linear_minorant(spec);
    const double Dd = static_cast<double>(D);
    switch (w.kind) {
      case WeightKind::power:
        // summand <= j^(-2 alpha - 1) / m, decreasing: integral test
        return {round_up(std::pow(Dd, -2.0 * w.alpha) / (2.0 * w.alpha * m)),
                TailMethod::integral_test};
      case WeightKind::log_power:
        if (w.a > 0.5 && D >= 2) {
          return {round_up(std::pow(std::log(Dd), 1.0 - 2.0 * w.a) /
                           ((2.0 * w.a - 1.0) * m)),
                  TailMethod::integral_test};
        }
        break;
      case WeightKind::sqrtlog_loglog:
        // summand 1/(j log j (log log j)^{2a}) decreases past e^e
        if (w.a > 0.5 && D >= 16) {
          return {round_up(std::pow(std::log(std::log(Dd)), 1.0 - 2.0 * w.a) /
                           ((2.0 * w.a - 1.0) * m)),
                  TailMethod::integral_test};
        }
        break;
      case WeightKind::counterexample: {
        // block m contributes <= (3/4) m^{-2}; blocks past D start above
        // m = floor(sqrt(D/2)), and sum_{m > M} m^{-2} <= 1/M
        if (D >= 2) {
          Index M0 = static_cast<Index>(std::floor(std::sqrt(Dd / 2.0)));
          if (M0 >= 1) {
            return {round_up(0.75 / (static_cast<double>(M0) * m)),
                    TailMethod::integral_test};
          }
        }
        break;
      }
      default:
        break;
    }
    return {0.0, TailMethod::none};
  }

  // Power/geometric spectra: bound the weight by its value at D+1 (families
  // monotone past their small-index plateau) and push the tail onto 1/mu_j.
  double sup_t = 0.0;
  switch (w.kind) {
    case WeightKind::power:
    case WeightKind::log_power:
    case WeightKind::sqrtlog_loglog:
      if (D < 16) return {0.0, TailMethod::none};
      sup_t = weight_t(w, D + 1);
      break;
    case WeightKind::counterexample:
      sup_t = 0.5;  // omega_j^2 = t_j / 2 <= 1/2
      break;
    default:
      return {0.0, TailMethod::none};
  }
  auto [inv_tail, method] = mu_inverse_tail(spec, D);
  if (method == TailMethod::none) return {0.0, TailMethod::none};
  return {round_up(sup_t * inv_tail), method};
}

Index clamp_depth(const Spectrum& spec, Index depth) {
  return std::min(depth, spec.max_index());
}

// Smallest 5-smooth integer >= n (sizes kissfft handles at full speed).
Index next_fast_len(Index n) {
  for (Index m = std::max<Index>(n, 1);; ++m) {
    Index r = m;
    for (Index p : {2, 3, 5}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

// S[n-1] = sum_{j != n, j <= D} t_j / |n - j| for n = 1..H via one linear
// convolution with the kernel 1/|i| (zero at i = 0).
std::vector<double> hilbert_convolution(const std::vector<double>& t, Index H) {
  const Index D = static_cast<Index>(t.size());
  const Index L = D + H - 1;  // kernel offsets -(D-1) .. (H-1)
  const Index M = next_fast_len(D + L - 1);

  std::vector<std::complex<double>> buf(static_cast<std::size_t>(M));
  std::vector<std::complex<double>> ft_signal;
  for (Index j = 0; j < D; ++j) buf[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(j)];
  Eigen::FFT<double> fft;
  fft.fwd(ft_signal, buf);

  std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
  for (Index p = 0; p < L; ++p) {
    Index delta = p - (D - 1);
    if (delta != 0) {
      buf[static_cast<std::size_t>(p)] = 1.0 / std::abs(static_cast<double>(delta));
    }
  }
  std::vector<std::complex<double>> ft_kernel;
  fft.fwd(ft_kernel, buf);

  for (Index i = 0; i < M; ++i) {
    ft_signal[static_cast<std::size_t>(i)] *= ft_kernel[static_cast<std::size_t>(i)];
  }
  ft_kernel.clear();
  ft_kernel.shrink_to_fit();
  fft.inv(buf, ft_signal);
  ft_signal.clear();
  ft_signal.shrink_to_fit();

  std::vector<double> S(static_cast<std::size_t>(H));
  for (Index n = 1; n <= H; ++n) {
    S[static_cast<std::size_t>(n - 1)] = buf[static_cast<std::size_t>(n + D - 2)].real();
  }
  return S;
}

// Per-n factor turning the rho tail into a tail for sums against
// 1/(mu_j - x): 1 / (1 - x / mu_{D+1}), valid while x < mu_{D+1}.
double tail_growth_factor(const Spectrum& spec, double x, Index D) {
  if (x <= 0.0) return 1.0;
  if (spec.bounded()) return 1.0;  // exact remainders, no factor needed
  double edge = mu(spec, D + 1);
  if (edge <= x) return std::numeric_limits<double>::infinity();
  return 1.0 / (1.0 - x / edge);
}

struct SuffixTable {
  std::vector<double> sup_value;   // index n-1: max value over [n, H]
  std::vector<double> sup_upper;   // index n-1: max upper over [n, H]
  std::vector<Index> arg_upper;    // index of the (first) max of upper
};

SuffixTable make_suffix(const GScan& scan) {
  const Index H = scan.horizon;
  SuffixTable s;
  s.sup_value.resize(static_cast<std::size_t>(H));
  s.sup_upper.resize(static_cast<std::size_t>(H));
  s.arg_upper.resize(static_cast<std::size_t>(H));
  double mv = -1.0, mu_ = -1.0;
  Index am = H;
  for (Index n = H; n >= 1; --n) {
    std::size_t i = static_cast<std::size_t>(n - 1);
    mv = std::max(mv, scan.value[i]);
    if (scan.upper[i] >= mu_) {  // >=: prefer the earliest attaining index
      mu_ = scan.upper[i];
      am = n;
    }
    s.sup_value[i] = mv;
    s.sup_upper[i] = mu_;
    s.arg_upper[i] = am;
  }
  return s;
}

SigmaResult sigma_from_suffix(const GScan& scan, const SuffixTable& suf,
                              Index N) {
  require(N >= 2, "sigma_N needs N >= 2");
  require(N <= scan.horizon, "sigma_N: N beyond the horizon");
  std::size_t i = static_cast<std::size_t>(N - 1);
  SigmaResult out;
  out.bound.value = suf.sup_value[i];
  out.bound.tail_upper = round_up(suf.sup_upper[i] - suf.sup_value[i]);
  out.bound.method = scan.method;
  Index edge = scan.horizon - std::max<Index>(1, scan.horizon / 100);
  out.at_boundary = suf.arg_upper[i] >= edge;
  return out;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::fails:
      return "fails";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

// --- scalar transforms --------------------------------------------------------

TailBound g_transform(const Spectrum& spec, const WeightSequence& w, Index n,
                      Index depth) {
  require(n >= 1, "g_transform: n >= 1 required");
  require(depth >= n, "g_transform: depth >= n required");
  const Index D = clamp_depth(spec, depth);
  const double mu_n = mu(spec, n);

  double sum = 0.0;
  for (Index j = 1; j <= D; ++j) {
    if (j == n) continue;
    double tj = weight_t(w, j);
    if (tj != 0.0) sum += tj / std::abs(mu_n - mu(spec, j));
  }
  sum += weight_t(w, n) / gaps(spec, n).r;

  TailBound out;
  out.value = sum;
  auto [tail, method] = rho_tail_upper(spec, w, D);
  out.method = method;
  if (method != TailMethod::none) {
    double factor = tail_growth_factor(spec, mu_n, D);
    if (std::isinf(factor)) {
      out.method = TailMethod::none;
      out.tail_upper = 0.0;
    } else {
      out.tail_upper = round_up(tail * factor);
    }
  }
  return out;
}

TailBound rho_sum(const Spectrum& spec, const WeightSequence& w, Index from,
                  Index depth) {
  require(from >= 1, "rho_sum: from >= 1 required");
  require(depth >= from, "rho_sum: depth >= from required");
  const Index D = clamp_depth(spec, depth);
  double sum = 0.0;
  for (Index j = from; j <= D; ++j) {
    double tj = weight_t(w, j);
    if (tj != 0.0) sum += tj / mu(spec, j);
  }
  TailBound out;
  out.value = sum;
  auto [tail, method] = rho_tail_upper(spec, w, D);
  out.method = method;
  out.tail_upper = method == TailMethod::none ? 0.0 : tail;
  return out;
}

TailBound sigma_prime_sample(const Spectrum& spec, const WeightSequence& w,
                             std::complex<double> z, Index depth) {
  require(depth >= 1, "sigma_prime_sample: depth >= 1 required");
  const Index D = clamp_depth(spec, depth);
  double sum = 0.0;
  for (Index j = 1; j <= (spec.bounded() ? spec.max_index() : D); ++j) {
    double mj = mu(spec, j);
    if (z.imag() == 0.0 && z.real() == mj) {
      throw std::invalid_argument("sigma_prime_sample: z lies on the spectrum");
    }
    double tj = weight_t(w, j);
    if (tj != 0.0) sum += tj / std::abs(z - std::complex<double>(mj, 0.0));
  }
  TailBound out;
  out.value = sum;
  if (spec.bounded()) {
    out.method = TailMethod::declared_zero;
    return out;
  }
  auto [tail, method] = rho_tail_upper(spec, w, D);
  out.method = method;
  if (method != TailMethod::none) {
    double factor = tail_growth_factor(spec, z.real(), D);
    if (std::isinf(factor)) {
      out.method = TailMethod::none;
    } else {
      out.tail_upper = round_up(tail * factor);
    }
  }
  return out;
}

TailBound relative_form_bound(const Spectrum& spec, const WeightSequence& w,
                              double z0, Index depth) {
  require(z0 >= 0.0, "relative_form_bound: z0 >= 0 required");
  require(depth >= 1, "relative_form_bound: depth >= 1 required");
  const Index D = clamp_depth(spec, depth);
  double sum = 0.0;
  for (Index j = 1; j <= D; ++j) {
    double tj = weight_t(w, j);
    if (tj != 0.0) sum += tj / (mu(spec, j) + z0);
  }
  TailBound out;
  out.value = sum;
  // 1/(mu_j + z0) <= 1/mu_j, so the rho tail covers the shifted sum too.
  auto [tail, method] = rho_tail_upper(spec, w, D);
  out.method = method;
  out.tail_upper = method == TailMethod::none ? 0.0 : tail;
  return out;
}

// --- window suprema -----------------------------------------------------------

GScan g_scan(const Spectrum& spec, const WeightSequence& w, Index horizon,
             Index depth) {
  require(horizon >= 1, "g_scan: horizon >= 1 required");
  require(depth >= horizon, "g_scan: depth >= horizon required");
  if (spec.bounded()) {
    require(horizon < spec.max_index(),
            "g_scan: horizon must leave the last explicit gap defined");
  }
  const Index D = clamp_depth(spec, depth);
  const Index H = horizon;

  GScan scan;
  scan.horizon = H;
  scan.depth = D;
  scan.value.resize(static_cast<std::size_t>(H));
  scan.upper.resize(static_cast<std::size_t>(H));

  std::vector<double> t(static_cast<std::size_t>(D));
  for (Index j = 1; j <= D; ++j) t[static_cast<std::size_t>(j - 1)] = weight_t(w, j);

  std::vector<double> S;
  if (linear_like(spec)) {
    S = hilbert_convolution(t, H);
    const double g0 = unit_gap(spec);
    const double r = g0 / 2.0;  // every r_n, including n = 1 by convention
    for (Index n = 1; n <= H; ++n) {
      std::size_t i = static_cast<std::size_t>(n - 1);
      scan.value[i] = S[i] / g0 + t[i] / r;
    }
  } else {
    if (H * D > 200000000) {
      throw std::runtime_error(
          "g_scan: window too large for direct summation on this spectrum");
    }
    for (Index n = 1; n <= H; ++n) {
      double mu_n = mu(spec, n);
      double sum = 0.0;
      for (Index j = 1; j <= D; ++j) {
        if (j == n) continue;
        double tj = t[static_cast<std::size_t>(j - 1)];
        if (tj != 0.0) sum += tj / std::abs(mu_n - mu(spec, j));
      }
      scan.value[static_cast<std::size_t>(n - 1)] =
          sum + t[static_cast<std::size_t>(n - 1)] / gaps(spec, n).r;
    }
  }

  auto [tail, method] = rho_tail_upper(spec, w, D);
  scan.method = method;
  for (Index n = 1; n <= H; ++n) {
    std::size_t i = static_cast<std::size_t>(n - 1);
    if (method == TailMethod::none) {
      scan.upper[i] = scan.value[i];
      continue;
    }
    double factor = tail_growth_factor(spec, mu(spec, n), D);
    if (std::isinf(factor)) {
      scan.method = TailMethod::none;
      scan.upper[i] = scan.value[i];
    } else {
      scan.upper[i] = scan.value[i] + round_up(tail * factor);
    }
  }
  return scan;
}

SigmaResult sigma_N(const Spectrum& spec, const WeightSequence& w, Index N,
                    Index n_horizon, Index depth) {
  require(N >= 2, "sigma_N: N >= 2 required");
  require(n_horizon >= N, "sigma_N: horizon >= N required");
  GScan scan = g_scan(spec, w, n_horizon, std::max(depth, n_horizon));
  SuffixTable suf = make_suffix(scan);
  return sigma_from_suffix(scan, suf, N);
}

// --- Schur machinery ----------------------------------------------------------

std::optional<Index> k_N(const Spectrum& spec, Index N) {
  require(N >= 2, "k_N: N >= 2 required");
  double target = mu(spec, N) - gaps(spec, N).r;
  if (2.0 * mu(spec, 1) > target) return std::nullopt;
  Index lo = 1, hi = N;  // invariant: 2 mu_lo <= target
  while (lo < hi) {
    Index mid = lo + (hi - lo + 1) / 2;
    if (2.0 * mu(spec, mid) <= target) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

namespace {

SchurBounds schur_from_scan(const Spectrum& spec, const WeightSequence& w,
                            const GScan& scan, const SuffixTable& suf, Index N,
                            Index rho_depth) {
  auto k = k_N(spec, N);
  require(k.has_value(), "schur bounds need k_N to exist at this N");
  SchurBounds out;
  out.k = *k;
  out.rho_N = rho_sum(spec, w, N, rho_depth);
  SigmaResult sN = sigma_from_suffix(scan, suf, N);
  SigmaResult sk = *k >= 2 ? sigma_from_suffix(scan, suf, *k)
                           : sigma_from_suffix(scan, suf, 2);
  if (*k < 2) {
    // sigma over n >= 1 adds the n = 1 entry to the window
    sk.bound.value = std::max(sk.bound.value, scan.value[0]);
    double up = std::max(sk.bound.value + sk.bound.tail_upper, scan.upper[0]);
    sk.bound.tail_upper = up - sk.bound.value;
  }
  out.sigma_kN = sk.bound;
  if (!sN.bound.conclusive() || !sk.bound.conclusive() ||
      !out.rho_N.conclusive()) {
    throw std::runtime_error("schur bounds: inconclusive enclosure");
  }
  double prod = sN.bound.upper() *
                std::max(2.0 * out.rho_N.upper(), sk.bound.upper());
  out.boundM = std::sqrt(prod);
  out.boundMprime = 2.0 * out.boundM;
  return out;
}

}  // namespace

SchurBounds schur_bounds(const Spectrum& spec, const WeightSequence& w,
                         Index N, Index depth) {
  require(depth >= N, "schur_bounds: depth >= N required");
  Index horizon = spec.bounded() ? std::min(depth, spec.max_index() - 1) : depth;
  GScan scan = g_scan(spec, w, horizon, 2 * depth);
  SuffixTable suf = make_suffix(scan);
  return schur_from_scan(spec, w, scan, suf, N, 2 * depth);
}

double matrix_M_norm(const Spectrum& spec, const WeightSequence& w, Index N,
                     Index size, MatrixVariant variant,
                     const std::vector<double>& angles) {
  require(N >= 1, "matrix_M_norm: N >= 1 required");
  require(size >= N, "matrix_M_norm: size >= N required");
  require(angles.empty() || angles.size() == static_cast<std::size_t>(size),
          "matrix_M_norm: angle list must be empty or one angle per row");

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size, size);
  for (Index n = 1; n <= size; ++n) {
    if (n < N) continue;  // chi_N kills rows below N
    double wn = omega(w, n);
    if (wn == 0.0) continue;
    double mu_n = mu(spec, n);
    if (variant == MatrixVariant::M) {
      for (Index kk = 1; kk <= size; ++kk) {
        if (kk == n) continue;
        double wk = omega(w, kk);
        if (wk == 0.0) continue;
        A(n - 1, kk - 1) = wn * wk / std::abs(mu_n - mu(spec, kk));
      }
    } else {
      double rn = gaps(spec, n).r;
      double theta = angles.empty() ? 0.0 : angles[static_cast<std::size_t>(n - 1)];
      double zr = mu_n + rn * std::cos(theta);
      double zi = rn * std::sin(theta);
      for (Index kk = 1; kk <= size; ++kk) {
        double wk = omega(w, kk);
        if (wk == 0.0) continue;
        A(n - 1, kk - 1) = wn * wk / std::hypot(zr - mu(spec, kk), zi);
      }
    }
  }

  // Power iteration on the Gram form A^T A for the largest singular value.
  std::mt19937_64 gen(0x517cc1b727220a95ULL);
  Eigen::VectorXd v(size);
  for (Index i = 0; i < size; ++i) {
    double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    v(i) = 2.0 * u - 1.0;
  }
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;

  const int cap = 100000;
  double lam_prev = -1.0;
  for (int it = 0; it < cap; ++it) {
    Eigen::VectorXd Av = A * v;
    double lam = Av.squaredNorm();  // Rayleigh quotient of A^T A at unit v
    if (lam == 0.0) return 0.0;
    Eigen::VectorXd back = A.transpose() * Av;
    double nb = back.norm();
    if (nb == 0.0) return 0.0;
    v = back / nb;
    if (lam_prev >= 0.0 && std::abs(lam - lam_prev) <= 1e-10 * lam) {
      return std::sqrt(lam);
    }
    lam_prev = lam;
  }
  throw std::runtime_error("matrix_M_norm: power iteration did not converge");
}

double tau_N(const Spectrum& spec, const WeightSequence& w, Index N,
             Index horizon, Index depth) {
  require(N >= 2, "tau_N: N >= 2 required");
  require(horizon >= N, "tau_N: horizon >= N required");
  GScan scan = g_scan(spec, w, horizon, std::max(depth, horizon));
  SuffixTable suf = make_suffix(scan);
  SchurBounds sb =
      schur_from_scan(spec, w, scan, suf, N, std::max(depth, horizon));
  double sig_up = sigma_from_suffix(scan, suf, N).bound.upper();
  return std::max({sb.boundM, sb.boundMprime, sig_up, 2.0 * sig_up});
}

std::optional<Index> first_N_with_tau_below(const Spectrum& spec,
                                            const WeightSequence& w,
                                            double threshold, Index horizon,
                                            Index depth, Index N_limit) {
  require(threshold > 0.0, "first_N_with_tau_below: positive threshold");
  require(N_limit >= 2 && N_limit <= horizon,
          "first_N_with_tau_below: need 2 <= N_limit <= horizon");
  GScan scan = g_scan(spec, w, horizon, std::max(depth, horizon));
  SuffixTable suf = make_suffix(scan);
  Index D = std::max(depth, horizon);
  for (Index N = 2; N <= N_limit; ++N) {
    if (!k_N(spec, N).has_value()) continue;
    SchurBounds sb = schur_from_scan(spec, w, scan, suf, N, D);
    double sig_up = sigma_from_suffix(scan, suf, N).bound.upper();
    double tau = std::max({sb.boundM, sb.boundMprime, sig_up, 2.0 * sig_up});
    if (tau <= threshold) return N;
  }
  return std::nullopt;
}

// --- G-tilde -------------------------------------------------------------------

namespace {

TailBound g_tilde_from_scan(const Spectrum& spec, const WeightSequence& w,
                            const GScan& scan, Index k, Index N1) {
  require(k >= 1, "g_tilde: k >= 1 required");
  require(N1 >= 2, "g_tilde: N1 >= 2 required");
  const Index D_out = scan.horizon;
  const double mu_k = mu(spec, k);

  double sum = 0.0;
  double tail = 0.0;
  for (Index n = N1 + 1; n <= D_out; ++n) {
    if (n == k) continue;
    std::size_t i = static_cast<std::size_t>(n - 1);
    double rn = gaps(spec, n).r;
    double pref = rn / std::abs(mu(spec, n) - mu_k);
    double inner = scan.value[i] - weight_t(w, n) / rn;  // drop the local term
    sum += pref * inner;
    tail += pref * (scan.upper[i] - scan.value[i]);
  }

  TailBound out;
  out.value = sum;
  out.method = scan.method;

  // Outer tail: closed only for finitely supported weights (or a finite
  // spectrum, where the sum simply ends).
  if (spec.bounded()) {
    out.tail_upper = round_up(tail);
    out.method = TailMethod::declared_zero;
    return out;
  }
  if (w.finitely_supported() && linear_like(spec) &&
      scan.method != TailMethod::none) {
    Index p = std::max(k, w.support_end());
    if (D_out > p) {
      double t1 = 0.0;
      for (Index j = 1; j <= w.support_end(); ++j) t1 += weight_t(w, j);
      double c = unit_gap(spec);
      out.tail_upper =
          round_up(tail + t1 / (2.0 * c * static_cast<double>(D_out - p)));
      if (out.method == TailMethod::declared_zero) {
        out.method = TailMethod::integral_test;
      }
      return out;
    }
  }
  out.tail_upper = round_up(tail);  // inner truncations only
  out.method = TailMethod::none;
  return out;
}

}  // namespace

TailBound g_tilde_transform(const Spectrum& spec, const WeightSequence& w,
                            Index k, Index N1, Index depth) {
  require(depth > N1, "g_tilde_transform: depth > N1 required");
  Index horizon = spec.bounded() ? std::min(depth, spec.max_index() - 1) : depth;
  GScan scan = g_scan(spec, w, horizon, 2 * depth);
  return g_tilde_from_scan(spec, w, scan, k, N1);
}

// --- decay-rate diagnostics -----------------------------------------------------

RateFit rate_fit(const std::vector<std::pair<Index, double>>& samples,
                 RateModel model) {
  require(samples.size() >= 8, "rate_fit: at least 8 samples required");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require(samples[i].first >= 2, "rate_fit: sample indices must be >= 2");
    if (samples[i].second <= 0.0) {
      throw std::invalid_argument("rate_fit: zero or negative sample value");
    }
    if (i > 0) {
      double ratio = static_cast<double>(samples[i].first) /
                     static_cast<double>(samples[i - 1].first);
      require(ratio >= 1.2, "rate_fit: samples must be geometrically spaced");
    }
  }

  std::vector<double> xs(samples.size()), ys(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double n = static_cast<double>(samples[i].first);
    double y = samples[i].second;
    switch (model) {
      case RateModel::power:
        xs[i] = std::log(n);
        ys[i] = std::log(y);
        break;
      case RateModel::power_log:
        xs[i] = std::log(n);
        ys[i] = std::log(y) - std::log(std::log(n));
        break;
      case RateModel::log_power:
        xs[i] = std::log(std::log(n));
        ys[i] = std::log(y);
        break;
    }
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += sq(xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  require(sxx > 0.0, "rate_fit: degenerate abscissae");
  double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ss += sq(ys[i] - my - slope * (xs[i] - mx));
  }
  RateFit fit;
  fit.beta = -slope;
  fit.residual = std::sqrt(ss / static_cast<double>(xs.size()));
  return fit;
}

bool weights_monotone(const WeightSequence& w) {
  switch (w.kind) {
    case WeightKind::zero:
    case WeightKind::power:
    case WeightKind::log_power:
    case WeightKind::sqrtlog_loglog:
      return true;
    case WeightKind::explicit_list: {
      for (std::size_t i = 1; i < w.values.size(); ++i) {
        if (w.values[i] > w.values[i - 1]) return false;
      }
      return true;
    }
    default:
      return false;  // gap-supported and paired-block weights oscillate
  }
}

MonotoneDecayReport monotone_l1_implies_decay_check(const WeightSequence& w,
                                                    Index depth) {
  if (!weights_monotone(w)) {
    throw std::invalid_argument(
        "monotone_l1_implies_decay_check: weights not monotone decreasing");
  }
  require(depth >= 8, "monotone_l1_implies_decay_check: depth >= 8 required");
  MonotoneDecayReport rep;
  for (Index n = 8; n <= depth; n *= 2) {
    double t = sq(omega(w, n));
    rep.samples.emplace_back(n, t * std::log(static_cast<double>(n)));
  }
  std::size_t tail_start = rep.samples.size() / 2;
  double first = rep.samples[tail_start].second;
  double last = rep.samples.back().second;
  bool nonincreasing = true;
  for (std::size_t i = tail_start; i < rep.samples.size(); ++i) {
    rep.max_tail = std::max(rep.max_tail, rep.samples[i].second);
    if (i > tail_start &&
        rep.samples[i].second > rep.samples[i - 1].second * (1.0 + 1e-12)) {
      nonincreasing = false;
    }
  }
  rep.decays = rep.max_tail == 0.0 || (nonincreasing && last <= 0.9 * first);
  return rep;
}

// --- aggregate report -----------------------------------------------------------

CriteriaReport build_criteria_report(const Spectrum& spec,
                                     const WeightSequence& w,
                                     const CriteriaOptions& opts) {
  require(opts.epsilon > 0.0, "criteria report: epsilon > 0 required");
  require(opts.horizon >= 4, "criteria report: horizon >= 4 required");

  CriteriaReport rep;
  rep.epsilon = opts.epsilon;

  Index H = opts.horizon;
  Index D = std::max(opts.depth, 2 * H);
  if (spec.bounded()) {
    H = std::min(H, spec.max_index() - 1);
    D = std::min(D, spec.max_index());
  }

  rep.rho_1 = rho_sum(spec, w, 1, D);
  for (double p : opts.schatten_ps) {
    rep.schatten[p] = schatten_sum(spec, p, std::min<Index>(D, 1000000));
  }

  GScan scan = g_scan(spec, w, H, D);
  SuffixTable suf = make_suffix(scan);

  for (Index n = 1; n <= H; n *= 2) {
    std::size_t i = static_cast<std::size_t>(n - 1);
    TailBound tb;
    tb.value = scan.value[i];
    tb.tail_upper = scan.upper[i] - scan.value[i];
    tb.method = scan.method;
    rep.g_values.emplace_back(n, tb);
  }

  for (Index N = 2; N <= H; N *= 2) {
    rep.sigma.emplace_back(N, sigma_from_suffix(scan, suf, N));
  }

  // First N certifying the window sup below epsilon (monotone in N).
  if (scan.method != TailMethod::none) {
    auto first_below = [&](double cap) -> Index {
      Index lo = 2, hi = H;
      if (suf.sup_upper[static_cast<std::size_t>(hi - 1)] > cap) return 0;
      while (lo < hi) {
        Index mid = lo + (hi - lo) / 2;
        if (suf.sup_upper[static_cast<std::size_t>(mid - 1)] <= cap) {
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
      return lo;
    };
    rep.certified_N = first_below(opts.epsilon);
    rep.half_bound_N = first_below(0.25);
  }

  // Verdict: summability of omega_j^2 / mu_j.
  if (rep.rho_1.conclusive() && !rep.rho_1.known_divergent) {
    rep.verdicts.summable = Verdict::holds;
  } else if (rep.rho_1.known_divergent) {
    rep.verdicts.summable = Verdict::fails;
  }

  // Verdict: some probed Schatten exponent converges.
  {
    bool any_ok = false, all_divergent = !rep.schatten.empty();
    for (const auto& [p, tb] : rep.schatten) {
      if (tb.conclusive() && !tb.known_divergent) any_ok = true;
      if (!tb.known_divergent) all_divergent = false;
    }
    if (any_ok) {
      rep.verdicts.schatten_ok = Verdict::holds;
    } else if (all_divergent) {
      rep.verdicts.schatten_ok = Verdict::fails;
    }
  }

  // Verdict: G decays below epsilon. The window certificate only counts when
  // it is sustained across at least a full doubling of the index: a first
  // admissible N in the top half of the window leaves room for one more
  // spike just past the horizon (sparse weights do exactly that).
  if (rep.certified_N > 0 && rep.certified_N <= H / 2) {
    rep.verdicts.g_decays = Verdict::holds;
    rep.g_decays_route = "window";
  } else if (weights_monotone(w) && rep.verdicts.summable == Verdict::holds) {
    MonotoneDecayReport mono =
        monotone_l1_implies_decay_check(w, std::min<Index>(H, 1 << 20));
    if (mono.decays) {
      rep.verdicts.g_decays = Verdict::holds;
      rep.g_decays_route = "monotone";
    }
  }
  if (rep.verdicts.g_decays == Verdict::inconclusive) {
    // A genuine witness: a lower-end value above epsilon in the upper half of
    // the window that is also a near-global spike (non-decaying signature).
    double global_max = 0.0;
    for (Index n = 1; n <= H; ++n) {
      global_max = std::max(global_max, scan.value[static_cast<std::size_t>(n - 1)]);
    }
    Index best = 0;
    double best_val = 0.0;
    for (Index n = std::max<Index>(2, H / 2); n <= H; ++n) {
      double v = scan.value[static_cast<std::size_t>(n - 1)];
      if (v > best_val) {
        best_val = v;
        best = n;
      }
    }
    if (best > 0 && best_val > opts.epsilon && best_val >= 0.8 * global_max) {
      rep.verdicts.g_decays = Verdict::fails;
      rep.g_decays_witness = best;
    }
  }

  // Verdict: G-tilde bounded (stabilization under depth doubling).
  {
    Index base = opts.g_tilde_depth;
    if (spec.bounded()) base = std::min(base, spec.max_index() / 2 - 1);
    bool all_conclusive = true;
    double worst_inc = 0.0;
    Index worst_k = 0;
    if (base > 2) {
      GScan scan1 = g_scan(spec, w, base, 2 * base);
      GScan scan2 = g_scan(spec, w, 2 * base, 4 * base);
      for (Index kk : opts.g_tilde_ks) {
        if (spec.bounded() && kk > spec.max_index()) continue;
        TailBound v1 = g_tilde_from_scan(spec, w, scan1, kk, 2);
        TailBound v2 = g_tilde_from_scan(spec, w, scan2, kk, 2);
        double inc = v2.value - v1.value;
        rep.g_tilde.push_back({kk, base, v1.value, 0.0});
        rep.g_tilde.push_back({kk, 2 * base, v2.value, inc});
        if (!v2.conclusive()) all_conclusive = false;
        if (inc > worst_inc) {
          worst_inc = inc;
          worst_k = kk;
        }
      }
    }
    if (rep.g_tilde.empty()) {
      // nothing probed: leave the verdict inconclusive
    } else if (all_conclusive) {
      rep.verdicts.g_tilde_bounded = Verdict::holds;
    } else if (worst_inc >= 0.05) {
      rep.verdicts.g_tilde_bounded = Verdict::fails;
      rep.g_tilde_witness =
          "partial sums at k = " + std::to_string(worst_k) + " grow by " +
          std::to_string(worst_inc) + " per depth doubling";
    } else if (worst_inc <= 2e-3) {
      rep.verdicts.g_tilde_bounded = Verdict::holds;
    }
  }

  // Verdict: the fast route needs summability, decaying G, and bounded
  // G-tilde all at once; one failure sinks it.
  {
    Verdict parts[3] = {rep.verdicts.summable, rep.verdicts.g_decays,
                        rep.verdicts.g_tilde_bounded};
    bool all_hold = true, any_fail = false;
    for (Verdict v : parts) {
      all_hold = all_hold && v == Verdict::holds;
      any_fail = any_fail || v == Verdict::fails;
    }
    if (any_fail) {
      rep.verdicts.fast_route_available = Verdict::fails;
    } else if (all_hold) {
      rep.verdicts.fast_route_available = Verdict::holds;
    }
  }

  // Schur table along dyadic N where k_N exists.
  for (Index N = 2; N <= H; N *= 2) {
    if (spec.bounded() && N + 1 > spec.max_index()) break;
    if (!k_N(spec, N).has_value()) continue;
    SchurBounds sb = schur_from_scan(spec, w, scan, suf, N, D);
    double sig_up = sigma_from_suffix(scan, suf, N).bound.upper();
    SchurRow row;
    row.N = N;
    row.boundM = sb.boundM;
    row.boundMprime = sb.boundMprime;
    row.tau = std::max({sb.boundM, sb.boundMprime, sig_up, 2.0 * sig_up});
    row.rho_N_upper = sb.rho_N.upper();
    row.sigma_kN_upper = sb.sigma_kN.upper();
    row.k = sb.k;
    rep.schur.push_back(row);
  }

  return rep;
}

}  // namespace rieszlab
