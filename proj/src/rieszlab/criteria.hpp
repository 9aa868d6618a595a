// criteria: sequence-level hypotheses and bounds for the perturbed diagonal
// operator T = A + V -- summability, the local transforms G and G-tilde,
// sigma_N / rho_N / k_N, Schur-test norm bounds, tau_N, and decay-rate checks.
#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rieszlab/sequence_models.hpp"

namespace rieszlab {

enum class Verdict { holds, fails, inconclusive };
std::string to_string(Verdict v);

// ---------------------------------------------------------------------------
// Scalar transforms.
// ---------------------------------------------------------------------------

// Enclosure of G(n) = sum_{j != n} omega_j^2 / |mu_n - mu_j| + omega_n^2 / r_n,
// truncated at `depth` (requires depth >= n so the tail sits right of mu_n).
TailBound g_transform(const Spectrum& spec, const WeightSequence& w, Index n,
                      Index depth);

// Enclosure of sum_{j >= from} omega_j^2 / mu_j.
TailBound rho_sum(const Spectrum& spec, const WeightSequence& w, Index from,
                  Index depth);

// Enclosure of sum_j omega_j^2 / |z - mu_j|; rejects z on the spectrum.
TailBound sigma_prime_sample(const Spectrum& spec, const WeightSequence& w,
                             std::complex<double> z, Index depth);

// Enclosure of sum_j omega_j^2 / (mu_j + z0), the relative form bound of v.
TailBound relative_form_bound(const Spectrum& spec, const WeightSequence& w,
                              double z0, Index depth);

// Enclosure of G~(k) = sum_{n > N1, n != k} (r_n / |mu_n - mu_k|) *
// sum_{j != n} omega_j^2 / |mu_n - mu_j|.  With an infinitely supported
// weight family the outer tail has no closed bound: method none, and
// tail_upper covers only the truncated inner sums.
TailBound g_tilde_transform(const Spectrum& spec, const WeightSequence& w,
                            Index k, Index N1, Index depth);

// ---------------------------------------------------------------------------
// Window suprema.
// ---------------------------------------------------------------------------

// Per-index table of G over n = 1..horizon, each entry an enclosure
// [value[n-1], upper[n-1]].  Linear/affine spectra go through one FFT
// convolution; other kinds fall back to direct summation (guarded).
struct GScan {
  Index horizon = 0;
  Index depth = 0;
  std::vector<double> value;
  std::vector<double> upper;
  TailMethod method = TailMethod::none;
};

GScan g_scan(const Spectrum& spec, const WeightSequence& w, Index horizon,
             Index depth);

struct SigmaResult {
  TailBound bound;          // enclosure of sup_{N <= n <= horizon} G(n)
  bool at_boundary = false; // sup attained within the last 1% of the window
};

SigmaResult sigma_N(const Spectrum& spec, const WeightSequence& w, Index N,
                    Index n_horizon, Index depth);

// ---------------------------------------------------------------------------
// Schur-test machinery.
// ---------------------------------------------------------------------------

// Largest k <= N with mu_N - r_N >= 2 mu_k, when one exists.
std::optional<Index> k_N(const Spectrum& spec, Index N);

struct SchurBounds {
  double boundM = 0.0;       // sqrt(sigma_N * max{2 rho_N, sigma_{k_N}})
  double boundMprime = 0.0;  // exactly 2 * boundM
  TailBound rho_N;
  TailBound sigma_kN;
  Index k = 0;               // the k_N used
};

// Upper ends of the enclosures feed the bound; window horizon = depth.
SchurBounds schur_bounds(const Spectrum& spec, const WeightSequence& w,
                         Index N, Index depth);

enum class MatrixVariant { M, Mprime };

// Operator norm of the size x size truncation of the Schur-test matrix:
// entries chi_N(n) w_n w_k / |mu_n - mu_k| (M, zero diagonal) or
// chi_N(n) w_n w_k / |z_n - mu_k| (Mprime) with z_n = mu_n + r_n e^{i theta_n};
// an empty angle list means theta = 0 everywhere.  Power iteration on the
// Gram form, relative tolerance 1e-10, hard iteration cap.
double matrix_M_norm(const Spectrum& spec, const WeightSequence& w, Index N,
                     Index size, MatrixVariant variant,
                     const std::vector<double>& angles = {});

// max{boundM, boundMprime, sigma_N upper, 2 sigma_N upper}, the resolvent
// expansion's contraction budget at truncation level N.
double tau_N(const Spectrum& spec, const WeightSequence& w, Index N,
             Index horizon, Index depth);

// First N <= N_limit with tau_N <= threshold, sharing one G scan.
std::optional<Index> first_N_with_tau_below(const Spectrum& spec,
                                            const WeightSequence& w,
                                            double threshold, Index horizon,
                                            Index depth, Index N_limit);

// ---------------------------------------------------------------------------
// Decay-rate diagnostics.
// ---------------------------------------------------------------------------

enum class RateModel { power, power_log, log_power };

struct RateFit {
  double beta = 0.0;
  double residual = 0.0;  // RMS misfit in the transformed coordinates
};

// Least-squares exponent in transformed coordinates; >= 8 geometrically
// spaced samples required, zero/negative values rejected.  Diagnostic only.
RateFit rate_fit(const std::vector<std::pair<Index, double>>& samples,
                 RateModel model);

bool weights_monotone(const WeightSequence& w);

// For monotone weights: checks t_n log n -> 0 (t = omega^2) along dyadic n,
// the witness that summability of t_n / n forces G to decay.
struct MonotoneDecayReport {
  std::vector<std::pair<Index, double>> samples;  // (n, t_n log n)
  double max_tail = 0.0;  // max over the second half of the samples
  bool decays = false;
};

MonotoneDecayReport monotone_l1_implies_decay_check(const WeightSequence& w,
                                                    Index depth);

// ---------------------------------------------------------------------------
// Aggregate report.
// ---------------------------------------------------------------------------

struct CriteriaOptions {
  double epsilon = 0.1;      // G-decay certification threshold
  Index horizon = 1000000;   // window for G / sigma tables
  Index depth = 2000000;     // truncation depth for the scans
  std::vector<double> schatten_ps = {1.0, 2.0, 3.0};
  std::vector<Index> g_tilde_ks = {1, 3, 10, 100};
  Index g_tilde_depth = 32768;  // doubled once for the stabilization probe
};

struct SchurRow {
  Index N = 0;
  double boundM = 0.0;
  double boundMprime = 0.0;
  double tau = 0.0;
  double rho_N_upper = 0.0;
  double sigma_kN_upper = 0.0;
  Index k = 0;
};

struct GTildeRow {
  Index k = 0;
  Index depth = 0;
  double partial_sum = 0.0;
  double increment_on_doubling = 0.0;
};

struct Verdicts {
  Verdict summable = Verdict::inconclusive;
  Verdict schatten_ok = Verdict::inconclusive;
  Verdict g_decays = Verdict::inconclusive;
  Verdict g_tilde_bounded = Verdict::inconclusive;
  Verdict fast_route_available = Verdict::inconclusive;
};

struct CriteriaReport {
  TailBound rho_1;
  std::map<double, TailBound> schatten;
  std::vector<std::pair<Index, TailBound>> g_values;      // dyadic n samples
  std::vector<std::pair<Index, SigmaResult>> sigma;       // dyadic N samples
  std::vector<GTildeRow> g_tilde;
  std::vector<SchurRow> schur;
  Verdicts verdicts;
  double epsilon = 0.1;
  std::string g_decays_route;    // "window" or "monotone" when holds
  Index g_decays_witness = 0;    // offending n when g_decays fails
  std::string g_tilde_witness;   // divergence description when it fails
  Index certified_N = 0;         // first N with window sup upper <= epsilon
  Index half_bound_N = 0;        // first N with 2 sigma_N upper <= 1/2
};

CriteriaReport build_criteria_report(const Spectrum& spec,
                                     const WeightSequence& w,
                                     const CriteriaOptions& opts = {});

}  // namespace rieszlab
