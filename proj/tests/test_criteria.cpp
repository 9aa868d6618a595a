// Tests for the Riesz-basis criteria transforms: the weighted Hilbert-type
// G transform, window suprema, Schur-type norm bounds, tau thresholds, the
// G-tilde stabilization probe, decay-rate fits, and the assembled report.
//
// Numeric reference values were frozen from independent straight-line
// computations (direct summation and FFT convolution in double precision);
// closed-form cases are asserted exactly.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "rieszlab/criteria.hpp"
#include "rieszlab/sequence_models.hpp"

using namespace rieszlab;

namespace {

const double kZeta2 = 1.6449340668482264;  // sum 1/j^2
const double kZeta3 = 1.2020569031595942;  // sum 1/j^3

WeightSequence unit_triple() {
  return WeightSequence::explicit_list({1.0, 1.0, 1.0});
}

}  // namespace

TEST_CASE("G transform: zero weights and finite hand sums") {
  Spectrum lin = Spectrum::linear();

  TailBound z = g_transform(lin, WeightSequence::zero(), 10, 100);
  CHECK(z.value == 0.0);
  CHECK(z.upper() == 0.0);
  CHECK(z.conclusive());

  // omega^2 = (1,1,1,0,...): G(5) = 1/4 + 1/3 + 1/2 = 13/12, no tail.
  WeightSequence w = unit_triple();
  TailBound g5 = g_transform(lin, w, 5, 100);
  CHECK(g5.value == doctest::Approx(13.0 / 12.0).epsilon(1e-15));
  CHECK(g5.tail_upper == 0.0);
  CHECK(g5.method == TailMethod::declared_zero);

  // G(2) = t_1/1 + t_3/1 + t_2/r_2 = 1 + 1 + 2.
  TailBound g2 = g_transform(lin, w, 2, 100);
  CHECK(g2.value == doctest::Approx(4.0).epsilon(1e-15));

  // Far beyond the support only the three unit terms remain.
  TailBound g50 = g_transform(lin, w, 50, 100);
  CHECK(g50.value ==
        doctest::Approx(1.0 / 49.0 + 1.0 / 48.0 + 1.0 / 47.0).epsilon(1e-15));
}

TEST_CASE("G transform: inverse-square weights decay like 1/n") {
  Spectrum lin = Spectrum::linear();
  WeightSequence w = WeightSequence::power(1.0);

  GScan scan = g_scan(lin, w, 1 << 13, 1 << 15);
  REQUIRE(scan.method == TailMethod::integral_test);

  // Frozen spot values (FFT convolution oracle, depth 2^15).
  CHECK(scan.value[63] == doctest::Approx(0.02916897).epsilon(1e-6));
  CHECK(scan.value[127] == doctest::Approx(0.01384493).epsilon(1e-6));
  CHECK(scan.value[255] == doctest::Approx(0.00670575).epsilon(1e-6));
  CHECK(scan.value[8191] == doctest::Approx(0.00020123).epsilon(1e-6));
  for (std::size_t i = 0; i < scan.value.size(); ++i) {
    CHECK(scan.upper[i] >= scan.value[i]);
  }

  // Fitted decay exponent across dyadic n: ~1/n.
  std::vector<std::pair<Index, double>> samples;
  for (Index n = 64; n <= 8192; n *= 2) {
    samples.emplace_back(n, scan.value[static_cast<std::size_t>(n - 1)]);
  }
  RateFit fit = rate_fit(samples, RateModel::power);
  CHECK(fit.beta == doctest::Approx(1.0230).epsilon(1e-3));
  CHECK(fit.beta > 0.9);
  CHECK(fit.beta < 1.15);
}

TEST_CASE("G scan agrees with per-index evaluation") {
  // Linear spectrum: the scan takes the convolution path, g_transform the
  // direct loop; both must see the same sums and the same tails.
  Spectrum lin = Spectrum::linear();
  WeightSequence w = WeightSequence::power(0.7);
  GScan scan = g_scan(lin, w, 64, 256);
  for (Index n = 1; n <= 64; ++n) {
    TailBound direct = g_transform(lin, w, n, 256);
    std::size_t i = static_cast<std::size_t>(n - 1);
    CHECK(scan.value[i] == doctest::Approx(direct.value).epsilon(1e-10));
    CHECK(scan.upper[i] == doctest::Approx(direct.upper()).epsilon(1e-10));
  }

  // Affine spectrum (odd integers): gap 2, half-gap radius 1.
  Spectrum odd = Spectrum::affine(2.0, -1.0);
  WeightSequence lw = WeightSequence::sqrtlog_loglog(1.0);
  GScan oscan = g_scan(odd, lw, 40, 200);
  for (Index n = 1; n <= 40; ++n) {
    TailBound direct = g_transform(odd, lw, n, 200);
    std::size_t i = static_cast<std::size_t>(n - 1);
    CHECK(oscan.value[i] == doctest::Approx(direct.value).epsilon(1e-10));
    CHECK(oscan.upper[i] == doctest::Approx(direct.upper()).epsilon(1e-10));
  }
}

TEST_CASE("sigma window supremum") {
  Spectrum lin = Spectrum::linear();

  SigmaResult z = sigma_N(lin, WeightSequence::zero(), 2, 50, 100);
  CHECK(z.bound.value == 0.0);
  CHECK(z.bound.upper() == 0.0);

  // omega^2 = (1,1,1): the window max over n >= 4 sits at n = 4 with
  // G(4) = 1/3 + 1/2 + 1 = 11/6; far from the horizon edge.
  SigmaResult s = sigma_N(lin, unit_triple(), 4, 50, 128);
  CHECK(s.bound.value == doctest::Approx(11.0 / 6.0).epsilon(1e-14));
  CHECK(s.bound.tail_upper == 0.0);
  CHECK_FALSE(s.at_boundary);

  // Increasing weights push the argmax to the window edge and raise the flag.
  std::vector<double> rising(100);
  for (int j = 0; j < 100; ++j) rising[j] = std::sqrt((j + 1) / 1000.0);
  SigmaResult edge =
      sigma_N(lin, WeightSequence::explicit_list(rising), 2, 80, 128);
  CHECK(edge.bound.value ==
        doctest::Approx(0.78505751488713604).epsilon(1e-12));
  CHECK(edge.at_boundary);

  // Sup over a shrinking index set cannot grow.
  WeightSequence pw = WeightSequence::power(1.0);
  SigmaResult s5 = sigma_N(lin, pw, 5, 10000, 20000);
  SigmaResult s10 = sigma_N(lin, pw, 10, 10000, 20000);
  CHECK(s10.bound.value <= s5.bound.value);
  CHECK(s10.bound.upper() <= s5.bound.upper());
  CHECK_FALSE(s5.at_boundary);
  CHECK_FALSE(s10.at_boundary);
}

TEST_CASE("sigma-prime point samples") {
  Spectrum lin = Spectrum::linear();

  TailBound z =
      sigma_prime_sample(lin, WeightSequence::zero(), {3.0, 4.0}, 100);
  CHECK(z.value == 0.0);

  // Single unit weight at j=1, z = 1+i: the only term is 1/|i| = 1.
  WeightSequence e1 = WeightSequence::explicit_list({1.0});
  TailBound one = sigma_prime_sample(lin, e1, {1.0, 1.0}, 100);
  CHECK(one.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(one.tail_upper == 0.0);

  // Inverse-square weights at z = -10: sum j^-2/(10+j), below zeta(2)/10.
  WeightSequence pw = WeightSequence::power(1.0);
  TailBound far = sigma_prime_sample(lin, pw, {-10.0, 0.0}, 100000);
  CHECK(far.value == doctest::Approx(0.13520372409514392).epsilon(1e-12));
  CHECK(far.upper() < kZeta2 / 10.0);

  // Sampling exactly on an eigenvalue is rejected.
  CHECK_THROWS_AS(sigma_prime_sample(lin, pw, {7.0, 0.0}, 100),
                  std::invalid_argument);
}

TEST_CASE("sigma-prime samples obey twice the window supremum") {
  // For z to the right of mu_N - r_N/2 and outside every disc, the point
  // sample is bounded by 2 sigma_N.
  Spectrum lin = Spectrum::linear();
  WeightSequence pw = WeightSequence::power(1.0);
  for (Index N : {Index{5}, Index{10}}) {
    SigmaResult sig = sigma_N(lin, pw, N, 4000, 8000);
    double cap = 2.0 * sig.bound.upper();
    double x = static_cast<double>(N);
    std::vector<std::complex<double>> zs = {
        {x - 0.5, 0.9},  {x - 0.5, -2.0},   {x + 0.5, 0.0},
        {x + 20.25, 3.0}, {x - 0.5, 0.0},   {x + 3.5, -0.75},
    };
    for (auto zv : zs) {
      TailBound sp = sigma_prime_sample(lin, pw, zv, 8000);
      CHECK(sp.value <= cap + 1e-12);
    }
  }
}

TEST_CASE("G-tilde transform: trivial, bounded, and divergent regimes") {
  Spectrum lin = Spectrum::linear();

  TailBound z = g_tilde_transform(lin, WeightSequence::zero(), 5, 2, 100);
  CHECK(z.value == 0.0);

  // log-power a=2: bounded in k and decreasing along dyadic k.
  // Frozen endpoints from the convolution oracle at depth 2^13.
  WeightSequence w2 = WeightSequence::log_power(2.0);
  std::vector<double> vals;
  for (Index k = 4; k <= 1024; k *= 2) {
    vals.push_back(g_tilde_transform(lin, w2, k, 2, 1 << 13).value);
  }
  CHECK(vals.front() == doctest::Approx(7.4592874399605771).epsilon(1e-8));
  CHECK(vals.back() == doctest::Approx(0.17621697835923197).epsilon(1e-8));
  for (std::size_t i = 1; i < vals.size(); ++i) {
    CHECK(vals[i] < vals[i - 1]);
  }
  CHECK(vals.front() <= 8.0);

  // log-power a=1: partial sums keep climbing when the depth doubles.
  WeightSequence w1 = WeightSequence::log_power(1.0);
  for (Index k : {Index{1}, Index{10}}) {
    double v1 = g_tilde_transform(lin, w1, k, 2, 1 << 15).value;
    double v2 = g_tilde_transform(lin, w1, k, 2, 1 << 16).value;
    double inc = v2 - v1;
    CHECK(inc > 0.08);
    CHECK(inc < 0.14);
  }
  // Frozen spot: k = 10 gains 0.1076 on doubling 2^15 -> 2^16.
  double inc10 = g_tilde_transform(lin, w1, 10, 2, 1 << 16).value -
                 g_tilde_transform(lin, w1, 10, 2, 1 << 15).value;
  CHECK(inc10 == doctest::Approx(0.1075886).epsilon(2e-4));
}

TEST_CASE("k_N threshold index") {
  Spectrum lin = Spectrum::linear();
  auto k10 = k_N(lin, 10);
  REQUIRE(k10.has_value());
  CHECK(*k10 == 4);  // 9.5 >= 8 = 2 mu_4, while 2 mu_5 = 10 > 9.5

  CHECK_FALSE(k_N(lin, 2).has_value());  // 1.5 < 2 = 2 mu_1

  Spectrum geo = Spectrum::geometric(1.0, 2.0);
  auto k4 = k_N(geo, 4);
  REQUIRE(k4.has_value());
  CHECK(*k4 == 2);  // 8 - 2 = 6 >= 4 = 2 mu_2, while 2 mu_3 = 8 > 6
}

TEST_CASE("Schur bounds and the truncated matrix oracle") {
  Spectrum lin = Spectrum::linear();

  SchurBounds z = schur_bounds(lin, WeightSequence::zero(), 10, 1000);
  CHECK(z.boundM == 0.0);
  CHECK(z.boundMprime == 0.0);
  CHECK(z.rho_N.value == 0.0);
  CHECK(z.sigma_kN.value == 0.0);

  WeightSequence pw = WeightSequence::power(1.0);
  SchurBounds sb10 = schur_bounds(lin, pw, 10, 20000);
  CHECK(sb10.boundMprime == 2.0 * sb10.boundM);  // exact by construction
  CHECK(sb10.k == 4);

  // Power iteration on the actual truncation stays below the Schur bound.
  double m10 = matrix_M_norm(lin, pw, 10, 500, MatrixVariant::M);
  CHECK(m10 <= sb10.boundM + 1e-8);
  CHECK(m10 > 0.0);

  SchurBounds sb5 = schur_bounds(lin, pw, 5, 20000);
  double m5 = matrix_M_norm(lin, pw, 5, 500, MatrixVariant::M);
  CHECK(m5 <= sb5.boundM + 1e-8);

  // The primed variant obeys its bound for any contour angles.
  double mp_default = matrix_M_norm(lin, pw, 10, 500, MatrixVariant::Mprime);
  CHECK(mp_default <= sb10.boundMprime + 1e-8);
  std::vector<double> angles(500);
  for (int i = 0; i < 500; ++i) {
    angles[i] = std::fmod(0.61 * (i + 1), 6.283185307179586) - 3.141592653589793;
  }
  double mp_angled =
      matrix_M_norm(lin, pw, 10, 500, MatrixVariant::Mprime, angles);
  CHECK(mp_angled <= sb10.boundMprime + 1e-8);

  // Two-entry weight, N=1: the matrix is [[0, w1 w2], [w2 w1, 0]] with
  // operator norm w1 w2 = 0.28.
  WeightSequence two = WeightSequence::explicit_list({0.7, 0.4});
  double norm2 = matrix_M_norm(lin, two, 1, 2, MatrixVariant::M);
  CHECK(norm2 == doctest::Approx(0.28).epsilon(1e-10));

  CHECK(matrix_M_norm(lin, WeightSequence::zero(), 5, 50,
                      MatrixVariant::M) == 0.0);
}

TEST_CASE("tau threshold scan") {
  Spectrum lin = Spectrum::linear();

  CHECK(tau_N(lin, WeightSequence::zero(), 10, 200, 400) == 0.0);

  WeightSequence pw = WeightSequence::power(1.0);
  double t10 = tau_N(lin, pw, 10, 2000, 20000);
  double t100 = tau_N(lin, pw, 100, 2000, 20000);
  CHECK(t10 == doctest::Approx(0.877687).epsilon(1e-4));
  CHECK(t100 == doctest::Approx(0.053097).epsilon(1e-4));
  CHECK(t100 < t10);

  // First index with tau <= 1/4, and its frozen tau value.
  auto nstar = first_N_with_tau_below(lin, pw, 0.25, 2000, 20000, 200);
  REQUIRE(nstar.has_value());
  CHECK(*nstar == 27);
  CHECK(tau_N(lin, pw, 27, 2000, 20000) ==
        doctest::Approx(0.2365496419226452).epsilon(1e-9));
}

TEST_CASE("relative form bound in the spectral parameter") {
  Spectrum lin = Spectrum::linear();

  TailBound z = relative_form_bound(lin, WeightSequence::zero(), 0.0, 100);
  CHECK(z.value == 0.0);

  // Inverse-square weights at z0 = 0: sum j^-3 = zeta(3), enclosed.
  WeightSequence pw = WeightSequence::power(1.0);
  TailBound at0 = relative_form_bound(lin, pw, 0.0, 200000);
  CHECK(at0.value == doctest::Approx(1.202056903147094).epsilon(1e-12));
  CHECK(at0.value <= kZeta3);
  CHECK(at0.upper() >= kZeta3);

  // Far shift: two orders of magnitude below, and strictly smaller.
  TailBound at1000 = relative_form_bound(lin, pw, 1000.0, 200000);
  CHECK(at1000.value ==
        doctest::Approx(0.0016374485835292491).epsilon(1e-12));
  CHECK(at1000.upper() < 1e-2 * kZeta3);
  CHECK(at1000.value < at0.value);
}

TEST_CASE("rate fits: synthetic exact recoveries and validation") {
  auto make = [](double (*f)(double), Index lo) {
    std::vector<std::pair<Index, double>> s;
    for (Index n = lo; n <= lo * 256; n *= 2) {
      s.emplace_back(n, f(static_cast<double>(n)));
    }
    return s;  // 9 dyadic samples
  };

  RateFit p = rate_fit(make([](double n) { return 1.0 / n; }, 16),
                       RateModel::power);
  CHECK(p.beta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.residual < 1e-12);

  RateFit pl = rate_fit(
      make([](double n) { return std::log(n) / std::sqrt(n); }, 16),
      RateModel::power_log);
  CHECK(pl.beta == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pl.residual < 1e-12);

  RateFit lp = rate_fit(
      make([](double n) { return 1.0 / std::pow(std::log(n), 2.0); }, 16),
      RateModel::log_power);
  CHECK(lp.beta == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lp.residual < 1e-12);

  // Too few samples.
  std::vector<std::pair<Index, double>> seven;
  for (Index n = 16; n <= 1024; n *= 2) seven.emplace_back(n, 1.0 / n);
  CHECK_THROWS_AS(rate_fit(seven, RateModel::power), std::invalid_argument);

  // A zero value is degenerate.
  auto with_zero = make([](double n) { return 1.0 / n; }, 16);
  with_zero[3].second = 0.0;
  CHECK_THROWS_AS(rate_fit(with_zero, RateModel::power),
                  std::invalid_argument);

  // Spacing must be geometric (ratio >= 1.2).
  std::vector<std::pair<Index, double>> tight;
  for (Index n = 100; tight.size() < 9; n = n + n / 10) {
    tight.emplace_back(n, 1.0 / static_cast<double>(n));
  }
  CHECK_THROWS_AS(rate_fit(tight, RateModel::power), std::invalid_argument);

  // Indices below 2 break the log-log transforms.
  auto from_one = make([](double n) { return 1.0 / n; }, 1);
  CHECK_THROWS_AS(rate_fit(from_one, RateModel::power), std::invalid_argument);
}

TEST_CASE("rate fits: fourth-root weights follow sqrt(n)-log decay") {
  // omega_j = j^(-1/4): G behaves like n^(-1/2) log n.
  Spectrum lin = Spectrum::linear();
  WeightSequence w = WeightSequence::power(0.25);
  GScan scan = g_scan(lin, w, 1 << 13, 1 << 21);
  CHECK(scan.value[63] == doctest::Approx(1.7563463988343861).epsilon(1e-8));
  CHECK(scan.value[8191] == doctest::Approx(0.2630387347037898).epsilon(1e-8));

  std::vector<std::pair<Index, double>> samples;
  for (Index n = 64; n <= 8192; n *= 2) {
    samples.emplace_back(n, scan.value[static_cast<std::size_t>(n - 1)]);
  }
  RateFit fit = rate_fit(samples, RateModel::power_log);
  CHECK(fit.beta == doctest::Approx(0.549531).epsilon(1e-3));
  CHECK(std::abs(fit.beta - 0.5) <= 0.1);
}

TEST_CASE("rate fits: cubed-log sums follow an inverse log-square law") {
  // t_k = (log k)^-3 for k >= 3: the Hilbert-type sum at n decays like
  // (log n)^-2. At reachable n the fitted exponent still carries lower-order
  // corrections, so the band is wide; boundedness of S(n) (log n)^2 is the
  // sharper check.
  Spectrum lin = Spectrum::linear();
  std::vector<double> om(1 << 21, 0.0);
  for (std::size_t j = 3; j <= om.size(); ++j) {
    om[j - 1] = std::pow(std::log(static_cast<double>(j)), -1.5);
  }
  WeightSequence w = WeightSequence::explicit_list(std::move(om));
  GScan scan = g_scan(lin, w, 1 << 20, 1 << 21);

  std::vector<std::pair<Index, double>> samples;
  for (Index n = 64; n <= (1 << 20); n *= 2) {
    double local = n >= 3 ? 2.0 * std::pow(std::log(static_cast<double>(n)),
                                           -3.0)
                          : 0.0;
    samples.emplace_back(
        n, scan.value[static_cast<std::size_t>(n - 1)] - local);
  }
  CHECK(samples.front().second ==
        doctest::Approx(0.19759335528562372).epsilon(1e-7));
  CHECK(samples.back().second ==
        doctest::Approx(0.010958339165827748).epsilon(1e-7));

  RateFit fit = rate_fit(samples, RateModel::log_power);
  CHECK(fit.beta == doctest::Approx(2.383839).epsilon(1e-3));
  CHECK(fit.beta >= 2.0);
  CHECK(fit.beta <= 2.8);
  CHECK(fit.residual < 0.02);
  for (const auto& [n, y] : samples) {
    double scaled = y * std::pow(std::log(static_cast<double>(n)), 2.0);
    CHECK(scaled >= 1.5);
    CHECK(scaled <= 4.2);
  }
}

TEST_CASE("monotone weights: l1 summability forces t_n log n -> 0") {
  // sqrt-log/log-log weights, a=1: t_n log n = (log log n)^-2.
  MonotoneDecayReport rep =
      monotone_l1_implies_decay_check(WeightSequence::sqrtlog_loglog(1.0),
                                      1 << 20);
  CHECK(rep.decays);
  CHECK(rep.samples.front().first == 8);
  CHECK(rep.samples.back().first == (1 << 20));
  CHECK(rep.max_tail == doctest::Approx(0.22283665756510429).epsilon(1e-12));
  CHECK(rep.samples.back().second ==
        doctest::Approx(0.14465930002570992).epsilon(1e-12));

  MonotoneDecayReport z =
      monotone_l1_implies_decay_check(WeightSequence::zero(), 1 << 12);
  CHECK(z.decays);
  CHECK(z.max_tail == 0.0);

  // A constant sequence is monotone but t_n log n = log n grows.
  std::vector<double> ones(4096, 1.0);
  MonotoneDecayReport c = monotone_l1_implies_decay_check(
      WeightSequence::explicit_list(ones), 4096);
  CHECK_FALSE(c.decays);
  CHECK(c.max_tail == doctest::Approx(std::log(4096.0)).epsilon(1e-12));

  // Non-monotone families are rejected outright.
  CHECK_THROWS_AS(monotone_l1_implies_decay_check(
                      WeightSequence::counterexample(), 4096),
                  std::invalid_argument);
  CHECK_THROWS_AS(monotone_l1_implies_decay_check(
                      WeightSequence::gap_supported(1.5, {1.0, 1.0}), 4096),
                  std::invalid_argument);
}

TEST_CASE("homogeneity: scaling omega^2 scales every transform linearly") {
  Spectrum lin = Spectrum::linear();
  std::vector<double> base = {0.9, 0.4, 0.0, 0.7, 0.2};
  std::vector<double> scaled = base;
  for (double& x : scaled) x *= 1.5;  // omega^2 scales by 2.25
  WeightSequence wb = WeightSequence::explicit_list(base);
  WeightSequence ws = WeightSequence::explicit_list(scaled);
  const double c = 2.25;

  for (Index n : {Index{1}, Index{2}, Index{3}, Index{7}, Index{20}}) {
    TailBound gb = g_transform(lin, wb, n, 64);
    TailBound gs = g_transform(lin, ws, n, 64);
    CHECK(gs.value == doctest::Approx(c * gb.value).epsilon(1e-14));
    CHECK(gs.upper() == doctest::Approx(c * gb.upper()).epsilon(1e-14));
  }

  TailBound rb = rho_sum(lin, wb, 1, 64);
  TailBound rs = rho_sum(lin, ws, 1, 64);
  CHECK(rs.value == doctest::Approx(c * rb.value).epsilon(1e-14));

  SigmaResult sb = sigma_N(lin, wb, 2, 30, 64);
  SigmaResult ss = sigma_N(lin, ws, 2, 30, 64);
  CHECK(ss.bound.value == doctest::Approx(c * sb.bound.value).epsilon(1e-14));

  TailBound tb = g_tilde_transform(lin, wb, 3, 2, 64);
  TailBound ts = g_tilde_transform(lin, ws, 3, 2, 64);
  CHECK(ts.value == doctest::Approx(c * tb.value).epsilon(1e-14));
}

TEST_CASE("criteria report: inverse-square weights pass every check") {
  Spectrum lin = Spectrum::linear();
  WeightSequence w = WeightSequence::power(1.0);
  CriteriaOptions opts;
  opts.horizon = 1 << 12;
  opts.depth = 1 << 13;
  opts.g_tilde_depth = 1 << 15;
  CriteriaReport rep = build_criteria_report(lin, w, opts);

  CHECK(rep.verdicts.summable == Verdict::holds);
  CHECK(rep.rho_1.value == doctest::Approx(kZeta3).epsilon(1e-7));
  CHECK(rep.rho_1.upper() >= kZeta3);

  CHECK(rep.verdicts.schatten_ok == Verdict::holds);
  CHECK(rep.schatten.at(1.0).known_divergent);
  CHECK_FALSE(rep.schatten.at(2.0).known_divergent);
  CHECK(rep.schatten.at(2.0).conclusive());

  CHECK(rep.verdicts.g_decays == Verdict::holds);
  CHECK(rep.g_decays_route == "window");
  CHECK(rep.certified_N >= 10);
  CHECK(rep.certified_N <= 40);
  CHECK(rep.half_bound_N >= 4);
  CHECK(rep.half_bound_N <= 16);
  CHECK(rep.g_decays_witness == 0);

  CHECK(rep.verdicts.g_tilde_bounded == Verdict::holds);
  CHECK(rep.verdicts.fast_route_available == Verdict::holds);

  // Table sanity: sigma non-increasing, Schur rows tied M' = 2M, tau falling.
  REQUIRE(!rep.sigma.empty());
  for (std::size_t i = 1; i < rep.sigma.size(); ++i) {
    CHECK(rep.sigma[i].second.bound.value <=
          rep.sigma[i - 1].second.bound.value);
  }
  REQUIRE(!rep.schur.empty());
  for (const SchurRow& row : rep.schur) {
    CHECK(row.boundMprime == 2.0 * row.boundM);
  }
  CHECK(rep.schur.back().tau < rep.schur.front().tau);
  REQUIRE(rep.g_values.size() >= 13);  // n = 1, 2, ..., 4096
}

TEST_CASE("criteria report: log-power weights split the two routes") {
  Spectrum lin = Spectrum::linear();
  CriteriaOptions opts;
  opts.horizon = 1 << 15;
  opts.depth = 1 << 16;
  opts.g_tilde_depth = 1 << 15;

  // a = 1: G still decays (monotone route), but the G-tilde probe diverges,
  // so the simplified route is unavailable.
  CriteriaReport r1 = build_criteria_report(
      lin, WeightSequence::log_power(1.0), opts);
  CHECK(r1.verdicts.summable == Verdict::holds);
  CHECK(r1.verdicts.g_decays == Verdict::holds);
  CHECK(r1.g_decays_route == "monotone");
  CHECK(r1.certified_N == 0);
  CHECK(r1.verdicts.g_tilde_bounded == Verdict::fails);
  CHECK_FALSE(r1.g_tilde_witness.empty());
  CHECK(r1.verdicts.fast_route_available == Verdict::fails);
  bool found_big_increment = false;
  for (const GTildeRow& row : r1.g_tilde) {
    if (row.increment_on_doubling > 0.08) found_big_increment = true;
    CHECK(row.increment_on_doubling < 0.14);
  }
  CHECK(found_big_increment);

  // a = 2: everything holds and the increments are tiny.
  CriteriaReport r2 = build_criteria_report(
      lin, WeightSequence::log_power(2.0), opts);
  CHECK(r2.verdicts.summable == Verdict::holds);
  CHECK(r2.verdicts.g_decays == Verdict::holds);
  CHECK(r2.g_decays_route == "window");
  CHECK(r2.certified_N > 0);
  CHECK(r2.verdicts.g_tilde_bounded == Verdict::holds);
  CHECK(r2.verdicts.fast_route_available == Verdict::holds);
  for (const GTildeRow& row : r2.g_tilde) {
    if (row.increment_on_doubling == 0.0) continue;  // base row
    CHECK(row.increment_on_doubling >= 5e-4);
    CHECK(row.increment_on_doubling <= 1.5e-3);
  }
}

TEST_CASE("criteria report: sparse spikes defeat G decay with a witness") {
  Spectrum lin = Spectrum::linear();
  WeightSequence w = WeightSequence::counterexample();
  CriteriaOptions opts;
  opts.horizon = 1 << 14;
  opts.depth = 1 << 15;
  opts.g_tilde_depth = 1 << 13;
  CriteriaReport rep = build_criteria_report(lin, w, opts);

  // omega_j^2/mu_j sums: the spike masses decay like m^-2 along squares.
  CHECK(rep.verdicts.summable == Verdict::holds);

  // The local term at n = 2m^2 approaches 1, so G cannot decay; the
  // reported witness must be such a spike position (or its twin).
  CHECK(rep.verdicts.g_decays == Verdict::fails);
  Index wn = rep.g_decays_witness;
  REQUIRE(wn > 0);
  Index m = static_cast<Index>(std::llround(std::sqrt(
      static_cast<double>(wn + 1) / 2.0)));
  bool is_spike = (wn == 2 * m * m) || (wn == 2 * m * m - 1);
  CHECK(is_spike);
  CHECK(rep.verdicts.fast_route_available == Verdict::fails);

  // Frozen spike mass sum at depth 2^15 (value grows to ~0.3104 at 2e6).
  TailBound rho = rho_sum(lin, w, 1, 2000000);
  CHECK(rho.value == doctest::Approx(0.31035883561339417).epsilon(1e-12));
  CHECK(rho.tail_upper == doctest::Approx(0.00075).epsilon(1e-12));
  CHECK(rho.upper() < 0.9);
}

TEST_CASE("criteria report: identical inputs give bitwise-identical output") {
  Spectrum lin = Spectrum::linear();
  WeightSequence w = WeightSequence::power(1.0);
  CriteriaOptions opts;
  opts.horizon = 1 << 10;
  opts.depth = 1 << 11;
  opts.g_tilde_depth = 1 << 12;
  CriteriaReport a = build_criteria_report(lin, w, opts);
  CriteriaReport b = build_criteria_report(lin, w, opts);

  CHECK(a.rho_1.value == b.rho_1.value);
  CHECK(a.certified_N == b.certified_N);
  REQUIRE(a.g_tilde.size() == b.g_tilde.size());
  for (std::size_t i = 0; i < a.g_tilde.size(); ++i) {
    CHECK(a.g_tilde[i].partial_sum == b.g_tilde[i].partial_sum);
  }
  REQUIRE(a.schur.size() == b.schur.size());
  for (std::size_t i = 0; i < a.schur.size(); ++i) {
    CHECK(a.schur[i].tau == b.schur[i].tau);
  }
}
