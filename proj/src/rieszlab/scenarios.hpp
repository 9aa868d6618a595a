// Ready-made experiment scenarios: decaying weight families on the linear
// spectrum, weights supported on widening gaps, tridiagonal tables folded
// into a clean dominance certificate, and the paired-block construction
// whose spectral projections grow without bound. Generators are pure and
// return plain data for the criteria and operator pipelines; make_scenario
// dispatches the same constructions by name with CLI-style parameter maps.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "rieszlab/operator_lab.hpp"
#include "rieszlab/sequence_models.hpp"

namespace rieszlab {

// Linear spectrum mu_n = n paired with a named decaying weight family.
struct WeightFamilyScenario {
  Spectrum spectrum;
  WeightSequence weights;
};

// omega_j = (log j)^{-1/2} (log log j)^{-a}; the squared weights are
// summable against mu_n = n exactly when a > 1/2 (integral test).
WeightFamilyScenario make_lnln(double a);

// omega_j = (log j)^{-a} with a >= 1; a > 1 is the fast-decay case and
// a = 1 the boundary case whose weighted double sums grow with depth.
WeightFamilyScenario make_log_power(double a);

// omega_j = j^{-alpha}, alpha > 0.
WeightFamilyScenario make_power(double alpha);

// Weights supported on b_m = floor(m^a) with squared values t_m there and
// zero elsewhere. The t values are accepted as given; values_vanish only
// reports whether the tested window trends toward zero (final value within
// half the peak), it never rejects.
struct GapSupportedScenario {
  Spectrum spectrum;
  WeightSequence weights;
  bool values_vanish = false;
  double window_sum = 0.0;       // exact sum of t_m / b_m over the list
  double comparison_upper = 0.0; // ||t||_inf * (2 + 1/(a-1)) envelope
};

GapSupportedScenario make_gap_supported(double a,
                                        const std::vector<double>& t_values);

// Tridiagonal table built from three band sequences against a base weight
// sequence. Bands follow the matrix layout: diag[k-1] sits at position
// (k, k), upper[k-1] couples input k+1 to output k, lower[k-1] couples
// input k to output k+1, so both off-band entries at index k tie the pair
// {k, k+1}. The dominance constant
//   C = max |band entry| / min(omega_k^2, omega_{k+1}^2)
// is folded into rescaled window weights sqrt(C) * omega so downstream
// certificates read |v_mn| <= omega'_m omega'_n; C itself is reported. A
// nonzero entry over a vanishing weight admits no finite C and is rejected
// naming the worst (k, band j).
struct FiniteBandScenario {
  PerturbationMatrix table; // tridiagonal, certified against `weights`
  WeightSequence weights;   // explicit window list sqrt(C) * omega
  double certificate_constant = 0.0;
};

FiniteBandScenario make_finite_band(const std::vector<double>& lower,
                                    const std::vector<double>& diag,
                                    const std::vector<double>& upper,
                                    const WeightSequence& w);

// Paired-block table with t_{2k-1} = t_{2k} = s_k where s_k = sqrt(1 - 1/k)
// at square k and 0 elsewhere: V e_{2k-1} = -(s_k/2) e_{2k} and
// V e_{2k} = (s_k/2) e_{2k-1}. Every block that fits within `size` is
// filled; m_max only sets the minimum size 2 m_max^2 (size 0 picks the
// default 2 m_max^2 + 2, leaving one trailing uncoupled pair). The
// summability enclosure of sum_j omega_j^2 / mu_j is taken at partial-sum
// depth `depth` with the telescoping block tail.
struct CounterexampleScenario {
  Spectrum spectrum;        // mu_n = n
  WeightSequence weights;   // omega_j^2 = t_j / 2
  PerturbationMatrix table; // antisymmetric 2x2 blocks on pairs (2k-1, 2k)
  Index m_max = 0;
  Index size = 0;
  TailBound summability;
};

CounterexampleScenario make_counterexample(Index m_max, Index size = 0,
                                           Index depth = 2000000);

// Saturated table v_jk = omega_j omega_k: the largest table the dominance
// certificate admits, and the default perturbation for weight-family
// scenarios.
PerturbationMatrix saturated_table(const WeightSequence& w, Index size);

// A named scenario request, CLI-shaped: numeric parameters by key plus
// truncation choices. size 0 means the per-scenario default (2 m_max^2 + 2
// for `counterexample`, 400 otherwise); depth feeds the summability
// enclosure; horizon and buffer ride along untouched for the criteria and
// spectral pipelines of whoever runs the bundle.
struct ScenarioSpec {
  std::string name;
  std::map<std::string, double> params;
  Index size = 0;
  Index depth = 2000000;
  Index horizon = 1000000;
  Index buffer = 5;
};

// A fully wired scenario: spectrum + weights + certified table, with the
// resolved parameters echoed and scenario-level certificates collected in
// `diagnostics` (always summability_value / summability_tail; per-scenario
// extras such as certificate_constant, window_sum, comparison_upper and
// values_vanish as 0/1).
struct ScenarioBundle {
  std::string name;
  std::map<std::string, double> params;
  Index size = 0;
  Spectrum spectrum;
  WeightSequence weights;
  PerturbationMatrix table;
  std::map<std::string, double> diagnostics;
};

// The six scenario names in listing order: counterexample, finite-band,
// gap-supported, lnln-decay, log-power-fast, power-alpha.
std::vector<std::string> scenario_names();

// Build a bundle by name. Parameter keys and defaults:
//   lnln-decay        a (1.0)
//   log-power-fast    a (2.0)
//   power-alpha       alpha (1.0)
//   gap-supported     a (2.0), constant (0.0: t_m = 1/log(m+2); c > 0: t == c)
//   finite-band       a (1.0), diag (0.0), off (0.5); bands are the given
//                     multiples of the squared lnln(a) weights
//   counterexample    m_max (30, integer)
// Unknown scenario names and unknown parameter keys are rejected.
ScenarioBundle make_scenario(const ScenarioSpec& spec);

}  // namespace rieszlab
