#include "rieszlab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "rieszlab/criteria.hpp"

namespace rieszlab {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double sq(double x) { return x * x; }

}  // namespace

WeightFamilyScenario make_lnln(double a) {
  require(a > 0.5, "lnln scenario needs decay exponent a > 1/2");
  return {Spectrum::linear(), WeightSequence::sqrtlog_loglog(a)};
}

WeightFamilyScenario make_log_power(double a) {
  require(a >= 1.0, "log-power scenario needs exponent a >= 1");
  return {Spectrum::linear(), WeightSequence::log_power(a)};
}

WeightFamilyScenario make_power(double alpha) {
  require(alpha > 0.0, "power scenario needs exponent alpha > 0");
  return {Spectrum::linear(), WeightSequence::power(alpha)};
}

GapSupportedScenario make_gap_supported(double a,
                                        const std::vector<double>& t_values) {
  // The factory validates a > 1, nonnegative values and distinct support.
  WeightSequence w = WeightSequence::gap_supported(a, t_values);

  double peak = 0.0;
  for (double t : t_values) peak = std::max(peak, t);
  const bool vanish =
      t_values.empty() || peak == 0.0 || t_values.back() <= 0.5 * peak;

  double window = 0.0;
  for (Index m = 1; m <= static_cast<Index>(t_values.size()); ++m) {
    window += t_values[static_cast<std::size_t>(m - 1)] /
              static_cast<double>(gap_support_position(a, m));
  }
  const double comparison = peak * (2.0 + 1.0 / (a - 1.0));
  return {Spectrum::linear(), std::move(w), vanish, window, comparison};
}

FiniteBandScenario make_finite_band(const std::vector<double>& lower,
                                    const std::vector<double>& diag,
                                    const std::vector<double>& upper,
                                    const WeightSequence& w) {
  const Index n = static_cast<Index>(diag.size());
  require(n >= 1, "finite band: diagonal band must not be empty");
  require(static_cast<Index>(lower.size()) == n - 1,
          "finite band: lower band needs exactly size-1 entries");
  require(static_cast<Index>(upper.size()) == n - 1,
          "finite band: upper band needs exactly size-1 entries");

  // Dominance constant over all stored entries. Band entry j at index k
  // ties positions k and k+j (j = 0 ties k to itself), so it is measured
  // against min(omega_k^2, omega_{k+j}^2); a nonzero entry over a vanishing
  // weight has no finite constant.
  double constant = 0.0;
  double worst_entry = 0.0;
  Index worst_k = 0;
  int worst_band = 0;
  auto account = [&](double entry, Index k, int band) {
    const double x = std::abs(entry);
    if (x == 0.0) return;
    const Index partner = band == 0 ? k : k + 1;
    const double denom = std::min(sq(omega(w, k)), sq(omega(w, partner)));
    if (denom == 0.0) {
      if (x > worst_entry) {
        worst_entry = x;
        worst_k = k;
        worst_band = band;
      }
    } else {
      constant = std::max(constant, x / denom);
    }
  };
  for (Index k = 1; k <= n; ++k) {
    account(diag[static_cast<std::size_t>(k - 1)], k, 0);
  }
  for (Index k = 1; k <= n - 1; ++k) {
    account(upper[static_cast<std::size_t>(k - 1)], k, 1);
    account(lower[static_cast<std::size_t>(k - 1)], k, -1);
  }
  if (worst_k > 0) {
    throw std::invalid_argument(
        "finite band: certificate violation at k = " + std::to_string(worst_k) +
        ", band j = " + std::to_string(worst_band) +
        " (nonzero entry over a vanishing weight)");
  }

  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(n, n);
  for (Index k = 1; k <= n; ++k) {
    values(k - 1, k - 1) = diag[static_cast<std::size_t>(k - 1)];
  }
  for (Index k = 1; k <= n - 1; ++k) {
    // The form table holds v_jk = <V psi_j, psi_k>; the operator matrix is
    // its transpose, so upper[k-1] = <V e_{k+1}, e_k> lands at (k, k-1) and
    // lower[k-1] = <V e_k, e_{k+1}> at (k-1, k).
    values(k, k - 1) = upper[static_cast<std::size_t>(k - 1)];
    values(k - 1, k) = lower[static_cast<std::size_t>(k - 1)];
  }

  std::vector<double> folded(static_cast<std::size_t>(n), 0.0);
  const double scale = std::sqrt(round_up(constant));
  for (Index k = 1; k <= n; ++k) {
    folded[static_cast<std::size_t>(k - 1)] = scale * omega(w, k);
  }
  WeightSequence rescaled = WeightSequence::explicit_list(std::move(folded));
  PerturbationMatrix table =
      PerturbationMatrix::banded(std::move(values), 1, rescaled);
  return {std::move(table), std::move(rescaled), constant};
}

CounterexampleScenario make_counterexample(Index m_max, Index size,
                                           Index depth) {
  require(m_max >= 1, "counterexample scenario needs m_max >= 1");
  const Index needed = 2 * m_max * m_max;
  if (size == 0) size = needed + 2;
  if (size < needed) {
    throw std::invalid_argument(
        "counterexample scenario: size " + std::to_string(size) +
        " too small for m_max = " + std::to_string(m_max) +
        " (needs at least " + std::to_string(needed) + ")");
  }

  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(size, size);
  for (Index k = 1; 2 * k <= size; ++k) {
    const double s = counterexample_s(k);
    if (s == 0.0) continue;
    values(2 * k - 2, 2 * k - 1) = Complex(-0.5 * s, 0.0);
    values(2 * k - 1, 2 * k - 2) = Complex(0.5 * s, 0.0);
  }
  WeightSequence w = WeightSequence::counterexample();
  PerturbationMatrix table =
      PerturbationMatrix::banded(std::move(values), 1, w);
  Spectrum lin = Spectrum::linear();
  TailBound rho = rho_sum(lin, w, 1, depth);
  return {std::move(lin), std::move(w), std::move(table), m_max, size, rho};
}

PerturbationMatrix saturated_table(const WeightSequence& w, Index size) {
  require(size >= 1, "saturated table needs size >= 1");
  Eigen::VectorXd om(size);
  for (Index j = 1; j <= size; ++j) om(j - 1) = omega(w, j);
  Eigen::MatrixXcd values =
      (om * om.transpose()).cast<Complex>();
  return PerturbationMatrix::dense(std::move(values), w);
}

std::vector<std::string> scenario_names() {
  return {"counterexample", "finite-band",    "gap-supported",
          "lnln-decay",     "log-power-fast", "power-alpha"};
}

namespace {

double take_param(const std::map<std::string, double>& params,
                  const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown_keys(const std::string& name,
                         const std::map<std::string, double>& params,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    (void)value;
    bool known = false;
    for (const char* k : allowed) known = known || key == k;
    if (!known) {
      throw std::invalid_argument("scenario '" + name +
                                  "' does not take parameter '" + key + "'");
    }
  }
}

std::map<std::string, double> summability_diagnostics(const Spectrum& spec,
                                                      const WeightSequence& w,
                                                      Index depth) {
  TailBound rho = rho_sum(spec, w, 1, depth);
  return {{"summability_value", rho.value},
          {"summability_tail", rho.tail_upper}};
}

}  // namespace

ScenarioBundle make_scenario(const ScenarioSpec& spec) {
  require(spec.size >= 0, "scenario size must be >= 0 (0 picks the default)");
  require(spec.depth >= 1, "scenario depth must be >= 1");
  const std::string& name = spec.name;

  if (name == "lnln-decay" || name == "log-power-fast" ||
      name == "power-alpha") {
    const bool is_power = name == "power-alpha";
    const std::string key = is_power ? "alpha" : "a";
    reject_unknown_keys(name, spec.params, {key.c_str()});
    const double fallback =
        is_power ? 1.0 : (name == "log-power-fast" ? 2.0 : 1.0);
    const double value = take_param(spec.params, key, fallback);
    WeightFamilyScenario family =
        is_power ? make_power(value)
                 : (name == "log-power-fast" ? make_log_power(value)
                                             : make_lnln(value));
    const Index size = spec.size == 0 ? 400 : spec.size;
    PerturbationMatrix table = saturated_table(family.weights, size);
    return {name,
            {{key, value}},
            size,
            family.spectrum,
            family.weights,
            std::move(table),
            summability_diagnostics(family.spectrum, family.weights,
                                    spec.depth)};
  }

  if (name == "gap-supported") {
    reject_unknown_keys(name, spec.params, {"a", "constant"});
    const double a = take_param(spec.params, "a", 2.0);
    const double constant = take_param(spec.params, "constant", 0.0);
    require(a > 1.0, "gap-supported weights need spacing exponent a > 1");
    require(constant >= 0.0, "gap-supported scenario needs constant >= 0");
    const Index size = spec.size == 0 ? 400 : spec.size;
    std::vector<double> t_values;
    for (Index m = 1; gap_support_position(a, m) <= size; ++m) {
      t_values.push_back(constant > 0.0
                             ? constant
                             : 1.0 / std::log(static_cast<double>(m) + 2.0));
    }
    GapSupportedScenario gap = make_gap_supported(a, t_values);
    PerturbationMatrix table = saturated_table(gap.weights, size);
    std::map<std::string, double> diagnostics =
        summability_diagnostics(gap.spectrum, gap.weights, spec.depth);
    diagnostics["window_sum"] = gap.window_sum;
    diagnostics["comparison_upper"] = gap.comparison_upper;
    diagnostics["values_vanish"] = gap.values_vanish ? 1.0 : 0.0;
    return {name,
            {{"a", a}, {"constant", constant}},
            size,
            gap.spectrum,
            std::move(gap.weights),
            std::move(table),
            std::move(diagnostics)};
  }

  if (name == "finite-band") {
    reject_unknown_keys(name, spec.params, {"a", "diag", "off"});
    const double a = take_param(spec.params, "a", 1.0);
    const double diag_scale = take_param(spec.params, "diag", 0.0);
    const double off_scale = take_param(spec.params, "off", 0.5);
    const Index size = spec.size == 0 ? 400 : spec.size;
    WeightFamilyScenario base = make_lnln(a);
    std::vector<double> band_diag(static_cast<std::size_t>(size), 0.0);
    std::vector<double> band_off(static_cast<std::size_t>(size - 1), 0.0);
    for (Index k = 1; k <= size; ++k) {
      band_diag[static_cast<std::size_t>(k - 1)] =
          diag_scale * sq(omega(base.weights, k));
    }
    for (Index k = 1; k <= size - 1; ++k) {
      band_off[static_cast<std::size_t>(k - 1)] =
          off_scale * sq(omega(base.weights, k));
    }
    FiniteBandScenario banded =
        make_finite_band(band_off, band_diag, band_off, base.weights);
    std::map<std::string, double> diagnostics =
        summability_diagnostics(base.spectrum, banded.weights, spec.depth);
    diagnostics["certificate_constant"] = banded.certificate_constant;
    return {name,
            {{"a", a}, {"diag", diag_scale}, {"off", off_scale}},
            size,
            base.spectrum,
            std::move(banded.weights),
            std::move(banded.table),
            std::move(diagnostics)};
  }

  if (name == "counterexample") {
    reject_unknown_keys(name, spec.params, {"m_max"});
    const double m_raw = take_param(spec.params, "m_max", 30.0);
    require(m_raw >= 1.0 && m_raw == std::floor(m_raw) && m_raw <= 1e6,
            "counterexample scenario needs integer m_max >= 1");
    CounterexampleScenario block = make_counterexample(
        static_cast<Index>(m_raw), spec.size, spec.depth);
    return {name,
            {{"m_max", m_raw}},
            block.size,
            std::move(block.spectrum),
            std::move(block.weights),
            std::move(block.table),
            {{"summability_value", block.summability.value},
             {"summability_tail", block.summability.tail_upper}}};
  }

  throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace rieszlab
