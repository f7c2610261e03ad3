#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bbmflow {

enum class Scenario { growth, difference, continuity, stability, invariance, moments };

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

/// Thresholds that turn measured quantities into a verdict.
struct TolerancePolicy {
  double ratio_spread_max = 3.0;     // max/min of Dt/D0 over the V grid
  double shrink_ratio_max = 0.5;     // Dt(smallest V) < this × Dt(largest V)
  double se_multiplier = 3.0;        // drift and null-case allowance in standard errors
  double lipschitz_rel_tol = 0.10;   // spread of ‖u1(t)−u2(t)‖/ε across ε
  double subgaussian_slope_max = 0.05;
  double log_slope_target = 0.5;     // ln C of the e^G family at α = 1
  double log_slope_tol = 0.05;
};

struct VerifyConfig {
  Scenario scenario = Scenario::continuity;
  double s = 0.4;
  double sigma = 0.6;
  double p = 2.0;
  double p1 = 4.0;
  double p2 = 4.0;
  double t = 1.0;
  std::vector<double> t_grid;  // growth: times checked; empty means {t}
  int modes = 32;
  std::size_t count = 512;     // ensemble size, or training pairs/samples
  std::size_t holdout = 256;   // growth/difference held-out size
  std::size_t aux_count = 100000;  // moments: size of the e^G family sample
  std::uint64_t seed = 1;
  std::uint64_t seed2 = 2;
  double dt = 1e-3;
  std::vector<double> v_grid{0.05, 0.1, 0.2};
  std::vector<double> epsilons{1e-2, 5e-3};
  std::size_t lipschitz_cases = 8;
  std::size_t floor_replicates = 6;
  double alpha = 1.0;
  std::optional<double> forced_C;  // growth/difference: skip calibration
  bool anchors = true;             // growth/difference: add constant-field cases to training
  bool compare_dt = false;         // invariance: rerun at 2·dt
  TolerancePolicy tolerance;

  /// Desk-scale defaults for one scenario.
  static VerifyConfig defaults(Scenario scenario);

  /// Checks exponent relations and admissible σ intervals for the scenario.
  void validate() const;
};

struct Metric {
  std::string name;
  double value = 0.0;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> labels;  // optional, one per row
  std::vector<std::vector<double>> rows;
};

struct VerifyReport {
  Scenario scenario = Scenario::continuity;
  bool pass = false;
  std::vector<Metric> metrics;
  std::vector<Table> tables;
  std::vector<std::string> notes;
  VerifyConfig config;

  /// Throws std::out_of_range when absent.
  double metric(std::string_view name) const;
  const Table& table(std::string_view name) const;
};

/// sup_{|τ|≤t} ‖u(τ)‖_{L²} ≤ bound_growth on held-out Gaussian data after
/// calibrating C on a training set. With anchors, the training set also holds
/// constant fields over an amplitude grid; these are steady states and bind
/// the constant from below.
VerifyReport verify_growth(const VerifyConfig& cfg);

/// Difference bound on held-out pairs after calibration, plus the first
/// order scaling ‖u1(t) − u2(t)‖/ε across ε for u02 = u01 + εφ.
VerifyReport verify_difference(const VerifyConfig& cfg);

/// Dt = d_{0,p}(μ^t, ν^t) (exact OT) against D0 = synchronized d_{s,p2}(μ, ν)
/// for μ = gaussian_l2 and ν = gaussian_perturbed(V) over the V grid.
VerifyReport verify_continuity(const VerifyConfig& cfg);

/// The continuity pipeline with ρ = gaussian_l2 as reference and
/// μ = gaussian_perturbed(V), plus a null case against the OT floor of two
/// independent ρ ensembles.
VerifyReport verify_stability(const VerifyConfig& cfg);

/// Ensemble means of ‖u‖²_{L²}, ‖u‖⁴_{H^{1/4}} and ∫u³ at 0 and t.
VerifyReport verify_invariance(const VerifyConfig& cfg);

/// √q law for gaussian_l2 (pass) and a lognormal family (fail), log-deviation
/// slope of the e^G family (pass) and e^{G²} (fail), trivial X ≡ 1 case.
VerifyReport verify_moment_laws(const VerifyConfig& cfg);

VerifyReport run_scenario(const VerifyConfig& cfg);

/// JSON with "schema": 1. The parser accepts what the writer emits.
std::string report_to_json(const VerifyReport& report, int indent = 2);
VerifyReport report_from_json(std::string_view text);

/// Every table as CSV, each preceded by a "# <name>" line.
std::string report_to_csv(const VerifyReport& report);

}  // namespace bbmflow
