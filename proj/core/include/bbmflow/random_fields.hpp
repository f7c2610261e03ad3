#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbmflow/dynamics.hpp"
#include "bbmflow/spectral.hpp"

namespace bbmflow {

enum class MeasureKind { gaussian_l2, gaussian_perturbed, empirical };

std::string to_string(MeasureKind kind);
MeasureKind measure_kind_from_string(const std::string& name);

/// Declarative description of a measure on H^s.
///
/// The Gaussian kinds have covariance L(1+V)L with L² = (1 − ∂_x²)^{-1},
/// i.e. E|c_n|² = (1 + V(n))/(1 + n²) for 0 ≤ n ≤ modes. V is given either
/// as one scalar applied to every mode or as a table indexed by n.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::gaussian_l2;
  int modes = 0;
  std::vector<double> v;  // empty, one scalar, or modes+1 entries
  std::string source;     // provenance of an empirical ensemble

  static MeasureSpec gaussian_l2(int modes);
  static MeasureSpec gaussian_perturbed(int modes, double v);
  static MeasureSpec gaussian_perturbed(int modes, std::vector<double> v_table);
  static MeasureSpec empirical(int modes, std::string source);

  double multiplier(int n) const;

  /// Throws std::invalid_argument on modes < 0, V(n) ≤ −1 or a table of the
  /// wrong length.
  void validate() const;

  friend bool operator==(const MeasureSpec&, const MeasureSpec&) = default;
};

struct Ensemble {
  MeasureSpec spec;
  std::uint64_t seed = 0;
  double time = 0.0;
  std::vector<SpectralField> samples;

  std::size_t size() const noexcept { return samples.size(); }
  int max_mode() const { return samples.empty() ? -1 : samples.front().max_mode(); }

  /// Throws std::invalid_argument if empty or max_mode differs between samples.
  void validate() const;
};

/// 64-bit avalanche mix used to derive per-sample RNG streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// c_0 = g_0 √(1+V(0)), c_n = (a_n + i b_n) √((1+V(n)) / (2(1+n²))) for
/// 1 ≤ n ≤ modes. Sample i depends only on (seed, i).
Ensemble sample_gaussian(const MeasureSpec& spec, std::uint64_t seed, std::size_t count);

/// Sample i of sample_gaussian(spec, seed, ·) without drawing the others.
SpectralField sample_gaussian_one(const MeasureSpec& spec, std::uint64_t seed, std::size_t index);

/// Evolve failure tagged with the offending sample index.
class PushforwardError : public std::runtime_error {
 public:
  PushforwardError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  std::size_t sample_index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Applies evolve(·, t, params) to every sample; order and spec are kept and
/// time advances by t.
Ensemble pushforward(const Ensemble& e, double t, const EvolveParams& params);

/// ((1/K) Σ_i ‖u_i‖_{H^{s'}}^q)^{1/q}; requires q ≥ 1.
double empirical_moment(const Ensemble& e, SobolevIndex s_prime, double q);

/// Same estimator on precomputed nonnegative values.
double empirical_moment(std::span<const double> values, double q);

enum class MomentLaw { sqrt_p, log_deviation };

struct MomentReport {
  MomentLaw law = MomentLaw::sqrt_p;
  double alpha = 0.0;
  std::vector<double> q_grid;
  /// sqrt_p: (E‖u‖^q)^{1/q}. log_deviation: ln E X^p.
  std::vector<double> norms;
  /// sqrt_p: norms/√q. log_deviation: fitted ln E X^p.
  std::vector<double> ratios;
  double fit_C = 0.0;
  double slope = 0.0;
  // log_deviation only
  double intercept = 0.0;   // ln E_0
  double r_squared = 1.0;
  double delta_bound = std::numeric_limits<double>::infinity();
  double divergence = 0.0;  // ln m_K − median ln m_{K/4} at the largest p
  bool pass = false;
};

/// Grid {1, 2, …, ⌊ln K⌋} (just {1} when K < e²).
std::vector<double> default_q_grid(std::size_t count);

inline constexpr double kSubgaussianSlopeLimit = 0.05;

/// Checks the √q law on the H^{s'} norms: ratios (E‖u‖^q)^{1/q}/√q, fit_C is
/// their maximum, pass iff the least-squares slope of ln ratio against ln q
/// is ≤ 0.05. Every q must lie in [1, max(1, ln K)].
MomentReport subgaussian_fit(const Ensemble& e, SobolevIndex s_prime, std::span<const double> q_grid);
MomentReport subgaussian_fit(std::span<const double> norms, std::span<const double> q_grid);

inline constexpr double kLogDeviationMinRSquared = 0.95;
inline constexpr double kLogDeviationDivergenceLimit = 0.25;

/// Fits ln E X^p = ln E_0 + p^{1+α} ln C on p_k = k p_max / 8, k = 1..8, with
/// p_max = (ln K)^{1/(1+α)} / 2. δ bound is β(α)/(ln C)^{1/α} with
/// β(α) = (1+α)^{-1/α}(1 − 1/(1+α)). Fails on poor linearity or when the
/// estimate at p_max keeps growing with the sample size.
MomentReport log_deviation_fit(std::span<const double> values, double alpha);

}  // namespace bbmflow
