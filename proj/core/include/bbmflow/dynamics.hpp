#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbmflow/spectral.hpp"

namespace bbmflow {

// ---------------------------------------------------------------------------
// Galerkin-truncated BBM flow
//
//   ∂_t (1 − ∂_x²) u + ∂_x (u + u²/2) = 0,   x ∈ [0, 2π)
//
// solved as ∂_t c_n = −in/(1+n²) · Π_N(u + u²/2)_n for |n| ≤ N, where the
// square is computed alias free. Modes above the cutoff N are frozen.
// ---------------------------------------------------------------------------

struct EvolveParams {
  double dt = 1e-3;
  int truncation_N = 0;
  bool linear_only = false;

  /// Throws std::invalid_argument unless dt > 0 and 0 ≤ truncation_N ≤ max_mode.
  void validate(int max_mode) const;
};

/// Non-finite state encountered while integrating.
class EvolveError : public std::runtime_error {
 public:
  EvolveError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Reusable RK4 integrator for one (max_mode, params) pair. Not thread safe;
/// use one instance per thread.
class FlowIntegrator {
 public:
  FlowIntegrator(int max_mode, const EvolveParams& params);
  ~FlowIntegrator();
  FlowIntegrator(FlowIntegrator&&) noexcept;
  FlowIntegrator& operator=(FlowIntegrator&&) noexcept;

  int max_mode() const noexcept { return max_mode_; }
  const EvolveParams& params() const noexcept { return params_; }

  /// out = F(u); both spans have max_mode+1 entries.
  void rhs(std::span<const Complex> u, std::span<Complex> out);

  /// One classical Runge–Kutta step of signed size h, in place.
  void step(std::span<Complex> u, double h);

 private:
  struct Workspace;
  int max_mode_;
  EvolveParams params_;
  std::unique_ptr<Workspace> ws_;
};

SpectralField bbm_rhs(const SpectralField& u, const EvolveParams& params);

/// Approximates ψ(t)u0. Takes ⌊|t|/dt⌋ steps of size dt in the direction of
/// t, then one partial step for any remainder. Throws EvolveError on blow-up.
SpectralField evolve(const SpectralField& u0, double t, const EvolveParams& params);

struct TrackedEvolution {
  SpectralField final_state;
  /// max ‖u(τ)‖_{L²} over the visited step points, τ between 0 and t.
  double sup_l2 = 0.0;
  /// ∫ ‖u(τ)‖_{L²} dτ over [0, |t|], trapezoidal rule on the step points.
  double l2_integral = 0.0;
  /// Running sup_l2 at each requested |checkpoint| (same order as given).
  std::vector<double> checkpoint_sup;
};

TrackedEvolution evolve_tracked(const SpectralField& u0, double t, const EvolveParams& params,
                                std::span<const double> checkpoints = {});

struct ConservedQuantities {
  double mean;       // c_0, the spatial average
  double h1_energy;  // ‖u‖²_{H^1}
};

ConservedQuantities conserved_quantities(const SpectralField& u);

// ---------------------------------------------------------------------------
// Evaluable growth and difference bounds. C and c are the non-explicit
// absolute constants; they are fitted by calibrate_* below.
// ---------------------------------------------------------------------------

struct BoundParams {
  double s = 0.4;
  double sigma = 0.6;
  double C = 1.0;
  double c = 1.0;

  /// Requires 0 < s < 1, 1/2 < sigma ≤ 1, C > 0, c > 0.
  void validate() const;
};

/// N = ⌈(C T ‖u0‖_{H^s})^{1/s}⌉ with T = 1 + |t|.
double growth_cutoff(double norm_u0_Hs, double t, const BoundParams& bp);

/// C (1/T + N^{σ−s} ‖u0‖_{H^s}).
double bound_growth(double norm_u0_Hs, double t, const BoundParams& bp);

/// C (1 + (CT‖u01‖)^{(σ−s)/s} + (CT‖u02‖)^{(σ−s)/s}) e^{c·path_integral} ‖u01 − u02‖_{H^s}.
double bound_difference(double norm1_Hs, double norm2_Hs, double diff_Hs, double t,
                        double path_integral, const BoundParams& bp);

struct DifferenceScenario {
  SpectralField u01;
  SpectralField u02;
  double t = 1.0;
};

/// Everything bound_difference needs for one scenario, measured on trajectories.
struct DifferenceMeasurement {
  double lhs = 0.0;  // ‖u1(t) − u2(t)‖_{L²}
  double norm1_Hs = 0.0;
  double norm2_Hs = 0.0;
  double diff_Hs = 0.0;
  double t = 0.0;
  double path_integral = 0.0;  // ∫_0^t ‖u1(τ)‖_{L²} dτ
};

DifferenceMeasurement measure_difference(const DifferenceScenario& scenario, SobolevIndex s,
                                         const EvolveParams& params);

struct GrowthMeasurement {
  double lhs = 0.0;  // sup_{|τ| ≤ t} ‖u(τ)‖_{L²}
  double norm_Hs = 0.0;
  double t = 0.0;
};

/// Geometric search grid C_k = ratio^k, k ∈ [min_exponent, max_exponent].
struct CalibrationGrid {
  double ratio = 1.0905077326652577;  // 2^{1/8}
  int min_exponent = -160;
  int max_exponent = 160;

  double at(int k) const { return std::pow(ratio, k); }
};

struct Calibration {
  BoundParams params;
  int grid_exponent = 0;
  std::size_t binding_index = 0;  // scenario with the largest lhs/rhs at the result
  double binding_ratio = 0.0;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, std::size_t worst_index, double worst_ratio)
      : std::runtime_error(what), worst_index_(worst_index), worst_ratio_(worst_ratio) {}
  std::size_t worst_index() const noexcept { return worst_index_; }
  double worst_ratio() const noexcept { return worst_ratio_; }

 private:
  std::size_t worst_index_;
  double worst_ratio_;
};

/// Smallest C on the grid (c held at bp0.c) for which every measurement
/// satisfies lhs ≤ bound_difference. Throws CalibrationError if none does.
Calibration calibrate_difference_constant(std::span<const DifferenceMeasurement> data,
                                          const BoundParams& bp0, const CalibrationGrid& grid = {});

/// Same search for lhs ≤ bound_growth.
Calibration calibrate_growth_constant(std::span<const GrowthMeasurement> data,
                                      const BoundParams& bp0, const CalibrationGrid& grid = {});

/// Evolves every scenario pair, then calibrates the difference bound.
BoundParams calibrate_constants(std::span<const DifferenceScenario> scenarios,
                                const BoundParams& bp0, const EvolveParams& params,
                                const CalibrationGrid& grid = {});

}  // namespace bbmflow
