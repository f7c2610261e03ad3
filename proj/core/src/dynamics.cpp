#include "bbmflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fft.hpp"

namespace bbmflow {

void EvolveParams::validate(int max_mode) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("EvolveParams: dt must be > 0");
  if (truncation_N < 0 || truncation_N > max_mode)
    throw std::invalid_argument("EvolveParams: truncation_N must lie in [0, max_mode]");
}

struct FlowIntegrator::Workspace {
  explicit Workspace(int cutoff)
      // Output modes |n| ≤ N of a square of an N-mode field are alias free
      // on any grid with more than 3N points.
      : fft(fft_friendly_size(3 * cutoff + 1)),
        grid(static_cast<std::size_t>(fft.size())),
        low(static_cast<std::size_t>(cutoff) + 1),
        square(static_cast<std::size_t>(cutoff) + 1) {}

  detail::RealFft fft;
  std::vector<double> grid;
  std::vector<Complex> low;
  std::vector<Complex> square;
  std::vector<Complex> symbol;
  std::vector<Complex> k1, k2, k3, k4, stage;
};

FlowIntegrator::FlowIntegrator(int max_mode, const EvolveParams& params)
    : max_mode_(max_mode), params_(params) {
  params_.validate(max_mode);
  ws_ = std::make_unique<Workspace>(params_.truncation_N);
  const std::size_t len = static_cast<std::size_t>(max_mode) + 1;
  ws_->symbol.resize(static_cast<std::size_t>(params_.truncation_N) + 1);
  for (int n = 0; n <= params_.truncation_N; ++n)
    ws_->symbol[n] = Complex(0.0, -double(n) / (1.0 + double(n) * n));
  for (auto* v : {&ws_->k1, &ws_->k2, &ws_->k3, &ws_->k4, &ws_->stage}) v->assign(len, 0.0);
}

FlowIntegrator::~FlowIntegrator() = default;
FlowIntegrator::FlowIntegrator(FlowIntegrator&&) noexcept = default;
FlowIntegrator& FlowIntegrator::operator=(FlowIntegrator&&) noexcept = default;

void FlowIntegrator::rhs(std::span<const Complex> u, std::span<Complex> out) {
  const std::size_t len = static_cast<std::size_t>(max_mode_) + 1;
  if (u.size() != len || out.size() != len)
    throw std::invalid_argument("FlowIntegrator::rhs: size mismatch");
  const int cutoff = params_.truncation_N;
  Workspace& w = *ws_;

  if (!params_.linear_only) {
    std::copy_n(u.begin(), cutoff + 1, w.low.begin());
    w.fft.synthesize(w.low, w.grid);
    for (double& g : w.grid) g *= g;
    w.fft.analyze(w.grid, w.square);
  }
  out[0] = Complex(0.0, 0.0);
  for (int n = 1; n <= cutoff; ++n) {
    const Complex flux = params_.linear_only ? u[n] : u[n] + 0.5 * w.square[n];
    out[n] = w.symbol[n] * flux;
  }
  for (std::size_t n = static_cast<std::size_t>(cutoff) + 1; n < len; ++n) out[n] = 0.0;
}

void FlowIntegrator::step(std::span<Complex> u, double h) {
  Workspace& w = *ws_;
  const std::size_t len = u.size();
  rhs(u, w.k1);
  for (std::size_t n = 0; n < len; ++n) w.stage[n] = u[n] + 0.5 * h * w.k1[n];
  rhs(w.stage, w.k2);
  for (std::size_t n = 0; n < len; ++n) w.stage[n] = u[n] + 0.5 * h * w.k2[n];
  rhs(w.stage, w.k3);
  for (std::size_t n = 0; n < len; ++n) w.stage[n] = u[n] + h * w.k3[n];
  rhs(w.stage, w.k4);
  const double sixth = h / 6.0;
  for (std::size_t n = 0; n < len; ++n)
    u[n] += sixth * (w.k1[n] + 2.0 * w.k2[n] + 2.0 * w.k3[n] + w.k4[n]);
  u[0] = Complex(u[0].real(), 0.0);
}

SpectralField bbm_rhs(const SpectralField& u, const EvolveParams& params) {
  FlowIntegrator integrator(u.max_mode(), params);
  std::vector<Complex> out(u.coeffs().size());
  integrator.rhs(u.coeffs(), out);
  return SpectralField(std::move(out));
}

namespace {

double l2_norm(std::span<const Complex> c) {
  double sum = std::norm(c[0]);
  for (std::size_t n = 1; n < c.size(); ++n) sum += 2.0 * std::norm(c[n]);
  return std::sqrt(2.0 * std::numbers::pi * sum);
}

bool all_finite(std::span<const Complex> c) {
  for (const Complex& z : c)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace

TrackedEvolution evolve_tracked(const SpectralField& u0, double t, const EvolveParams& params,
                                std::span<const double> checkpoints) {
  if (!std::isfinite(t)) throw std::invalid_argument("evolve: t must be finite");
  params.validate(u0.max_mode());
  const double horizon = std::abs(t);
  const double slack = 1e-9 * std::max(1.0, horizon);
  for (double cp : checkpoints)
    if (std::abs(cp) > horizon + slack)
      throw std::invalid_argument("evolve_tracked: checkpoint beyond evolution horizon");

  const double dt = params.dt;
  const double direction = t < 0.0 ? -1.0 : 1.0;
  const auto full_steps = static_cast<long long>(std::floor(horizon / dt + 1e-9));
  double remainder = horizon - double(full_steps) * dt;
  if (remainder <= slack) remainder = 0.0;

  std::vector<Complex> u(u0.coeffs().begin(), u0.coeffs().end());
  TrackedEvolution out;
  double norm = l2_norm(u);
  out.sup_l2 = norm;
  out.checkpoint_sup.assign(checkpoints.size(), -1.0);
  auto mark = [&](double tau) {
    for (std::size_t k = 0; k < checkpoints.size(); ++k)
      if (out.checkpoint_sup[k] < 0.0 && std::abs(checkpoints[k]) <= tau + slack)
        out.checkpoint_sup[k] = out.sup_l2;
  };
  mark(0.0);
  if (horizon == 0.0) {
    out.final_state = u0;
    return out;
  }

  FlowIntegrator integrator(u0.max_mode(), params);
  auto advance = [&](double h, double tau_after) {
    integrator.step(u, direction * h);
    if (!all_finite(u))
      throw EvolveError("evolve: non-finite coefficients (discretization blow-up)",
                        direction * tau_after);
    const double next = l2_norm(u);
    out.l2_integral += 0.5 * h * (norm + next);
    norm = next;
    out.sup_l2 = std::max(out.sup_l2, norm);
    mark(tau_after);
  };
  for (long long k = 1; k <= full_steps; ++k) advance(dt, double(k) * dt);
  if (remainder > 0.0) advance(remainder, horizon);
  for (double& v : out.checkpoint_sup)
    if (v < 0.0) v = out.sup_l2;

  out.final_state = SpectralField(std::move(u));
  return out;
}

SpectralField evolve(const SpectralField& u0, double t, const EvolveParams& params) {
  return evolve_tracked(u0, t, params).final_state;
}

ConservedQuantities conserved_quantities(const SpectralField& u) {
  return {u.coefficient(0).real(), sobolev_norm_squared(u, SobolevIndex(1.0))};
}

void BoundParams::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("BoundParams: s must lie in (0, 1)");
  if (!(sigma > 0.5 && sigma <= 1.0))
    throw std::invalid_argument("BoundParams: sigma must lie in (1/2, 1]");
  if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("BoundParams: C must be > 0");
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("BoundParams: c must be > 0");
}

namespace {

void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0)) throw std::invalid_argument(std::string(what) + " must be >= 0");
}

// (C T x)^e, with the data-free case mapped to 0.
double scaled_power(double x, double t, const BoundParams& bp, double exponent) {
  if (x == 0.0) return 0.0;
  return std::pow(bp.C * (1.0 + std::abs(t)) * x, exponent);
}

}  // namespace

double growth_cutoff(double norm_u0_Hs, double t, const BoundParams& bp) {
  bp.validate();
  require_nonnegative(norm_u0_Hs, "norm_u0_Hs");
  return std::ceil(scaled_power(norm_u0_Hs, t, bp, 1.0 / bp.s));
}

double bound_growth(double norm_u0_Hs, double t, const BoundParams& bp) {
  const double cutoff = growth_cutoff(norm_u0_Hs, t, bp);
  const double horizon = 1.0 + std::abs(t);
  const double tail = norm_u0_Hs == 0.0 ? 0.0 : std::pow(cutoff, bp.sigma - bp.s) * norm_u0_Hs;
  return bp.C * (1.0 / horizon + tail);
}

double bound_difference(double norm1_Hs, double norm2_Hs, double diff_Hs, double t,
                        double path_integral, const BoundParams& bp) {
  bp.validate();
  require_nonnegative(norm1_Hs, "norm1_Hs");
  require_nonnegative(norm2_Hs, "norm2_Hs");
  require_nonnegative(diff_Hs, "diff_Hs");
  require_nonnegative(path_integral, "path_integral");
  const double exponent = (bp.sigma - bp.s) / bp.s;
  const double prefactor =
      1.0 + scaled_power(norm1_Hs, t, bp, exponent) + scaled_power(norm2_Hs, t, bp, exponent);
  return bp.C * prefactor * std::exp(bp.c * path_integral) * diff_Hs;
}

DifferenceMeasurement measure_difference(const DifferenceScenario& scenario, SobolevIndex s,
                                         const EvolveParams& params) {
  const TrackedEvolution first = evolve_tracked(scenario.u01, scenario.t, params);
  const SpectralField second = evolve(scenario.u02, scenario.t, params);
  DifferenceMeasurement m;
  m.lhs = sobolev_distance(first.final_state, second, SobolevIndex(0.0));
  m.norm1_Hs = sobolev_norm(scenario.u01, s);
  m.norm2_Hs = sobolev_norm(scenario.u02, s);
  m.diff_Hs = sobolev_distance(scenario.u01, scenario.u02, s);
  m.t = scenario.t;
  m.path_integral = first.l2_integral;
  return m;
}

namespace {

template <class Bound>
Calibration calibrate(std::size_t count, const std::vector<double>& lhs, Bound&& bound,
                      const BoundParams& bp0, const CalibrationGrid& grid) {
  bp0.validate();
  if (count == 0) throw std::invalid_argument("calibrate: no scenarios");
  if (!(grid.ratio > 1.0) || grid.min_exponent > grid.max_exponent)
    throw std::invalid_argument("calibrate: invalid grid");

  auto params_at = [&](int k) {
    BoundParams bp = bp0;
    bp.C = grid.at(k);
    return bp;
  };
  // Largest lhs/rhs ratio and its index; ≤ 1 means every scenario holds.
  auto worst = [&](const BoundParams& bp) {
    std::size_t index = 0;
    double ratio = -1.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double rhs = bound(i, bp);
      const double r = lhs[i] == 0.0 ? 0.0 : (rhs > 0.0 ? lhs[i] / rhs : std::numeric_limits<double>::infinity());
      if (r > ratio) {
        ratio = r;
        index = i;
      }
    }
    return std::pair{index, ratio};
  };
  auto holds = [&](int k) { return worst(params_at(k)).second <= 1.0; };

  if (!holds(grid.max_exponent)) {
    const auto [index, ratio] = worst(params_at(grid.max_exponent));
    throw CalibrationError("calibrate: no constant on the grid satisfies scenario " +
                               std::to_string(index) + " (lhs/rhs = " + std::to_string(ratio) + ")",
                           index, ratio);
  }
  int lo = grid.min_exponent;
  int hi = grid.max_exponent;
  if (holds(lo)) {
    hi = lo;
  } else {
    // Invariant: !holds(lo), holds(hi). The bounds are nondecreasing in C.
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      (holds(mid) ? hi : lo) = mid;
    }
  }
  Calibration result;
  result.params = params_at(hi);
  result.grid_exponent = hi;
  const auto [index, ratio] = worst(result.params);
  result.binding_index = index;
  result.binding_ratio = ratio;
  return result;
}

}  // namespace

Calibration calibrate_difference_constant(std::span<const DifferenceMeasurement> data,
                                          const BoundParams& bp0, const CalibrationGrid& grid) {
  std::vector<double> lhs;
  lhs.reserve(data.size());
  for (const auto& m : data) lhs.push_back(m.lhs);
  return calibrate(
      data.size(), lhs,
      [&](std::size_t i, const BoundParams& bp) {
        const auto& m = data[i];
        return bound_difference(m.norm1_Hs, m.norm2_Hs, m.diff_Hs, m.t, m.path_integral, bp);
      },
      bp0, grid);
}

Calibration calibrate_growth_constant(std::span<const GrowthMeasurement> data,
                                      const BoundParams& bp0, const CalibrationGrid& grid) {
  std::vector<double> lhs;
  lhs.reserve(data.size());
  for (const auto& m : data) lhs.push_back(m.lhs);
  return calibrate(
      data.size(), lhs,
      [&](std::size_t i, const BoundParams& bp) { return bound_growth(data[i].norm_Hs, data[i].t, bp); },
      bp0, grid);
}

BoundParams calibrate_constants(std::span<const DifferenceScenario> scenarios,
                                const BoundParams& bp0, const EvolveParams& params,
                                const CalibrationGrid& grid) {
  std::vector<DifferenceMeasurement> data;
  data.reserve(scenarios.size());
  for (const auto& sc : scenarios) data.push_back(measure_difference(sc, SobolevIndex(bp0.s), params));
  return calibrate_difference_constant(data, bp0, grid).params;
}

}  // namespace bbmflow
