#pragma once

// Slow reference implementations used only by tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bbmflow/spectral.hpp"

namespace oracle {

using bbmflow::Complex;
using bbmflow::SpectralField;

inline constexpr double kPi = std::numbers::pi;

/// u(x_j) = Σ_{|n|≤M} c_n e^{inx_j}, x_j = 2πj/P, by direct summation.
inline std::vector<double> synthesize(const SpectralField& u, int points) {
  std::vector<double> out(points);
  for (int j = 0; j < points; ++j) {
    const double x = 2.0 * kPi * j / points;
    Complex sum = u.coefficient(0);
    for (int n = 1; n <= u.max_mode(); ++n) sum += 2.0 * (u.coefficient(n) * std::polar(1.0, n * x)).real();
    out[j] = sum.real();
  }
  return out;
}

/// c_n = (1/P) Σ_j u_j e^{−inx_j} for 0 ≤ n ≤ max_mode.
inline std::vector<Complex> analyze(const std::vector<double>& grid, int max_mode) {
  const int points = int(grid.size());
  std::vector<Complex> c(max_mode + 1);
  for (int n = 0; n <= max_mode; ++n) {
    Complex sum = 0.0;
    for (int j = 0; j < points; ++j) sum += grid[j] * std::polar(1.0, -2.0 * kPi * n * j / points);
    c[n] = sum / double(points);
  }
  c[0] = c[0].real();
  return c;
}

/// (u²)_k = Σ_{m} c_m c_{k−m}, full two-sided convolution, 0 ≤ k ≤ out_modes.
inline std::vector<Complex> square_coefficients(const SpectralField& u, int out_modes) {
  const int m = u.max_mode();
  std::vector<Complex> out(out_modes + 1);
  for (int k = 0; k <= out_modes; ++k)
    for (int a = -m; a <= m; ++a) {
      const int b = k - a;
      if (b < -m || b > m) continue;
      out[k] += u.coefficient(a) * u.coefficient(b);
    }
  return out;
}

/// 2π Σ_{|n|≤M} (1+n²)^s |c_n|², summed over negative modes explicitly.
inline double sobolev_norm_squared(const SpectralField& u, double s) {
  double sum = 0.0;
  for (int n = -u.max_mode(); n <= u.max_mode(); ++n)
    sum += std::pow(1.0 + double(n) * n, s) * std::norm(u.coefficient(n));
  return 2.0 * kPi * sum;
}

/// Truncated BBM vector field −in/(1+n²) (u + (Π_N u)²/2)_n for 1 ≤ n ≤ N;
/// modes above N do not move.
inline std::vector<Complex> bbm_rhs(const SpectralField& u, int cutoff, bool linear_only) {
  std::vector<Complex> out(u.max_mode() + 1);
  std::vector<Complex> low(u.coeffs().begin(), u.coeffs().begin() + cutoff + 1);
  const auto sq = square_coefficients(SpectralField(low), cutoff);
  for (int n = 1; n <= cutoff; ++n) {
    Complex flux = u.coefficient(n);
    if (!linear_only) flux += 0.5 * sq[n];
    out[n] = Complex(0.0, -double(n) / (1.0 + double(n) * n)) * flux;
  }
  return out;
}

/// Σ_{|n|≤N} 1/(1+n²).
inline double inverse_series(int modes) {
  double sum = 1.0;
  for (int n = 1; n <= modes; ++n) sum += 2.0 / (1.0 + double(n) * n);
  return sum;
}

}  // namespace oracle
