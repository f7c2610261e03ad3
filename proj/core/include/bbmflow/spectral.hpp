#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace bbmflow {

using Complex = std::complex<double>;

/// Regularity exponent of a Sobolev norm. Must be finite.
class SobolevIndex {
 public:
  explicit SobolevIndex(double s);
  double value() const noexcept { return s_; }

 private:
  double s_;
};

/// A real 2π-periodic function u(x) = Σ_{|n|≤M} c_n e^{inx}.
///
/// Only c_0..c_M are stored; c_{-n} is the conjugate of c_n. The imaginary
/// part of c_0 is exactly zero and M never changes after construction.
class SpectralField {
 public:
  /// The zero field with a single (mean) mode.
  SpectralField();
  /// The zero field with modes 0..max_mode.
  explicit SpectralField(int max_mode);
  /// Takes coefficients c_0..c_M. Throws std::invalid_argument if the list
  /// is empty, contains non-finite values, or Im c_0 != 0.
  explicit SpectralField(std::vector<Complex> coeffs);

  int max_mode() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }

  /// Coefficient of e^{inx} for any integer n (zero outside |n| ≤ M).
  Complex coefficient(int n) const noexcept;

  /// Copy with a different number of modes (zero padded or truncated).
  SpectralField with_max_mode(int max_mode) const;

  /// Bitwise equality of max_mode and every coefficient.
  friend bool operator==(const SpectralField& a, const SpectralField& b) noexcept;

  friend SpectralField operator+(const SpectralField& a, const SpectralField& b);
  friend SpectralField operator-(const SpectralField& a, const SpectralField& b);
  friend SpectralField operator*(double alpha, const SpectralField& u);

 private:
  std::vector<Complex> coeffs_;
};

/// Builds a field with the given max_mode from (n, c_n) pairs, n ≥ 0.
SpectralField make_field(int max_mode, std::initializer_list<std::pair<int, Complex>> modes);

/// Samples u at x_k = 2πk/P, k = 0..P-1. Requires P ≥ 2M+1.
std::vector<double> grid_transform(const SpectralField& field, int points);

/// Inverse of grid_transform for P samples: keeps modes 0..(P-1)/2. For even
/// P the Nyquist mode P/2 is dropped.
SpectralField field_from_grid(std::span<const double> samples);

/// ‖u‖²_{H^s} = 2π Σ_{|n|≤M} (1+n²)^s |c_n|².
double sobolev_norm_squared(const SpectralField& field, SobolevIndex s);
double sobolev_norm(const SpectralField& field, SobolevIndex s);

/// ‖a − b‖_{H^s} without materialising the difference. Requires equal max_mode.
double sobolev_distance(const SpectralField& a, const SpectralField& b, SobolevIndex s);

/// Orthogonal projection onto modes |n| ≤ N; max_mode is preserved.
SpectralField project_low(const SpectralField& field, int cutoff);

/// Fourier coefficients of u² for |n| ≤ out_modes, exact (no aliasing).
/// Requires 0 ≤ out_modes ≤ 2M.
SpectralField pointwise_square(const SpectralField& field, int out_modes);

/// Smallest integer ≥ n whose only prime factors are 2, 3 and 5.
int fft_friendly_size(int n);

}  // namespace bbmflow
