#include "bbmflow/spectral.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"

namespace bbmflow {

SobolevIndex::SobolevIndex(double s) : s_(s) {
  if (!std::isfinite(s)) throw std::invalid_argument("SobolevIndex must be finite");
}

SpectralField::SpectralField() : coeffs_(1, Complex(0.0, 0.0)) {}

SpectralField::SpectralField(int max_mode) {
  if (max_mode < 0) throw std::invalid_argument("SpectralField: max_mode must be >= 0");
  coeffs_.assign(static_cast<std::size_t>(max_mode) + 1, Complex(0.0, 0.0));
}

SpectralField::SpectralField(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw std::invalid_argument("SpectralField: no coefficients");
  if (coeffs_[0].imag() != 0.0)
    throw std::invalid_argument("SpectralField: mean mode must be real");
  for (const Complex& c : coeffs_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument("SpectralField: non-finite coefficient");
  }
}

Complex SpectralField::coefficient(int n) const noexcept {
  const int m = n < 0 ? -n : n;
  if (m > max_mode()) return {0.0, 0.0};
  return n < 0 ? std::conj(coeffs_[static_cast<std::size_t>(m)])
               : coeffs_[static_cast<std::size_t>(m)];
}

SpectralField SpectralField::with_max_mode(int max_mode) const {
  SpectralField out(max_mode);
  const int keep = std::min(max_mode, this->max_mode());
  for (int n = 0; n <= keep; ++n) out.coeffs_[n] = coeffs_[n];
  return out;
}

bool operator==(const SpectralField& a, const SpectralField& b) noexcept {
  return a.coeffs_.size() == b.coeffs_.size() &&
         std::memcmp(a.coeffs_.data(), b.coeffs_.data(),
                     a.coeffs_.size() * sizeof(Complex)) == 0;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  if (a.max_mode() != b.max_mode()) throw std::invalid_argument("field sum: max_mode mismatch");
  SpectralField out(a.max_mode());
  for (std::size_t n = 0; n < a.coeffs_.size(); ++n) out.coeffs_[n] = a.coeffs_[n] + b.coeffs_[n];
  return out;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  if (a.max_mode() != b.max_mode())
    throw std::invalid_argument("field difference: max_mode mismatch");
  SpectralField out(a.max_mode());
  for (std::size_t n = 0; n < a.coeffs_.size(); ++n) out.coeffs_[n] = a.coeffs_[n] - b.coeffs_[n];
  return out;
}

SpectralField operator*(double alpha, const SpectralField& u) {
  SpectralField out(u.max_mode());
  for (std::size_t n = 0; n < u.coeffs_.size(); ++n) out.coeffs_[n] = alpha * u.coeffs_[n];
  return out;
}

SpectralField make_field(int max_mode, std::initializer_list<std::pair<int, Complex>> modes) {
  std::vector<Complex> c(static_cast<std::size_t>(max_mode) + 1, Complex(0.0, 0.0));
  for (const auto& [n, value] : modes) {
    if (n < 0 || n > max_mode) throw std::invalid_argument("make_field: mode out of range");
    c[static_cast<std::size_t>(n)] = value;
  }
  return SpectralField(std::move(c));
}

std::vector<double> grid_transform(const SpectralField& field, int points) {
  if (points < 2 * field.max_mode() + 1)
    throw std::invalid_argument("grid_transform: need at least 2M+1 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  detail::RealFft fft(points);
  fft.synthesize(field.coeffs(), grid);
  return grid;
}

SpectralField field_from_grid(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("field_from_grid: no samples");
  const int points = static_cast<int>(samples.size());
  const int max_mode = (points - 1) / 2;
  std::vector<Complex> c(static_cast<std::size_t>(max_mode) + 1);
  detail::RealFft fft(points);
  fft.analyze(samples, c);
  return SpectralField(std::move(c));
}

namespace {

// Weights 2π (1+n²)^s, doubled for n ≥ 1 to account for the conjugate mode.
double mode_weight(int n, double s) {
  const double base = 2.0 * std::numbers::pi * std::pow(1.0 + double(n) * n, s);
  return n == 0 ? base : 2.0 * base;
}

}  // namespace

double sobolev_norm_squared(const SpectralField& field, SobolevIndex s) {
  const auto c = field.coeffs();
  double sum = 0.0;
  for (int n = 0; n <= field.max_mode(); ++n) sum += mode_weight(n, s.value()) * std::norm(c[n]);
  return sum;
}

double sobolev_norm(const SpectralField& field, SobolevIndex s) {
  return std::sqrt(sobolev_norm_squared(field, s));
}

double sobolev_distance(const SpectralField& a, const SpectralField& b, SobolevIndex s) {
  if (a.max_mode() != b.max_mode())
    throw std::invalid_argument("sobolev_distance: max_mode mismatch");
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  double sum = 0.0;
  for (int n = 0; n <= a.max_mode(); ++n) sum += mode_weight(n, s.value()) * std::norm(ca[n] - cb[n]);
  return std::sqrt(sum);
}

SpectralField project_low(const SpectralField& field, int cutoff) {
  if (cutoff < 0) throw std::invalid_argument("project_low: cutoff must be >= 0");
  std::vector<Complex> c(field.coeffs().begin(), field.coeffs().end());
  for (std::size_t n = static_cast<std::size_t>(cutoff) + 1; n < c.size(); ++n) c[n] = 0.0;
  return SpectralField(std::move(c));
}

SpectralField pointwise_square(const SpectralField& field, int out_modes) {
  const int m = field.max_mode();
  if (out_modes < 0 || out_modes > 2 * m)
    throw std::invalid_argument("pointwise_square: out_modes must lie in [0, 2M]");
  // Products reach |n| ≤ 2M; 4M+1 points leave every output mode alias free.
  const int points = fft_friendly_size(4 * m + 1);
  detail::RealFft fft(points);
  std::vector<double> grid(static_cast<std::size_t>(points));
  fft.synthesize(field.coeffs(), grid);
  for (double& g : grid) g *= g;
  std::vector<Complex> c(static_cast<std::size_t>(out_modes) + 1);
  fft.analyze(grid, c);
  return SpectralField(std::move(c));
}

int fft_friendly_size(int n) {
  if (n <= 1) return 1;
  for (int candidate = n;; ++candidate) {
    int r = candidate;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return candidate;
  }
}

}  // namespace bbmflow
