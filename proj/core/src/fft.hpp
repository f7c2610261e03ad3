#pragma once

#include <span>

#include "bbmflow/spectral.hpp"

namespace bbmflow::detail {

struct FftPlans;

// Real-to-complex transform pair of fixed length backed by FFTW. Plans are
// shared process-wide; each instance owns its own aligned buffers so that
// distinct instances may execute concurrently.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const noexcept { return size_; }

  // grid[k] = Σ_{|n|≤M} c_n e^{2πi nk/P}; requires P ≥ 2M+1.
  void synthesize(std::span<const Complex> coeffs, std::span<double> grid);

  // coeffs[j] = (1/P) Σ_k grid[k] e^{-2πi jk/P}, j = 0..coeffs.size()-1 ≤ P/2.
  void analyze(std::span<const double> grid, std::span<Complex> coeffs);

 private:
  int size_;
  const FftPlans* plans_;
  double* real_;
  void* spectrum_;
};

}  // namespace bbmflow::detail
