#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace bbmflow::detail {

struct FftPlans {
  fftw_plan forward;
  fftw_plan backward;
};

namespace {

// The FFTW planner is not thread safe; execution on new arrays is.
const FftPlans* plans_for(int size) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<FftPlans>> cache;

  std::lock_guard lock(mutex);
  auto it = cache.find(size);
  if (it != cache.end()) return it->second.get();

  double* real = fftw_alloc_real(size);
  fftw_complex* spec = fftw_alloc_complex(size / 2 + 1);
  auto plans = std::make_unique<FftPlans>();
  plans->forward = fftw_plan_dft_r2c_1d(size, real, spec, FFTW_ESTIMATE);
  plans->backward = fftw_plan_dft_c2r_1d(size, spec, real, FFTW_ESTIMATE);
  fftw_free(real);
  fftw_free(spec);
  if (plans->forward == nullptr || plans->backward == nullptr)
    throw std::runtime_error("FFTW planning failed");
  return cache.emplace(size, std::move(plans)).first->second.get();
}

}  // namespace

RealFft::RealFft(int size)
    : size_(size),
      plans_(nullptr),
      real_(nullptr),
      spectrum_(nullptr) {
  if (size < 1) throw std::invalid_argument("RealFft: size must be positive");
  plans_ = plans_for(size);
  real_ = fftw_alloc_real(size);
  spectrum_ = fftw_alloc_complex(size / 2 + 1);
}

RealFft::~RealFft() {
  fftw_free(real_);
  fftw_free(spectrum_);
}

void RealFft::synthesize(std::span<const Complex> coeffs, std::span<double> grid) {
  const std::size_t half = static_cast<std::size_t>(size_ / 2 + 1);
  if (2 * coeffs.size() > static_cast<std::size_t>(size_) + 1 ||
      grid.size() != static_cast<std::size_t>(size_))
    throw std::invalid_argument("RealFft::synthesize: size mismatch");

  auto* spec = static_cast<fftw_complex*>(spectrum_);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    spec[j][0] = coeffs[j].real();
    spec[j][1] = coeffs[j].imag();
  }
  for (std::size_t j = coeffs.size(); j < half; ++j) spec[j][0] = spec[j][1] = 0.0;
  spec[0][1] = 0.0;
  fftw_execute_dft_c2r(plans_->backward, spec, real_);
  std::copy_n(real_, size_, grid.begin());
}

void RealFft::analyze(std::span<const double> grid, std::span<Complex> coeffs) {
  if (grid.size() != static_cast<std::size_t>(size_) ||
      coeffs.size() > static_cast<std::size_t>(size_ / 2 + 1))
    throw std::invalid_argument("RealFft::analyze: size mismatch");

  std::copy(grid.begin(), grid.end(), real_);
  auto* spec = static_cast<fftw_complex*>(spectrum_);
  fftw_execute_dft_r2c(plans_->forward, real_, spec);
  const double scale = 1.0 / size_;
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    coeffs[j] = Complex(spec[j][0] * scale, spec[j][1] * scale);
  if (!coeffs.empty()) coeffs[0] = Complex(coeffs[0].real(), 0.0);
}

}  // namespace bbmflow::detail
