#include "bbmflow/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bbmflow/parallel.hpp"

namespace bbmflow {

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::gaussian_l2: return "gaussian_l2";
    case MeasureKind::gaussian_perturbed: return "gaussian_perturbed";
    case MeasureKind::empirical: return "empirical";
  }
  return "unknown";
}

MeasureKind measure_kind_from_string(const std::string& name) {
  if (name == "gaussian_l2" || name == "gaussian-l2") return MeasureKind::gaussian_l2;
  if (name == "gaussian_perturbed" || name == "gaussian-perturbed")
    return MeasureKind::gaussian_perturbed;
  if (name == "empirical") return MeasureKind::empirical;
  throw std::invalid_argument("unknown measure kind '" + name + "'");
}

MeasureSpec MeasureSpec::gaussian_l2(int modes) {
  MeasureSpec spec{MeasureKind::gaussian_l2, modes, {}, {}};
  spec.validate();
  return spec;
}

MeasureSpec MeasureSpec::gaussian_perturbed(int modes, double v) {
  MeasureSpec spec{MeasureKind::gaussian_perturbed, modes, {v}, {}};
  spec.validate();
  return spec;
}

MeasureSpec MeasureSpec::gaussian_perturbed(int modes, std::vector<double> v_table) {
  MeasureSpec spec{MeasureKind::gaussian_perturbed, modes, std::move(v_table), {}};
  spec.validate();
  return spec;
}

MeasureSpec MeasureSpec::empirical(int modes, std::string source) {
  MeasureSpec spec{MeasureKind::empirical, modes, {}, std::move(source)};
  spec.validate();
  return spec;
}

double MeasureSpec::multiplier(int n) const {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v.front();
  return v.at(static_cast<std::size_t>(n));
}

void MeasureSpec::validate() const {
  if (modes < 0) throw std::invalid_argument("MeasureSpec: modes must be >= 0");
  if (v.size() > 1 && v.size() != static_cast<std::size_t>(modes) + 1)
    throw std::invalid_argument("MeasureSpec: V table needs modes+1 entries");
  for (double x : v)
    if (!(x > -1.0) || !std::isfinite(x)) throw std::invalid_argument("MeasureSpec: V(n) must be > -1");
}

void Ensemble::validate() const {
  if (samples.empty()) throw std::invalid_argument("Ensemble: no samples");
  const int m = samples.front().max_mode();
  for (const auto& u : samples)
    if (u.max_mode() != m) throw std::invalid_argument("Ensemble: samples differ in max_mode");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(seed) ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

SpectralField sample_gaussian_one(const MeasureSpec& spec, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(mix_seed(seed, index));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Complex> c(static_cast<std::size_t>(spec.modes) + 1);
  c[0] = Complex(normal(rng) * std::sqrt(1.0 + spec.multiplier(0)), 0.0);
  for (int n = 1; n <= spec.modes; ++n) {
    const double a = normal(rng);
    const double b = normal(rng);
    const double scale = std::sqrt((1.0 + spec.multiplier(n)) / (2.0 * (1.0 + double(n) * n)));
    c[n] = Complex(a * scale, b * scale);
  }
  return SpectralField(std::move(c));
}

Ensemble sample_gaussian(const MeasureSpec& spec, std::uint64_t seed, std::size_t count) {
  spec.validate();
  if (spec.kind == MeasureKind::empirical)
    throw std::invalid_argument("sample_gaussian: measure is not Gaussian");
  if (count == 0) throw std::invalid_argument("sample_gaussian: count must be >= 1");
  Ensemble e{spec, seed, 0.0, std::vector<SpectralField>(count)};
  parallel_for(count, [&](std::size_t i) { e.samples[i] = sample_gaussian_one(spec, seed, i); });
  return e;
}

Ensemble pushforward(const Ensemble& e, double t, const EvolveParams& params) {
  e.validate();
  params.validate(e.max_mode());
  Ensemble out{e.spec, e.seed, e.time + t, std::vector<SpectralField>(e.size())};
  if (t == 0.0) {
    out.samples = e.samples;
    return out;
  }
  parallel_for(e.size(), [&](std::size_t i) {
    try {
      out.samples[i] = evolve(e.samples[i], t, params);
    } catch (const EvolveError& err) {
      throw PushforwardError("sample " + std::to_string(i) + ": " + err.what(), i);
    }
  });
  return out;
}

double empirical_moment(std::span<const double> values, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("empirical_moment: q must be >= 1");
  if (values.empty()) throw std::invalid_argument("empirical_moment: no values");
  const double top = *std::max_element(values.begin(), values.end());
  if (top == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += std::pow(v / top, q);
  return top * std::pow(sum / double(values.size()), 1.0 / q);
}

double empirical_moment(const Ensemble& e, SobolevIndex s_prime, double q) {
  e.validate();
  std::vector<double> norms;
  norms.reserve(e.size());
  for (const auto& u : e.samples) norms.push_back(sobolev_norm(u, s_prime));
  return empirical_moment(norms, q);
}

std::vector<double> default_q_grid(std::size_t count) {
  const double q_max = std::log(double(std::max<std::size_t>(count, 1)));
  std::vector<double> grid{1.0};
  for (double q = 2.0; q <= q_max + 1e-12; q += 1.0) grid.push_back(q);
  return grid;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  if (syy > 1e-18 * std::max(1.0, my * my)) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ssr += r * r;
    }
    fit.r_squared = 1.0 - ssr / syy;
  }
  return fit;
}

// ln((1/K) Σ exp(p ℓ_i)) for logs ℓ_i = ln x_i.
double log_mean_power(std::span<const double> logs, double p) {
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logs) top = std::max(top, p * l);
  double sum = 0.0;
  for (double l : logs) sum += std::exp(p * l - top);
  return top + std::log(sum / double(logs.size()));
}

}  // namespace

MomentReport subgaussian_fit(std::span<const double> norms, std::span<const double> q_grid) {
  if (q_grid.empty()) throw std::invalid_argument("subgaussian_fit: empty q grid");
  if (norms.empty()) throw std::invalid_argument("subgaussian_fit: no samples");
  const double q_max = std::max(1.0, std::log(double(norms.size())));
  for (double q : q_grid)
    if (!(q >= 1.0) || q > q_max + 1e-12)
      throw std::invalid_argument("subgaussian_fit: q must lie in [1, max(1, ln K)]");

  MomentReport report;
  report.law = MomentLaw::sqrt_p;
  report.q_grid.assign(q_grid.begin(), q_grid.end());
  for (double q : q_grid) {
    const double m = empirical_moment(norms, q);
    report.norms.push_back(m);
    report.ratios.push_back(m / std::sqrt(q));
  }
  report.fit_C = *std::max_element(report.ratios.begin(), report.ratios.end());
  if (report.fit_C > 0.0 && q_grid.size() >= 2) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < q_grid.size(); ++k) {
      x.push_back(std::log(q_grid[k]));
      y.push_back(std::log(report.ratios[k]));
    }
    const LineFit fit = least_squares(x, y);
    report.slope = fit.slope;
    report.r_squared = fit.r_squared;
  }
  report.pass = report.slope <= kSubgaussianSlopeLimit;
  return report;
}

MomentReport subgaussian_fit(const Ensemble& e, SobolevIndex s_prime, std::span<const double> q_grid) {
  e.validate();
  std::vector<double> norms;
  norms.reserve(e.size());
  for (const auto& u : e.samples) norms.push_back(sobolev_norm(u, s_prime));
  return subgaussian_fit(norms, q_grid);
}

MomentReport log_deviation_fit(std::span<const double> values, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("log_deviation_fit: alpha must be > 0");
  std::vector<double> logs;
  logs.reserve(values.size());
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("log_deviation_fit: values must be positive and finite");
    logs.push_back(std::log(v));
  }

  const std::size_t count = values.size();
  const double p_max = count < 2 ? 0.0 : 0.5 * std::pow(std::log(double(count)), 1.0 / (1.0 + alpha));
  MomentReport report;
  report.law = MomentLaw::log_deviation;
  report.alpha = alpha;
  std::vector<double> x;
  if (p_max > 0.0) {
    for (int k = 1; k <= 8; ++k) {
      const double p = p_max * k / 8.0;
      const double lm = log_mean_power(logs, p);
      if (!std::isfinite(lm)) continue;
      report.q_grid.push_back(p);
      report.norms.push_back(lm);
      x.push_back(std::pow(p, 1.0 + alpha));
    }
  }
  if (report.q_grid.size() < 3)
    throw std::invalid_argument("log_deviation_fit: fewer than 3 usable p points");

  const LineFit fit = least_squares(x, report.norms);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.r_squared = fit.r_squared;
  for (double xi : x) report.ratios.push_back(fit.intercept + fit.slope * xi);
  report.fit_C = std::exp(std::max(0.0, fit.slope));
  const double beta = std::pow(1.0 + alpha, -1.0 / alpha) * (1.0 - 1.0 / (1.0 + alpha));
  report.delta_bound = fit.slope > 0.0 ? beta / std::pow(fit.slope, 1.0 / alpha)
                                       : std::numeric_limits<double>::infinity();

  // An infinite moment shows up as an estimate that keeps growing with K.
  if (count >= 16) {
    const double p = report.q_grid.back();
    const std::size_t block = count / 4;
    std::vector<double> quarter;
    for (std::size_t b = 0; b < 4; ++b)
      quarter.push_back(log_mean_power(std::span(logs).subspan(b * block, block), p));
    std::sort(quarter.begin(), quarter.end());
    const double median = 0.5 * (quarter[1] + quarter[2]);
    report.divergence = report.norms.back() - median;
  }
  report.pass = report.r_squared >= kLogDeviationMinRSquared &&
                report.divergence <= kLogDeviationDivergenceLimit;
  return report;
}

}  // namespace bbmflow
