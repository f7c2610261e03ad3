#include "bbmflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

#include "bbmflow/parallel.hpp"

namespace bbmflow {

std::string to_string(OtMethod method) {
  switch (method) {
    case OtMethod::exact: return "exact";
    case OtMethod::sinkhorn: return "sinkhorn";
    case OtMethod::synchronized: return "synchronized";
    case OtMethod::brute: return "brute";
  }
  return "unknown";
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t{n, std::vector<double>(entries.size()), s_prime, p};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t.entries[j * n + i] = entries[i * n + j];
  return t;
}

void CostMatrix::validate() const {
  if (n == 0 || entries.size() != n * n) throw std::invalid_argument("CostMatrix: not square");
  for (double x : entries)
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("CostMatrix: entries must be finite and >= 0");
}

namespace {

std::vector<double> norm_weights(int max_mode, double s) {
  std::vector<double> w(static_cast<std::size_t>(max_mode) + 1);
  for (int n = 0; n <= max_mode; ++n) {
    const double base = 2.0 * std::numbers::pi * std::pow(1.0 + double(n) * n, s);
    w[n] = n == 0 ? base : 2.0 * base;
  }
  return w;
}

double ground_cost(const std::vector<double>& weights, const SpectralField& a,
                   const SpectralField& b, double p) {
  const auto ca = a.coeffs();
  const auto cb = b.coeffs();
  double sum = 0.0;
  for (std::size_t n = 0; n < weights.size(); ++n) sum += weights[n] * std::norm(ca[n] - cb[n]);
  return p == 2.0 ? sum : std::pow(std::sqrt(sum), p);
}

void check_pair(const Ensemble& a, const Ensemble& b, double p) {
  a.validate();
  b.validate();
  if (a.size() != b.size()) throw std::invalid_argument("ensembles differ in sample count");
  if (a.max_mode() != b.max_mode()) throw std::invalid_argument("ensembles differ in max_mode");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be >= 1");
}

}  // namespace

CostMatrix cost_matrix(const Ensemble& a, const Ensemble& b, SobolevIndex s_prime, double p) {
  check_pair(a, b, p);
  const std::size_t n = a.size();
  const auto weights = norm_weights(a.max_mode(), s_prime.value());
  CostMatrix c{n, std::vector<double>(n * n), s_prime.value(), p};
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j)
      c.entries[i * n + j] = ground_cost(weights, a.samples[i], b.samples[j], p);
  });
  return c;
}

double permutation_value(const CostMatrix& c, const Permutation& perm) {
  double sum = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) sum += c(i, perm.target[i]);
  return std::pow(sum / double(c.n), 1.0 / c.p);
}

DistanceReport exact_ot(const CostMatrix& c) {
  c.validate();
  const std::size_t n = c.n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Shortest augmenting paths with row/column potentials, 1-based with a
  // virtual column 0 holding the row being inserted.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < minv[j]) {
          minv[j] = reduced;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Permutation perm{std::vector<std::size_t>(n)};
  for (std::size_t j = 1; j <= n; ++j) perm.target[match[j] - 1] = j - 1;
  DistanceReport report;
  report.value = permutation_value(c, perm);
  report.method = OtMethod::exact;
  report.s_prime = c.s_prime;
  report.p = c.p;
  report.coupling = std::move(perm);
  return report;
}

double brute_force_ot(const CostMatrix& c) {
  c.validate();
  if (c.n > 8) throw std::invalid_argument("brute_force_ot: n > 8 is not enumerable");
  Permutation perm{std::vector<std::size_t>(c.n)};
  std::iota(perm.target.begin(), perm.target.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < c.n; ++i) sum += c(i, perm.target[i]);
    best = std::min(best, sum);
  } while (std::next_permutation(perm.target.begin(), perm.target.end()));
  return std::pow(best / double(c.n), 1.0 / c.p);
}

TransportPlan round_to_marginals(TransportPlan plan) {
  const std::size_t n = plan.n;
  const double target = 1.0 / double(n);
  auto& m = plan.mass;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += m[i * n + j];
    const double scale = row > target ? target / row : 1.0;
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] *= scale;
  }
  std::vector<double> col(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) col[j] += m[i * n + j];
  for (std::size_t j = 0; j < n; ++j) {
    const double scale = col[j] > target ? target / col[j] : 1.0;
    for (std::size_t i = 0; i < n; ++i) m[i * n + j] *= scale;
  }
  std::vector<double> row_err(n, target), col_err(n, target);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      row_err[i] -= m[i * n + j];
      col_err[j] -= m[i * n + j];
    }
  double total = 0.0;
  for (double& e : row_err) total += (e = std::max(e, 0.0));
  for (double& e : col_err) e = std::max(e, 0.0);
  if (total > 0.0)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i * n + j] += row_err[i] * col_err[j] / total;
  return plan;
}

DistanceReport sinkhorn_ot(const CostMatrix& c, double epsilon, double tol,
                           const SinkhornOptions& options) {
  c.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("sinkhorn_ot: epsilon must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("sinkhorn_ot: tol must be > 0");

  const std::size_t n = c.n;
  const double log_mass = -std::log(double(n));
  std::vector<double> f(n, 0.0), g(n, 0.0), work(n);

  auto lse = [&](auto&& term) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) top = std::max(top, work[k] = term(k));
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += std::exp(work[k] - top);
    return top + std::log(sum);
  };
  auto sweep = [&](double eps) {
    for (std::size_t i = 0; i < n; ++i)
      f[i] = eps * (log_mass - lse([&](std::size_t j) { return (g[j] - c(i, j)) / eps; }));
    for (std::size_t j = 0; j < n; ++j)
      g[j] = eps * (log_mass - lse([&](std::size_t i) { return (f[i] - c(i, j)) / eps; }));
  };
  // Columns are exact after a sweep; the residual lives in the rows.
  auto row_residual = [&](double eps) {
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += std::exp((f[i] + g[j] - c(i, j)) / eps);
      err += std::abs(row - 1.0 / double(n));
    }
    return err;
  };

  const double top_cost = *std::max_element(c.entries.begin(), c.entries.end());
  long iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (double eps = std::max(epsilon, top_cost);; eps = std::max(epsilon, 0.5 * eps)) {
    const bool final_stage = eps == epsilon;
    const double stage_tol = final_stage ? tol : std::max(tol, 1e-3);
    const long stage_cap = final_stage ? options.max_iterations : 500;
    for (long k = 0;; ++k) {
      sweep(eps);
      ++iterations;
      if (iterations > options.max_iterations) {
        char msg[96];
        residual = row_residual(eps);
        std::snprintf(msg, sizeof msg, "sinkhorn_ot: iteration cap exceeded, residual %.3e", residual);
        throw SinkhornError(msg, residual);
      }
      if ((k + 1) % options.check_every == 0 || k + 1 >= stage_cap) {
        residual = row_residual(eps);
        if (residual <= stage_tol || k + 1 >= stage_cap) break;
      }
    }
    if (final_stage) break;
  }

  TransportPlan plan{n, std::vector<double>(n * n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) plan.mass[i * n + j] = std::exp((f[i] + g[j] - c(i, j)) / epsilon);
  plan = round_to_marginals(std::move(plan));
  double total = 0.0;
  for (std::size_t k = 0; k < n * n; ++k) total += plan.mass[k] * c.entries[k];

  DistanceReport report;
  report.value = std::pow(total, 1.0 / c.p);
  report.method = OtMethod::sinkhorn;
  report.s_prime = c.s_prime;
  report.p = c.p;
  report.coupling = std::move(plan);
  report.iterations = iterations;
  report.marginal_error = residual;
  return report;
}

DistanceReport synchronized_bound(const Ensemble& a, const Ensemble& b, SobolevIndex s_prime, double p) {
  check_pair(a, b, p);
  const auto weights = norm_weights(a.max_mode(), s_prime.value());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += ground_cost(weights, a.samples[i], b.samples[i], p);

  DistanceReport report;
  report.value = std::pow(sum / double(a.size()), 1.0 / p);
  report.method = OtMethod::synchronized;
  report.s_prime = s_prime.value();
  report.p = p;
  Permutation identity{std::vector<std::size_t>(a.size())};
  std::iota(identity.target.begin(), identity.target.end(), std::size_t{0});
  report.coupling = std::move(identity);
  return report;
}

double median_cost(const CostMatrix& c) {
  c.validate();
  std::vector<double> v = c.entries;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace bbmflow
