#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bbmflow/random_fields.hpp"
#include "bbmflow/spectral.hpp"

namespace bbmflow {

/// n×n matrix of ground costs ‖u_i − v_j‖_{H^{s'}}^p, row-major.
struct CostMatrix {
  std::size_t n = 0;
  std::vector<double> entries;
  double s_prime = 0.0;
  double p = 1.0;

  double operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
  CostMatrix transposed() const;

  /// Throws std::invalid_argument unless square, finite and nonnegative.
  void validate() const;
};

/// row i is sent to column target[i].
struct Permutation {
  std::vector<std::size_t> target;
};

/// Dense plan; rows and columns each carry mass 1/n.
struct TransportPlan {
  std::size_t n = 0;
  std::vector<double> mass;  // row-major
};

using Coupling = std::variant<Permutation, TransportPlan>;

enum class OtMethod { exact, sinkhorn, synchronized, brute };

std::string to_string(OtMethod method);

struct DistanceReport {
  double value = 0.0;
  OtMethod method = OtMethod::exact;
  double s_prime = 0.0;
  double p = 1.0;
  Coupling coupling;
  long iterations = 0;
  double marginal_error = 0.0;  // before rounding, sinkhorn only
};

CostMatrix cost_matrix(const Ensemble& a, const Ensemble& b, SobolevIndex s_prime, double p);

/// (Σ_i c(i, target[i]) / n)^{1/p}, summed in row order.
double permutation_value(const CostMatrix& c, const Permutation& perm);

/// Exact Wasserstein distance between the uniform empirical measures via a
/// shortest augmenting path assignment solver, O(n³). Ties go to the lowest
/// column index.
DistanceReport exact_ot(const CostMatrix& c);

/// Exhaustive minimum over all n! permutations. Throws for n > 8.
double brute_force_ot(const CostMatrix& c);

struct SinkhornOptions {
  long max_iterations = 1000000;
  /// Check the marginal residual every this many sweeps.
  long check_every = 10;
};

/// The entropic plan exceeded the iteration cap.
class SinkhornError : public std::runtime_error {
 public:
  SinkhornError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Log-domain Sinkhorn with ε-scaling. Iterates until the L1 row-marginal
/// error is ≤ tol, then rounds the plan onto the exact marginals before
/// costing, so the value is that of a feasible coupling.
DistanceReport sinkhorn_ot(const CostMatrix& c, double epsilon, double tol,
                           const SinkhornOptions& options = {});

/// Round an approximately feasible plan onto uniform marginals 1/n.
TransportPlan round_to_marginals(TransportPlan plan);

/// Value of the index-aligned coupling, ((1/n) Σ_i ‖a_i − b_i‖^p)^{1/p}.
DistanceReport synchronized_bound(const Ensemble& a, const Ensemble& b, SobolevIndex s_prime, double p);

/// Median of the cost entries.
double median_cost(const CostMatrix& c);

}  // namespace bbmflow
