#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "idbscan/dataset.hpp"
#include "idbscan/matrix.hpp"

namespace idbscan {

class PcaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Covariance {
  Matrix cov;                 // d x d, population (1/n) normalization
  std::vector<double> mean;   // length d
};

// Throws PcaError when n < 2.
Covariance covariance(const DataMatrix& matrix);

struct FixedPointOptions {
  // Iteration stops once ||phi_new - phi_old|| <= tolerance.
  double tolerance = 1e-12;
  std::size_t max_iterations = 1000;
  // If max_iterations pass without convergence, iteration continues on the
  // squared operator, up to this many squarings, each with a fresh budget.
  std::size_t max_squarings = 40;
  // Fresh random starts tried when the deflated operator maps the start to zero.
  std::size_t restarts = 3;
};

struct EigenEstimate {
  std::vector<double> vector;  // unit norm, largest-magnitude coordinate positive
  double value = 0.0;          // Rayleigh quotient phi' C phi
  std::size_t iterations = 0;
  bool converged = false;
};

// One fixed-point sweep phi <- C phi, Gram-Schmidt against `prior`, normalize,
// repeated until convergence. Returns nullopt when C vanishes on the
// complement of `prior`, i.e. there is no further component.
std::optional<EigenEstimate> fixed_point_eigvec(const Matrix& cov,
                                                std::span<const std::vector<double>> prior,
                                                std::uint64_t seed,
                                                const FixedPointOptions& options = {});

struct HSelection {
  std::size_t h = 0;
  // The stream ran dry before the cumulative ratio reached p.
  bool exhausted = false;
};

// Smallest h with sum(lambda_1..h) / total_variance >= p. Pulls eigenvalues
// from `next_eigenvalue` lazily and stops as soon as the threshold is met.
HSelection select_h(const std::function<std::optional<double>()>& next_eigenvalue,
                    double total_variance, double p);

struct PcaOptions {
  double variance_ratio = 0.9;   // p
  std::uint64_t seed = 1;
  // Lower bound on h (capped at d), e.g. 2 for a two-dimensional reference point.
  std::size_t min_components = 1;
  FixedPointOptions fixed_point{};
};

// Output of the fast PCA stage: centered projections and residual norms.
struct ProjectionContext {
  Matrix basis;                      // d x h, orthonormal columns
  std::vector<double> eigenvalues;   // length h, descending
  double total_variance = 0.0;       // trace of the covariance
  Matrix projected;                  // n x h, (x_i - mean) * basis
  std::vector<double> residual_norms;  // length n, ||x_i - mean - basis * z_i||
  std::vector<double> mean;          // length d
  std::size_t h = 0;
  // Zero total variance (or a single point): no usable projection.
  bool degenerate = false;
  // Components ran out before the variance ratio was reached.
  bool threshold_exhausted = false;

  double explained_ratio() const;
};

constexpr double kDegenerateVariance = 1e-12;

ProjectionContext build_projection_context(const DataMatrix& matrix, const PcaOptions& options = {});

}  // namespace idbscan
