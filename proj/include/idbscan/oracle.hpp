#pragma once

// Reference implementations used as ground truth by the tests and the
// benchmark harness. Nothing here is called from the clustering path.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "idbscan/clustering.hpp"
#include "idbscan/dataset.hpp"
#include "idbscan/matrix.hpp"

namespace idbscan::oracle {

// All k != i with ||x_k - x_i|| <= eps, ascending.
std::vector<std::size_t> brute_force_neighbors(const DataMatrix& data, std::size_t i, double eps);

// DBSCAN driven by brute_force_neighbors in the given visit order.
Classification brute_force_dbscan(const DataMatrix& data, const DbscanParams& params,
                                  const std::vector<std::size_t>& visit_order);
Classification brute_force_dbscan(const DataMatrix& data, const DbscanParams& params);

struct Eigendecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi rotations. Throws std::invalid_argument for non-symmetric input.
Eigendecomposition dense_eig_oracle(const Matrix& symmetric);

// Largest principal angle (radians) between the column spans of two
// matrices with orthonormal columns.
double max_principal_angle(const Matrix& a, const Matrix& b);

struct BlobSpec {
  std::size_t k = 3;
  std::size_t per_cluster = 100;
  std::size_t d = 2;
  double separation = 10.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
};

struct LabeledData {
  DataMatrix data;
  std::vector<int> labels;  // true cluster, 1..k
};

// Isotropic Gaussian clusters whose centers are at least `separation` apart.
// Rows are grouped by cluster. Throws std::runtime_error when the centers
// cannot be placed.
LabeledData synth_gaussian_blobs(const BlobSpec& spec);

}  // namespace idbscan::oracle
