#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "idbscan/dataset.hpp"
#include "idbscan/fast_pca.hpp"
#include "idbscan/matrix.hpp"

namespace idbscan {

// How the low-dimensional anchor for the Stage I ordering is chosen.
enum class ReferenceMethod : int {
  kFirstComponentMin = 1,  // q = min of projected column 1 (one-dimensional)
  kSharedMin = 2,          // q = [m, m], m = min over projected columns 1 and 2
  kColumnMean = 3,         // q = means of projected columns 1 and 2
};

std::size_t reference_dims(ReferenceMethod method);
ReferenceMethod reference_method_from_int(int value);
std::string_view to_string(ReferenceMethod method);

struct ReferencePoint {
  std::vector<double> coords;  // length 1 or 2
  ReferenceMethod method = ReferenceMethod::kSharedMin;
};

// Pruning work counters for one or more region queries.
struct StageStats {
  std::uint64_t stage1_batch_pruned = 0;  // candidates skipped by the sorted-order cutoff
  std::uint64_t stage2_pruned = 0;        // rejected by the partial projected sum
  std::uint64_t stage3_pruned = 0;        // rejected by the residual-norm bound
  std::uint64_t stage4_distances = 0;     // exact distances computed
  std::uint64_t neighbors_found = 0;

  std::uint64_t examined() const { return stage2_pruned + stage3_pruned + stage4_distances; }
  std::uint64_t total() const { return stage1_batch_pruned + examined(); }

  StageStats& operator+=(const StageStats& other);
  friend bool operator==(const StageStats&, const StageStats&) = default;
};

// Throws std::invalid_argument naming the required h when the projection is too narrow.
// `per_column_min` switches kSharedMin to [min col 1, min col 2] (experimental).
ReferencePoint choose_reference_point(const ProjectionContext& projection, ReferenceMethod method,
                                      bool per_column_min = false);

// Immutable index over the points, sorted ascending by distance to the
// reference point. All per-point arrays are stored in sorted order.
class QueryContext {
 public:
  std::size_t n() const { return order_.size(); }
  std::size_t d() const { return data_.cols(); }
  std::size_t h() const { return projected_.cols(); }
  double eps() const { return eps_; }
  bool linear_scan() const { return linear_scan_; }
  const ReferencePoint& reference() const { return reference_; }

  // Distance to the reference point, by sorted position.
  std::span<const double> ref_dist() const { return ref_dist_; }
  // Original index of the point at each sorted position.
  std::span<const std::size_t> order() const { return order_; }
  // Sorted position of each original index.
  std::span<const std::size_t> position() const { return position_; }

  // Same ordering with a different radius; nothing is re-sorted.
  QueryContext with_eps(double eps) const;

 private:
  friend QueryContext build_query_context(const DataMatrix&, const ProjectionContext&,
                                          const ReferencePoint&, double);
  friend QueryContext build_linear_scan_context(const DataMatrix&, double);
  friend void region_query(const QueryContext&, std::size_t, StageStats&, std::vector<std::size_t>&);

  ReferencePoint reference_;
  std::vector<double> ref_dist_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_;
  Matrix data_;       // original coordinates, sorted
  Matrix projected_;  // first h projected coordinates, sorted
  std::vector<double> residual_;  // residual norms, sorted
  double eps_ = 0.0;
  // Extra room on every pruning threshold so rounding in the projected
  // coordinates can never discard a true neighbor.
  double slack_ = 0.0;
  bool linear_scan_ = false;
};

QueryContext build_query_context(const DataMatrix& data, const ProjectionContext& projection,
                                 const ReferencePoint& reference, double eps);

// Identity ordering, every candidate goes straight to the exact distance.
QueryContext build_linear_scan_context(const DataMatrix& data, double eps);

// Appends to `out` the original indices of all k != order[sorted_pos] with
// ||x_k - x_m|| <= eps. Counters in `stats` are incremented, not reset.
void region_query(const QueryContext& qc, std::size_t sorted_pos, StageStats& stats,
                  std::vector<std::size_t>& out);
std::vector<std::size_t> region_query(const QueryContext& qc, std::size_t sorted_pos, StageStats& stats);

// Unpruned scan over all other points; stats.stage4_distances grows by n - 1.
void linear_scan_neighbors(const DataMatrix& data, std::size_t index, double eps, StageStats& stats,
                           std::vector<std::size_t>& out);

// Closed-ball test used by every exact distance evaluation.
inline bool within_eps(std::span<const double> a, std::span<const double> b, double eps) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return std::sqrt(sum) <= eps;
}

}  // namespace idbscan
