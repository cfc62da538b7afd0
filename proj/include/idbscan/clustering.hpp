#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "idbscan/dataset.hpp"
#include "idbscan/fast_pca.hpp"
#include "idbscan/pruning_query.hpp"

namespace idbscan {

struct DbscanParams {
  double eps = 1.0;
  std::size_t min_pts = 5;

  void validate() const;
};

struct Classification {
  static constexpr int kUnclassified = -1;
  static constexpr int kNoise = 0;

  std::vector<int> labels;   // kNoise or a cluster id in 1..cluster_count
  std::vector<bool> core;
  int cluster_count = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t noise_count() const;
  std::size_t core_count() const;
};

// Appends the eps-neighbors of `index` (self excluded) to `out`.
using NeighborProvider = std::function<void(std::size_t index, std::vector<std::size_t>& out)>;

// Classic DBSCAN over an arbitrary neighbor provider. Points are visited in
// `visit_order`; seeds are expanded FIFO. A point is core when its
// neighborhood, itself included, holds at least min_pts points. Every point
// is passed to the provider exactly once.
Classification dbscan(std::size_t n, const DbscanParams& params, const NeighborProvider& neighbors,
                      std::span<const std::size_t> visit_order);

struct Timings {
  double pca_ms = 0.0;
  double sort_ms = 0.0;
  double cluster_ms = 0.0;
  double total_ms = 0.0;
};

struct IdbscanOptions {
  double variance_ratio = 0.9;  // p
  ReferenceMethod method = ReferenceMethod::kSharedMin;
  std::uint64_t seed = 1;
  bool per_column_min = false;
};

struct RunReport {
  std::string algorithm;  // "dbscan" or "idbscan"
  Classification classification;
  StageStats stats;
  Timings timings;
  DbscanParams params;
  IdbscanOptions options;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t h = 0;
  // The projection had no variance and the pruned provider fell back to a linear scan.
  bool linear_scan_fallback = false;
};

// Unpruned baseline: linear-scan neighbors, original index order.
RunReport run_dbscan(const DataMatrix& data, const DbscanParams& params);

// Fast PCA, reference point, sort, then DBSCAN over the pruned region query in
// ascending reference-distance order. Labels are indexed by original point.
RunReport idbscan(const DataMatrix& data, const DbscanParams& params, const IdbscanOptions& options = {});

// Two labelings describe the same density-based clustering: identical core and
// noise sets, the same partition of core points up to renaming, and every
// border point sits in a cluster that has a core point within eps of it.
bool partition_equivalent(const Classification& a, const Classification& b, const DataMatrix& data,
                          double eps);

}  // namespace idbscan
