#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "idbscan/clustering.hpp"
#include "idbscan/dataset.hpp"
#include "idbscan/fast_pca.hpp"
#include "idbscan/pruning_query.hpp"

namespace idbscan::bench {

struct Algorithm {
  bool baseline = true;  // plain DBSCAN when true
  ReferenceMethod method = ReferenceMethod::kSharedMin;

  // "dbscan", "idbscan1", "idbscan2" or "idbscan3".
  std::string name() const;
  static Algorithm parse(const std::string& name);
  friend bool operator==(const Algorithm&, const Algorithm&) = default;
};

struct BenchConfig {
  std::vector<Algorithm> algorithms;
  std::vector<double> eps_values;
  std::size_t min_pts = 5;
  std::vector<double> p_values{0.8, 0.9, 0.99};
  // Subsample sizes for an n sweep; empty means the full data set.
  std::vector<std::size_t> n_values;
  std::size_t repetitions = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

struct BenchRow {
  Algorithm algorithm;
  double eps = 0.0;
  std::size_t min_pts = 0;
  std::optional<double> p;  // unset for plain DBSCAN
  std::size_t n = 0;
  std::size_t d = 0;
  double mean_ms = 0.0;
  double pca_ms = 0.0;
  double sort_ms = 0.0;
  StageStats stats;        // from the first repetition
  bool stats_consistent = true;  // every repetition produced identical counters
  int clusters = 0;
  std::size_t noise = 0;
};

// First `n` rows of a seeded shuffle, restored to original relative order.
DataMatrix subsample(const DataMatrix& data, std::size_t n, std::uint64_t seed);

// One row per (n, eps, algorithm, p) cell; DBSCAN cells ignore p.
std::vector<BenchRow> run_bench(const DataMatrix& data, const BenchConfig& config);

inline constexpr const char* kResultsHeader =
    "algo,method,eps,minpts,p,n,d,mean_ms,pca_ms,sort_ms,stage1_batch_pruned,stage2_pruned,"
    "stage3_pruned,stage4_distances,clusters,noise";

void write_results_csv(std::ostream& out, const std::vector<BenchRow>& rows);

struct MethodComparisonRow {
  double eps = 0.0;
  double p = 0.0;
  std::size_t n = 0;
  std::size_t h = 0;
  // Stage I batch-pruned candidates over one region query per point, by method 1..3.
  std::uint64_t stage1_pruned[3] = {0, 0, 0};
};

// Stage I pruning of the three reference-point methods on identical projections.
std::vector<MethodComparisonRow> compare_reference_methods(const DataMatrix& data,
                                                           const std::vector<double>& eps_values,
                                                           const std::vector<double>& p_values,
                                                           std::uint64_t seed);

// Sum of stage1_batch_pruned after querying every point once.
std::uint64_t stage1_pruned_total(const DataMatrix& data, const ProjectionContext& projection,
                                  ReferenceMethod method, double eps);

void write_method_comparison_csv(std::ostream& out, const std::vector<MethodComparisonRow>& rows);

// index,label with 0 for noise.
void write_labels_csv(std::ostream& out, const Classification& classification);

nlohmann::json stats_to_json(const StageStats& stats);
nlohmann::json report_to_json(const RunReport& report);
nlohmann::json projection_to_json(const ProjectionContext& projection);

}  // namespace idbscan::bench
