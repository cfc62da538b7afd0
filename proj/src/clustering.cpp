#include "idbscan/clustering.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace idbscan {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start, Clock::time_point stop) {
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

}  // namespace

void DbscanParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive and finite");
  if (min_pts < 1) throw std::invalid_argument("min_pts must be at least 1");
}

std::size_t Classification::noise_count() const {
  return static_cast<std::size_t>(std::ranges::count(labels, kNoise));
}

std::size_t Classification::core_count() const {
  return static_cast<std::size_t>(std::ranges::count(core, true));
}

Classification dbscan(std::size_t n, const DbscanParams& params, const NeighborProvider& neighbors,
                      std::span<const std::size_t> visit_order) {
  params.validate();
  if (visit_order.size() != n) throw std::invalid_argument("dbscan: visit order must cover every point");

  Classification result;
  result.labels.assign(n, Classification::kUnclassified);
  result.core.assign(n, false);
  // A point found non-core keeps that status, so it is never queried twice.
  std::vector<bool> queried(n, false);
  std::vector<std::size_t> found;
  std::deque<std::size_t> seeds;
  int cluster_id = 1;

  auto expand = [&](std::size_t point) -> bool {
    found.clear();
    neighbors(point, found);
    queried[point] = true;
    if (found.size() + 1 < params.min_pts) return false;
    result.core[point] = true;
    for (const std::size_t y : found) {
      int& label = result.labels[y];
      if (label == Classification::kUnclassified || label == Classification::kNoise) {
        label = cluster_id;
        seeds.push_back(y);
      }
    }
    return true;
  };

  for (const std::size_t id : visit_order) {
    if (id >= n) throw std::out_of_range("dbscan: visit order index out of range");
    if (result.labels[id] != Classification::kUnclassified) continue;
    if (!expand(id)) {
      result.labels[id] = Classification::kNoise;
      continue;
    }
    result.labels[id] = cluster_id;
    while (!seeds.empty()) {
      const std::size_t y = seeds.front();
      seeds.pop_front();
      if (!queried[y]) expand(y);
    }
    ++cluster_id;
  }
  result.cluster_count = cluster_id - 1;
  return result;
}

RunReport run_dbscan(const DataMatrix& data, const DbscanParams& params) {
  params.validate();
  RunReport report;
  report.algorithm = "dbscan";
  report.params = params;
  report.n = data.n();
  report.d = data.d();

  const auto start = Clock::now();
  const auto order = identity_order(data.n());
  StageStats& stats = report.stats;
  report.classification = dbscan(
      data.n(), params,
      [&](std::size_t i, std::vector<std::size_t>& out) { linear_scan_neighbors(data, i, params.eps, stats, out); },
      order);
  const auto stop = Clock::now();
  report.timings.cluster_ms = elapsed_ms(start, stop);
  report.timings.total_ms = report.timings.cluster_ms;
  return report;
}

RunReport idbscan(const DataMatrix& data, const DbscanParams& params, const IdbscanOptions& options) {
  params.validate();
  RunReport report;
  report.algorithm = "idbscan";
  report.params = params;
  report.options = options;
  report.n = data.n();
  report.d = data.d();

  const auto t0 = Clock::now();
  PcaOptions pca;
  pca.variance_ratio = options.variance_ratio;
  pca.seed = options.seed;
  pca.min_components = reference_dims(options.method);
  const ProjectionContext projection = build_projection_context(data, pca);
  report.h = projection.h;
  const auto t1 = Clock::now();

  // Too few usable components for a 2-D reference point (d = 1 or rank 1 data).
  const bool too_narrow = projection.h < reference_dims(options.method);
  QueryContext qc = projection.degenerate || too_narrow
                        ? build_linear_scan_context(data, params.eps)
                        : build_query_context(data, projection,
                                              choose_reference_point(projection, options.method,
                                                                     options.per_column_min),
                                              params.eps);
  report.linear_scan_fallback = qc.linear_scan();
  const auto t2 = Clock::now();

  StageStats& stats = report.stats;
  const auto position = qc.position();
  report.classification = dbscan(
      data.n(), params,
      [&](std::size_t i, std::vector<std::size_t>& out) { region_query(qc, position[i], stats, out); },
      qc.order());
  const auto t3 = Clock::now();

  report.timings.pca_ms = elapsed_ms(t0, t1);
  report.timings.sort_ms = elapsed_ms(t1, t2);
  report.timings.cluster_ms = elapsed_ms(t2, t3);
  report.timings.total_ms = elapsed_ms(t0, t3);
  return report;
}

bool partition_equivalent(const Classification& a, const Classification& b, const DataMatrix& data,
                          double eps) {
  const std::size_t n = a.size();
  if (b.size() != n || a.core.size() != n || b.core.size() != n || data.n() != n) return false;
  if (a.core != b.core) return false;

  std::unordered_map<int, int> a_to_b;
  std::unordered_map<int, int> b_to_a;
  for (std::size_t i = 0; i < n; ++i) {
    const bool noise_a = a.labels[i] == Classification::kNoise;
    const bool noise_b = b.labels[i] == Classification::kNoise;
    if (noise_a != noise_b) return false;
    if (a.labels[i] == Classification::kUnclassified || b.labels[i] == Classification::kUnclassified) return false;
    if (!a.core[i]) continue;
    const auto [ia, inserted_a] = a_to_b.try_emplace(a.labels[i], b.labels[i]);
    if (ia->second != b.labels[i]) return false;
    const auto [ib, inserted_b] = b_to_a.try_emplace(b.labels[i], a.labels[i]);
    if (ib->second != a.labels[i]) return false;
  }

  auto borders_supported = [&](const Classification& c) {
    for (std::size_t i = 0; i < n; ++i) {
      if (c.core[i] || c.labels[i] == Classification::kNoise) continue;
      bool supported = false;
      for (std::size_t k = 0; k < n && !supported; ++k) {
        supported = c.core[k] && c.labels[k] == c.labels[i] && within_eps(data.row(i), data.row(k), eps);
      }
      if (!supported) return false;
    }
    return true;
  };
  return borders_supported(a) && borders_supported(b);
}

}  // namespace idbscan
