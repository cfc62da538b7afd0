#include "idbscan/bench.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace idbscan::bench {

namespace {

std::string format_real(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::string format_ms(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(3);
  s << v;
  return s.str();
}

}  // namespace

std::string Algorithm::name() const {
  if (baseline) return "dbscan";
  return "idbscan" + std::to_string(static_cast<int>(method));
}

Algorithm Algorithm::parse(const std::string& name) {
  if (name == "dbscan") return {};
  if (name.size() == 8 && name.starts_with("idbscan")) {
    return {false, reference_method_from_int(name.back() - '0')};
  }
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void BenchConfig::validate() const {
  if (algorithms.empty()) throw std::invalid_argument("bench: at least one algorithm is required");
  if (eps_values.empty()) throw std::invalid_argument("bench: at least one eps value is required");
  if (repetitions < 1) throw std::invalid_argument("bench: repetitions must be at least 1");
  if (min_pts < 1) throw std::invalid_argument("bench: min_pts must be at least 1");
  for (double e : eps_values) {
    if (!(e > 0.0)) throw std::invalid_argument("bench: eps values must be positive");
  }
  const bool any_improved = std::ranges::any_of(algorithms, [](const Algorithm& a) { return !a.baseline; });
  if (any_improved && p_values.empty()) throw std::invalid_argument("bench: at least one p value is required");
  for (double p : p_values) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("bench: p values must lie in (0, 1]");
  }
  for (std::size_t n : n_values) {
    if (n < 1) throw std::invalid_argument("bench: n values must be positive");
  }
}

DataMatrix subsample(const DataMatrix& data, std::size_t n, std::uint64_t seed) {
  if (n < 1 || n > data.n())
    throw std::invalid_argument("subsample: n must lie in [1, " + std::to_string(data.n()) + "]");
  if (n == data.n()) return data;
  std::vector<std::size_t> idx(data.n());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  std::ranges::sort(idx);
  std::vector<double> values;
  values.reserve(n * data.d());
  for (std::size_t i : idx) values.insert(values.end(), data.row(i).begin(), data.row(i).end());
  return DataMatrix(Matrix(n, data.d(), std::move(values)), data.attributes());
}

std::vector<BenchRow> run_bench(const DataMatrix& data, const BenchConfig& config) {
  config.validate();
  std::vector<std::size_t> sizes = config.n_values;
  if (sizes.empty()) sizes.push_back(data.n());

  std::vector<BenchRow> rows;
  for (std::size_t n : sizes) {
    const DataMatrix sample = subsample(data, n, config.seed);
    for (double eps : config.eps_values) {
      const DbscanParams params{eps, config.min_pts};
      for (const Algorithm& algo : config.algorithms) {
        std::vector<std::optional<double>> ps;
        if (algo.baseline) {
          ps.emplace_back();
        } else {
          ps.assign(config.p_values.begin(), config.p_values.end());
        }
        for (const auto& p : ps) {
          BenchRow row;
          row.algorithm = algo;
          row.eps = eps;
          row.min_pts = config.min_pts;
          row.p = p;
          row.n = sample.n();
          row.d = sample.d();
          for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
            const RunReport report =
                algo.baseline ? run_dbscan(sample, params)
                              : idbscan(sample, params, IdbscanOptions{*p, algo.method, config.seed});
            row.mean_ms += report.timings.total_ms;
            row.pca_ms += report.timings.pca_ms;
            row.sort_ms += report.timings.sort_ms;
            if (rep == 0) {
              row.stats = report.stats;
              row.clusters = report.classification.cluster_count;
              row.noise = report.classification.noise_count();
            } else if (!(report.stats == row.stats)) {
              row.stats_consistent = false;
            }
          }
          const double reps = static_cast<double>(config.repetitions);
          row.mean_ms /= reps;
          row.pca_ms /= reps;
          row.sort_ms /= reps;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kResultsHeader << '\n';
  for (const BenchRow& r : rows) {
    out << r.algorithm.name() << ',' << (r.algorithm.baseline ? 0 : static_cast<int>(r.algorithm.method)) << ','
        << format_real(r.eps) << ',' << r.min_pts << ',' << (r.p ? format_real(*r.p) : std::string()) << ','
        << r.n << ',' << r.d << ',' << format_ms(r.mean_ms) << ',' << format_ms(r.pca_ms) << ','
        << format_ms(r.sort_ms) << ',' << r.stats.stage1_batch_pruned << ',' << r.stats.stage2_pruned << ','
        << r.stats.stage3_pruned << ',' << r.stats.stage4_distances << ',' << r.clusters << ',' << r.noise
        << '\n';
  }
}

std::uint64_t stage1_pruned_total(const DataMatrix& data, const ProjectionContext& projection,
                                  ReferenceMethod method, double eps) {
  const QueryContext qc = build_query_context(data, projection, choose_reference_point(projection, method), eps);
  StageStats stats;
  std::vector<std::size_t> scratch;
  for (std::size_t pos = 0; pos < qc.n(); ++pos) {
    scratch.clear();
    region_query(qc, pos, stats, scratch);
  }
  return stats.stage1_batch_pruned;
}

std::vector<MethodComparisonRow> compare_reference_methods(const DataMatrix& data,
                                                           const std::vector<double>& eps_values,
                                                           const std::vector<double>& p_values,
                                                           std::uint64_t seed) {
  std::vector<MethodComparisonRow> rows;
  for (double p : p_values) {
    PcaOptions pca;
    pca.variance_ratio = p;
    pca.seed = seed;
    pca.min_components = 2;
    const ProjectionContext projection = build_projection_context(data, pca);
    if (projection.degenerate || projection.h < 2) continue;
    for (double eps : eps_values) {
      MethodComparisonRow row;
      row.eps = eps;
      row.p = p;
      row.n = data.n();
      row.h = projection.h;
      for (int m = 1; m <= 3; ++m) {
        row.stage1_pruned[m - 1] = stage1_pruned_total(data, projection, reference_method_from_int(m), eps);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_method_comparison_csv(std::ostream& out, const std::vector<MethodComparisonRow>& rows) {
  out << "eps,p,n,h,method1_stage1_pruned,method2_stage1_pruned,method3_stage1_pruned\n";
  for (const auto& r : rows) {
    out << format_real(r.eps) << ',' << format_real(r.p) << ',' << r.n << ',' << r.h << ','
        << r.stage1_pruned[0] << ',' << r.stage1_pruned[1] << ',' << r.stage1_pruned[2] << '\n';
  }
}

void write_labels_csv(std::ostream& out, const Classification& classification) {
  out << "index,label\n";
  for (std::size_t i = 0; i < classification.labels.size(); ++i) {
    out << i << ',' << classification.labels[i] << '\n';
  }
}

nlohmann::json stats_to_json(const StageStats& stats) {
  return {
      {"stage1_batch_pruned", stats.stage1_batch_pruned},
      {"stage2_pruned", stats.stage2_pruned},
      {"stage3_pruned", stats.stage3_pruned},
      {"stage4_distances", stats.stage4_distances},
      {"neighbors_found", stats.neighbors_found},
  };
}

nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json params = {
      {"eps", report.params.eps},
      {"min_pts", report.params.min_pts},
  };
  if (report.algorithm == "idbscan") {
    params["p"] = report.options.variance_ratio;
    params["method"] = static_cast<int>(report.options.method);
    params["seed"] = report.options.seed;
  }
  return {
      {"algorithm", report.algorithm},
      {"params", params},
      {"n", report.n},
      {"d", report.d},
      {"h", report.h},
      {"linear_scan_fallback", report.linear_scan_fallback},
      {"clusters", report.classification.cluster_count},
      {"noise", report.classification.noise_count()},
      {"core_points", report.classification.core_count()},
      {"stats", stats_to_json(report.stats)},
      {"timings",
       {{"pca_ms", report.timings.pca_ms},
        {"sort_ms", report.timings.sort_ms},
        {"cluster_ms", report.timings.cluster_ms},
        {"total_ms", report.timings.total_ms}}},
  };
}

nlohmann::json projection_to_json(const ProjectionContext& projection) {
  nlohmann::json basis = nlohmann::json::array();
  for (std::size_t c = 0; c < projection.h; ++c) basis.push_back(projection.basis.column(c));
  return {
      {"h", projection.h},
      {"degenerate", projection.degenerate},
      {"threshold_exhausted", projection.threshold_exhausted},
      {"total_variance", projection.total_variance},
      {"explained_ratio", projection.explained_ratio()},
      {"eigenvalues", projection.eigenvalues},
      {"mean", projection.mean},
      {"basis", basis},
  };
}

}  // namespace idbscan::bench
