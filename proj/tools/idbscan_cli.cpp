// Command-line frontend: cluster, bench, gen, pca-dump.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "idbscan/bench.hpp"
#include "idbscan/clustering.hpp"
#include "idbscan/dataset.hpp"
#include "idbscan/fast_pca.hpp"
#include "idbscan/oracle.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

struct InputFlags {
  std::string path;
  std::string format = "ws";
  bool header = false;
  bool normalize = false;

  void add_to(CLI::App& app, bool required) {
    auto* opt = app.add_option("--input", path, "Point file, one point per line");
    if (required) opt->required();
    app.add_option("--format", format, "csv or ws (whitespace)")->check(CLI::IsMember({"csv", "ws"}));
    app.add_flag("--header", header, "Skip the first line");
    app.add_flag("--normalize", normalize, "Scale every attribute onto [0, 100000]");
  }

  idbscan::DataMatrix load() const {
    idbscan::LoadOptions options;
    options.format = format == "csv" ? idbscan::TextFormat::kCsv : idbscan::TextFormat::kWhitespace;
    options.header = header;
    auto data = idbscan::clean(idbscan::load_matrix(path, options));
    return normalize ? idbscan::minmax_normalize(data) : data;
  }
};

struct BlobFlags {
  std::size_t k = 9;
  std::size_t per_cluster = 450;
  std::size_t dim = 6;
  double separation = 30.0;
  double sigma = 2.0;

  void add_to(CLI::App& app) {
    app.add_option("--blobs,--k", k, "Number of Gaussian clusters");
    app.add_option("--per-cluster", per_cluster, "Points per cluster");
    app.add_option("--dim", dim, "Dimensionality");
    app.add_option("--separation", separation, "Minimum distance between cluster centers");
    app.add_option("--sigma", sigma, "Per-coordinate standard deviation");
  }

  idbscan::oracle::BlobSpec spec(std::uint64_t seed) const { return {k, per_cluster, dim, separation, sigma, seed}; }
};

// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
  if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-based clustering with PCA-guided pruned region queries"};
  app.require_subcommand(1);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Run one clustering and write labels and a JSON report");
  InputFlags cluster_input;
  cluster_input.add_to(*cluster, true);
  std::string algo = "idbscan";
  int method = 2;
  double eps = 0.0;
  std::size_t min_pts = 5;
  double p = 0.9;
  std::uint64_t seed = 1;
  std::string labels_out;
  std::string report_out;
  std::string dump_pca;
  cluster->add_option("--algo", algo, "dbscan or idbscan")->check(CLI::IsMember({"dbscan", "idbscan"}));
  cluster->add_option("--method", method, "Reference point method")->check(CLI::Range(1, 3));
  cluster->add_option("--eps", eps, "Neighborhood radius")->required()->check(CLI::PositiveNumber);
  cluster->add_option("--minpts", min_pts, "Core point threshold, self included")->check(CLI::Range(1, 1 << 30));
  cluster->add_option("--p", p, "Explained variance ratio in (0, 1]")->check(CLI::Range(0.0, 1.0));
  cluster->add_option("--seed", seed, "Seed for the PCA start vectors");
  cluster->add_option("--out", labels_out, "Labels CSV (index,label), stdout by default");
  cluster->add_option("--report", report_out, "Run report JSON");
  cluster->add_option("--dump-pca", dump_pca, "Projection debug JSON (idbscan only)");

  // bench
  auto* bench = app.add_subcommand("bench", "Sweep algorithms, eps, p and n; write a results CSV");
  InputFlags bench_input;
  bench_input.add_to(*bench, false);
  BlobFlags bench_blobs;
  bench_blobs.add_to(*bench);
  std::vector<std::string> bench_algos{"dbscan", "idbscan"};
  std::vector<int> bench_methods{1, 2};
  std::vector<double> bench_eps;
  std::vector<double> bench_p{0.8, 0.9, 0.99};
  std::vector<std::size_t> bench_n;
  std::size_t reps = 10;
  std::size_t bench_min_pts = 5;
  std::uint64_t bench_seed = 1;
  std::string bench_out;
  std::string methods_out;
  bench->add_option("--algo", bench_algos, "dbscan, idbscan, idbscan1, idbscan2, idbscan3 (repeatable)");
  bench->add_option("--method", bench_methods, "Methods used for plain 'idbscan' (repeatable)")
      ->check(CLI::Range(1, 3));
  bench->add_option("--eps", bench_eps, "Radius (repeatable)")->required();
  bench->add_option("--p", bench_p, "Explained variance ratio (repeatable)");
  bench->add_option("--n", bench_n, "Subsample size for an n sweep (repeatable)");
  bench->add_option("--reps", reps, "Repetitions per cell")->check(CLI::Range(1, 1 << 20));
  bench->add_option("--minpts", bench_min_pts, "Core point threshold")->check(CLI::Range(1, 1 << 30));
  bench->add_option("--seed", bench_seed, "Seed for generation, subsampling and PCA");
  bench->add_option("--out", bench_out, "Results CSV, stdout by default");
  bench->add_option("--methods-out", methods_out, "Stage I comparison of reference methods (CSV)");

  // gen
  auto* gen = app.add_subcommand("gen", "Write a Gaussian blob fixture as whitespace text");
  BlobFlags gen_blobs;
  gen_blobs.add_to(*gen);
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  std::string gen_labels;
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output point file")->required();
  gen->add_option("--labels-out", gen_labels, "True labels, one per line");

  // pca-dump
  auto* pca_dump = app.add_subcommand("pca-dump", "Print the fast PCA projection as JSON");
  InputFlags pca_input;
  pca_input.add_to(*pca_dump, true);
  double pca_p = 0.9;
  std::uint64_t pca_seed = 1;
  std::string pca_out;
  pca_dump->add_option("--p", pca_p, "Explained variance ratio in (0, 1]")->check(CLI::Range(0.0, 1.0));
  pca_dump->add_option("--seed", pca_seed, "Seed for the PCA start vectors");
  pca_dump->add_option("--out", pca_out, "Output JSON, stdout by default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (cluster->parsed()) {
      const auto data = cluster_input.load();
      const idbscan::DbscanParams params{eps, min_pts};
      const idbscan::IdbscanOptions options{p, idbscan::reference_method_from_int(method), seed};
      if (p <= 0.0) throw std::invalid_argument("--p must lie in (0, 1]");
      const auto report = algo == "dbscan" ? idbscan::run_dbscan(data, params) : idbscan::idbscan(data, params, options);
      with_output(labels_out, [&](std::ostream& out) { idbscan::bench::write_labels_csv(out, report.classification); });
      if (!report_out.empty()) {
        with_output(report_out, [&](std::ostream& out) { out << idbscan::bench::report_to_json(report).dump(2) << '\n'; });
      }
      if (!dump_pca.empty()) {
        idbscan::PcaOptions pca;
        pca.variance_ratio = p;
        pca.seed = seed;
        pca.min_components = idbscan::reference_dims(options.method);
        const auto projection = idbscan::build_projection_context(data, pca);
        with_output(dump_pca,
                    [&](std::ostream& out) { out << idbscan::bench::projection_to_json(projection).dump(2) << '\n'; });
      }
      std::cerr << report.algorithm << ": " << report.classification.cluster_count << " clusters, "
                << report.classification.noise_count() << " noise, " << report.timings.total_ms << " ms\n";
    } else if (bench->parsed()) {
      const auto data = [&] {
        if (!bench_input.path.empty()) return bench_input.load();
        auto generated = idbscan::oracle::synth_gaussian_blobs(bench_blobs.spec(bench_seed)).data;
        return bench_input.normalize ? idbscan::minmax_normalize(generated) : generated;
      }();
      idbscan::bench::BenchConfig config;
      for (const auto& name : bench_algos) {
        if (name == "idbscan") {
          for (int m : bench_methods) config.algorithms.push_back({false, idbscan::reference_method_from_int(m)});
        } else {
          config.algorithms.push_back(idbscan::bench::Algorithm::parse(name));
        }
      }
      config.eps_values = bench_eps;
      config.p_values = bench_p;
      config.n_values = bench_n;
      config.repetitions = reps;
      config.min_pts = bench_min_pts;
      config.seed = bench_seed;
      const auto rows = idbscan::bench::run_bench(data, config);
      with_output(bench_out, [&](std::ostream& out) { idbscan::bench::write_results_csv(out, rows); });

      const auto comparison = idbscan::bench::compare_reference_methods(data, bench_eps, bench_p, bench_seed);
      if (!methods_out.empty()) {
        with_output(methods_out,
                    [&](std::ostream& out) { idbscan::bench::write_method_comparison_csv(out, comparison); });
      } else {
        idbscan::bench::write_method_comparison_csv(std::cerr, comparison);
      }
    } else if (gen->parsed()) {
      const auto blobs = idbscan::oracle::synth_gaussian_blobs(gen_blobs.spec(gen_seed));
      idbscan::write_matrix(gen_out, blobs.data);
      if (!gen_labels.empty()) {
        with_output(gen_labels, [&](std::ostream& out) {
          for (int label : blobs.labels) out << label << '\n';
        });
      }
    } else if (pca_dump->parsed()) {
      const auto data = pca_input.load();
      idbscan::PcaOptions pca;
      pca.variance_ratio = pca_p;
      pca.seed = pca_seed;
      if (pca_p <= 0.0) throw std::invalid_argument("--p must lie in (0, 1]");
      const auto projection = idbscan::build_projection_context(data, pca);
      with_output(pca_out,
                  [&](std::ostream& out) { out << idbscan::bench::projection_to_json(projection).dump(2) << '\n'; });
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
