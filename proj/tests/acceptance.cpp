// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "idbscan/bench.hpp"
#include "idbscan/clustering.hpp"
#include "idbscan/dataset.hpp"
#include "idbscan/fast_pca.hpp"
#include "idbscan/oracle.hpp"
#include "idbscan/pruning_query.hpp"

using namespace idbscan;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Instance {
  DataMatrix data;
  std::vector<double> eps;  // sparse to dense
  double p = 0.9;
  std::size_t min_pts = 4;
  std::string kind;
};

double distance(const DataMatrix& data, std::size_t a, std::size_t b) {
  double sq = 0.0;
  for (std::size_t j = 0; j < data.d(); ++j) sq += (data(a, j) - data(b, j)) * (data(a, j) - data(b, j));
  return std::sqrt(sq);
}

// Quantiles of sampled pairwise distances, plus one eps that lands exactly on a pair distance.
std::vector<double> pick_eps(const DataMatrix& data, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, data.n() - 1);
  std::vector<double> sample;
  for (int t = 0; t < 400; ++t) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    if (a != b) sample.push_back(distance(data, a, b));
  }
  std::ranges::sort(sample);
  std::vector<double> eps;
  for (double q : {0.01, 0.05, 0.25}) {
    const double v = sample[static_cast<std::size_t>(q * static_cast<double>(sample.size() - 1))];
    if (v > 0.0) eps.push_back(v);
  }
  for (int t = 0; t < 20; ++t) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    const double v = distance(data, a, b);
    if (a != b && v > 0.0 && v <= sample[sample.size() / 10]) {
      eps.push_back(v);
      break;
    }
  }
  if (eps.empty()) eps.push_back(1.0);
  return eps;
}

Instance make_instance(int index, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss;
  auto uniform_int = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  // Log-uniform size with a few full-size instances.
  std::size_t n = index % 10 == 0 ? 2000 : static_cast<std::size_t>(std::exp(std::log(20.0) + u01(rng) * std::log(50.0)));
  n = std::clamp<std::size_t>(n, 20, 2000);
  const std::size_t d = uniform_int(2, 20);
  const double ps[] = {0.8, 0.9, 0.99};

  Instance inst{DataMatrix::from_rows({{0.0}}), {}, ps[index % 3], uniform_int(1, 10), ""};
  std::vector<double> v;
  v.reserve(n * d);
  switch (index % 5) {
    case 0: {
      const std::size_t k = uniform_int(1, 8);
      const auto blobs = oracle::synth_gaussian_blobs(
          {k, std::max<std::size_t>(1, n / k), d, 5.0 + 40.0 * u01(rng), 0.5 + 3.0 * u01(rng), rng()});
      inst.data = index % 2 == 0 ? minmax_normalize(blobs.data) : blobs.data;
      inst.kind = "blobs";
      break;
    }
    case 1:
      for (std::size_t i = 0; i < n * d; ++i) v.push_back(u01(rng));
      inst.data = DataMatrix(Matrix(n, d, std::move(v)));
      inst.kind = "uniform";
      break;
    case 2: {
      // Correlated, close to low rank.
      const std::size_t r = uniform_int(1, std::min<std::size_t>(d, 4));
      std::vector<double> a(d * r);
      for (double& x : a) x = gauss(rng) * 10.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> g(r);
        for (double& x : g) x = gauss(rng);
        for (std::size_t j = 0; j < d; ++j) {
          double s = 0.01 * gauss(rng);
          for (std::size_t c = 0; c < r; ++c) s += a[j * r + c] * g[c];
          v.push_back(s);
        }
      }
      inst.data = DataMatrix(Matrix(n, d, std::move(v)));
      inst.kind = "lowrank";
      break;
    }
    case 3: {
      // Integer grid: many duplicates and exact boundary distances.
      const std::size_t dd = std::min<std::size_t>(d, 4);
      const int side = static_cast<int>(uniform_int(3, 8));
      for (std::size_t i = 0; i < n * dd; ++i) v.push_back(static_cast<double>(uniform_int(0, side)));
      inst.data = DataMatrix(Matrix(n, dd, std::move(v)));
      inst.kind = "grid";
      inst.eps = {1.0, std::sqrt(2.0), 2.0};
      return inst;
    }
    default: {
      // Tight clusters far from the origin.
      const double offset = 1e4 * (1.0 + u01(rng));
      const std::size_t k = uniform_int(2, 5);
      std::vector<std::vector<double>> centers(k, std::vector<double>(d));
      for (auto& c : centers)
        for (double& x : c) x = offset + 0.05 * u01(rng);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) v.push_back(centers[i % k][j] + 1e-3 * gauss(rng));
      inst.data = DataMatrix(Matrix(n, d, std::move(v)));
      inst.kind = "offset";
      break;
    }
  }
  inst.eps = pick_eps(inst.data, rng);
  return inst;
}

std::vector<Instance> make_instances(int count) {
  std::mt19937_64 rng(20240611);
  std::vector<Instance> out;
  for (int i = 0; i < count; ++i) out.push_back(make_instance(i, rng));
  return out;
}

struct RandomSuite {
  int instances = 0;
  std::uint64_t queries = 0;
  std::uint64_t query_mismatches = 0;
  int clusterings = 0;
  int clustering_mismatches = 0;
  std::uint64_t pairs = 0;
  double worst_bound_excess = -1e300;
  int accounting_runs = 0;
  int accounting_mismatches = 0;
  double seconds = 0.0;
};

constexpr ReferenceMethod kMethods[] = {ReferenceMethod::kFirstComponentMin, ReferenceMethod::kSharedMin,
                                        ReferenceMethod::kColumnMean};

// Largest amount any Stage I, II or III lower bound exceeds the true distance over all pairs.
double worst_bound_excess(const DataMatrix& data, const ProjectionContext& proj, const QueryContext& qc,
                          std::uint64_t& pairs) {
  const std::size_t n = data.n();
  const std::size_t h = proj.h;
  const auto pos = qc.position();
  const auto ref = qc.ref_dist();
  double worst = -1e300;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double truth = distance(data, a, b);
      const double stage1 = std::abs(ref[pos[a]] - ref[pos[b]]);
      double partial = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        const double t = proj.projected(a, j) - proj.projected(b, j);
        partial += t * t;
      }
      const double ds = proj.residual_norms[a] - proj.residual_norms[b];
      const double stage2 = std::sqrt(partial);
      const double stage3 = std::sqrt(partial + ds * ds);
      worst = std::max({worst, stage1 - truth, stage2 - truth, stage3 - truth});
      ++pairs;
    }
  }
  return worst;
}

RandomSuite run_random_suite(const std::vector<Instance>& instances) {
  RandomSuite s;
  const auto t0 = Clock::now();
  for (const Instance& inst : instances) {
    ++s.instances;
    const DataMatrix& data = inst.data;
    const std::size_t n = data.n();
    const std::uint64_t all_pairs = static_cast<std::uint64_t>(n) * (n - 1);
    PcaOptions pca;
    pca.variance_ratio = inst.p;
    pca.min_components = 2;
    const ProjectionContext proj = build_projection_context(data, pca);

    for (double eps : inst.eps) {
      std::vector<std::vector<std::size_t>> truth(n);
      for (std::size_t i = 0; i < n; ++i) truth[i] = oracle::brute_force_neighbors(data, i, eps);

      for (ReferenceMethod method : kMethods) {
        if (!proj.degenerate && proj.h >= reference_dims(method)) {
          const QueryContext qc = build_query_context(data, proj, choose_reference_point(proj, method), eps);
          StageStats stats;
          std::vector<std::size_t> found;
          for (std::size_t i = 0; i < n; ++i) {
            found.clear();
            region_query(qc, qc.position()[i], stats, found);
            std::ranges::sort(found);
            ++s.queries;
            if (found != truth[i]) ++s.query_mismatches;
          }
          ++s.accounting_runs;
          if (stats.total() != all_pairs) ++s.accounting_mismatches;
          if (eps == inst.eps.front()) s.worst_bound_excess = std::max(s.worst_bound_excess,
                                                                       worst_bound_excess(data, proj, qc, s.pairs));
        }

        const DbscanParams params{eps, inst.min_pts};
        const RunReport r = idbscan::idbscan(data, params, {inst.p, method, 1});
        const Classification base = oracle::brute_force_dbscan(data, params);
        ++s.clusterings;
        if (!partition_equivalent(r.classification, base, data, eps)) {
          ++s.clustering_mismatches;
          std::printf("  mismatch: kind=%s n=%zu d=%zu eps=%.17g minpts=%zu %s\n", inst.kind.c_str(), n, data.d(),
                      eps, inst.min_pts, std::string(to_string(method)).c_str());
        }
        ++s.accounting_runs;
        if (r.stats.total() != all_pairs) ++s.accounting_mismatches;
      }
    }
  }
  s.seconds = seconds_since(t0);
  return s;
}

// Random symmetric positive semi-definite matrices with every adjacent eigenvalue gap >= 1e-6 * lambda_1.
struct PcaSuite {
  int matrices = 0;
  double worst_angle = 0.0;
  double worst_orthonormality = 0.0;
  int skipped = 0;
};

PcaSuite run_pca_suite() {
  PcaSuite s;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss;
  while (s.matrices < 50) {
    const std::size_t d = 2 + rng() % 19;
    const std::size_t m = d + rng() % (3 * d);
    // Wishart-style sample covariance of m Gaussian draws with random column scales.
    std::vector<double> scale(d);
    for (double& x : scale) x = std::exp(2.0 * gauss(rng));
    Matrix cov(d, d);
    for (std::size_t t = 0; t < m; ++t) {
      std::vector<double> g(d);
      for (std::size_t j = 0; j < d; ++j) g[j] = gauss(rng) * scale[j];
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) cov(a, b) += g[a] * g[b] / static_cast<double>(m);
    }
    const auto eig = oracle::dense_eig_oracle(cov);
    const double l1 = eig.values.front();
    bool gapped = true;
    for (std::size_t k = 0; k + 1 < d; ++k) gapped = gapped && eig.values[k] - eig.values[k + 1] >= 1e-6 * l1;
    if (!gapped) {
      ++s.skipped;
      continue;
    }
    ++s.matrices;

    // Every prefix of components, against the oracle's top-h eigenvectors.
    std::vector<std::vector<double>> prior;
    for (std::size_t h = 1; h <= d; ++h) {
      const auto est = fixed_point_eigvec(cov, prior, 5, {});
      if (!est) break;
      prior.push_back(est->vector);
      Matrix mine(d, h);
      Matrix ref(d, h);
      for (std::size_t c = 0; c < h; ++c)
        for (std::size_t k = 0; k < d; ++k) {
          mine(k, c) = prior[c][k];
          ref(k, c) = eig.vectors(k, c);
        }
      // Components beyond the numerically meaningful range carry no subspace information.
      if (eig.values[h - 1] > 1e-10 * l1) s.worst_angle = std::max(s.worst_angle, oracle::max_principal_angle(mine, ref));
      for (std::size_t a = 0; a < h; ++a)
        for (std::size_t b = 0; b < h; ++b) {
          const double target = a == b ? 1.0 : 0.0;
          s.worst_orthonormality = std::max(s.worst_orthonormality, std::abs(dot(prior[a], prior[b]) - target));
        }
    }
  }
  return s;
}

// Gaussian blobs scaled onto [0, 100000].
DataMatrix speed_fixture() {
  return minmax_normalize(oracle::synth_gaussian_blobs({9, 450, 6, 30.0, 2.0, 2024}).data);
}

// Two blobs along the diagonal of the first two axes, stretched along the
// anti-diagonal, plus four low-variance noise dimensions.
DataMatrix diagonal_fixture() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  const double r = std::sqrt(2.0) / 2.0;
  std::vector<double> v;
  for (int blob = 0; blob < 2; ++blob) {
    const double c = blob == 0 ? -40.0 : 40.0;
    for (int i = 0; i < 500; ++i) {
      const double along = c + 2.0 * gauss(rng);
      const double across = 10.0 * gauss(rng);
      v.push_back(r * along - r * across);
      v.push_back(r * along + r * across);
      for (int j = 0; j < 4; ++j) v.push_back(gauss(rng));
    }
  }
  return DataMatrix(Matrix(1000, 6, std::move(v)));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const auto instances = make_instances(120);
  const RandomSuite suite = run_random_suite(instances);

  report(suite.query_mismatches == 0 && suite.instances >= 100 && suite.seconds < 120.0, "losslessness",
         fmt("%d instances, %llu region queries, %llu mismatches, %.1f s", suite.instances,
             static_cast<unsigned long long>(suite.queries), static_cast<unsigned long long>(suite.query_mismatches),
             suite.seconds));
  report(suite.clustering_mismatches == 0, "clustering equivalence",
         fmt("%d idbscan runs vs brute-force dbscan, %d not partition equivalent", suite.clusterings,
             suite.clustering_mismatches));
  report(suite.worst_bound_excess <= 1e-9, "bound soundness",
         fmt("%llu pairs, max (lower bound - distance) = %.3g", static_cast<unsigned long long>(suite.pairs),
             suite.worst_bound_excess));

  const PcaSuite pca = run_pca_suite();
  report(pca.worst_angle < 1e-6 && pca.worst_orthonormality <= 1e-8, "fast-pca correctness",
         fmt("%d matrices, max principal angle %.3g, max |phi^T phi - I| %.3g", pca.matrices, pca.worst_angle,
             pca.worst_orthonormality));

  const DataMatrix fixture = speed_fixture();
  const DbscanParams params{5000.0, 5};
  constexpr int kReps = 10;
  double base_ms = 0.0;
  StageStats base_stats;
  for (int rep = 0; rep < kReps; ++rep) {
    const RunReport r = run_dbscan(fixture, params);
    base_ms += r.timings.total_ms / kReps;
    base_stats = r.stats;
  }
  double p_ms[3] = {0.0, 0.0, 0.0};
  const double ps[3] = {0.8, 0.9, 0.99};
  for (int rep = 0; rep < kReps; ++rep)
    for (int k = 0; k < 3; ++k)
      p_ms[k] += idbscan::idbscan(fixture, params, {ps[k], ReferenceMethod::kSharedMin, 1}).timings.total_ms / kReps;
  const double ratio = p_ms[1] / base_ms;
  report(ratio <= 0.7, "speedup",
         fmt("n = %zu, dbscan %.2f ms, idbscan2 (p = 0.9) %.2f ms, ratio %.3f", fixture.n(), base_ms, p_ms[1], ratio));
  const double spread = *std::max_element(p_ms, p_ms + 3) / *std::min_element(p_ms, p_ms + 3);
  report(spread <= 1.3, "p-insensitivity",
         fmt("p = 0.8/0.9/0.99: %.2f / %.2f / %.2f ms, max/min %.3f", p_ms[0], p_ms[1], p_ms[2], spread));

  const DataMatrix diag = diagonal_fixture();
  PcaOptions diag_pca;
  diag_pca.variance_ratio = 0.9;
  diag_pca.min_components = 2;
  const ProjectionContext diag_proj = build_projection_context(diag, diag_pca);
  bool method2_wins = true;
  std::string counts;
  for (double eps : {2.0, 4.0, 6.0}) {
    const auto m1 = bench::stage1_pruned_total(diag, diag_proj, ReferenceMethod::kFirstComponentMin, eps);
    const auto m2 = bench::stage1_pruned_total(diag, diag_proj, ReferenceMethod::kSharedMin, eps);
    method2_wins = method2_wins && m2 > m1;
    counts += fmt(" eps %.0f: %llu vs %llu;", eps, static_cast<unsigned long long>(m2),
                  static_cast<unsigned long long>(m1));
  }
  report(method2_wins, "reference-method comparison", "stage I pruned, method 2 vs method 1:" + counts);

  const std::uint64_t nn = static_cast<std::uint64_t>(fixture.n()) * (fixture.n() - 1);
  const bool base_ok = base_stats.stage4_distances == nn && base_stats.total() == nn;
  report(base_ok && suite.accounting_mismatches == 0, "distance-count accounting",
         fmt("dbscan %llu distances for n(n-1) = %llu; %d idbscan/region-query runs, %d with stage sum != n(n-1)",
             static_cast<unsigned long long>(base_stats.stage4_distances), static_cast<unsigned long long>(nn),
             suite.accounting_runs, suite.accounting_mismatches));

  std::printf("%s (%d failed, %.1f s)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
