#include "idbscan/pruning_query.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace idbscan {

namespace {

// Relative to the largest coordinate norm in the data set.
constexpr double kSlackScale = 1e-11;

void validate_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive and finite");
}

double data_scale(const DataMatrix& data) {
  double scale = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) scale = std::max(scale, norm(data.row(i)));
  return scale;
}

}  // namespace

std::size_t reference_dims(ReferenceMethod method) {
  return method == ReferenceMethod::kFirstComponentMin ? 1 : 2;
}

ReferenceMethod reference_method_from_int(int value) {
  switch (value) {
    case 1:
      return ReferenceMethod::kFirstComponentMin;
    case 2:
      return ReferenceMethod::kSharedMin;
    case 3:
      return ReferenceMethod::kColumnMean;
    default:
      throw std::invalid_argument("reference method must be 1, 2 or 3, got " + std::to_string(value));
  }
}

std::string_view to_string(ReferenceMethod method) {
  switch (method) {
    case ReferenceMethod::kFirstComponentMin:
      return "method1";
    case ReferenceMethod::kSharedMin:
      return "method2";
    case ReferenceMethod::kColumnMean:
      return "method3";
  }
  return "unknown";
}

StageStats& StageStats::operator+=(const StageStats& other) {
  stage1_batch_pruned += other.stage1_batch_pruned;
  stage2_pruned += other.stage2_pruned;
  stage3_pruned += other.stage3_pruned;
  stage4_distances += other.stage4_distances;
  neighbors_found += other.neighbors_found;
  return *this;
}

ReferencePoint choose_reference_point(const ProjectionContext& projection, ReferenceMethod method,
                                      bool per_column_min) {
  const std::size_t need = reference_dims(method);
  if (projection.h < need) {
    throw std::invalid_argument(std::string(to_string(method)) + " needs h >= " + std::to_string(need) +
                                ", projection has h = " + std::to_string(projection.h));
  }
  const Matrix& z = projection.projected;
  ReferencePoint ref;
  ref.method = method;
  switch (method) {
    case ReferenceMethod::kFirstComponentMin: {
      double mn = z(0, 0);
      for (std::size_t i = 1; i < z.rows(); ++i) mn = std::min(mn, z(i, 0));
      ref.coords = {mn};
      break;
    }
    case ReferenceMethod::kSharedMin: {
      double mn0 = z(0, 0);
      double mn1 = z(0, 1);
      for (std::size_t i = 1; i < z.rows(); ++i) {
        mn0 = std::min(mn0, z(i, 0));
        mn1 = std::min(mn1, z(i, 1));
      }
      if (per_column_min) {
        ref.coords = {mn0, mn1};
      } else {
        const double mn = std::min(mn0, mn1);
        ref.coords = {mn, mn};
      }
      break;
    }
    case ReferenceMethod::kColumnMean: {
      double s0 = 0.0;
      double s1 = 0.0;
      for (std::size_t i = 0; i < z.rows(); ++i) {
        s0 += z(i, 0);
        s1 += z(i, 1);
      }
      const double n = static_cast<double>(z.rows());
      ref.coords = {s0 / n, s1 / n};
      break;
    }
  }
  return ref;
}

QueryContext build_query_context(const DataMatrix& data, const ProjectionContext& projection,
                                 const ReferencePoint& reference, double eps) {
  validate_eps(eps);
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const std::size_t h = projection.h;
  const std::size_t dims = reference.coords.size();
  if (projection.projected.rows() != n) throw std::invalid_argument("projection does not match data");
  if (dims != reference_dims(reference.method) || dims > h) {
    throw std::invalid_argument("reference point dimension incompatible with projection");
  }

  const Matrix& z = projection.projected;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (dims == 1) {
      dist[i] = z(i, 0) - reference.coords[0];
    } else {
      const double a = z(i, 0) - reference.coords[0];
      const double b = z(i, 1) - reference.coords[1];
      dist[i] = std::sqrt(a * a + b * b);
    }
  }

  QueryContext qc;
  qc.reference_ = reference;
  qc.eps_ = eps;
  qc.order_.resize(n);
  std::iota(qc.order_.begin(), qc.order_.end(), std::size_t{0});
  std::ranges::stable_sort(qc.order_, [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  qc.position_.resize(n);
  qc.ref_dist_.resize(n);
  qc.data_ = Matrix(n, d);
  qc.projected_ = Matrix(n, h);
  qc.residual_.resize(n);
  double scale = data_scale(data);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t src = qc.order_[pos];
    qc.position_[src] = pos;
    qc.ref_dist_[pos] = dist[src];
    std::ranges::copy(data.row(src), qc.data_.row(pos).begin());
    std::ranges::copy(z.row(src), qc.projected_.row(pos).begin());
    qc.residual_[pos] = projection.residual_norms[src];
    scale = std::max(scale, std::abs(dist[src]));
  }
  qc.slack_ = kSlackScale * scale;
  return qc;
}

QueryContext build_linear_scan_context(const DataMatrix& data, double eps) {
  validate_eps(eps);
  const std::size_t n = data.n();
  QueryContext qc;
  qc.eps_ = eps;
  qc.linear_scan_ = true;
  qc.order_.resize(n);
  std::iota(qc.order_.begin(), qc.order_.end(), std::size_t{0});
  qc.position_ = qc.order_;
  qc.ref_dist_.assign(n, 0.0);
  qc.data_ = data.points();
  qc.projected_ = Matrix(n, 0);
  qc.residual_.assign(n, 0.0);
  return qc;
}

QueryContext QueryContext::with_eps(double eps) const {
  validate_eps(eps);
  QueryContext copy = *this;
  copy.eps_ = eps;
  return copy;
}

void region_query(const QueryContext& qc, std::size_t sorted_pos, StageStats& stats,
                  std::vector<std::size_t>& out) {
  const std::size_t n = qc.n();
  if (sorted_pos >= n) throw std::out_of_range("region_query: position out of range");

  const std::size_t h = qc.h();
  const double eps = qc.eps_;
  const double cut = eps + qc.slack_;
  const double cut_sq = cut * cut;
  const double ref_m = qc.ref_dist_[sorted_pos];
  const double res_m = qc.residual_[sorted_pos];
  const auto x_m = qc.data_.row(sorted_pos);
  const double* z_m = qc.projected_.values().data() + sorted_pos * h;
  const double* z_all = qc.projected_.values().data();

  for (const int step : {+1, -1}) {
    std::size_t k = sorted_pos;
    while (true) {
      if (step > 0) {
        if (k + 1 >= n) break;
        ++k;
      } else {
        if (k == 0) break;
        --k;
      }
      if (!qc.linear_scan_) {
        // Stage I: sorted order means every farther point fails too.
        if (std::abs(ref_m - qc.ref_dist_[k]) > cut) {
          stats.stage1_batch_pruned += step > 0 ? n - k : k + 1;
          break;
        }
        // Stage II: partial squared distance over the leading components.
        const double* z_k = z_all + k * h;
        double diff = 0.0;
        bool pruned = false;
        for (std::size_t j = 0; j < h; ++j) {
          const double t = z_m[j] - z_k[j];
          diff += t * t;
          if (diff > cut_sq) {
            pruned = true;
            break;
          }
        }
        if (pruned) {
          ++stats.stage2_pruned;
          continue;
        }
        // Stage III: the remaining components contribute at least (s_m - s_k)^2.
        const double ds = res_m - qc.residual_[k];
        if (diff + ds * ds > cut_sq) {
          ++stats.stage3_pruned;
          continue;
        }
      }
      // Stage IV: exact distance.
      ++stats.stage4_distances;
      if (within_eps(x_m, qc.data_.row(k), eps)) {
        ++stats.neighbors_found;
        out.push_back(qc.order_[k]);
      }
    }
  }
}

std::vector<std::size_t> region_query(const QueryContext& qc, std::size_t sorted_pos, StageStats& stats) {
  std::vector<std::size_t> out;
  region_query(qc, sorted_pos, stats, out);
  return out;
}

void linear_scan_neighbors(const DataMatrix& data, std::size_t index, double eps, StageStats& stats,
                           std::vector<std::size_t>& out) {
  const std::size_t n = data.n();
  if (index >= n) throw std::out_of_range("linear_scan_neighbors: index out of range");
  const auto x = data.row(index);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == index) continue;
    ++stats.stage4_distances;
    if (within_eps(x, data.row(k), eps)) {
      ++stats.neighbors_found;
      out.push_back(k);
    }
  }
}

}  // namespace idbscan
