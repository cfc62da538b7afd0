#include "idbscan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace idbscan::oracle {

std::vector<std::size_t> brute_force_neighbors(const DataMatrix& data, std::size_t i, double eps) {
  if (i >= data.n()) throw std::out_of_range("brute_force_neighbors: index out of range");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < data.n(); ++k) {
    if (k == i) continue;
    double sq = 0.0;
    for (std::size_t j = 0; j < data.d(); ++j) {
      const double diff = data(i, j) - data(k, j);
      sq += diff * diff;
    }
    if (std::sqrt(sq) <= eps) out.push_back(k);
  }
  return out;
}

Classification brute_force_dbscan(const DataMatrix& data, const DbscanParams& params,
                                  const std::vector<std::size_t>& visit_order) {
  return dbscan(
      data.n(), params,
      [&](std::size_t i, std::vector<std::size_t>& out) {
        const auto found = brute_force_neighbors(data, i, params.eps);
        out.insert(out.end(), found.begin(), found.end());
      },
      visit_order);
}

Classification brute_force_dbscan(const DataMatrix& data, const DbscanParams& params) {
  std::vector<std::size_t> order(data.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return brute_force_dbscan(data, params, order);
}

Eigendecomposition dense_eig_oracle(const Matrix& symmetric) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw std::invalid_argument("dense_eig_oracle: matrix must be square");
  double scale = 0.0;
  for (double v : symmetric.values()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(symmetric(i, j) - symmetric(j, i)) > 1e-12 * std::max(scale, 1.0)) {
        throw std::invalid_argument("dense_eig_oracle: matrix is not symmetric");
      }
    }
  }

  Matrix a = symmetric;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-30 * std::max(scale * scale, 1e-300)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::sort(order, [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  Eigendecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, c) = v(k, order[c]);
  }
  return out;
}

double max_principal_angle(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_principal_angle: subspaces must have the same shape");
  }
  if (a.cols() == 0) return 0.0;
  // Residual of a after projecting onto span(b); its largest singular value is sin(theta_max).
  const Matrix bt_a = multiply(b.transposed(), a);
  Matrix residual = a;
  const Matrix b_bt_a = multiply(b, bt_a);
  for (std::size_t i = 0; i < residual.values().size(); ++i) residual.values()[i] -= b_bt_a.values()[i];
  Matrix gram = multiply(residual.transposed(), residual);
  for (std::size_t i = 0; i < gram.rows(); ++i)
    for (std::size_t j = i + 1; j < gram.cols(); ++j) gram(j, i) = gram(i, j);
  const auto eig = dense_eig_oracle(gram);
  const double sin_max = std::sqrt(std::max(0.0, eig.values.front()));
  return std::asin(std::min(1.0, sin_max));
}

LabeledData synth_gaussian_blobs(const BlobSpec& spec) {
  if (!(spec.separation > 0.0)) throw std::invalid_argument("synth_gaussian_blobs: separation must be positive");
  if (!(spec.sigma > 0.0)) throw std::invalid_argument("synth_gaussian_blobs: sigma must be positive");
  if (spec.k == 0 || spec.per_cluster == 0 || spec.d == 0) {
    throw std::invalid_argument("synth_gaussian_blobs: k, per_cluster and d must be positive");
  }

  std::mt19937_64 rng(spec.seed);
  const double side =
      2.0 * spec.separation * (std::pow(static_cast<double>(spec.k), 1.0 / static_cast<double>(spec.d)) + 1.0);
  std::uniform_real_distribution<double> uniform(0.0, side);
  std::vector<std::vector<double>> centers;
  constexpr int kMaxAttempts = 10000;
  for (std::size_t c = 0; c < spec.k; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      std::vector<double> candidate(spec.d);
      for (double& x : candidate) x = uniform(rng);
      placed = std::ranges::all_of(centers, [&](const std::vector<double>& other) {
        double sq = 0.0;
        for (std::size_t j = 0; j < spec.d; ++j) sq += (candidate[j] - other[j]) * (candidate[j] - other[j]);
        return std::sqrt(sq) >= spec.separation;
      });
      if (placed) centers.push_back(std::move(candidate));
    }
    if (!placed) throw std::runtime_error("synth_gaussian_blobs: could not place cluster centers");
  }

  std::normal_distribution<double> gauss(0.0, spec.sigma);
  const std::size_t n = spec.k * spec.per_cluster;
  std::vector<double> values;
  values.reserve(n * spec.d);
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t c = 0; c < spec.k; ++c) {
    for (std::size_t i = 0; i < spec.per_cluster; ++i) {
      for (std::size_t j = 0; j < spec.d; ++j) values.push_back(centers[c][j] + gauss(rng));
      labels.push_back(static_cast<int>(c) + 1);
    }
  }
  return {DataMatrix(Matrix(n, spec.d, std::move(values))), std::move(labels)};
}

}  // namespace idbscan::oracle
