#include "idbscan/fast_pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace idbscan {

namespace {

void deflate(std::vector<double>& v, std::span<const std::vector<double>> prior) {
  // Classical Gram-Schmidt applied twice keeps v orthogonal to machine precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& p : prior) {
      const double proj = dot(v, p);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= proj * p[k];
    }
  }
}

void apply(const Matrix& cov, std::span<const double> v, std::vector<double>& out) {
  const std::size_t d = cov.rows();
  out.assign(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) out[r] = dot(cov.row(r), v);
}

// cov restricted to the orthogonal complement of `prior`, (I - PP^T) cov (I - PP^T).
Matrix deflated_operator(const Matrix& cov, std::span<const std::vector<double>> prior) {
  const std::size_t d = cov.rows();
  Matrix op = cov;
  if (prior.empty()) return op;
  std::vector<double> line(d);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < d; ++r) line[r] = op(r, c);
    deflate(line, prior);
    for (std::size_t r = 0; r < d; ++r) op(r, c) = line[r];
  }
  for (std::size_t r = 0; r < d; ++r) {
    std::ranges::copy(op.row(r), line.begin());
    deflate(line, prior);
    std::ranges::copy(line, op.row(r).begin());
  }
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = r + 1; c < d; ++c) op(r, c) = op(c, r) = 0.5 * (op(r, c) + op(c, r));
  }
  return op;
}

// m * m scaled to unit max entry, kept exactly symmetric.
Matrix square_normalized(const Matrix& m) {
  Matrix sq = multiply(m, m);
  const std::size_t d = sq.rows();
  double mx = 0.0;
  for (double v : sq.values()) mx = std::max(mx, std::abs(v));
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = r; c < d; ++c) {
      const double v = mx > 0.0 ? 0.5 * (sq(r, c) + sq(c, r)) / mx : 0.0;
      sq(r, c) = sq(c, r) = v;
    }
  }
  return sq;
}

double rayleigh(const Matrix& cov, std::span<const double> v) {
  std::vector<double> cv;
  apply(cov, v, cv);
  return dot(v, cv);
}

void fix_sign(std::vector<double>& v) {
  const auto it = std::ranges::max_element(v, {}, [](double x) { return std::abs(x); });
  if (it != v.end() && *it < 0.0) {
    for (double& x : v) x = -x;
  }
}

double trace(const Matrix& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

}  // namespace

Covariance covariance(const DataMatrix& matrix) {
  const std::size_t n = matrix.n();
  const std::size_t d = matrix.d();
  if (n < 2) throw PcaError("covariance needs at least two points");

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = matrix.row(i);
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  Matrix cov(d, d);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = matrix.row(i);
    for (std::size_t j = 0; j < d; ++j) centered[j] = r[j] - mean[j];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) cov(a, b) += centered[a] * centered[b];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov(a, b) *= inv_n;
      cov(b, a) = cov(a, b);
    }
  }
  return {std::move(cov), std::move(mean)};
}

std::optional<EigenEstimate> fixed_point_eigvec(const Matrix& cov,
                                                std::span<const std::vector<double>> prior,
                                                std::uint64_t seed,
                                                const FixedPointOptions& options) {
  const std::size_t d = cov.rows();
  if (d == 0 || cov.cols() != d) throw std::invalid_argument("fixed_point_eigvec: covariance must be square");
  if (prior.size() >= d) return std::nullopt;

  double scale = 0.0;
  for (double v : cov.values()) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return std::nullopt;
  const double vanish = 1e-12 * scale * static_cast<double>(d);

  const Matrix base = deflated_operator(cov, prior);
  std::vector<double> phi(d);
  std::vector<double> next;
  for (std::size_t attempt = 0; attempt <= options.restarts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(prior.size()), static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss;
    for (double& x : phi) x = gauss(rng);
    deflate(phi, prior);
    double len = norm(phi);
    if (len == 0.0) continue;
    for (double& x : phi) x /= len;

    EigenEstimate est;
    bool vanished = false;
    // Plain iteration first; a slow one continues on op^2, op^4, ...
    Matrix op = base;
    for (std::size_t round = 0; round <= options.max_squarings && !est.converged && !vanished; ++round) {
      if (round > 0) op = square_normalized(op);
      for (std::size_t it = 0; it < options.max_iterations; ++it) {
        apply(op, phi, next);
        deflate(next, prior);
        len = norm(next);
        if ((round == 0 && len <= vanish) || len == 0.0) {
          vanished = true;
          break;
        }
        double step = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          next[k] /= len;
          step += (next[k] - phi[k]) * (next[k] - phi[k]);
        }
        phi.swap(next);
        ++est.iterations;
        if (std::sqrt(step) <= options.tolerance) {
          est.converged = true;
          break;
        }
      }
    }
    if (vanished) continue;

    fix_sign(phi);
    est.vector = phi;
    est.value = rayleigh(cov, phi);
    return est;
  }
  return std::nullopt;
}

HSelection select_h(const std::function<std::optional<double>()>& next_eigenvalue,
                    double total_variance, double p) {
  if (!(total_variance > 0.0)) throw std::invalid_argument("select_h: total variance must be positive");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("select_h: p must lie in (0, 1]");
  HSelection out;
  double cumulative = 0.0;
  while (true) {
    const auto lambda = next_eigenvalue();
    if (!lambda) {
      out.exhausted = true;
      return out;
    }
    ++out.h;
    cumulative += *lambda;
    if (cumulative / total_variance >= p) return out;
  }
}

double ProjectionContext::explained_ratio() const {
  if (total_variance <= 0.0) return 0.0;
  return std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0) / total_variance;
}

ProjectionContext build_projection_context(const DataMatrix& matrix, const PcaOptions& options) {
  if (!(options.variance_ratio > 0.0 && options.variance_ratio <= 1.0)) {
    throw std::invalid_argument("build_projection_context: p must lie in (0, 1]");
  }
  const std::size_t n = matrix.n();
  const std::size_t d = matrix.d();

  ProjectionContext ctx;
  ctx.mean.assign(d, 0.0);
  Covariance cov;
  if (n >= 2) {
    cov = covariance(matrix);
    ctx.mean = cov.mean;
    ctx.total_variance = trace(cov.cov);
  } else {
    ctx.mean.assign(matrix.row(0).begin(), matrix.row(0).end());
  }

  if (n < 2 || ctx.total_variance < kDegenerateVariance) {
    ctx.degenerate = true;
    ctx.basis = Matrix(d, 0);
    ctx.projected = Matrix(n, 0);
    ctx.residual_norms.resize(n);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = matrix.row(i);
      for (std::size_t j = 0; j < d; ++j) centered[j] = r[j] - ctx.mean[j];
      ctx.residual_norms[i] = norm(centered);
    }
    return ctx;
  }

  std::vector<std::vector<double>> components;
  bool ran_dry = false;
  auto next_component = [&]() -> std::optional<double> {
    if (ran_dry || components.size() >= d) return std::nullopt;
    auto est = fixed_point_eigvec(cov.cov, components, options.seed, options.fixed_point);
    if (!est) {
      ran_dry = true;
      return std::nullopt;
    }
    components.push_back(std::move(est->vector));
    return est->value;
  };

  const HSelection selection = select_h(next_component, ctx.total_variance, options.variance_ratio);
  ctx.threshold_exhausted = selection.exhausted;
  const std::size_t floor_h = std::min(options.min_components, d);
  while (components.size() < floor_h && next_component()) {
  }

  // Final modified Gram-Schmidt pass over the whole basis.
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t a = 0; a < components.size(); ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        const double proj = dot(components[a], components[b]);
        for (std::size_t k = 0; k < d; ++k) components[a][k] -= proj * components[b][k];
      }
      const double len = norm(components[a]);
      for (double& x : components[a]) x /= len;
    }
  }

  const std::size_t h = components.size();
  std::vector<double> values(h);
  for (std::size_t a = 0; a < h; ++a) {
    fix_sign(components[a]);
    values[a] = std::max(0.0, rayleigh(cov.cov, components[a]));
  }
  std::vector<std::size_t> order(h);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  ctx.h = h;
  ctx.basis = Matrix(d, h);
  ctx.eigenvalues.resize(h);
  for (std::size_t c = 0; c < h; ++c) {
    ctx.eigenvalues[c] = values[order[c]];
    for (std::size_t k = 0; k < d; ++k) ctx.basis(k, c) = components[order[c]][k];
  }

  ctx.projected = Matrix(n, h);
  ctx.residual_norms.resize(n);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = matrix.row(i);
    for (std::size_t j = 0; j < d; ++j) centered[j] = r[j] - ctx.mean[j];
    auto z = ctx.projected.row(i);
    for (std::size_t c = 0; c < h; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += centered[k] * ctx.basis(k, c);
      z[c] = s;
    }
    // Residual taken as the norm of the orthogonal remainder rather than
    // sqrt(||x||^2 - ||z||^2), which cancels catastrophically for small residuals.
    for (std::size_t c = 0; c < h; ++c) {
      for (std::size_t k = 0; k < d; ++k) centered[k] -= z[c] * ctx.basis(k, c);
    }
    ctx.residual_norms[i] = norm(centered);
  }
  return ctx;
}

}  // namespace idbscan
