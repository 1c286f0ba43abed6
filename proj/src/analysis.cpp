#include "mathemb/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "mathemb/error.hpp"
#include "util.hpp"

namespace mathemb {

namespace {

double dot(std::span<const double> u, std::span<const double> v) {
  double d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) d += u[i] * v[i];
  return d;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with different dimensions");
  // the product of norms is commutative, so cosine(u,v) == cosine(v,u) bit for bit
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0 || nv == 0) throw Error(ErrorCode::ZeroVector, "cosine with a zero vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

NeighborList nearest_neighbors(const EmbeddingTable& table, std::string_view surface, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  auto index = table.vocab.index_of(surface);
  if (!index) throw Error(ErrorCode::UnknownSurface, std::string(surface));
  auto query = table.input.row(*index);

  NeighborList list{std::string(surface), {}};
  for (std::size_t i = 0; i < table.input.rows(); ++i) {
    if (i == *index) continue;
    auto row = table.input.row(i);
    if (norm(row) == 0) continue;
    list.neighbors.push_back(Neighbor{table.vocab.surface(i), cosine(query, row)});
  }
  auto better = [](const Neighbor& a, const Neighbor& b) {
    return a.cosine != b.cosine ? a.cosine > b.cosine : a.surface < b.surface;
  };
  if (list.neighbors.size() > k) {
    std::partial_sort(list.neighbors.begin(), list.neighbors.begin() + static_cast<std::ptrdiff_t>(k),
                      list.neighbors.end(), better);
    list.neighbors.resize(k);
  } else {
    std::sort(list.neighbors.begin(), list.neighbors.end(), better);
  }
  return list;
}

Projection pca_project(const Matrix& rows, std::span<const std::string> surfaces, const PcaOptions& options) {
  const std::size_t n = rows.rows();
  const std::size_t dim = rows.cols();
  const std::size_t k = options.components;
  if (k < 1 || n < k) throw Error(ErrorCode::InsufficientRows, "need rows >= components >= 1");
  if (surfaces.size() != n) throw Error(ErrorCode::DimensionMismatch, "one surface per row required");

  Matrix centred = rows;
  if (options.l2_normalize) {
    for (std::size_t i = 0; i < n; ++i) {
      auto r = centred.row(i);
      double len = norm(r);
      if (len > 0)
        for (double& v : r) v /= len;
    }
  }
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) mean[j] += centred.row(i)[j];
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) centred.row(i)[j] -= mean[j];

  Matrix cov(dim, dim);
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      auto r = centred.row(i);
      for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = a; b < dim; ++b) cov.row(a)[b] += r[a] * r[b];
    }
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = a; b < dim; ++b) {
        cov.row(a)[b] /= static_cast<double>(n - 1);
        cov.row(b)[a] = cov.row(a)[b];
      }
  }

  Projection result;
  result.surfaces.assign(surfaces.begin(), surfaces.end());
  result.components = Matrix(k, dim);
  result.coordinates = Matrix(n, k);
  result.variances.assign(k, 0.0);

  // A fixed start keeps golden outputs stable.
  detail::Rng rng(0x5ca1ab1e);
  std::vector<double> v(dim);
  std::vector<double> next(dim);
  auto multiply = [&](const std::vector<double>& x, std::vector<double>& out) {
    for (std::size_t a = 0; a < dim; ++a) out[a] = dot(cov.row(a), x);
  };
  // Below this the remaining covariance is treated as zero.
  double scale = 0;
  for (std::size_t a = 0; a < dim; ++a) scale = std::max(scale, std::abs(cov.row(a)[a]));
  const double negligible = std::max(scale, 1e-300) * 1e-12;

  for (std::size_t c = 0; c < k; ++c) {
    for (double& x : v) x = rng.uniform() - 0.5;
    double len = norm(v);
    for (double& x : v) x /= len;

    double eigenvalue = 0;
    bool degenerate = false;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      multiply(v, next);
      double m = norm(next);
      if (m <= negligible) {
        degenerate = true;
        break;
      }
      for (double& x : next) x /= m;
      double change = 0;
      for (std::size_t a = 0; a < dim; ++a) change = std::max(change, std::abs(next[a] - v[a]));
      std::swap(v, next);
      eigenvalue = m;
      if (change < options.tolerance) break;
    }
    auto component = result.components.row(c);
    if (degenerate) continue;

    std::size_t largest = 0;
    for (std::size_t a = 1; a < dim; ++a)
      if (std::abs(v[a]) > std::abs(v[largest])) largest = a;
    const double sign = v[largest] < 0 ? -1.0 : 1.0;
    for (std::size_t a = 0; a < dim; ++a) component[a] = sign * v[a];
    result.variances[c] = eigenvalue;

    // deflate: cov -= lambda v v^T
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) cov.row(a)[b] -= eigenvalue * component[a] * component[b];
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) result.coordinates.row(i)[c] = dot(centred.row(i), result.components.row(c));
  return result;
}

Projection pca_project(const EmbeddingTable& table, const PcaOptions& options) {
  std::vector<std::string> surfaces;
  for (std::size_t i = 0; i < table.vocab.size(); ++i) surfaces.push_back(table.vocab.surface(i));
  return pca_project(table.input, surfaces, options);
}

}  // namespace mathemb
