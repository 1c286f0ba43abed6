#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mathemb/embeddings.hpp"

namespace mathemb {

/// u.v / (|u||v|), clamped into [-1, 1]. Throws Error{DimensionMismatch} and
/// Error{ZeroVector}.
double cosine(std::span<const double> u, std::span<const double> v);

struct Neighbor {
  std::string surface;
  double cosine = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct NeighborList {
  std::string query;
  std::vector<Neighbor> neighbors;  // descending cosine, ties by surface
};

/// Exact top-k over the input vectors, excluding the query itself. Rows with
/// zero norm are skipped. Throws Error{UnknownSurface} and
/// Error{InvalidConfig} for k == 0.
NeighborList nearest_neighbors(const EmbeddingTable& table, std::string_view surface, std::size_t k);

struct Projection {
  std::vector<std::string> surfaces;
  /// rows x components coordinates.
  Matrix coordinates;
  /// components x dim unit vectors (all zero for a component with no variance).
  Matrix components;
  /// Sample variance along each component.
  std::vector<double> variances;
};

struct PcaOptions {
  std::size_t components = 2;
  bool l2_normalize = false;
  double tolerance = 1e-9;
  std::size_t max_iterations = 1000;
};

/// PCA by power iteration with deflation on the sample covariance of the
/// mean-centred rows. Each component is signed so that its entry of largest
/// magnitude is positive. Throws Error{InsufficientRows} unless
/// rows >= components >= 1.
Projection pca_project(const Matrix& rows, std::span<const std::string> surfaces, const PcaOptions& options = {});
Projection pca_project(const EmbeddingTable& table, const PcaOptions& options = {});

}  // namespace mathemb
