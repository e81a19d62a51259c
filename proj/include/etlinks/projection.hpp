#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "etlinks/matrix.hpp"

namespace etlinks {

struct Projection2D {
  std::vector<double> mean;                // centring offset, length d
  Matrix components;                       // 2 x d, orthonormal rows
  std::array<double, 2> explained_variance{};  // sample variance along each row, descending
};

/// Two leading principal components of the mean-centred rows, from a cyclic
/// Jacobi eigendecomposition of the sample covariance (divisor n − 1). Each
/// component is signed so its largest-magnitude coordinate (first on ties)
/// is positive. Throws InputError if n < 3, d < 2 or total variance is zero.
Projection2D fit_pca(const Matrix& vectors);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Extents {
  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
};

/// One point per input row, in row order.
struct MapLayout {
  std::vector<Point2> points;
  Extents extents;
};

/// point = components · (v − mean). Throws DimensionError on mismatch.
MapLayout transform(const Projection2D& projection, const Matrix& vectors);

Extents extents_of(const std::vector<Point2>& points);

}  // namespace etlinks
