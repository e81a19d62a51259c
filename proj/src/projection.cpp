#include "etlinks/projection.hpp"

#include <algorithm>
#include <cmath>

#include "etlinks/error.hpp"
#include "etlinks/kernels.hpp"
#include "etlinks/linalg.hpp"

namespace etlinks {

Projection2D fit_pca(const Matrix& vectors) {
  const std::size_t n = vectors.rows();
  const std::size_t d = vectors.cols();
  if (n < 3) throw InputError("PCA needs at least three points");
  if (d < 2) throw InputError("PCA needs at least two dimensions");

  Projection2D p;
  p.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = vectors.row(r);
    for (std::size_t j = 0; j < d; ++j) p.mean[j] += row[j];
  }
  for (double& m : p.mean) m /= static_cast<double>(n);

  // Centred data stored by column so covariance entries are kernel dots.
  Matrix centred_cols(d, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) centred_cols(j, r) = vectors(r, j) - p.mean[j];
  }
  Matrix cov(d, d);
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double c = kernels::dot(centred_cols.row(i), centred_cols.row(j)) /
                       static_cast<double>(n - 1);
      cov(i, j) = c;
      cov(j, i) = c;
    }
    total += cov(i, i);
  }
  if (!(total > 0.0)) throw InputError("PCA input has zero total variance");

  const SymmetricEigen eig = jacobi_eigen_symmetric(cov);
  p.components = Matrix(2, d);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto v = eig.vectors.row(k);
    std::size_t lead = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::abs(v[j]) > std::abs(v[lead])) lead = j;
    }
    const double sign = v[lead] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) p.components(k, j) = sign * v[j];
    // Covariance is PSD; clip round-off below zero.
    p.explained_variance[k] = std::max(0.0, eig.values[k]);
  }
  return p;
}

MapLayout transform(const Projection2D& projection, const Matrix& vectors) {
  const std::size_t d = projection.mean.size();
  if (vectors.cols() != d) {
    throw DimensionError("projection expects dimension " + std::to_string(d) + ", got " +
                         std::to_string(vectors.cols()));
  }
  MapLayout layout;
  layout.points.reserve(vectors.rows());
  std::vector<double> centred(d);
  for (std::size_t r = 0; r < vectors.rows(); ++r) {
    const auto row = vectors.row(r);
    for (std::size_t j = 0; j < d; ++j) centred[j] = row[j] - projection.mean[j];
    layout.points.push_back({kernels::dot(projection.components.row(0), centred),
                             kernels::dot(projection.components.row(1), centred)});
  }
  layout.extents = extents_of(layout.points);
  return layout;
}

Extents extents_of(const std::vector<Point2>& points) {
  Extents e;
  if (points.empty()) return e;
  e.min_x = e.max_x = points.front().x;
  e.min_y = e.max_y = points.front().y;
  for (const auto& p : points) {
    e.min_x = std::min(e.min_x, p.x);
    e.max_x = std::max(e.max_x, p.x);
    e.min_y = std::min(e.min_y, p.y);
    e.max_y = std::max(e.max_y, p.y);
  }
  return e;
}

}  // namespace etlinks
