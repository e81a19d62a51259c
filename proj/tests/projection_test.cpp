#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "etlinks/error.hpp"
#include "etlinks/projection.hpp"
#include "support.hpp"

using namespace etlinks;
using testing_support::Rng;

namespace {

// Independent PCA: Eigen's self-adjoint solver on the n−1 covariance.
struct OraclePca {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns, same order
};

OraclePca oracle_pca(const Matrix& m) {
  const Eigen::MatrixXd x = testing_support::to_eigen(m);
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  OraclePca o;
  o.values = es.eigenvalues().reverse();
  o.vectors = es.eigenvectors().rowwise().reverse();
  return o;
}

Matrix anisotropic(Rng& rng, std::size_t n, std::vector<double> scales) {
  Matrix m = testing_support::gaussian(rng, n, scales.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < scales.size(); ++c) m(r, c) = m(r, c) * scales[c] + 0.5 * c;
  return m;
}

}  // namespace

TEST(Pca, MatchesEigenOracle) {
  Rng rng(61);
  for (const auto& scales : {std::vector<double>{3.0, 1.0}, std::vector<double>{5, 3, 1.5, 0.7, 0.2}}) {
    const Matrix x = anisotropic(rng, 200, scales);
    const auto p = fit_pca(x);
    const auto o = oracle_pca(x);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(p.explained_variance[k], o.values(k), 1e-10 * o.values(0));
      double dot = 0;
      for (std::size_t j = 0; j < scales.size(); ++j) dot += p.components(k, j) * o.vectors(j, k);
      EXPECT_NEAR(std::abs(dot), 1.0, 1e-9);
    }
    EXPECT_GE(p.explained_variance[0], p.explained_variance[1]);
  }
}

TEST(Pca, ComponentsOrthonormalAndSigned) {
  Rng rng(62);
  const Matrix x = anisotropic(rng, 80, {4, 2, 1, 0.5});
  const auto p = fit_pca(x);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      double s = 0;
      for (std::size_t j = 0; j < 4; ++j) s += p.components(a, j) * p.components(b, j);
      EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-12);
    }
    std::size_t lead = 0;
    for (std::size_t j = 1; j < 4; ++j)
      if (std::abs(p.components(a, j)) > std::abs(p.components(a, lead))) lead = j;
    EXPECT_GT(p.components(a, lead), 0.0);
  }
}

TEST(Pca, AxisAlignedExample) {
  // Spread only along y: first component is ±e_y, positive by convention.
  const Matrix x = Matrix::from_rows({{0, -2}, {0.1, 0}, {-0.1, 2}, {0, 4}});
  const auto p = fit_pca(x);
  EXPECT_NEAR(std::abs(p.components(0, 1)), 1.0, 1e-3);
  EXPECT_GT(p.components(0, 1), 0.0);
  const auto layout = transform(p, x);
  ASSERT_EQ(layout.points.size(), 4u);
  double sx = 0, sy = 0;
  for (const auto& q : layout.points) {
    sx += q.x;
    sy += q.y;
  }
  EXPECT_NEAR(sx, 0.0, 1e-12);
  EXPECT_NEAR(sy, 0.0, 1e-12);
}

TEST(Pca, ProjectedVarianceEqualsExplained) {
  Rng rng(63);
  const Matrix x = anisotropic(rng, 150, {3, 2, 1});
  const auto p = fit_pca(x);
  const auto layout = transform(p, x);
  double vx = 0, vy = 0, cxy = 0;
  for (const auto& q : layout.points) {
    vx += q.x * q.x;
    vy += q.y * q.y;
    cxy += q.x * q.y;
  }
  EXPECT_NEAR(vx / 149, p.explained_variance[0], 1e-10);
  EXPECT_NEAR(vy / 149, p.explained_variance[1], 1e-10);
  EXPECT_NEAR(cxy / 149, 0.0, 1e-10);
}

TEST(Pca, RigidMotionPreservesLayoutUpToAxisSign) {
  Rng rng(64);
  const Matrix x = anisotropic(rng, 100, {5, 2, 1, 0.3, 0.1});
  const Matrix q = testing_support::random_orthogonal(rng, 5);
  Matrix moved = multiply(x, q);
  for (std::size_t r = 0; r < moved.rows(); ++r)
    for (std::size_t c = 0; c < 5; ++c) moved(r, c) += 10.0 * (c + 1);
  const auto a = transform(fit_pca(x), x);
  const auto b = transform(fit_pca(moved), moved);
  const double sx = a.points[0].x * b.points[0].x < 0 ? -1 : 1;
  const double sy = a.points[0].y * b.points[0].y < 0 ? -1 : 1;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_NEAR(a.points[i].x, sx * b.points[i].x, 1e-8);
    EXPECT_NEAR(a.points[i].y, sy * b.points[i].y, 1e-8);
  }
}

TEST(Pca, Errors) {
  EXPECT_THROW(fit_pca(Matrix(2, 3)), InputError);
  EXPECT_THROW(fit_pca(Matrix(5, 1)), InputError);
  EXPECT_THROW(fit_pca(Matrix(5, 3, 1.0)), InputError);
  Rng rng(65);
  const auto p = fit_pca(testing_support::gaussian(rng, 10, 3));
  EXPECT_THROW(transform(p, Matrix(2, 4)), DimensionError);
}

TEST(Extents, BoundingBox) {
  const auto e = extents_of({{1, -2}, {-3, 4}, {0, 0}});
  EXPECT_EQ(e.min_x, -3);
  EXPECT_EQ(e.max_x, 1);
  EXPECT_EQ(e.min_y, -2);
  EXPECT_EQ(e.max_y, 4);
}
