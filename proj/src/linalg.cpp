#include "etlinks/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "etlinks/error.hpp"
#include "etlinks/kernels.hpp"

namespace etlinks {

namespace {

std::vector<std::size_t> descending_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

void normalize(std::span<double> v) {
  const double norm = std::sqrt(kernels::dot(v, v));
  for (double& x : v) x /= norm;
}

}  // namespace

SvdResult jacobi_svd(const Matrix& a, double tolerance, int max_sweeps) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (n == 0 || m < n) {
    throw DimensionError("jacobi_svd needs a non-empty matrix with rows >= cols");
  }

  // Row j of `cols` is column j of A; row j of `vt` is column j of V.
  Matrix cols = a.transposed();
  Matrix vt = Matrix::identity(n);

  SvdResult result;
  for (; result.sweeps < max_sweeps; ++result.sweeps) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = kernels::dot(cols.row(p), cols.row(p));
        const double beta = kernels::dot(cols.row(q), cols.row(q));
        const double gamma = kernels::dot(cols.row(p), cols.row(q));
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tolerance * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        kernels::rotate_pair(cols.row(p), cols.row(q), c, s);
        kernels::rotate_pair(vt.row(p), vt.row(q), c, s);
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(kernels::dot(cols.row(j), cols.row(j)));
  const auto order = descending_order(sigma);
  const double floor =
      sigma[order.front()] * static_cast<double>(m) * std::numeric_limits<double>::epsilon();

  // Build Uᵀ (rows = left singular vectors), then transpose.
  Matrix ut(n, m);
  result.singular_values.resize(n);
  result.v = Matrix(n, n);
  std::vector<bool> ready(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    result.singular_values[k] = sigma[j];
    for (std::size_t r = 0; r < n; ++r) result.v(r, k) = vt(j, r);
    if (sigma[j] > floor) {
      for (std::size_t r = 0; r < m; ++r) ut(k, r) = cols(j, r) / sigma[j];
      ready[k] = true;
      ++result.rank;
    }
  }

  // Complete the basis with the canonical vector that keeps the largest
  // residual after two passes of Gram-Schmidt.
  for (std::size_t k = 0; k < n; ++k) {
    if (ready[k]) continue;
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t candidate = 0; candidate < m; ++candidate) {
      std::vector<double> e(m, 0.0);
      e[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t other = 0; other < n; ++other) {
          if (!ready[other]) continue;
          const double proj = kernels::dot(e, ut.row(other));
          for (std::size_t r = 0; r < m; ++r) e[r] -= proj * ut(other, r);
        }
      }
      const double norm = std::sqrt(kernels::dot(e, e));
      if (norm > best_norm) {
        best_norm = norm;
        best = std::move(e);
      }
    }
    normalize(best);
    std::copy(best.begin(), best.end(), ut.row(k).begin());
    ready[k] = true;
  }
  result.u = ut.transposed();
  return result;
}

SymmetricEigen jacobi_eigen_symmetric(const Matrix& input, double tolerance, int max_sweeps) {
  const std::size_t n = input.rows();
  if (n == 0 || input.cols() != n) throw DimensionError("eigendecomposition needs a square matrix");

  Matrix a = input;
  Matrix vt = Matrix::identity(n);  // row i = column i of the eigenvector matrix

  auto off_norm = [&] {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        if (p != q) off += a(p, q) * a(p, q);
      }
    }
    return std::sqrt(off);
  };
  const double total = std::sqrt(kernels::dot(a.data(), a.data()));

  SymmetricEigen result;
  for (; result.sweeps < max_sweeps; ++result.sweeps) {
    const double off = off_norm();
    if (off == 0.0 || off <= tolerance * total) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t =
            std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Rows p and q hold a_rp and a_rq by symmetry.
        kernels::rotate_pair(a.row(p), a.row(q), c, s);
        for (std::size_t r = 0; r < n; ++r) {
          a(r, p) = a(p, r);
          a(r, q) = a(q, r);
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        kernels::rotate_pair(vt.row(p), vt.row(q), c, s);
      }
    }
  }

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  const auto order = descending_order(diag);
  result.values.resize(n);
  result.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    result.values[k] = diag[order[k]];
    std::copy(vt.row(order[k]).begin(), vt.row(order[k]).end(), result.vectors.row(k).begin());
  }
  return result;
}

}  // namespace etlinks
