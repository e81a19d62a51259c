#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "etlinks/kernels.hpp"
#include "support.hpp"

using namespace etlinks::kernels;
using testing_support::Rng;

namespace {

std::vector<Isa> simd_variants() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (isa_available(isa)) out.push_back(isa);
  }
  return out;
}

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(isa_available(Isa::scalar));
  EXPECT_EQ(isa_name(Isa::scalar), "scalar");
  EXPECT_TRUE(isa_available(active_isa()));
}

TEST(Kernels, UnavailableTableThrows) {
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (!isa_available(isa)) {
      EXPECT_THROW(table(isa), std::invalid_argument);
    }
  }
}

TEST(Kernels, ScalarMatchesNaiveSums) {
  Rng rng(1);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 100u}) {
    const auto a = random_vector(rng, n, 1.0);
    const auto b = random_vector(rng, n, 1.0);
    double dot = 0, dist = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      dist += (a[i] - b[i]) * (a[i] - b[i]);
    }
    EXPECT_NEAR(scalar::dot(a.data(), b.data(), n), dot, 1e-12 * (1 + n));
    EXPECT_NEAR(scalar::squared_distance(a.data(), b.data(), n), dist, 1e-12 * (1 + n));
  }
}

TEST(Kernels, ScalarLaneOrderIsPinned) {
  // Lane l sums i % 4 == l, lanes combine as (l0 + l1) + (l2 + l3).
  const std::vector<double> a = {1e16, 1.0, -1e16, 1.0, 3.0};
  const std::vector<double> b = {1.0, 1.0, 1.0, 1.0, 1.0};
  const double l0 = 1e16 + 3.0, l1 = 1.0, l2 = -1e16, l3 = 1.0;
  EXPECT_TRUE(same_bits(scalar::dot(a.data(), b.data(), 5), (l0 + l1) + (l2 + l3)));
}

TEST(Kernels, SimdVariantsAreBitIdenticalToScalar) {
  const auto variants = simd_variants();
  if (variants.empty()) GTEST_SKIP() << "no SIMD variant on this machine";
  Rng rng(2);
  for (Isa isa : variants) {
    const KernelTable& t = table(isa);
    for (std::size_t n = 0; n <= 67; ++n) {
      for (double scale : {1e-300, 1.0, 1e150}) {
        const auto a = random_vector(rng, n, scale);
        const auto b = random_vector(rng, n, scale);
        EXPECT_TRUE(same_bits(t.dot(a.data(), b.data(), n), scalar::dot(a.data(), b.data(), n)))
            << isa_name(isa) << " dot n=" << n;
        EXPECT_TRUE(same_bits(t.squared_distance(a.data(), b.data(), n),
                              scalar::squared_distance(a.data(), b.data(), n)))
            << isa_name(isa) << " squared_distance n=" << n;

        auto a1 = a, b1 = b, a2 = a, b2 = b;
        const double c = std::cos(0.3), s = std::sin(0.3);
        t.rotate_pair(a1.data(), b1.data(), n, c, s);
        scalar::rotate_pair(a2.data(), b2.data(), n, c, s);
        for (std::size_t i = 0; i < n; ++i) {
          ASSERT_TRUE(same_bits(a1[i], a2[i]) && same_bits(b1[i], b2[i])) << isa_name(isa) << " rotate n=" << n;
        }
      }
    }
  }
}

TEST(Kernels, SimdHandlesUnalignedSpans) {
  const auto variants = simd_variants();
  if (variants.empty()) GTEST_SKIP() << "no SIMD variant on this machine";
  Rng rng(3);
  const auto a = random_vector(rng, 80, 1.0);
  const auto b = random_vector(rng, 80, 1.0);
  for (Isa isa : variants) {
    for (std::size_t off = 0; off < 4; ++off) {
      const std::size_t n = 80 - off - 1;
      EXPECT_TRUE(same_bits(table(isa).dot(a.data() + off, b.data() + 1, n),
                            scalar::dot(a.data() + off, b.data() + 1, n)));
    }
  }
}

TEST(Kernels, NonFiniteInputsPropagateAlike) {
  const auto variants = simd_variants();
  if (variants.empty()) GTEST_SKIP() << "no SIMD variant on this machine";
  std::vector<double> a(9, 1.0), b(9, 1.0);
  a[6] = INFINITY;
  for (Isa isa : variants) {
    EXPECT_TRUE(std::isinf(table(isa).dot(a.data(), b.data(), 9)));
    a[6] = NAN;
    EXPECT_TRUE(std::isnan(table(isa).squared_distance(a.data(), b.data(), 9)));
    a[6] = INFINITY;
  }
}

TEST(Kernels, RotatePairIsRotation) {
  std::vector<double> a = {1, 0, 2}, b = {0, 1, 2};
  rotate_pair(a, b, 0.0, 1.0);  // 90 degrees
  EXPECT_EQ(a, (std::vector<double>{0, -1, -2}));
  EXPECT_EQ(b, (std::vector<double>{1, 0, 2}));
}
