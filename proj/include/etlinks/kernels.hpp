#pragma once

// Inner-loop kernels shared by every numeric module.
//
// Each kernel has a scalar reference and SIMD variants selected once at
// runtime. All variants accumulate in four interleaved lanes (lane l sums
// elements i with i % 4 == l, tail included) and combine as
// (l0 + l1) + (l2 + l3) with separate multiply and add, so every variant
// returns bit-identical results to the scalar reference.

#include <cstddef>
#include <span>
#include <string_view>

namespace etlinks::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // a <- c*a - s*b ; b <- s*a + c*b (old values on the right).
  void (*rotate_pair)(double* a, double* b, std::size_t n, double c, double s);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void rotate_pair(double* a, double* b, std::size_t n, double c, double s);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void rotate_pair(double* a, double* b, std::size_t n, double c, double s);
}  // namespace avx2

namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void rotate_pair(double* a, double* b, std::size_t n, double c, double s);
}  // namespace neon

/// True when the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa);

/// Kernel table of one variant. Throws std::invalid_argument if unavailable.
const KernelTable& table(Isa isa);

/// Variant in use. Picks the widest available ISA on first call unless the
/// ETLINKS_ISA environment variable names another (scalar|avx2|neon).
Isa active_isa();
const KernelTable& active();

std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void rotate_pair(std::span<double> a, std::span<double> b, double c, double s) {
  active().rotate_pair(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size(), c, s);
}

}  // namespace etlinks::kernels
