#include <cstdlib>
#include <stdexcept>
#include <string>

#include "etlinks/kernels.hpp"

namespace etlinks::kernels {

namespace {

constexpr KernelTable kScalar{&scalar::dot, &scalar::squared_distance, &scalar::rotate_pair};
constexpr KernelTable kAvx2{&avx2::dot, &avx2::squared_distance, &avx2::rotate_pair};
constexpr KernelTable kNeon{&neon::dot, &neon::squared_distance, &neon::rotate_pair};

Isa pick_isa() {
  if (const char* forced = std::getenv("ETLINKS_ISA")) {
    const std::string name(forced);
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
    if (name == "neon" && isa_available(Isa::neon)) return Isa::neon;
  }
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  }
  switch (isa) {
    case Isa::avx2:
      return kAvx2;
    case Isa::neon:
      return kNeon;
    case Isa::scalar:
      break;
  }
  return kScalar;
}

Isa active_isa() {
  static const Isa isa = pick_isa();
  return isa;
}

const KernelTable& active() {
  static const KernelTable& t = table(active_isa());
  return t;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace etlinks::kernels
