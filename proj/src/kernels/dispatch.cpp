#include <atomic>
#include <cstdlib>
#include <string>

#include "birthtail/error.hpp"
#include "birthtail/kernels.hpp"
#include "kernels/vecmath.hpp"

namespace birthtail {

namespace detail {
const KernelTable& scalar_table();
#ifdef BIRTHTAIL_HAVE_AVX2
const KernelTable& avx2_table();
#endif
}  // namespace detail

namespace {

bool cpu_has_avx2() {
#ifdef BIRTHTAIL_HAVE_AVX2
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  const char* env = std::getenv("BIRTHTAIL_SIMD");
  std::string want = env ? env : "auto";
  if (want == "scalar" || !cpu_has_avx2()) return &detail::scalar_table();
#ifdef BIRTHTAIL_HAVE_AVX2
  return &detail::avx2_table();
#else
  return &detail::scalar_table();
#endif
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> p{initial_table()};
  return p;
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const KernelTable& kernels() { return *active().load(std::memory_order_acquire); }

const KernelTable& kernels_for(Isa isa) {
  if (isa == Isa::scalar) return detail::scalar_table();
#ifdef BIRTHTAIL_HAVE_AVX2
  if (cpu_has_avx2()) return detail::avx2_table();
#endif
  fail(ErrorKind::unsupported, std::string("kernel set not available: ") + to_string(isa));
}

std::vector<Isa> available_isas() {
  std::vector<Isa> v{Isa::scalar};
  if (cpu_has_avx2()) v.push_back(Isa::avx2);
  return v;
}

void set_active_isa(Isa isa) { active().store(&kernels_for(isa), std::memory_order_release); }

double det_exp(double x) { return vm::exp_scalar(x); }
double det_log(double x) { return vm::log_scalar(x); }

}  // namespace birthtail
