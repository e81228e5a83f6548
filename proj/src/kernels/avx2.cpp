#define BIRTHTAIL_VM_NS isa_avx2
#include <immintrin.h>

#include "kernels/bodies.hpp"

namespace birthtail::vm {
inline namespace isa_avx2 {

struct Vd {
  __m256d v;
};
struct Vu {
  __m256i v;
};

inline Vd operator+(Vd a, Vd b) { return {_mm256_add_pd(a.v, b.v)}; }
inline Vd operator-(Vd a, Vd b) { return {_mm256_sub_pd(a.v, b.v)}; }
inline Vd operator*(Vd a, Vd b) { return {_mm256_mul_pd(a.v, b.v)}; }
inline Vd operator/(Vd a, Vd b) { return {_mm256_div_pd(a.v, b.v)}; }
inline Vu operator&(Vu a, Vu b) { return {_mm256_and_si256(a.v, b.v)}; }
inline Vu operator|(Vu a, Vu b) { return {_mm256_or_si256(a.v, b.v)}; }
inline Vu operator^(Vu a, Vu b) { return {_mm256_xor_si256(a.v, b.v)}; }

inline Vd set1(double x, Vd) { return {_mm256_set1_pd(x)}; }
inline Vu set1_u(uint64_t x, Vu) { return {_mm256_set1_epi64x(static_cast<long long>(x))}; }
inline Vd round_even(Vd x) { return {_mm256_round_pd(x.v, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC)}; }
inline Vd floor_d(Vd x) { return {_mm256_floor_pd(x.v)}; }
inline Vu bits_of(Vd x) { return {_mm256_castpd_si256(x.v)}; }
inline Vd from_bits(Vu x) { return {_mm256_castsi256_pd(x.v)}; }
inline Vd select_lt(Vd a, Vd b, Vd x, Vd y) {
  return {_mm256_blendv_pd(y.v, x.v, _mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ))};
}
inline Vd select_gt(Vd a, Vd b, Vd x, Vd y) {
  return {_mm256_blendv_pd(y.v, x.v, _mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ))};
}
inline Vu shl(Vu x, int s) { return {_mm256_slli_epi64(x.v, s)}; }
inline Vu shr(Vu x, int s) { return {_mm256_srli_epi64(x.v, s)}; }
inline Vu mul32(Vu a, Vu b) { return {_mm256_mul_epu32(a.v, b.v)}; }

struct Avx2Lanes {
  static constexpr size_t width = 4;
  using D = Vd;
  using U = Vu;
  static D load(const double* p) { return {_mm256_loadu_pd(p)}; }
  static void store(double* p, D v) { _mm256_storeu_pd(p, v.v); }
  static U load_u(const uint64_t* p) { return {_mm256_loadu_si256(reinterpret_cast<const __m256i*>(p))}; }
  static void store_u(uint64_t* p, U v) { _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v.v); }
};

}  // namespace isa_avx2
}  // namespace birthtail::vm

namespace birthtail::detail {

const KernelTable& avx2_table() {
  static const KernelTable t{
      Isa::avx2,
      &vm::uniforms_body<vm::Avx2Lanes>,
      &vm::sojourns_body<vm::Avx2Lanes>,
      &vm::inv_rates_body<vm::Avx2Lanes>,
      &vm::exp_sum_body<vm::Avx2Lanes>,
      &vm::exp_body<vm::Avx2Lanes>,
      &vm::log_body<vm::Avx2Lanes>,
  };
  return t;
}

}  // namespace birthtail::detail
