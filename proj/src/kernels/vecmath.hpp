#pragma once

// Lane-generic kernel bodies. Each ISA provides a lane type with the primitive
// operations below; the scalar lane is plain double / uint64_t. Every
// primitive is an exactly rounded IEEE operation or exact integer arithmetic,
// so all instantiations produce bitwise identical results per element.

#include <cmath>
#include <cstdint>
#include <cstring>

#include "birthtail/kernels.hpp"

// Each ISA translation unit gets its own copy of these templates so that
// ODR merging can never hand AVX2-compiled code to the scalar path.
#ifndef BIRTHTAIL_VM_NS
#define BIRTHTAIL_VM_NS isa_generic
#endif

namespace birthtail::vm {
inline namespace BIRTHTAIL_VM_NS {

// scalar primitives
inline double set1(double x, double) { return x; }
inline double round_even(double x) { return std::nearbyint(x); }
inline double floor_d(double x) { return std::floor(x); }
inline uint64_t bits_of(double x) {
  uint64_t b;
  std::memcpy(&b, &x, 8);
  return b;
}
inline double from_bits(uint64_t b) {
  double x;
  std::memcpy(&x, &b, 8);
  return x;
}
inline double select_lt(double a, double b, double x, double y) { return a < b ? x : y; }
inline double select_gt(double a, double b, double x, double y) { return a > b ? x : y; }
inline double abs_d(double x) { return std::fabs(x); }
inline uint64_t shl(uint64_t x, int s) { return x << s; }
inline uint64_t shr(uint64_t x, int s) { return x >> s; }
inline uint64_t set1_u(uint64_t x, uint64_t) { return x; }
// low 32 bits of each operand multiplied to a 64-bit product
inline uint64_t mul32(uint64_t a, uint64_t b) { return (a & 0xffffffffu) * (b & 0xffffffffu); }

namespace c {
inline constexpr double log2e = 1.4426950408889634073599;
inline constexpr double ln2_hi = 6.93145751953125E-1;
inline constexpr double ln2_lo = 1.42860682030941723212E-6;
inline constexpr double exp_p0 = 1.26177193074810590878E-4;
inline constexpr double exp_p1 = 3.02994407707441961300E-2;
inline constexpr double exp_p2 = 9.99999999999999999910E-1;
inline constexpr double exp_q0 = 3.00198505138664455042E-6;
inline constexpr double exp_q1 = 2.52448340349684104192E-3;
inline constexpr double exp_q2 = 2.27265548208155028766E-1;
inline constexpr double exp_q3 = 2.00000000000000000009E0;
// results below DBL_MIN flush to zero; subnormal outputs would cost a
// microcode assist per lane
inline constexpr double exp_lo = -708.39641853226408;
inline constexpr double exp_hi = 709.782712893384;
inline constexpr double two52 = 4503599627370496.0;
inline constexpr uint64_t two52_bits = 0x4330000000000000ull;
inline constexpr uint64_t mant_mask = 0x000fffffffffffffull;
inline constexpr uint64_t half_bits = 0x3fe0000000000000ull;
inline constexpr double sqrth = 0.70710678118654752440;
inline constexpr double log_p[6] = {1.01875663804580931796E-4, 4.97494994976747001425E-1,
                                    4.70579119878881725854E0,  1.44989225341610930846E1,
                                    1.79368678507819816313E1,  7.70838733755885391666E0};
inline constexpr double log_q[5] = {1.12873587189167450590E1, 4.52279145837532221105E1,
                                    8.29875266912776603211E1, 7.11544750618563894466E1,
                                    2.31251620126765340583E1};
inline constexpr uint32_t philox_m0 = 0xD2511F53u, philox_m1 = 0xCD9E8D57u;
inline constexpr uint32_t philox_w0 = 0x9E3779B9u, philox_w1 = 0xBB67AE85u;
}  // namespace c

// 2^n for integral double n in [-1022, 1023]
template <class D>
inline D pow2i(D n) {
  D biased = n + set1(1023.0 + c::two52, n);
  auto b = bits_of(biased) & set1_u(c::mant_mask, bits_of(n));
  return from_bits(shl(b, 52));
}

template <class D>
inline D exp_lane(D x) {
  D lo = set1(c::exp_lo, x), hi = set1(c::exp_hi, x);
  D xc = select_lt(x, lo, lo, x);
  xc = select_gt(xc, hi, hi, xc);
  D n = round_even(xc * set1(c::log2e, x));
  D r = xc - n * set1(c::ln2_hi, x);
  r = r - n * set1(c::ln2_lo, x);
  D rr = r * r;
  D px = r * ((set1(c::exp_p0, x) * rr + set1(c::exp_p1, x)) * rr + set1(c::exp_p2, x));
  D qx = ((set1(c::exp_q0, x) * rr + set1(c::exp_q1, x)) * rr + set1(c::exp_q2, x)) * rr +
         set1(c::exp_q3, x);
  D e = px / (qx - px);
  e = set1(1.0, x) + (e + e);
  // split the scale so both halves stay normal
  D n1 = floor_d(n * set1(0.5, x));
  D n2 = n - n1;
  D y = e * pow2i(n1) * pow2i(n2);
  y = select_lt(x, lo, set1(0.0, x), y);
  y = select_gt(x, hi, set1(HUGE_VAL, x), y);
  return y;
}

// natural log for positive normal x
template <class D>
inline D log_lane(D x) {
  auto b = bits_of(x);
  auto eb = shr(b, 52) | set1_u(c::two52_bits, b);
  D e = from_bits(eb) - set1(c::two52 + 1022.0, x);
  D m = from_bits((b & set1_u(c::mant_mask, b)) | set1_u(c::half_bits, b));
  D one = set1(1.0, x);
  D small = select_lt(m, set1(c::sqrth, x), one, set1(0.0, x));
  e = e - small;
  m = m + m * small - one;
  D z = m * m;
  D p = set1(c::log_p[0], x);
  for (int i = 1; i < 6; ++i) p = p * m + set1(c::log_p[i], x);
  D q = m + set1(c::log_q[0], x);
  for (int i = 1; i < 5; ++i) q = q * m + set1(c::log_q[i], x);
  D y = m * (z * p / q);
  y = y - e * set1(2.121944400546905827679e-4, x);
  y = y - z * set1(0.5, x);
  D r = m + y;
  r = r + e * set1(0.693359375, x);
  return r;
}

// Philox4x32-10 on lanes holding 32-bit words in 64-bit slots.
template <class U>
inline void philox_lane(U& c0, U& c1, U& c2, U& c3, uint32_t k0, uint32_t k1) {
  const U lo32 = set1_u(0xffffffffull, c0);
  const U m0 = set1_u(c::philox_m0, c0), m1 = set1_u(c::philox_m1, c0);
  uint32_t kk0 = k0, kk1 = k1;
  for (int round = 0; round < 10; ++round) {
    U p0 = mul32(m0, c0);
    U p1 = mul32(m1, c2);
    U hi0 = shr(p0, 32), lo0 = p0 & lo32;
    U hi1 = shr(p1, 32), lo1 = p1 & lo32;
    U n0 = hi1 ^ c1 ^ set1_u(kk0, c0);
    U n2 = hi0 ^ c3 ^ set1_u(kk1, c0);
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
    kk0 += c::philox_w0;
    kk1 += c::philox_w1;
  }
}

// 52 random bits (two 32-bit words) -> uniform in (0,1)
template <class U>
inline auto uniform_from_words(U lo, U hi) {
  U v = shr(shl(hi, 32) | lo, 12);
  auto d = from_bits(v | set1_u(c::two52_bits, v)) - set1(c::two52, from_bits(v));
  return (d + set1(0.5, d)) * set1(0x1p-52, d);
}

inline double exp_scalar(double x) { return exp_lane<double>(x); }
inline double log_scalar(double x) { return log_lane<double>(x); }

}  // namespace BIRTHTAIL_VM_NS
}  // namespace birthtail::vm
