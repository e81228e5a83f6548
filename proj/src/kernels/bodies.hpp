#pragma once

// Kernel bodies shared by every ISA. L supplies: width, D/U lane types,
// load/store/load_u/store_u and an iota helper; see scalar.cpp and avx2.cpp.

#include <algorithm>

#include "kernels/vecmath.hpp"

namespace birthtail::vm {
inline namespace BIRTHTAIL_VM_NS {

struct ScalarLanes {
  static constexpr size_t width = 1;
  using D = double;
  using U = uint64_t;
  static D load(const double* p) { return *p; }
  static void store(double* p, D v) { *p = v; }
  static U load_u(const uint64_t* p) { return *p; }
  static void store_u(uint64_t* p, U v) { *p = v; }
};

template <class L>
void uniforms_body(PhiloxKey key, uint32_t sub, uint32_t rep, uint64_t first, size_t n, double* out) {
  if (n == 0) return;
  constexpr size_t W = L::width;
  const uint64_t last = first + n - 1;
  uint64_t b = first >> 1;
  const uint64_t b_end = (last >> 1) + 1;
  alignas(32) uint64_t c0[W], c1[W], c2[W], c3[W];
  alignas(32) double ue[W], uo[W];
  while (b < b_end) {
    const size_t lanes = static_cast<size_t>(std::min<uint64_t>(W, b_end - b));
    if (lanes == W) {
      for (size_t j = 0; j < W; ++j) {
        const uint64_t bj = b + j;
        c0[j] = bj & 0xffffffffu;
        c1[j] = bj >> 32;
        c2[j] = sub;
        c3[j] = rep;
      }
      auto x0 = L::load_u(c0), x1 = L::load_u(c1), x2 = L::load_u(c2), x3 = L::load_u(c3);
      philox_lane(x0, x1, x2, x3, key.k0, key.k1);
      L::store(ue, uniform_from_words(x0, x1));
      L::store(uo, uniform_from_words(x2, x3));
    } else {
      for (size_t j = 0; j < lanes; ++j) {
        const uint64_t bj = b + j;
        uint64_t y0 = bj & 0xffffffffu, y1 = bj >> 32, y2 = sub, y3 = rep;
        philox_lane(y0, y1, y2, y3, key.k0, key.k1);
        ue[j] = uniform_from_words(y0, y1);
        uo[j] = uniform_from_words(y2, y3);
      }
    }
    for (size_t j = 0; j < lanes; ++j) {
      const uint64_t i0 = 2 * (b + j), i1 = i0 + 1;
      if (i0 >= first && i0 <= last) out[i0 - first] = ue[j];
      if (i1 >= first && i1 <= last) out[i1 - first] = uo[j];
    }
    b += lanes;
  }
}

template <class L>
void sojourns_body(PhiloxKey key, uint32_t sub, uint32_t rep, uint64_t first, size_t n,
                   const double* inv_rate, double* out) {
  constexpr size_t W = L::width;
  uniforms_body<L>(key, sub, rep, first, n, out);
  size_t j = 0;
  for (; j + W <= n; j += W) {
    auto u = L::load(out + j);
    auto lg = log_lane(u);
    L::store(out + j, (set1(0.0, u) - lg) * L::load(inv_rate + j));
  }
  for (; j < n; ++j) out[j] = (0.0 - log_lane(out[j])) * inv_rate[j];
}

template <class D>
inline D inv_rate_lane(const InvRateParams& p, D k) {
  switch (p.kind) {
    case 0:
      return exp_lane(set1(p.p0, k) - set1(p.p1, k) * log_lane(k));
    case 1:
      return exp_lane(set1(0.0, k) - set1(p.p1, k) * (k - set1(1.0, k)));
    case 2: {
      D l = log_lane(k + set1(1.71828182845904523536, k));
      return exp_lane(set1(0.0, k) - log_lane(k) - set1(p.p1, k) * log_lane(l));
    }
    default:
      return set1(p.p0, k);
  }
}

template <class L>
void inv_rates_body(const InvRateParams& p, int64_t k0, size_t n, double* out) {
  constexpr size_t W = L::width;
  alignas(32) double kk[W];
  size_t j = 0;
  for (; j + W <= n; j += W) {
    for (size_t l = 0; l < W; ++l) kk[l] = static_cast<double>(k0 + static_cast<int64_t>(j + l));
    L::store(out + j, inv_rate_lane(p, L::load(kk)));
  }
  for (; j < n; ++j) out[j] = inv_rate_lane(p, static_cast<double>(k0 + static_cast<int64_t>(j)));
}

// Terms come sorted by increasing lam; amax[k] = max_{j>=k} a[j]. Once every
// remaining argument is below the flush threshold the loop stops, which is
// exact because those terms are zero in every lane.
template <class D>
inline void exp_sum_lane(const double* a, const double* sgn, const double* lam, const double* amax, size_t m,
                         D t, double tmin, D& sum_out, D& err_out) {
  D s = set1(0.0, t), comp = set1(0.0, t), err = set1(0.0, t);
  const D one = set1(1.0, t);
  for (size_t k = 0; k < m; ++k) {
    if (amax && amax[k] - lam[k] * tmin < c::exp_lo) break;
    D lt = set1(lam[k], t) * t;
    D e = exp_lane(set1(a[k], t) - lt);
    D term = e * set1(sgn[k], t);
    D ns = s + term;
    D z = ns - s;
    comp = comp + ((s - (ns - z)) + (term - z));
    s = ns;
    err = err + e * (set1(std::fabs(a[k]), t) + lt + one);
  }
  sum_out = s + comp;
  err_out = err;
}

template <class L>
void exp_sum_body(const double* a, const double* sgn, const double* lam, const double* amax, size_t m,
                  const double* t, size_t n, double* sum, double* err) {
  constexpr size_t W = L::width;
  size_t j = 0;
  for (; j + W <= n; j += W) {
    typename L::D s, e;
    double tmin = t[j];
    for (size_t l = 1; l < W; ++l) tmin = std::min(tmin, t[j + l]);
    exp_sum_lane(a, sgn, lam, amax, m, L::load(t + j), tmin, s, e);
    L::store(sum + j, s);
    L::store(err + j, e);
  }
  for (; j < n; ++j) exp_sum_lane(a, sgn, lam, amax, m, t[j], t[j], sum[j], err[j]);
}

template <class L>
void exp_body(const double* x, size_t n, double* out) {
  constexpr size_t W = L::width;
  size_t j = 0;
  for (; j + W <= n; j += W) L::store(out + j, exp_lane(L::load(x + j)));
  for (; j < n; ++j) out[j] = exp_lane(x[j]);
}

template <class L>
void log_body(const double* x, size_t n, double* out) {
  constexpr size_t W = L::width;
  size_t j = 0;
  for (; j + W <= n; j += W) L::store(out + j, log_lane(L::load(x + j)));
  for (; j < n; ++j) out[j] = log_lane(x[j]);
}

}  // namespace BIRTHTAIL_VM_NS
}  // namespace birthtail::vm
