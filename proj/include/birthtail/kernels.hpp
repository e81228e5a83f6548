#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace birthtail {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);

struct PhiloxKey {
  uint32_t k0 = 0, k1 = 0;
};

// Parameters of 1/F(k) for the closed-form families, as seen by the kernels.
// kind: 0 polynomial (p0 = -log alpha, p1 = beta), 1 exponential (p1 = beta),
// 2 polylog (p1 = beta), 3 constant (p0 = 1/lambda).
struct InvRateParams {
  int kind = 0;
  double p0 = 0.0, p1 = 0.0;
};

struct KernelTable {
  Isa isa;

  // uniforms in (0,1) with 52-bit resolution for draw indices [first, first+n)
  void (*uniforms)(PhiloxKey key, uint32_t sub, uint32_t rep, uint64_t first, size_t n, double* out);

  // out[j] = -log(u_{first+j}) * inv_rate[j]
  void (*sojourns)(PhiloxKey key, uint32_t sub, uint32_t rep, uint64_t first, size_t n,
                   const double* inv_rate, double* out);

  // out[j] = 1/F(k0+j)
  void (*inv_rates)(const InvRateParams& p, int64_t k0, size_t n, double* out);

  // For each t[j]: sum[j] = sum_k sgn[k] exp(a[k] - lam[k] t[j]) (compensated),
  // err[j] = sum_k |term_k| (|a[k]| + lam[k] t[j] + 1), the argument-weighted
  // magnitude used for the rounding error estimate. With lam ascending and
  // amax[k] = max_{j>=k} a[j] (may be null) the loop stops early once all
  // remaining terms underflow.
  void (*exp_sum)(const double* a, const double* sgn, const double* lam, const double* amax, size_t m,
                  const double* t, size_t n, double* sum, double* err);

  // elementwise exp / log (log requires normal positive inputs)
  void (*exp)(const double* x, size_t n, double* out);
  void (*log)(const double* x, size_t n, double* out);
};

const KernelTable& kernels();                 // active table
const KernelTable& kernels_for(Isa isa);      // throws unsupported if unavailable
std::vector<Isa> available_isas();
void set_active_isa(Isa isa);                 // process-wide override

// Deterministic scalar math shared with the kernels (bitwise identical to the
// lane implementations).
double det_exp(double x);
double det_log(double x);

}  // namespace birthtail
