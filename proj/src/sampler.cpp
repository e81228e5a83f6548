#include <cmath>

#include "birthtail/sim.hpp"

namespace birthtail {

namespace {
// probability below which an explosion before t_obs is taken as certain
constexpr double explosion_eps = 1e-12;
}  // namespace

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::reached_t: return "reached_t";
    case StopReason::max_jumps: return "max_jumps";
    case StopReason::explosion_detected: return "explosion_detected";
  }
  return "?";
}

int64_t default_max_jumps(const RateFunction& f) {
  const RateFunction* g = f.family() == Family::tabulated && f.tail() ? f.tail() : &f;
  return g->family() == Family::exponential ? 100 : 1000000;
}

BirthOutcome simulate_birth(const RateFunction& f, int64_t x0, double t_obs, int64_t max_jumps, RngStream s) {
  require(x0 >= 1, ErrorKind::domain, "x0 must be >= 1");
  require(t_obs >= 0.0 && std::isfinite(t_obs), ErrorKind::domain, "t_obs must be finite and >= 0");
  require(max_jumps >= 1, ErrorKind::domain, "max_jumps must be >= 1");
  const bool explosive = f.is_explosive();
  SojournCursor c(f, x0, s, 0);
  BirthOutcome out;
  int64_t next_check = 8;
  while (c.jumps() < max_jumps) {
    const int64_t k = c.state();
    c.next();
    if (c.elapsed() > t_obs) {
      out.state = k;
      out.jumps = k - x0;
      out.stop_reason = StopReason::reached_t;
      return out;
    }
    if (explosive && c.jumps() == next_check) {
      next_check *= 2;
      if (remainder_exceed_bound(f, c.state(), t_obs - c.elapsed()) < explosion_eps) {
        out.exploded = true;
        out.jumps = c.jumps();
        out.state = c.state();
        out.stop_reason = StopReason::explosion_detected;
        return out;
      }
    }
  }
  out.exploded = true;
  out.jumps = c.jumps();
  out.state = c.state();
  out.stop_reason = StopReason::max_jumps;
  return out;
}

int64_t truncation_state(const RateFunction& f, int64_t x0, double eps) {
  require(eps > 0.0, ErrorKind::domain, "eps must be positive");
  require(f.is_explosive(), ErrorKind::domain, "explosion time needs an explosive rate, got " + f.spec());
  auto small = [&](int64_t K) { return tail_sum(f, K, 1).value < eps; };
  int64_t lo = x0, hi = x0;
  if (small(lo)) return lo;
  while (!small(hi)) {
    lo = hi;
    require(hi < (int64_t{1} << 40), ErrorKind::domain,
            "truncation for eps=" + fmt12(eps) + " needs more than 2^40 terms for " + f.spec());
    hi *= 2;
  }
  while (hi - lo > 1) {
    const int64_t mid = lo + (hi - lo) / 2;
    (small(mid) ? hi : lo) = mid;
  }
  return hi;
}

ExplosionSample sample_explosion_time(const RateFunction& f, int64_t x0, double eps, RngStream s) {
  require(x0 >= 1, ErrorKind::domain, "x0 must be >= 1");
  const int64_t K = truncation_state(f, x0, eps);
  SojournCursor c(f, x0, s, 0);
  c.advance(K - x0 + 1);
  ExplosionSample out;
  out.t_hat = c.elapsed();
  out.bias_bound = eps;
  out.terms = K - x0 + 1;
  return out;
}

}  // namespace birthtail
