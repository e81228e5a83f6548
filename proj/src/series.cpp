#include <quadmath.h>

#include <algorithm>
#include <cmath>

#include "birthtail/density.hpp"

namespace birthtail {

namespace {

using quad = __float128;

constexpr double u_dbl = 0x1p-52;
constexpr double u_quad = 0x1p-111;
constexpr double target_dbl = 1e-8;
constexpr double target_quad = 1e-10;
constexpr double target_relaxed = 1e-6;
// uniformization work limit (chain steps times states)
constexpr double unif_budget = 2e8;

}  // namespace

const char* to_string(Route r) {
  switch (r) {
    case Route::closed_form: return "closed_form";
    case Route::dbl: return "double";
    case Route::quad: return "quad";
    case Route::uniformization: return "uniformization";
    case Route::quad_relaxed: return "quad_relaxed";
  }
  return "?";
}

// c_k = prod_l lam_l / prod_{l != k}(lam_l - lam_k), stored as sign and log|c_k|
struct HypoExpSeries::Coeffs {
  std::vector<quad> lam_q, a_q, as_q;
  std::vector<double> lam, a, as, sgn, amax, asmax;
  double lam_max = 0.0;
};

HypoExpSeries::HypoExpSeries(std::vector<double> rates) : rates_(std::move(rates)) {
  require(!rates_.empty(), ErrorKind::domain, "hypoexponential needs at least one rate");
  for (double r : rates_)
    require(r > 0.0 && std::isfinite(r), ErrorKind::domain, "rates must be positive and finite");
  // the sum is symmetric in the rates; terms are kept in ascending rate order
  std::vector<double> sorted = rates_;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i] - sorted[i - 1] < 1e-9 * sorted[i])
      fail(ErrorKind::distinctness,
           "rates " + fmt12(sorted[i - 1]) + " and " + fmt12(sorted[i]) +
               " are not pairwise distinct (relative gap < 1e-9); perturb them explicitly");
  auto c = std::make_shared<Coeffs>();
  const size_t n = rates_.size();
  c->lam_q.resize(n);
  c->a_q.resize(n);
  c->as_q.resize(n);
  c->lam = sorted;
  c->a.resize(n);
  c->as.resize(n);
  c->sgn.resize(n);
  quad log_prod = 0;
  for (size_t k = 0; k < n; ++k) {
    c->lam_q[k] = sorted[k];
    log_prod += logq(c->lam_q[k]);
    c->lam_max = std::max(c->lam_max, sorted[k]);
  }
  for (size_t k = 0; k < n; ++k) {
    quad s = log_prod;
    int neg = 0;
    for (size_t l = 0; l < n; ++l) {
      if (l == k) continue;
      quad d = c->lam_q[l] - c->lam_q[k];
      if (d < 0) ++neg;
      s -= logq(fabsq(d));
    }
    c->a_q[k] = s;
    c->as_q[k] = s - logq(c->lam_q[k]);
    c->a[k] = static_cast<double>(s);
    c->as[k] = static_cast<double>(c->as_q[k]);
    c->sgn[k] = (neg % 2) ? -1.0 : 1.0;
  }
  c->amax.resize(n);
  c->asmax.resize(n);
  for (size_t k = n; k-- > 0;) {
    c->amax[k] = k + 1 < n ? std::max(c->a[k], c->amax[k + 1]) : c->a[k];
    c->asmax[k] = k + 1 < n ? std::max(c->as[k], c->asmax[k + 1]) : c->as[k];
  }
  c_ = std::move(c);
}

double HypoExpSeries::total_mass() const {
  quad s = 0;
  for (size_t k = 0; k < rates_.size(); ++k) s += (c_->sgn[k] < 0 ? -1 : 1) * expq(c_->as_q[k]);
  return static_cast<double>(s);
}

Eval HypoExpSeries::eval_quad(double t, bool surv) const {
  const auto& a = surv ? c_->as_q : c_->a_q;
  quad s = 0, err = 0, mx = 0;
  const quad tq = t;
  for (size_t k = 0; k < rates_.size(); ++k) {
    quad lt = c_->lam_q[k] * tq;
    quad e = expq(a[k] - lt);
    s += c_->sgn[k] < 0 ? -e : e;
    err += e * (fabsq(a[k]) + lt + 1);
    mx = std::max(mx, e);
  }
  Eval r;
  r.value = static_cast<double>(s);
  r.terms = static_cast<int>(rates_.size());
  r.route = Route::quad;
  // ratios in quad: the value may lie below the double range and still be accurate
  const quad as = fabsq(s);
  r.cond = as > 0 ? static_cast<double>(mx / as) : HUGE_VAL;
  r.rel_error = as > 0 ? static_cast<double>(u_quad * err / as) : HUGE_VAL;
  return r;
}

bool HypoExpSeries::uniformization_feasible(double t) const {
  const double lt = c_->lam_max * t;
  const double steps = lt + 40.0 * std::sqrt(lt) + static_cast<double>(rates_.size()) + 50.0;
  return steps * static_cast<double>(rates_.size()) <= unif_budget;
}

// Absorbing chain through states 0..n-1 with exit rates lam_k, observed via a
// Poisson(Lambda t) number of steps of the uniformized jump chain. Every term is
// non-negative, so there is no cancellation.
Eval HypoExpSeries::eval_uniformization(double t, bool surv) const {
  const size_t n = rates_.size();
  const double Lam = c_->lam_max;
  const double lt = Lam * t;
  std::vector<double> p(n), stay(n), move(n), v(n, 0.0), nv(n);
  for (size_t i = 0; i < n; ++i) {
    move[i] = rates_[i] / Lam;
    stay[i] = 1.0 - move[i];
  }
  v[0] = 1.0;
  double acc = 0.0, comp = 0.0;
  const double log_lt = std::log(lt);
  size_t m = 0;
  const size_t m_cap = static_cast<size_t>(lt + 40.0 * std::sqrt(lt) + static_cast<double>(n) + 50.0);
  for (;; ++m) {
    const double w = std::exp(-lt + static_cast<double>(m) * log_lt - std::lgamma(static_cast<double>(m) + 1.0));
    double contrib;
    if (surv) {
      double mass = 0.0;
      for (size_t i = 0; i < n; ++i) mass += v[i];
      contrib = w * mass;
    } else {
      contrib = w * v[n - 1] * rates_[n - 1];
    }
    double ns = acc + contrib;
    comp += std::fabs(acc) >= std::fabs(contrib) ? (acc - ns) + contrib : (contrib - ns) + acc;
    acc = ns;
    if (static_cast<double>(m) > lt) {
      const double ratio = lt / static_cast<double>(m + 1);
      const double rest = w * ratio / (1.0 - ratio) * (surv ? 1.0 : rates_[n - 1]);
      if (rest <= 1e-17 * (acc + comp) || (w == 0.0 && m + 1 >= n)) break;
    }
    if (m >= m_cap) break;
    nv[0] = v[0] * stay[0];
    for (size_t i = 1; i < n; ++i) nv[i] = v[i] * stay[i] + v[i - 1] * move[i - 1];
    v.swap(nv);
  }
  Eval r;
  r.value = acc + comp;
  r.terms = static_cast<int>(n);
  r.route = Route::uniformization;
  r.cond = 1.0;
  r.rel_error = 1e-15 * static_cast<double>(m + n);
  return r;
}

Eval HypoExpSeries::eval(double t, bool surv) const {
  require(t >= 0.0 && std::isfinite(t), ErrorKind::domain, "t must be finite and >= 0");
  Eval r;
  r.terms = static_cast<int>(rates_.size());
  if (t == 0.0) {
    r.value = surv ? 1.0 : (rates_.size() == 1 ? rates_[0] : 0.0);
    return r;
  }
  double sum, err;
  const auto& a = surv ? c_->as : c_->a;
  const auto& amax = surv ? c_->asmax : c_->amax;
  kernels().exp_sum(a.data(), c_->sgn.data(), c_->lam.data(), amax.data(), rates_.size(), &t, 1, &sum, &err);
  const double as = std::fabs(sum);
  r.value = sum;
  r.route = Route::dbl;
  r.rel_error = as > 0 ? u_dbl * err / as : HUGE_VAL;
  if (r.rel_error <= target_dbl) {
    double mx = 0.0;
    for (size_t k = 0; k < rates_.size(); ++k) mx = std::max(mx, std::exp(a[k] - c_->lam[k] * t));
    r.cond = mx / as;
    return r;
  }
  Eval q = eval_quad(t, surv);
  if (q.rel_error <= target_quad) return q;
  if (uniformization_feasible(t)) return eval_uniformization(t, surv);
  if (q.rel_error <= target_relaxed) {
    q.route = Route::quad_relaxed;
    return q;
  }
  fail(ErrorKind::precision, "alternating series at t=" + fmt12(t) + " has condition number " + fmt12(q.cond) +
                                 " beyond extended precision and the positive series is too long");
}

Eval HypoExpSeries::density(double t) const {
  Eval r = eval(t, false);
  r.value = std::max(r.value, 0.0);
  return r;
}

Eval HypoExpSeries::survival(double t) const {
  Eval r = eval(t, true);
  r.value = std::clamp(r.value, 0.0, 1.0);
  return r;
}

void HypoExpSeries::eval_grid(const std::vector<double>& t, bool surv, std::vector<double>& out,
                              std::vector<Route>* routes) const {
  const size_t n = t.size();
  out.assign(n, 0.0);
  std::vector<double> err(n);
  for (double x : t) require(x >= 0.0 && std::isfinite(x), ErrorKind::domain, "t must be finite and >= 0");
  const auto& a = surv ? c_->as : c_->a;
  const auto& amax = surv ? c_->asmax : c_->amax;
  kernels().exp_sum(a.data(), c_->sgn.data(), c_->lam.data(), amax.data(), rates_.size(), t.data(), n, out.data(),
                    err.data());
  if (routes) routes->assign(n, Route::dbl);
  for (size_t j = 0; j < n; ++j) {
    const double as = std::fabs(out[j]);
    if (t[j] != 0.0 && as > 0 && u_dbl * err[j] / as <= target_dbl) continue;
    Eval e = eval(t[j], surv);
    out[j] = e.value;
    if (routes) (*routes)[j] = e.route;
  }
  for (double& v : out) v = surv ? std::clamp(v, 0.0, 1.0) : std::max(v, 0.0);
}

void HypoExpSeries::density(const std::vector<double>& t, std::vector<double>& out, std::vector<Route>* routes) const {
  eval_grid(t, false, out, routes);
}

void HypoExpSeries::survival(const std::vector<double>& t, std::vector<double>& out, std::vector<Route>* routes) const {
  eval_grid(t, true, out, routes);
}

}  // namespace birthtail
