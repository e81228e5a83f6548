#include "birthtail/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "birthtail/error.hpp"
#include "birthtail/rates.hpp"

namespace birthtail {

double EmpiricalSurvival::at(double v) const {
  // survival is right-continuous and constant between support points
  auto it = std::upper_bound(support.begin(), support.end(), v);
  if (it == support.begin()) return n > 0 ? 1.0 : 0.0;
  return survival[static_cast<size_t>(it - support.begin()) - 1];
}

EmpiricalSurvival empirical_survival(std::vector<double> samples, const std::string& conditioning) {
  require(!samples.empty(), ErrorKind::empty_sample, "no samples satisfy the condition '" + conditioning + "'");
  std::sort(samples.begin(), samples.end());
  EmpiricalSurvival s;
  s.n = static_cast<int64_t>(samples.size());
  s.conditioning = conditioning;
  const double n = static_cast<double>(samples.size());
  for (size_t i = 0; i < samples.size();) {
    size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    s.support.push_back(samples[i]);
    s.survival.push_back(static_cast<double>(samples.size() - j) / n);
    i = j;
  }
  return s;
}

EmpiricalSurvival empirical_survival(const std::vector<double>& samples, const std::vector<bool>& keep,
                                     const std::string& conditioning) {
  require(keep.size() == samples.size(), ErrorKind::domain, "condition mask size mismatch");
  std::vector<double> v;
  for (size_t i = 0; i < samples.size(); ++i)
    if (keep[i]) v.push_back(samples[i]);
  return empirical_survival(std::move(v), conditioning);
}

std::string to_csv(const EmpiricalSurvival& s) {
  std::ostringstream os;
  os << "value,survival,n,conditioning\n";
  std::string cond = s.conditioning;
  if (cond.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : cond) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    cond = q + "\"";
  }
  for (size_t i = 0; i < s.support.size(); ++i)
    os << fmt12(s.support[i]) << ',' << fmt12(s.survival[i]) << ',' << s.n << ',' << cond << '\n';
  return os.str();
}

const char* to_string(Transform t) {
  switch (t) {
    case Transform::loglog: return "loglog";
    case Transform::loglinear: return "loglinear";
    case Transform::logloglog: return "logloglog";
  }
  return "?";
}

Transform parse_transform(const std::string& s) {
  if (s == "loglog") return Transform::loglog;
  if (s == "loglinear") return Transform::loglinear;
  if (s == "logloglog") return Transform::logloglog;
  fail(ErrorKind::parse, "transform must be loglog, loglinear or logloglog, got '" + s + "'");
}

namespace {

bool transform_x(Transform t, double v, double& x) {
  switch (t) {
    case Transform::loglog:
      if (v <= 0.0) return false;
      x = std::log(v);
      return true;
    case Transform::loglinear: x = v; return true;
    case Transform::logloglog:
      if (v <= 1.0) return false;
      x = std::log(std::log(v));
      return true;
  }
  return false;
}

SlopeFit ols(const std::vector<double>& x, const std::vector<double>& y, Transform t) {
  require(x.size() >= 10, ErrorKind::insufficient_data,
          "slope fit needs >= 10 support points in range, got " + std::to_string(x.size()));
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::insufficient_data, "slope fit needs distinct support points");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.stderr_ = std::sqrt(sse / (n - 2.0) / sxx);
  f.transform = t;
  f.points = static_cast<int>(x.size());
  return f;
}

}  // namespace

SlopeFit fit_power_tail(const EmpiricalSurvival& s, Transform t, double q_lo, double q_hi) {
  require(0.0 <= q_lo && q_lo < q_hi && q_hi <= 1.0, ErrorKind::domain, "fit range needs 0 <= q_lo < q_hi <= 1");
  std::vector<double> x, y;
  for (size_t i = 0; i < s.support.size(); ++i) {
    const double cdf = 1.0 - s.survival[i];
    if (cdf < q_lo || cdf > q_hi || s.survival[i] <= 0.0) continue;
    double xv;
    if (!transform_x(t, s.support[i], xv)) continue;
    x.push_back(xv);
    y.push_back(std::log(s.survival[i]));
  }
  SlopeFit f = ols(x, y, t);
  f.q_lo = q_lo;
  f.q_hi = q_hi;
  return f;
}

SlopeFit fit_power_tail_range(const EmpiricalSurvival& s, Transform t, double x_lo, double x_hi) {
  std::vector<double> x, y;
  for (size_t i = 0; i < s.support.size(); ++i) {
    const double v = s.support[i];
    if (v < x_lo || v > x_hi || s.survival[i] <= 0.0) continue;
    double xv;
    if (!transform_x(t, v, xv)) continue;
    x.push_back(xv);
    y.push_back(std::log(s.survival[i]));
  }
  SlopeFit f = ols(x, y, t);
  f.q_lo = 1.0 - s.at(x_lo);
  f.q_hi = 1.0 - s.at(x_hi);
  return f;
}

double hill(std::vector<double> samples, int64_t k) {
  require(k >= 1 && k < static_cast<int64_t>(samples.size()), ErrorKind::insufficient_data,
          "Hill estimator needs 1 <= k < n");
  std::sort(samples.begin(), samples.end(), std::greater<>());
  const double xk = samples[static_cast<size_t>(k)];
  require(xk > 0.0, ErrorKind::domain, "Hill estimator needs positive order statistics");
  double s = 0.0;
  for (int64_t i = 0; i < k; ++i) s += std::log(samples[static_cast<size_t>(i)] / xk);
  return static_cast<double>(k) / s;
}

Comparison compare_prediction(const EmpiricalSurvival& s, const std::function<double(double)>& predicted,
                              double x_lo, double x_hi, double lo, double hi) {
  require(x_lo <= x_hi && lo <= hi, ErrorKind::domain, "comparison ranges must be ordered");
  Comparison c;
  for (size_t i = 0; i < s.support.size(); ++i) {
    const double v = s.support[i];
    if (v < x_lo || v > x_hi) continue;
    const double p = predicted(v);
    c.x.push_back(v);
    c.empirical.push_back(s.survival[i]);
    c.predicted.push_back(p);
    c.ratio.push_back(p > 0.0 ? s.survival[i] / p : HUGE_VAL);
  }
  require(!c.x.empty(), ErrorKind::range,
          "empirical support does not meet the range [" + fmt12(x_lo) + ", " + fmt12(x_hi) + "]");
  c.min_ratio = *std::min_element(c.ratio.begin(), c.ratio.end());
  c.max_ratio = *std::max_element(c.ratio.begin(), c.ratio.end());
  c.pass = c.min_ratio >= lo && c.max_ratio <= hi;
  return c;
}

Correlation pearson_log_corr(const std::vector<std::pair<double, double>>& pairs) {
  require(pairs.size() >= 3, ErrorKind::insufficient_data, "correlation needs >= 3 pairs");
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> lx, ly;
  for (const auto& [a, b] : pairs) {
    require(a > 0.0 && b > 0.0, ErrorKind::domain, "log correlation needs positive values");
    lx.push_back(std::log(a));
    ly.push_back(std::log(b));
    mx += lx.back();
    my += ly.back();
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    syy += (ly[i] - my) * (ly[i] - my);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0 && syy > 0.0, ErrorKind::degenerate, "a component has zero variance");
  Correlation c;
  c.n = static_cast<int64_t>(pairs.size());
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (pairs.size() > 3 && std::fabs(c.r) < 1.0) {
    const double z = std::atanh(c.r), se = 1.0 / std::sqrt(n - 3.0);
    c.ci_lo = std::tanh(z - 1.959963984540054 * se);
    c.ci_hi = std::tanh(z + 1.959963984540054 * se);
  } else {
    c.ci_lo = pairs.size() > 3 ? c.r : -1.0;
    c.ci_hi = pairs.size() > 3 ? c.r : 1.0;
  }
  return c;
}

double ks_exponential(std::vector<double> samples) {
  require(samples.size() >= 2, ErrorKind::insufficient_data, "KS needs >= 2 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double F = samples[i] > 0.0 ? -std::expm1(-samples[i]) : 0.0;
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = 2.0 * std::exp(-2.0 * k * k * x * x) * (k % 2 ? 1.0 : -1.0);
    s += t;
    if (std::fabs(t) < 1e-17) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsTwo ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorKind::empty_sample, "two-sample KS needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsTwo r;
  r.d = d;
  const double ne = na * nb / (na + nb);
  r.p_value = kolmogorov_q((std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d);
  return r;
}

}  // namespace birthtail
