#include "birthtail/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace birthtail {

namespace {

constexpr double kE = std::numbers::e;

// log(e - 1 + k) without losing the exact value 1 at k = 1
double polylog_L(double k) { return 1.0 + std::log1p((k - 1.0) / kE); }

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    fail(ErrorKind::domain, std::string(name) + " must be positive and finite");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

RateFunction RateFunction::polynomial(double alpha, double beta) {
  check_positive(alpha, "alpha");
  require(std::isfinite(beta), ErrorKind::domain, "beta must be finite");
  RateFunction f;
  f.family_ = Family::polynomial;
  f.a_ = alpha;
  f.b_ = beta;
  return f;
}

RateFunction RateFunction::exponential(double beta) {
  check_positive(beta, "beta");
  RateFunction f;
  f.family_ = Family::exponential;
  f.b_ = beta;
  return f;
}

RateFunction RateFunction::polylog(double beta) {
  require(std::isfinite(beta), ErrorKind::domain, "beta must be finite");
  RateFunction f;
  f.family_ = Family::polylog;
  f.b_ = beta;
  return f;
}

RateFunction RateFunction::constant(double lambda) {
  check_positive(lambda, "lambda");
  RateFunction f;
  f.family_ = Family::constant;
  f.a_ = lambda;
  return f;
}

RateFunction RateFunction::tabulated(std::vector<double> values, std::shared_ptr<const RateFunction> tail) {
  require(!values.empty(), ErrorKind::domain, "table needs at least one value");
  for (double v : values) check_positive(v, "table value");
  if (tail) require(tail->family() != Family::tabulated, ErrorKind::domain, "nested tables are not supported");
  RateFunction f;
  f.family_ = Family::tabulated;
  std::vector<double> inv(values.size());
  for (size_t i = 0; i < values.size(); ++i) inv[i] = 1.0 / values[i];
  f.table_ = std::make_shared<const std::vector<double>>(std::move(values));
  f.table_inv_ = std::make_shared<const std::vector<double>>(std::move(inv));
  f.tail_ = std::move(tail);
  return f;
}

const std::vector<double>& RateFunction::table() const {
  static const std::vector<double> empty;
  return table_ ? *table_ : empty;
}

double RateFunction::evaluate(int64_t k) const {
  require(k >= 1, ErrorKind::domain, "rate index k must be >= 1");
  const double kd = static_cast<double>(k);
  switch (family_) {
    case Family::polynomial: return a_ * std::pow(kd, b_);
    case Family::exponential: return std::exp(b_ * (kd - 1.0));
    case Family::polylog: return kd * std::pow(polylog_L(kd), b_);
    case Family::constant: return a_;
    case Family::tabulated:
      if (k <= static_cast<int64_t>(table_->size())) return (*table_)[k - 1];
      require(tail_ != nullptr, ErrorKind::domain, "k beyond table and no tail descriptor");
      return tail_->evaluate(k);
  }
  return a_;
}

bool RateFunction::is_explosive() const {
  switch (family_) {
    case Family::polynomial: return b_ > 1.0;
    case Family::exponential: return true;
    case Family::polylog: return b_ > 1.0;
    case Family::constant: return false;
    case Family::tabulated:
      require(tail_ != nullptr, ErrorKind::undecidable, "tabulated rate without tail descriptor");
      return tail_->is_explosive();
  }
  return false;
}

bool RateFunction::diverges() const {
  switch (family_) {
    case Family::polynomial: return b_ > 0.0;
    case Family::exponential: return true;
    case Family::polylog: return true;
    case Family::constant: return false;
    case Family::tabulated:
      require(tail_ != nullptr, ErrorKind::undecidable, "tabulated rate without tail descriptor");
      return tail_->diverges();
  }
  return false;
}

bool RateFunction::square_summable() const {
  switch (family_) {
    case Family::polynomial: return 2.0 * b_ > 1.0;
    case Family::exponential: return true;
    case Family::polylog: return true;
    case Family::constant: return false;
    case Family::tabulated:
      require(tail_ != nullptr, ErrorKind::undecidable, "tabulated rate without tail descriptor");
      return tail_->square_summable();
  }
  return false;
}

bool RateFunction::strictly_increasing() const {
  switch (family_) {
    case Family::polynomial: return b_ > 0.0;
    case Family::exponential: return true;
    // derivative sign is that of L + beta k/(e-1+k), positive for beta > -1
    case Family::polylog: return b_ > -1.0;
    case Family::constant: return false;
    case Family::tabulated: {
      if (!tail_ || !tail_->strictly_increasing()) return false;
      const auto& t = *table_;
      for (size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) return false;
      return tail_->evaluate(static_cast<int64_t>(t.size()) + 1) > t.back();
    }
  }
  return false;
}

double RateFunction::tail_min_rate(int64_t k) const {
  switch (family_) {
    case Family::polynomial: return b_ >= 0.0 ? evaluate(k + 1) : 0.0;
    case Family::exponential: return evaluate(k + 1);
    case Family::polylog: return b_ > -1.0 ? evaluate(k + 1) : 0.0;
    case Family::constant: return a_;
    case Family::tabulated: {
      const int64_t n = static_cast<int64_t>(table_->size());
      double m = HUGE_VAL;
      for (int64_t j = k + 1; j <= n; ++j) m = std::min(m, (*table_)[j - 1]);
      if (!tail_) return 0.0;
      return std::min(m, tail_->tail_min_rate(std::max(k, n)));
    }
  }
  return 0.0;
}

std::string RateFunction::spec() const {
  switch (family_) {
    case Family::polynomial: return "poly:alpha=" + num(a_) + ",beta=" + num(b_);
    case Family::exponential: return "exp:beta=" + num(b_);
    case Family::polylog: return "polylog:beta=" + num(b_);
    case Family::constant: return "const:lambda=" + num(a_);
    case Family::tabulated: {
      std::string s = "table:values=";
      for (size_t i = 0; i < table_->size(); ++i) s += (i ? ";" : "") + num((*table_)[i]);
      if (tail_) {
        std::string t = tail_->spec();
        t[t.find(':')] = '|';
        s += ",tail=" + t;
      }
      return s;
    }
  }
  return "";
}

InvRateParams RateFunction::inv_rate_params() const {
  InvRateParams p;
  switch (family_) {
    case Family::polynomial:
      p.kind = 0;
      p.p0 = -det_log(a_);
      p.p1 = b_;
      break;
    case Family::exponential:
      p.kind = 1;
      p.p1 = b_;
      break;
    case Family::polylog:
      p.kind = 2;
      p.p1 = b_;
      break;
    case Family::constant:
      p.kind = 3;
      p.p0 = 1.0 / a_;
      break;
    case Family::tabulated:
      require(tail_ != nullptr, ErrorKind::domain, "k beyond table and no tail descriptor");
      return tail_->inv_rate_params();
  }
  return p;
}

double RateFunction::inv_rate_det(int64_t k) const {
  require(k >= 1, ErrorKind::domain, "rate index k must be >= 1");
  if (family_ == Family::tabulated && k <= static_cast<int64_t>(table_->size())) return (*table_inv_)[k - 1];
  double out;
  kernels_for(Isa::scalar).inv_rates(inv_rate_params(), k, 1, &out);
  return out;
}

bool RateFunction::operator==(const RateFunction& o) const {
  if (family_ != o.family_ || a_ != o.a_ || b_ != o.b_) return false;
  if (family_ != Family::tabulated) return true;
  if (*table_ != *o.table_) return false;
  if (!tail_ || !o.tail_) return !tail_ && !o.tail_;
  return *tail_ == *o.tail_;
}

// ---------------------------------------------------------------- parsing

namespace {

double parse_float(const std::string& tok, const std::string& key) {
  static const std::regex re(R"([+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)");
  if (!std::regex_match(tok, re)) fail(ErrorKind::parse, "bad number '" + tok + "' for key '" + key + "'");
  return std::strtod(tok.c_str(), nullptr);
}

std::map<std::string, std::string> parse_keys(const std::string& body, const std::string& family) {
  std::map<std::string, std::string> kv;
  std::string last;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    std::string key = eq == std::string::npos ? "" : item.substr(0, eq);
    // a table's nested tail spec may itself contain commas
    if (family == "table" && last == "tail" && key != "values" && key != "tail") {
      kv["tail"] += "," + item;
      continue;
    }
    if (eq == std::string::npos || key.empty()) fail(ErrorKind::parse, "expected key=value, got '" + item + "'");
    if (kv.count(key)) fail(ErrorKind::parse, "duplicate key '" + key + "'");
    kv[key] = item.substr(eq + 1);
    last = key;
  }
  return kv;
}

void expect_keys(const std::map<std::string, std::string>& kv, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (const char* w : keys) ok = ok || k == w;
    if (!ok) fail(ErrorKind::parse, "unknown key '" + k + "'");
  }
  for (const char* w : keys)
    if (!kv.count(w)) fail(ErrorKind::parse, std::string("missing key '") + w + "'");
}

}  // namespace

RateFunction parse_rate(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) fail(ErrorKind::parse, "missing ':' in rate spec '" + spec + "'");
  const std::string fam = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  if (fam != "poly" && fam != "exp" && fam != "polylog" && fam != "const" && fam != "table")
    fail(ErrorKind::parse, "unknown family '" + fam + "'");
  auto kv = parse_keys(body, fam);
  if (fam == "poly") {
    expect_keys(kv, {"alpha", "beta"});
    return RateFunction::polynomial(parse_float(kv["alpha"], "alpha"), parse_float(kv["beta"], "beta"));
  }
  if (fam == "exp") {
    expect_keys(kv, {"beta"});
    return RateFunction::exponential(parse_float(kv["beta"], "beta"));
  }
  if (fam == "polylog") {
    expect_keys(kv, {"beta"});
    return RateFunction::polylog(parse_float(kv["beta"], "beta"));
  }
  if (fam == "const") {
    expect_keys(kv, {"lambda"});
    return RateFunction::constant(parse_float(kv["lambda"], "lambda"));
  }
  if (!kv.count("values")) fail(ErrorKind::parse, "missing key 'values'");
  for (const auto& [k, v] : kv)
    if (k != "values" && k != "tail") fail(ErrorKind::parse, "unknown key '" + k + "'");
  std::vector<double> values;
  std::stringstream vs(kv["values"]);
  std::string tok;
  while (std::getline(vs, tok, ';')) values.push_back(parse_float(tok, "values"));
  std::shared_ptr<const RateFunction> tail;
  if (kv.count("tail")) {
    std::string t = kv["tail"];
    auto bar = t.find('|');
    if (bar == std::string::npos) fail(ErrorKind::parse, "tail spec must use '|' instead of ':' in '" + t + "'");
    t[bar] = ':';
    if (t.substr(0, bar) == "table") fail(ErrorKind::parse, "nested table tail '" + kv["tail"] + "'");
    tail = std::make_shared<const RateFunction>(parse_rate(t));
  }
  return RateFunction::tabulated(std::move(values), std::move(tail));
}

// ---------------------------------------------------------------- series

namespace {

// Neumaier-compensated accumulator
struct Accum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double t = s + x;
    c += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

// sum_{k >= m} k^{-s} / scale via Euler-Maclaurin; k^{-s} is completely
// monotone so the first omitted term bounds the error.
SeriesSum zeta_tail(double s, int64_t m, double tol, double scale) {
  static const double bern[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6};
  int64_t start = m;
  int64_t M = std::max<int64_t>(m, 16 + static_cast<int64_t>(std::ceil(s)));
  for (int attempt = 0; attempt < 40; ++attempt) {
    Accum acc;
    for (int64_t k = start; k < M; ++k) acc.add(std::pow(static_cast<double>(k), -s));
    const double Md = static_cast<double>(M);
    double fm = std::pow(Md, -s);
    acc.add(Md * fm / (s - 1.0));
    acc.add(0.5 * fm);
    // term_j = B_2j/(2j)! * s(s+1)...(s+2j-2) * M^{-s-2j+1}
    double poch = s;  // rising factorial (s)_{2j-1}
    double fact = 2.0;
    double mpow = fm / Md;
    double bound = 0.0;
    for (int j = 1; j <= 7; ++j) {
      double term = bern[j - 1] / fact * poch * mpow;
      if (j == 7) {
        bound = std::fabs(term);
        break;
      }
      acc.add(term);
      poch *= (s + 2 * j - 1) * (s + 2 * j);
      fact *= (2 * j + 1) * (2 * j + 2);
      mpow /= Md * Md;
    }
    double value = acc.value() / scale;
    bound = 2.0 * bound / scale + 4e-16 * std::fabs(value);
    if (bound <= tol || M > (int64_t{1} << 40)) return {value, bound, (M - start) + 7};
    M *= 2;
  }
  return {0.0, HUGE_VAL, 0};
}

// PolyLog tail: f(k) = (k L(k)^b)^{-p}; Euler-Maclaurin with the integral done
// in u = L(k), where k = e^{u} - e + 1.
SeriesSum polylog_tail(double beta, int p, int64_t m, double tol) {
  const double pb = p * beta;
  auto f = [&](double k) { return std::pow(k, -p) * std::pow(polylog_L(k), -pb); };
  auto integral = [&](double M) {
    const double uM = polylog_L(M);
    boost::math::quadrature::exp_sinh<double> q;
    if (p == 1) {
      // u^{-b} part in closed form, correction decays like e^{-u}
      auto h = [&](double v) {
        double u = uM + v;
        double den = std::expm1(u) - (kE - 2.0);
        return std::pow(u, -beta) * (kE - 1.0) / den;
      };
      return std::pow(uM, 1.0 - beta) / (beta - 1.0) + q.integrate(h, 0.0, HUGE_VAL, 1e-14);
    }
    auto h = [&](double v) {
      double u = uM + v;
      double den = std::expm1(u) - (kE - 2.0);
      return std::pow(u, -pb) / (den * (1.0 - (kE - 1.0) * std::exp(-u)));
    };
    return q.integrate(h, 0.0, HUGE_VAL, 1e-14);
  };
  int64_t M = std::max<int64_t>(m, 64);
  for (int attempt = 0; attempt < 40; ++attempt) {
    const double Md = static_cast<double>(M);
    Accum acc;
    for (int64_t k = m; k < M; ++k) acc.add(f(static_cast<double>(k)));
    // derivatives through phi = log f
    const double g = kE - 1.0 + Md;
    const double L = polylog_L(Md);
    const double Lp = 1.0 / g, Lpp = -1.0 / (g * g);
    const double ph1 = -p / Md - pb * Lp / L;
    const double ph2 = p / (Md * Md) - pb * (Lpp * L - Lp * Lp) / (L * L);
    const double fM = f(Md);
    const double f1 = fM * ph1;
    const double f2 = fM * (ph2 + ph1 * ph1);
    acc.add(integral(Md));
    acc.add(0.5 * fM);
    acc.add(-f1 / 12.0);
    const double f3_est = std::fabs(f2) * (p + std::fabs(pb) + 3.0) / Md;
    double value = acc.value();
    double bound = 2.0 * f3_est / 720.0 + 1e-14 * std::fabs(value);
    if (bound <= tol || M > (int64_t{1} << 32)) return {value, bound, M - m + 3};
    M *= 4;
  }
  return {0.0, HUGE_VAL, 0};
}

}  // namespace

SeriesSum tail_sum(const RateFunction& f, int64_t x, int power, double tol) {
  require(power == 1 || power == 2, ErrorKind::domain, "power must be 1 or 2");
  require(x >= 0, ErrorKind::domain, "tail_sum needs x >= 0");
  if (power == 1 && !f.is_explosive()) fail(ErrorKind::divergence, "sum of 1/F(k) diverges for " + f.spec());
  if (power == 2 && !f.square_summable()) fail(ErrorKind::divergence, "sum of 1/F(k)^2 diverges for " + f.spec());
  switch (f.family()) {
    case Family::exponential: {
      const double r = power * f.beta();
      return {std::exp(-r * static_cast<double>(x)) / -std::expm1(-r), 0.0, 0};
    }
    case Family::polynomial: {
      const double s = power * f.beta();
      return zeta_tail(s, x + 1, tol, std::pow(f.alpha(), power));
    }
    case Family::polylog: return polylog_tail(f.beta(), power, x + 1, tol);
    case Family::constant: break;
    case Family::tabulated: {
      const auto& t = f.table();
      const int64_t n = static_cast<int64_t>(t.size());
      Accum acc;
      int64_t used = 0;
      for (int64_t k = x + 1; k <= n; ++k, ++used) acc.add(std::pow(t[k - 1], -power));
      SeriesSum rest = tail_sum(*f.tail(), std::max(x, n), power, tol);
      acc.add(rest.value);
      return {acc.value(), rest.remainder_bound, used + rest.terms_used};
    }
  }
  fail(ErrorKind::divergence, "series diverges");
}

SeriesSum head_sum(const RateFunction& f, int64_t x0, int64_t x, int power) {
  require(power == 1 || power == 2, ErrorKind::domain, "power must be 1 or 2");
  require(x0 >= 1 && x >= x0, ErrorKind::domain, "head_sum needs x >= x0 >= 1");
  Accum acc;
  for (int64_t k = x0; k <= x; ++k) {
    double v = 1.0 / f.evaluate(k);
    acc.add(power == 1 ? v : v * v);
  }
  return {acc.value(), 0.0, x - x0 + 1};
}

}  // namespace birthtail
