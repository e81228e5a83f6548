#include "birthtail/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "birthtail/sim.hpp"

namespace birthtail {

const char* to_string(TailKind k) {
  switch (k) {
    case TailKind::power: return "power";
    case TailKind::exponential: return "exponential";
    case TailKind::log_power: return "log_power";
    case TailKind::stretched: return "stretched";
    case TailKind::band: return "band";
  }
  return "?";
}

bool TailPrediction::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

namespace {

// 12 significant digits, as numbers in the JSON text
nlohmann::json num12(double v) {
  if (!std::isfinite(v)) return nullptr;
  return nlohmann::json::parse(fmt12(v));
}

}  // namespace

std::string to_json(const TailPrediction& p) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(p.kind);
  j["exponent"] = num12(p.exponent);
  j["constant"] = p.constant ? num12(*p.constant) : nlohmann::json(nullptr);
  j["conditioning"] = p.conditioning;
  j["flags"] = p.flags;
  return j.dump();
}

namespace {

const RateFunction& base_family(const RateFunction& f) {
  if (f.family() == Family::tabulated) {
    require(f.tail() != nullptr, ErrorKind::undecidable, "tabulated rate without tail descriptor");
    return *f.tail();
  }
  return f;
}

// leading form of sum_{k>x} 1/F(k)
void tail_shape(const RateFunction& f, TailPrediction& p) {
  const RateFunction& b = base_family(f);
  switch (b.family()) {
    case Family::polynomial:
      p.kind = TailKind::power;
      p.exponent = 1.0 - b.beta();
      break;
    case Family::exponential:
      p.kind = TailKind::exponential;
      p.exponent = -b.beta();
      break;
    case Family::polylog:
      p.kind = TailKind::log_power;
      p.exponent = 1.0 - b.beta();
      break;
    default: fail(ErrorKind::domain, "no tail shape for " + f.spec());
  }
}

std::string agent_name(int64_t i) { return "agent " + std::to_string(i + 1); }

}  // namespace

// ---------------------------------------------------------------- birth process

double birth_tail(const ExplosionModel& m, double t, int64_t x) {
  require(t > 0.0, ErrorKind::domain, "birth_tail needs t > 0");
  require(x >= m.x0(), ErrorKind::domain, "birth_tail needs x >= x0");
  return hazard_prefactor(m, t) * tail_sum(m.rate(), x, 1).value;
}

TailPrediction birth_tail_prediction(const ExplosionModel& m, double t) {
  TailPrediction p;
  tail_shape(m.rate(), p);
  const double h = hazard_prefactor(m, t);
  p.constant = h;
  p.conditioning = "T>" + fmt12(t);
  RateFunction f = m.rate();
  const int64_t x0 = m.x0();
  p.value = [f, h, x0](double x) {
    const int64_t k = static_cast<int64_t>(std::floor(x));
    require(k >= x0, ErrorKind::domain, "x must be >= x0");
    return h * tail_sum(f, k, 1).value;
  };
  return p;
}

bool moment_exists(const RateFunction& f, double r) {
  require(r > 0.0, ErrorKind::domain, "moment order r must be > 0");
  require(f.is_explosive(), ErrorKind::domain, "moment_exists needs an explosive rate, got " + f.spec());
  const RateFunction& b = base_family(f);
  switch (b.family()) {
    case Family::polynomial: return b.beta() - r > 1.0;
    case Family::exponential: return true;
    case Family::polylog: return false;
    default: break;
  }
  fail(ErrorKind::domain, "moment_exists: unsupported rate " + f.spec());
}

double log_product_tail(const RateFunction& f, double c, int64_t x, double tol) {
  require(c > 0.0, ErrorKind::domain, "log product needs c > 0");
  require(f.is_explosive(), ErrorKind::domain, "log product needs an explosive rate");
  double sum = 0.0, comp = 0.0;
  auto add = [&](double v) {
    const double t = sum + v;
    comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  };
  int64_t k = x;
  int64_t K = x + 1000;
  for (;;) {
    for (; k < K; ++k) {
      const double y = c / f.evaluate(k + 1);
      require(y < 1.0, ErrorKind::domain, "F(k) must exceed " + fmt12(c) + " for k > " + std::to_string(x));
      add(std::log1p(-y));
    }
    const double mu = tail_sum(f, K, 1).value, nu = tail_sum(f, K, 2).value;
    const double y = c / f.evaluate(K + 1);
    const double err = c * c * nu * y / (3.0 * (1.0 - y));
    if (err <= tol || K > x + (int64_t{1} << 26)) {
      require(err <= 1e-10, ErrorKind::precision, "log product remainder did not converge");
      add(-c * mu);
      add(-0.5 * c * c * nu);
      return sum + comp;
    }
    K = x + 2 * (K - x);
  }
}

double quasi_limit_tail(const RateFunction& f, int64_t x0, int64_t x) {
  require(x0 >= 1 && x >= x0, ErrorKind::domain, "quasi_limit_tail needs x >= x0 >= 1");
  require(f.is_explosive(), ErrorKind::domain, "quasi-limit needs an explosive rate, got " + f.spec());
  require(f.strictly_increasing(), ErrorKind::domain, "quasi-limit needs a strictly monotone rate, got " + f.spec());
  return -std::expm1(log_product_tail(f, f.evaluate(x0), x));
}

// ---------------------------------------------------------------- quadrature

namespace {

struct Grid {
  std::vector<double> g, G;
};

using GridKey = std::tuple<std::string, int64_t, double, int64_t, int>;

std::shared_ptr<const Grid> agent_grid(const RateFunction& f, int64_t x0, double h, int64_t K, int N) {
  static std::mutex mu;
  static std::map<GridKey, std::shared_ptr<const Grid>> cache;
  const GridKey key{f.spec(), x0, h, K, N};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  ExplosionModel m(f, x0, N);
  std::vector<double> t(static_cast<size_t>(K + 1));
  for (int64_t k = 0; k <= K; ++k) t[static_cast<size_t>(k)] = static_cast<double>(k) * h;
  auto grid = std::make_shared<Grid>();
  m.series().density(t, grid->g);
  m.series().survival(t, grid->G);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 64) cache.clear();
  return cache.emplace(key, std::move(grid)).first->second;
}

struct Member {
  RateFunction f;
  int64_t x0;
  double mult;
};

// Law of S = min of the explosion times of `others` on the grid: trapezoid
// weights times the density of S.
struct MinLaw {
  double h = 0.0;
  int64_t K = 0;
  std::vector<double> w;  // h * trapezoid weight * f_S
};

double min_survival_at(const std::vector<Member>& others, double s, int N) {
  double lg = 0.0;
  for (const auto& o : others) {
    const double G = explosion_survival(ExplosionModel(o.f, o.x0, N), s);
    if (G <= 0.0) return 0.0;
    lg += o.mult * std::log(G);
  }
  return std::exp(lg);
}

int64_t grid_size(const std::vector<Member>& others, const QuadratureParams& q) {
  require(q.step > 0.0 && q.s_max > q.step, ErrorKind::domain, "quadrature needs 0 < step < s_max");
  double s_max = q.s_max;
  if (q.auto_extend) {
    while (min_survival_at(others, s_max, q.truncation_n) >= q.tail_mass) {
      require(s_max < 1e4, ErrorKind::range, "minimum explosion time has mass beyond s=1e4");
      s_max *= 2.0;
    }
  }
  const double K = std::round(s_max / q.step);
  require(K <= 2e8, ErrorKind::domain, "quadrature grid too large");
  return static_cast<int64_t>(K);
}

MinLaw min_law(const std::vector<Member>& others, int64_t K, const QuadratureParams& q) {
  require(!others.empty(), ErrorKind::domain, "minimum over an empty set of explosive agents");
  MinLaw L;
  L.h = q.step;
  L.K = K;
  const size_t n = static_cast<size_t>(K + 1);
  std::vector<double> lg(n, 0.0), hz(n, 0.0);
  for (const auto& o : others) {
    auto gr = agent_grid(o.f, o.x0, q.step, K, q.truncation_n);
    for (size_t k = 0; k < n; ++k) {
      const double G = gr->G[k];
      if (G <= 0.0) {
        lg[k] = -HUGE_VAL;
        continue;
      }
      lg[k] += o.mult * std::log(G);
      hz[k] += o.mult * gr->g[k] / G;
    }
  }
  L.w.resize(n);
  for (size_t k = 0; k < n; ++k) {
    const double tw = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    L.w[k] = std::isinf(lg[k]) ? 0.0 : q.step * tw * std::exp(lg[k]) * hz[k];
  }
  return L;
}

// E[phi(S)] by the weights of L
template <class Phi>
double expect(const MinLaw& L, Phi phi) {
  double s = 0.0, c = 0.0;
  for (size_t k = 0; k < L.w.size(); ++k) {
    if (L.w[k] == 0.0) continue;
    const double v = L.w[k] * phi(k);
    const double t = s + v;
    c += std::fabs(s) >= std::fabs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + c;
}

// explosive agents with index >= from, excluding `skip`, merged by group
std::vector<Member> explosive_members(const UrnSystem& sys, int64_t from, int64_t skip) {
  std::vector<Member> v;
  int64_t base = 0;
  for (const auto& g : sys.groups()) {
    const int64_t lo = std::max(base, from), hi = base + g.count;
    base = hi;
    if (lo >= hi || !g.f.is_explosive()) continue;
    double n = static_cast<double>(hi - lo);
    if (skip >= lo && skip < hi) n -= 1.0;
    if (n <= 0.0) continue;
    if (!v.empty() && v.back().f == g.f && v.back().x0 == g.x0)
      v.back().mult += n;
    else
      v.push_back({g.f, g.x0, n});
  }
  return v;
}

std::vector<Member> explosive_others(const UrnSystem& sys, int64_t from) { return explosive_members(sys, from, -1); }

// explosive agents other than i
std::vector<Member> explosive_except(const UrnSystem& sys, int64_t i) { return explosive_members(sys, 0, i); }

void check_agent(const UrnSystem& sys, int64_t i) {
  require(i >= 0 && i < sys.size(), ErrorKind::domain,
          "agent index " + std::to_string(i + 1) + " out of range 1.." + std::to_string(sys.size()));
}

// E[prod_i g_i(S)], E[(prod_{j != i} G_j(S)) g_i(S)] for each i, and P(all T_i > S)
struct JointMoments {
  double prod_g = 0.0;
  std::vector<double> mixed;
  double p_all = 0.0;
};

void check_losers(const UrnSystem& sys, int64_t a) {
  sys.validate();
  require(a >= 1 && a <= sys.size() - 1, ErrorKind::domain, "a must lie in [1, A-1]");
  for (int64_t i = 0; i < a; ++i)
    require(sys.agent(i).f.is_explosive(), ErrorKind::domain, agent_name(i) + " must be explosive");
  require(sys.explosive_count() >= a + 1, ErrorKind::domain,
          "at least a+1 = " + std::to_string(a + 1) + " agents must be explosive");
}

JointMoments joint_moments(const UrnSystem& sys, int64_t a, const QuadratureParams& q) {
  check_losers(sys, a);
  auto others = explosive_others(sys, a);
  const int64_t K = grid_size(others, q);
  MinLaw L = min_law(others, K, q);
  std::vector<std::shared_ptr<const Grid>> gr;
  for (int64_t i = 0; i < a; ++i) {
    Agent ag = sys.agent(i);
    gr.push_back(agent_grid(ag.f, ag.x0, q.step, K, q.truncation_n));
  }
  const size_t na = static_cast<size_t>(a);
  JointMoments m;
  m.prod_g = expect(L, [&](size_t k) {
    double p = 1.0;
    for (size_t i = 0; i < na; ++i) p *= gr[i]->g[k];
    return p;
  });
  m.p_all = expect(L, [&](size_t k) {
    double p = 1.0;
    for (size_t i = 0; i < na; ++i) p *= gr[i]->G[k];
    return p;
  });
  m.mixed.resize(na);
  for (size_t i = 0; i < na; ++i) {
    bool same = false;
    for (size_t j = 0; j < i && !same; ++j) {
      Agent ai = sys.agent(static_cast<int64_t>(i)), aj = sys.agent(static_cast<int64_t>(j));
      if (ai.f == aj.f && ai.x0 == aj.x0) {
        m.mixed[i] = m.mixed[j];
        same = true;
      }
    }
    if (same) continue;
    m.mixed[i] = expect(L, [&](size_t k) {
      double p = gr[i]->g[k];
      for (size_t j = 0; j < na; ++j)
        if (j != i) p *= gr[j]->G[k];
      return p;
    });
  }
  return m;
}

std::string losers_text(int64_t a) {
  return a == 1 ? "agent 1 loses" : "agents 1.." + std::to_string(a) + " lose";
}

}  // namespace

// ---------------------------------------------------------------- loser tails

TailPrediction loser_tail(const UrnSystem& sys, int64_t i, const QuadratureParams& q) {
  sys.validate();
  check_agent(sys, i);
  const Agent ai = sys.agent(i);
  require(ai.f.is_explosive(), ErrorKind::domain,
          agent_name(i) + " is not explosive; use sublinear_band for non-explosive losers");
  auto others = explosive_except(sys, i);
  require(!others.empty(), ErrorKind::domain, "loser_tail needs another explosive agent");
  const int64_t K = grid_size(others, q);
  MinLaw L = min_law(others, K, q);
  auto gr = agent_grid(ai.f, ai.x0, q.step, K, q.truncation_n);
  const double eg = expect(L, [&](size_t k) { return gr->g[k]; });
  const double pl = expect(L, [&](size_t k) { return gr->G[k]; });
  require(pl > 0.0 && eg > 0.0, ErrorKind::precision, "losing probability underflows");
  TailPrediction p;
  tail_shape(ai.f, p);
  const double c = eg / pl;
  p.constant = c;
  p.conditioning = agent_name(i) + " loses";
  RateFunction f = ai.f;
  const int64_t x0 = ai.x0;
  p.value = [f, c, x0](double x) {
    const int64_t k = static_cast<int64_t>(std::floor(x));
    require(k >= x0, ErrorKind::domain, "x must be >= x0");
    return c * tail_sum(f, k, 1).value;
  };
  p.mass = [f, c](double x) { return c / f.evaluate(static_cast<int64_t>(std::floor(x))); };
  return p;
}

double correlation_constant(const UrnSystem& sys, int64_t a, const QuadratureParams& q) {
  if (a == 1) {
    check_losers(sys, 1);
    return 1.0;
  }
  JointMoments m = joint_moments(sys, a, q);
  double c = m.prod_g;
  for (double d : m.mixed) {
    require(d > 0.0, ErrorKind::precision, "loser moment underflows");
    c /= d;
  }
  return c * std::pow(m.p_all, static_cast<double>(a - 1));
}

double correlation_constant_symmetric(const RateFunction& f, int64_t x0, int64_t agents, int64_t a,
                                      const QuadratureParams& q) {
  require(f.is_explosive(), ErrorKind::domain, "correlation constant needs an explosive rate");
  require(agents >= 2 && a >= 1 && a <= agents - 1, ErrorKind::domain, "a must lie in [1, A-1]");
  if (a == 1) return 1.0;
  const double A = static_cast<double>(agents), ad = static_cast<double>(a);
  std::vector<Member> s1{{f, x0, A - ad}}, s2{{f, x0, A - 1.0}};
  const int64_t K = std::max(grid_size(s1, q), grid_size(s2, q));
  auto gr = agent_grid(f, x0, q.step, K, q.truncation_n);
  MinLaw L1 = min_law(s1, K, q), L2 = min_law(s2, K, q);
  const double num = expect(L1, [&](size_t k) { return std::pow(gr->g[k], ad); });
  const double den = expect(L2, [&](size_t k) { return gr->g[k]; });
  // (A-1)^a / (A^{a-1} (A-a)) in logs
  const double lf = ad * std::log(A - 1.0) - (ad - 1.0) * std::log(A) - std::log(A - ad);
  return num / std::pow(den, ad) * std::exp(lf);
}

TailTarget parse_tail_target(const std::string& s) {
  if (s == "min") return TailTarget::min;
  if (s == "max") return TailTarget::max;
  if (s == "sum") return TailTarget::sum;
  fail(ErrorKind::parse, "target must be min, max or sum, got '" + s + "'");
}

const char* to_string(TailTarget t) {
  switch (t) {
    case TailTarget::min: return "min";
    case TailTarget::max: return "max";
    case TailTarget::sum: return "sum";
  }
  return "?";
}

TailPrediction tailcor_constants(const UrnSystem& sys, int64_t a, TailTarget target, const QuadratureParams& q) {
  sys.validate();
  require(a >= 1 && a <= sys.size() - 1, ErrorKind::domain, "a must lie in [1, A-1]");
  std::vector<RateFunction> fs;
  for (int64_t i = 0; i < a; ++i) {
    Agent ag = sys.agent(i);
    require(ag.f.is_explosive(), ErrorKind::domain, agent_name(i) + " must be explosive");
    if (target == TailTarget::sum && base_family(ag.f).family() == Family::exponential)
      fail(ErrorKind::regular_variation,
           "the sum target needs regularly varying feedback; " + agent_name(i) + " has " + ag.f.spec());
    fs.push_back(ag.f);
  }
  JointMoments m = joint_moments(sys, a, q);
  require(m.p_all > 0.0, ErrorKind::precision, "joint losing probability underflows");
  TailPrediction p;
  p.conditioning = losers_text(a);
  std::vector<TailPrediction> shapes(fs.size());
  for (size_t i = 0; i < fs.size(); ++i) tail_shape(fs[i], shapes[i]);
  if (target == TailTarget::min) {
    const double c = m.prod_g / m.p_all;
    p.constant = c;
    bool same_kind = true;
    double e = 0.0;
    for (const auto& s : shapes) {
      same_kind = same_kind && s.kind == shapes[0].kind;
      e += s.exponent;
    }
    p.kind = shapes[0].kind;
    p.exponent = same_kind ? e : NAN;
    p.value = [fs, c](double x) {
      double v = c;
      for (const auto& f : fs) v *= tail_sum(f, static_cast<int64_t>(std::floor(x)), 1).value;
      return v;
    };
  } else {
    std::vector<double> cs(fs.size());
    for (size_t i = 0; i < fs.size(); ++i) cs[i] = m.mixed[i] / m.p_all;
    // the heaviest tail dominates: log_power over power over exponential
    size_t lead = 0;
    auto heavier = [](const TailPrediction& u, const TailPrediction& v) {
      auto rank = [](TailKind k) { return k == TailKind::log_power ? 2 : k == TailKind::power ? 1 : 0; };
      if (rank(u.kind) != rank(v.kind)) return rank(u.kind) > rank(v.kind);
      return u.exponent > v.exponent;
    };
    for (size_t i = 1; i < shapes.size(); ++i)
      if (heavier(shapes[i], shapes[lead])) lead = i;
    p.kind = shapes[lead].kind;
    p.exponent = shapes[lead].exponent;
    double cl = 0.0;
    for (size_t i = 0; i < shapes.size(); ++i)
      if (shapes[i].kind == shapes[lead].kind && shapes[i].exponent == shapes[lead].exponent) cl += cs[i];
    p.constant = cl;
    p.value = [fs, cs](double x) {
      double v = 0.0;
      for (size_t i = 0; i < fs.size(); ++i) v += cs[i] * tail_sum(fs[i], static_cast<int64_t>(std::floor(x)), 1).value;
      return v;
    };
  }
  p.conditioning += std::string(", target=") + to_string(target);
  return p;
}

// ---------------------------------------------------------------- sub-linear losers

TailPrediction sublinear_band(const UrnSystem& sys, int64_t i) {
  sys.validate();
  check_agent(sys, i);
  const Agent ai = sys.agent(i);
  require(!ai.f.is_explosive(), ErrorKind::domain, agent_name(i) + " is explosive; use loser_tail");
  require(ai.f.diverges(), ErrorKind::domain,
          "the sub-linear band needs F_i(k) -> inf; " + agent_name(i) + " has " + ai.f.spec());
  double d = 0.0, C = 0.0;
  for (const auto& g : sys.groups()) {
    if (!g.f.is_explosive()) continue;
    require(g.f.strictly_increasing(), ErrorKind::domain,
            "explosive feedback " + g.f.spec() + " must be strictly monotone");
    const double f0 = g.f.evaluate(g.x0), n = static_cast<double>(g.count);
    d += n * f0;
    C -= n * log_product_tail(g.f, f0, g.x0);
  }
  TailPrediction p;
  p.kind = TailKind::band;
  p.conditioning = agent_name(i) + " loses";
  p.band_constant = C;
  const RateFunction& b = base_family(ai.f);
  if (b.family() == Family::polynomial && b.beta() == 1.0) p.exponent = -d / b.alpha();
  RateFunction f = ai.f;
  const int64_t x0 = ai.x0;
  p.upper = [f, x0, d](double x) {
    const int64_t k = static_cast<int64_t>(std::floor(x));
    if (k < x0) return 0.0;
    return d * head_sum(f, x0, k, 1).value;
  };
  p.lower = [f, x0, d, C](double x) {
    const int64_t k = static_cast<int64_t>(std::floor(x));
    if (k < x0) return 0.0;
    return d * head_sum(f, x0, k, 1).value - d * d * head_sum(f, x0, k, 2).value - C;
  };
  return p;
}

// ---------------------------------------------------------------- monopoly time

TailPrediction monopoly_tail(const UrnSystem& sys, int64_t winner, const MonTimeParams& mp) {
  sys.validate();
  check_agent(sys, winner);
  const Agent w = sys.agent(winner);
  require(w.f.is_explosive(), ErrorKind::domain, agent_name(winner) + " cannot win: its feedback is not explosive");
  auto fam = [](const RateFunction& f) {
    const Family k = f.family();
    require(k == Family::polynomial || k == Family::exponential, ErrorKind::unsupported,
            "monopoly time supports polynomial and exponential feedback only, got " + f.spec());
    return k;
  };
  const Family wf = fam(w.f);
  // weakest super-linear loser, and the sub-linear ones
  int64_t weak = -1;
  bool any_exp = false;
  std::vector<int64_t> sub;
  for (int64_t j = 0; j < sys.size(); ++j) {
    if (j == winner) continue;
    const Agent a = sys.agent(j);
    const Family k = fam(a.f);
    if (k == Family::exponential) {
      any_exp = true;
    } else if (a.f.beta() > 1.0) {
      if (weak < 0 || a.f.beta() < sys.agent(weak).f.beta()) weak = j;
    } else {
      sub.push_back(j);
    }
  }
  TailPrediction p;
  p.conditioning = agent_name(winner) + " wins";
  if (wf == Family::exponential) {
    require(weak >= 0 || !sub.empty(), ErrorKind::unsupported,
            "monopoly time for exponential winner and exponential losers is not covered");
    double bl = HUGE_VAL;
    for (int64_t j = 0; j < sys.size(); ++j)
      if (j != winner && sys.agent(j).f.family() == Family::polynomial) bl = std::min(bl, sys.agent(j).f.beta());
    p.kind = TailKind::power;
    p.mass_exponent = -bl;
    p.exponent = 1.0 - bl;
    p.flags.push_back("heuristic");
    return p;
  }
  const double b1 = w.f.beta();
  if (weak >= 0) {
    const double b2 = sys.agent(weak).f.beta();
    const double beta = (b1 - 1.0) / b2;
    const double me = b1 <= b2 + 1.0 ? beta - b1 : -b2;
    p.kind = TailKind::power;
    p.mass_exponent = me;
    p.exponent = me + 1.0;
    p.flags.push_back("assumes-condMonTime");
    return p;
  }
  if (any_exp) {
    p.kind = TailKind::log_power;
    p.log_factor = true;
    p.mass_exponent = -b1;
    p.exponent = 1.0 - b1;
    return p;
  }
  // only sub-linear losers: N_mon > n ~ sum_l E F_l(X_l(inf)) * sum_{k>=n} 1/F_w(k)
  for (int64_t j : sub) {
    const Agent a = sys.agent(j);
    if (a.f.beta() == 1.0 && !(static_cast<double>(w.x0) > b1))
      fail(ErrorKind::assumption, "linear loser needs the winner's initial count x0 > beta = " + fmt12(b1));
  }
  require(mp.seeded, ErrorKind::domain, "the sub-linear monopoly case is estimated by simulation and needs a seed");
  auto draws = run_batch(mp.replicates, mp.seed, mp.workers, [&](RngStream s) {
    EmbedParams ep;
    ep.count_nmon = false;
    UrnOutcome o = simulate_urn_embedded(sys, s, ep);
    double v = 0.0;
    for (int64_t j : sub) v += sys.agent(j).f.evaluate(o.x_inf[static_cast<size_t>(j)]);
    return v;
  });
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= static_cast<double>(draws.size());
  p.kind = TailKind::power;
  p.exponent = 1.0 - b1;
  p.mass_exponent = -b1;
  p.constant = mean;
  p.flags.push_back("estimated");
  RateFunction f = w.f;
  p.value = [f, mean](double n) {
    const int64_t k = static_cast<int64_t>(std::floor(n));
    return mean * tail_sum(f, std::max<int64_t>(k - 1, 0), 1).value;
  };
  return p;
}

const char* to_string(ShareRegime r) {
  switch (r) {
    case ShareRegime::loser_share_vanishes: return "loser_share_vanishes";
    case ShareRegime::intermediate: return "intermediate";
    case ShareRegime::loser_share_dominates: return "loser_share_dominates";
  }
  return "?";
}

ShareRegime share_regime(const UrnSystem& sys, int64_t winner) {
  require(sys.size() == 2, ErrorKind::unsupported, "share regimes are defined for two agents");
  check_agent(sys, winner);
  const Agent w = sys.agent(winner), l = sys.agent(1 - winner);
  for (const Agent* a : {&w, &l})
    require(a->f.family() == Family::polynomial && a->f.beta() > 1.0, ErrorKind::unsupported,
            "share regimes need polynomial feedback with beta > 1, got " + a->f.spec());
  const double b1 = w.f.beta(), b2 = l.f.beta();
  if (b1 < b2 + 1.0) return ShareRegime::loser_share_vanishes;
  if (b1 == b2 + 1.0) return ShareRegime::intermediate;
  return ShareRegime::loser_share_dominates;
}

}  // namespace birthtail
