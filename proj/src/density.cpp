#include "birthtail/density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace birthtail {

ExplosionModel::ExplosionModel(RateFunction f, int64_t x0, int truncation_n)
    : f_(std::move(f)), x0_(x0), n_(truncation_n) {
  require(x0_ >= 1, ErrorKind::domain, "x0 must be >= 1");
  require(n_ >= 1, ErrorKind::domain, "truncation N must be >= 1");
  require(f_.is_explosive(), ErrorKind::domain, "explosion model needs an explosive rate, got " + f_.spec());
  std::vector<double> rates;
  rates.reserve(static_cast<size_t>(n_));
  int64_t k = x0_;
  for (; k < x0_ + n_; ++k) {
    double r = f_.evaluate(k);
    // beyond this the remaining sojourns are numerically zero
    if (!(r < 1e300)) break;
    rates.push_back(r);
  }
  require(!rates.empty(), ErrorKind::domain, "rate at x0 is not finite");
  bias_ = tail_sum(f_, k - 1, 1).value;
  series_ = std::make_shared<const HypoExpSeries>(std::move(rates));
}

const char* to_string(GridKind k) {
  switch (k) {
    case GridKind::density: return "density";
    case GridKind::survival: return "survival";
    case GridKind::hazard: return "hazard";
  }
  return "?";
}

double hypoexp_density(const HypoExpSpec& spec, double t) { return HypoExpSeries(spec.rates).density(t).value; }

Eval explosion_density_eval(const ExplosionModel& m, double t) { return m.series().density(t); }

double explosion_density(const ExplosionModel& m, double t) { return m.series().density(t).value; }

double explosion_survival(const ExplosionModel& m, double t) { return m.series().survival(t).value; }

double hazard_prefactor(const ExplosionModel& m, double t) {
  require(t > 0.0, ErrorKind::domain, "hazard prefactor needs t > 0");
  const double g = m.series().density(t).value;
  const double s = m.series().survival(t).value;
  require(s > 0.0, ErrorKind::precision, "survival underflows at t=" + fmt12(t));
  return g / s;
}

DensityGrid density_grid(const ExplosionModel& m, const std::vector<double>& t, GridKind kind) {
  require(std::is_sorted(t.begin(), t.end()), ErrorKind::domain, "grid t values must be increasing");
  DensityGrid g;
  g.t_values = t;
  g.kind = kind;
  if (kind == GridKind::density) {
    m.series().density(t, g.values);
  } else if (kind == GridKind::survival) {
    m.series().survival(t, g.values);
    // monotone by construction up to rounding
    for (size_t i = 1; i < g.values.size(); ++i) g.values[i] = std::min(g.values[i], g.values[i - 1]);
  } else {
    for (double x : t) require(x > 0.0, ErrorKind::domain, "hazard grid needs t > 0");
    std::vector<double> s;
    m.series().density(t, g.values);
    m.series().survival(t, s);
    for (size_t i = 0; i < t.size(); ++i) {
      require(s[i] > 0.0, ErrorKind::precision, "survival underflows at t=" + fmt12(t[i]));
      g.values[i] /= s[i];
    }
  }
  return g;
}

std::string to_csv(const DensityGrid& g) {
  std::ostringstream os;
  os << "t,value,kind\n";
  for (size_t i = 0; i < g.t_values.size(); ++i)
    os << fmt12(g.t_values[i]) << ',' << fmt12(g.values[i]) << ',' << to_string(g.kind) << '\n';
  return os.str();
}

double feller_mass(const RateFunction& f, int64_t x0, int64_t x, double t) {
  require(x0 >= 1 && x >= x0, ErrorKind::domain, "feller_mass needs x >= x0 >= 1");
  require(t >= 0.0, ErrorKind::domain, "t must be >= 0");
  if (t == 0.0) return x == x0 ? 1.0 : 0.0;
  if (f.family() == Family::constant) {
    // equal rates: Poisson number of jumps
    const double lt = f.lambda() * t, n = static_cast<double>(x - x0);
    return std::exp(-lt + n * std::log(lt) - std::lgamma(n + 1.0));
  }
  std::vector<double> rates;
  rates.reserve(static_cast<size_t>(x - x0 + 1));
  for (int64_t k = x0; k <= x; ++k) rates.push_back(f.evaluate(k));
  const double fx = rates.back();
  HypoExpSeries s(std::move(rates));
  return std::clamp(s.density(t).value / fx, 0.0, 1.0);
}

MgfBounds mgf_bounds(const std::vector<double>& rates, double s) {
  require(s > 0.0, ErrorKind::domain, "mgf bounds need s > 0");
  require(!rates.empty(), ErrorKind::domain, "mgf bounds need rates");
  double s1 = 0.0, s2 = 0.0, log_exact = 0.0;
  for (double r : rates) {
    require(r > 0.0, ErrorKind::domain, "rates must be positive");
    s1 += 1.0 / r;
    s2 += 1.0 / (r * r);
    log_exact -= std::log1p(s / r);
  }
  return {std::exp(-s * s1), std::exp(log_exact), std::exp(-s * s1 + s * s * s2)};
}

std::pair<double, double> min_explosion(const std::vector<ExplosionModel>& models, double s) {
  require(!models.empty(), ErrorKind::domain, "min_explosion needs at least one model");
  std::vector<double> g(models.size()), G(models.size());
  for (size_t j = 0; j < models.size(); ++j) {
    g[j] = explosion_density(models[j], s);
    G[j] = explosion_survival(models[j], s);
  }
  double surv = 1.0, dens = 0.0;
  for (size_t j = 0; j < models.size(); ++j) {
    surv *= G[j];
    double term = g[j];
    for (size_t k = 0; k < models.size(); ++k)
      if (k != j) term *= G[k];
    dens += term;
  }
  return {dens, surv};
}

std::vector<double> perturb_rates(std::vector<double> rates, double eps) {
  require(eps > 0.0, ErrorKind::domain, "perturbation eps must be positive");
  for (size_t k = 0; k < rates.size(); ++k) rates[k] *= 1.0 + eps * static_cast<double>(k);
  return rates;
}

}  // namespace birthtail
