#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "birthtail/rates.hpp"

namespace birthtail {

struct HypoExpSpec {
  std::vector<double> rates;
};

// How a value was obtained. Ill-conditioned alternating sums escalate from
// double to quad precision to the all-positive uniformization series.
enum class Route { closed_form, dbl, quad, uniformization, quad_relaxed };

const char* to_string(Route r);

struct Eval {
  double value = 0.0;
  int terms = 0;
  Route route = Route::closed_form;
  double cond = 1.0;       // max |term| / |result|
  double rel_error = 0.0;  // estimated relative rounding error
};

// Law of a sum of independent exponentials with pairwise distinct rates,
// evaluated through the explicit alternating series.
class HypoExpSeries {
public:
  explicit HypoExpSeries(std::vector<double> rates);

  size_t size() const { return rates_.size(); }
  const std::vector<double>& rates() const { return rates_; }

  Eval density(double t) const;
  Eval survival(double t) const;
  // closed-form integral of the density over [0, inf) (should be 1)
  double total_mass() const;

  // grid versions: SIMD double pass, per-point escalation where needed
  void density(const std::vector<double>& t, std::vector<double>& out, std::vector<Route>* routes = nullptr) const;
  void survival(const std::vector<double>& t, std::vector<double>& out, std::vector<Route>* routes = nullptr) const;

private:
  struct Coeffs;
  Eval eval(double t, bool surv) const;
  void eval_grid(const std::vector<double>& t, bool surv, std::vector<double>& out, std::vector<Route>* routes) const;
  Eval eval_quad(double t, bool surv) const;
  bool uniformization_feasible(double t) const;
  Eval eval_uniformization(double t, bool surv) const;

  std::vector<double> rates_;
  std::shared_ptr<const Coeffs> c_;
};

class ExplosionModel {
public:
  ExplosionModel(RateFunction f, int64_t x0, int truncation_n = 100);

  const RateFunction& rate() const { return f_; }
  int64_t x0() const { return x0_; }
  int truncation_n() const { return n_; }
  int terms() const { return static_cast<int>(series_->size()); }
  // E[T - T(N)], the mean of the truncated remainder
  double bias_bound() const { return bias_; }
  const HypoExpSeries& series() const { return *series_; }

private:
  RateFunction f_;
  int64_t x0_;
  int n_;
  double bias_;
  std::shared_ptr<const HypoExpSeries> series_;
};

enum class GridKind { density, survival, hazard };
const char* to_string(GridKind k);

struct DensityGrid {
  std::vector<double> t_values;
  std::vector<double> values;
  GridKind kind = GridKind::density;
};

double hypoexp_density(const HypoExpSpec& spec, double t);
Eval explosion_density_eval(const ExplosionModel& m, double t);
double explosion_density(const ExplosionModel& m, double t);
double explosion_survival(const ExplosionModel& m, double t);
double hazard_prefactor(const ExplosionModel& m, double t);
DensityGrid density_grid(const ExplosionModel& m, const std::vector<double>& t, GridKind kind);
std::string to_csv(const DensityGrid& g);

// P(Xi(t) = x) for the birth process started at x0
double feller_mass(const RateFunction& f, int64_t x0, int64_t x, double t);

struct MgfBounds {
  double lower, exact, upper;
};
MgfBounds mgf_bounds(const std::vector<double>& rates, double s);

// law of S = min_j T_j for independent explosion times
std::pair<double, double> min_explosion(const std::vector<ExplosionModel>& models, double s);

// perturb rates so they are pairwise distinct: r_k *= (1 + eps k)
std::vector<double> perturb_rates(std::vector<double> rates, double eps);

}  // namespace birthtail
