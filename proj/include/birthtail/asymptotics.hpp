#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "birthtail/density.hpp"
#include "birthtail/rates.hpp"
#include "birthtail/system.hpp"

namespace birthtail {

enum class TailKind { power, exponential, log_power, stretched, band };
const char* to_string(TailKind k);

// A predicted tail. For point predictions value(x) = constant * (tail sums at x)
// and `exponent` is the leading-order rate: x^e (power), e^{e x} (exponential),
// (log x)^e (log_power). Monopoly-time predictions of the form n^e log n use
// log_power with `log_factor` set. Band predictions bound -log P(X > x).
struct TailPrediction {
  TailKind kind = TailKind::power;
  double exponent = NAN;  // NaN when not a single number
  std::optional<double> constant;
  std::string conditioning;
  std::vector<std::string> flags;
  bool log_factor = false;
  std::optional<double> mass_exponent;  // monopoly time: exponent of P(N = n)
  std::function<double(double)> value;  // point prediction, may be empty
  std::function<double(double)> mass;   // predicted P(X = x) where known
  std::function<double(double)> lower, upper;  // band only
  double band_constant = NAN;                  // C of the band

  bool has_flag(const std::string& f) const;
};

// one JSON object, no trailing newline
std::string to_json(const TailPrediction& p);

struct QuadratureParams {
  double step = 1e-4;
  double s_max = 50.0;
  bool auto_extend = true;   // double s_max until the mass of S beyond it is < tail_mass
  double tail_mass = 1e-8;
  int truncation_n = 100;    // summands of each explosion time
};

// P(Xi(t) > x | T > t) ~ hazard(t) * sum_{k>x} 1/F(k)
double birth_tail(const ExplosionModel& m, double t, int64_t x);
TailPrediction birth_tail_prediction(const ExplosionModel& m, double t);

bool moment_exists(const RateFunction& f, double r);

// lim_{t->inf} P(Xi(t) > x | T > t) = 1 - prod_{k>x} (1 - F(x0)/F(k))
double quasi_limit_tail(const RateFunction& f, int64_t x0, int64_t x);

// sum_{k>x} log(1 - c/F(k)) for 0 < c < F(k), k > x, with remainder bound <= tol
double log_product_tail(const RateFunction& f, double c, int64_t x, double tol = 1e-13);

// loser wealth of explosive agent i (0-based) conditioned on agent i losing
TailPrediction loser_tail(const UrnSystem& sys, int64_t i, const QuadratureParams& q = {});

// c(A, a) for agents 0..a-1 against the rest
double correlation_constant(const UrnSystem& sys, int64_t a, const QuadratureParams& q = {});
// symmetric closed form; used as a cross-check of the general route
double correlation_constant_symmetric(const RateFunction& f, int64_t x0, int64_t agents, int64_t a,
                                      const QuadratureParams& q = {});

enum class TailTarget { min, max, sum };
TailTarget parse_tail_target(const std::string& s);
const char* to_string(TailTarget t);
TailPrediction tailcor_constants(const UrnSystem& sys, int64_t a, TailTarget target, const QuadratureParams& q = {});

// band for -log P(X_i(inf) > x) of a non-explosive agent i
TailPrediction sublinear_band(const UrnSystem& sys, int64_t i);

struct MonTimeParams {
  int64_t replicates = 100000;  // Monte Carlo size for the sub-linear case
  uint64_t seed = 0;
  bool seeded = false;          // the sub-linear case needs an explicit seed
  int workers = 0;
};

// P(N_mon > n) for the system conditioned on `winner` (0-based) winning
TailPrediction monopoly_tail(const UrnSystem& sys, int64_t winner, const MonTimeParams& p = {});

enum class ShareRegime { loser_share_vanishes, intermediate, loser_share_dominates };
const char* to_string(ShareRegime r);
ShareRegime share_regime(const UrnSystem& sys, int64_t winner);

}  // namespace birthtail
