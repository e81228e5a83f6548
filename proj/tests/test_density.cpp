#include <cmath>
#include <numbers>
#include <vector>

#include "birthtail/density.hpp"
#include "birthtail/sim.hpp"
#include "doctest.h"

using namespace birthtail;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

constexpr int kTerms = 200;

// sampled T(N) with exactly the summands of ExplosionModel(f, 1, kTerms)
std::vector<double> explosion_samples(const RateFunction& f, int64_t n, uint64_t seed) {
  const double eps = tail_sum(f, kTerms, 1).value * (1 + 1e-9);
  REQUIRE(truncation_state(f, 1, eps) == kTerms);
  return run_batch(n, seed, 0, [&](RngStream s) { return sample_explosion_time(f, 1, eps, s).t_hat; });
}

}  // namespace

TEST_CASE("hypoexponential density closed forms") {
  CHECK(hypoexp_density({{2}}, 0.5) == doctest::Approx(2 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(hypoexp_density({{1, 2}}, 1) == doctest::Approx(2 * (std::exp(-1.0) - std::exp(-2.0))).epsilon(1e-14));
  CHECK(hypoexp_density({{1, 2}}, 1) == doctest::Approx(0.46509).epsilon(1e-4));
  // three rates: sum_k c_k lam_k e^{-lam_k t}
  const double t = 0.8;
  const double expect = 1 * 2 * 3 * (std::exp(-t) / 2 - std::exp(-2 * t) + std::exp(-3 * t) / 2);
  CHECK(hypoexp_density({{3, 1, 2}}, t) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(kind_of([] { hypoexp_density({{1, 1}}, 1); }) == ErrorKind::distinctness);
  CHECK(kind_of([] { hypoexp_density({{1, 1 + 1e-12}}, 1); }) == ErrorKind::distinctness);
  CHECK(kind_of([] { hypoexp_density({{1, -2}}, 1); }) == ErrorKind::domain);
  CHECK(kind_of([] { hypoexp_density({{1, 2}}, -1); }) == ErrorKind::domain);
}

TEST_CASE("perturb_rates makes rates distinct") {
  auto r = perturb_rates({1, 1, 1}, 1e-6);
  CHECK_NOTHROW(hypoexp_density({r}, 1.0));
  CHECK(r[0] != r[1]);
}

TEST_CASE("hypoexponential mass and survival") {
  std::vector<double> rates;
  for (int k = 1; k <= 50; ++k) rates.push_back(0.5 * k);
  HypoExpSeries h(rates);
  CHECK(h.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(h.survival(0).value == 1.0);
  // survival of two rates: (l2 e^{-l1 t} - l1 e^{-l2 t}) / (l2 - l1)
  HypoExpSeries two({1, 3});
  CHECK(two.survival(0.7).value == doctest::Approx((3 * std::exp(-0.7) - std::exp(-2.1)) / 2).epsilon(1e-14));
  // grid and pointwise agree
  std::vector<double> t{0, 0.1, 1, 5, 40}, d, s;
  h.density(t, d);
  h.survival(t, s);
  for (size_t j = 0; j < t.size(); ++j) {
    CHECK(d[j] == doctest::Approx(h.density(t[j]).value).epsilon(1e-12));
    CHECK(s[j] == doctest::Approx(h.survival(t[j]).value).epsilon(1e-12));
  }
}

TEST_CASE("ill-conditioned sums escalate instead of returning garbage") {
  // 100 rates k^2: the alternating series cancels catastrophically at small t
  ExplosionModel m(RateFunction::polynomial(1, 2), 1, 100);
  auto e = explosion_density_eval(m, 0.05);
  CHECK(e.route != Route::dbl);
  CHECK(e.value >= 0.0);
  CHECK(e.rel_error < 1e-6);
  // independent check by uniformization is the fallback; compare with quad at a moderate t
  auto f1 = explosion_density_eval(m, 1.0);
  CHECK(f1.rel_error < 1e-8);
}

TEST_CASE("explosion model basics") {
  ExplosionModel m(RateFunction::polynomial(1, 2), 1);
  CHECK(m.truncation_n() == 100);
  CHECK(m.terms() == 100);
  CHECK(m.bias_bound() == doctest::Approx(tail_sum(RateFunction::polynomial(1, 2), 100, 1).value));
  CHECK(explosion_density(m, 0) == 0.0);
  CHECK(explosion_survival(m, 0) == 1.0);
  CHECK(kind_of([] { ExplosionModel(RateFunction::constant(1), 1); }) == ErrorKind::domain);

  std::vector<double> t;
  for (int j = 0; j <= 600; ++j) t.push_back(0.01 * j);
  auto g = density_grid(m, t, GridKind::density);
  auto s = density_grid(m, t, GridKind::survival);
  int sign_changes = 0;
  for (size_t j = 1; j < t.size(); ++j) {
    CHECK(g.values[j] >= 0.0);
    CHECK(s.values[j] <= s.values[j - 1]);
    if (j >= 2 && (g.values[j] - g.values[j - 1]) * (g.values[j - 1] - g.values[j - 2]) < 0) ++sign_changes;
  }
  CHECK(sign_changes == 1);
  CHECK(to_csv(g).rfind("t,value,kind\n0,0,density\n", 0) == 0);
}

TEST_CASE("explosion law matches sampled explosion times") {
  const auto f = RateFunction::polynomial(1, 2);
  ExplosionModel m(f, 1, kTerms);
  auto T = explosion_samples(f, 200000, 42);
  const double n = static_cast<double>(T.size());
  double below = 0, in_bin = 0, mean = 0;
  const double h = 0.05;
  for (double x : T) {
    below += x <= 1.0;
    in_bin += std::fabs(x - 1.0) <= h;
    mean += x;
  }
  const double p = below / n;
  CHECK(std::fabs(p - (1 - explosion_survival(m, 1.0))) < 3 * std::sqrt(p * (1 - p) / n));
  // histogram density at t=1 (the density is smooth, bin bias is O(h^2 g''))
  const double q = in_bin / n;
  const double gh = q / (2 * h);
  CHECK(std::fabs(gh - explosion_density(m, 1.0)) < 3 * std::sqrt(q * (1 - q) / n) / (2 * h) + 0.005);
  CHECK(mean / n == doctest::Approx(std::numbers::pi * std::numbers::pi / 6 - m.bias_bound()).epsilon(0.01));
  // paper's Figure 1 count at t=1
  CHECK(std::fabs(explosion_survival(m, 1.0) - 0.689) < 0.015);
  CHECK(std::fabs(explosion_survival(ExplosionModel(RateFunction::exponential(1), 1), 3.0) - 0.103) < 0.015);
}

TEST_CASE("hazard prefactor") {
  for (const char* s : {"poly:alpha=1,beta=2", "exp:beta=1", "polylog:beta=2"}) {
    ExplosionModel m(parse_rate(s), 1);
    CAPTURE(s);
    CHECK(std::fabs(hazard_prefactor(m, 50) - 1.0) < 0.01);
  }
  ExplosionModel m(RateFunction::polynomial(1, 2), 1);
  CHECK(hazard_prefactor(m, 1e-3) < 0.01);
  CHECK(hazard_prefactor(m, 1.0) ==
        doctest::Approx(explosion_density(m, 1.0) / explosion_survival(m, 1.0)).epsilon(1e-12));
  ExplosionModel m3(RateFunction::polynomial(1, 2), 3);
  CHECK(std::fabs(hazard_prefactor(m3, 50) / 9.0 - 1.0) < 0.01);
  CHECK_THROWS_AS(hazard_prefactor(m, 0.0), Error);
}

TEST_CASE("feller mass") {
  const auto lin = RateFunction::polynomial(1, 1);
  CHECK(feller_mass(lin, 1, 3, 1.0) == doctest::Approx(std::exp(-1.0) * std::pow(1 - std::exp(-1.0), 2)).epsilon(1e-12));
  CHECK(feller_mass(lin, 1, 3, 1.0) == doctest::Approx(0.14699).epsilon(1e-4));
  for (int x = 1; x <= 30; ++x)
    CHECK(feller_mass(lin, 1, x, 0.7) ==
          doctest::Approx(std::exp(-0.7) * std::pow(1 - std::exp(-0.7), x - 1)).epsilon(1e-10));
  const auto sq = RateFunction::polynomial(1, 2);
  CHECK(feller_mass(sq, 2, 2, 0.3) == doctest::Approx(std::exp(-4 * 0.3)).epsilon(1e-14));

  // non-explosive: masses sum to 1
  const auto c = RateFunction::constant(2);
  double total = 0;
  for (int x = 1; x <= 60; ++x) total += feller_mass(c, 1, x, 3.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  // Poisson for constant rates
  CHECK(feller_mass(c, 1, 4, 3.0) == doctest::Approx(std::exp(-6.0) * 216 / 6).epsilon(1e-12));

  // explosive: P(Xi(t) <= 80) is the survival of the first 80 sojourns
  double s = 0;
  for (int x = 1; x <= 80; ++x) s += feller_mass(sq, 1, x, 1.0);
  CHECK(s == doctest::Approx(explosion_survival(ExplosionModel(sq, 1, 80), 1.0)).epsilon(1e-9));
  ExplosionModel m(sq, 1);

  // large x: P(Xi(t) = x) F(x) -> g(t)
  const double r = feller_mass(sq, 1, 20, 1.0) * 400 / explosion_density(m, 1.0);
  CHECK(std::fabs(r - 1) < 0.1);
}

TEST_CASE("mgf bounds") {
  auto b = mgf_bounds({1}, 1);
  CHECK(b.lower == doctest::Approx(std::exp(-1.0)));
  CHECK(b.exact == doctest::Approx(0.5));
  CHECK(b.upper == doctest::Approx(1.0));
  auto c = mgf_bounds({1, 2}, 0.5);
  CHECK(c.exact == doctest::Approx((1 / 1.5) * (2 / 2.5)));
  CHECK(c.lower <= c.exact);
  CHECK(c.exact <= c.upper);
  for (auto& rates : std::vector<std::vector<double>>{{1}, {1, 4, 9}, {0.5, 100}}) {
    auto z = mgf_bounds(rates, 1e-8);
    CHECK(std::fabs(z.lower - 1) < 1e-7);
    CHECK(std::fabs(z.exact - 1) < 1e-7);
    CHECK(std::fabs(z.upper - 1) < 1e-7);
  }
  CHECK_THROWS_AS(mgf_bounds({1}, 0), Error);
}

TEST_CASE("min of explosion times") {
  const auto f = RateFunction::polynomial(1, 2);
  ExplosionModel m(f, 1, kTerms);
  auto one = min_explosion({m}, 0.8);
  CHECK(one.first == doctest::Approx(explosion_density(m, 0.8)));
  CHECK(one.second == doctest::Approx(explosion_survival(m, 0.8)));
  auto two = min_explosion({m, m}, 0.8);
  const double G = explosion_survival(m, 0.8);
  CHECK(two.second == doctest::Approx(G * G));
  CHECK(two.first == doctest::Approx(2 * explosion_density(m, 0.8) * G));

  auto a = explosion_samples(f, 100000, 7);
  auto b = explosion_samples(f, 100000, 8);
  double above = 0;
  for (size_t i = 0; i < a.size(); ++i) above += std::min(a[i], b[i]) > 0.8;
  const double p = above / static_cast<double>(a.size());
  CHECK(std::fabs(p - two.second) < 3 * std::sqrt(p * (1 - p) / static_cast<double>(a.size())));
}
