#include <cmath>
#include <random>
#include <vector>

#include "birthtail/analytics.hpp"
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

// deterministic sample with survival exactly i/N at the quantile points
std::vector<double> quantile_sample(int n, auto&& inv_survival) {
  std::vector<double> v;
  for (int i = 1; i <= n; ++i) v.push_back(inv_survival(static_cast<double>(i) / n));
  return v;
}

}  // namespace

TEST_CASE("empirical survival") {
  auto s = empirical_survival({1, 2, 2, 5});
  CHECK(s.at(2) == 0.25);
  CHECK(s.at(0.5) == 1.0);
  CHECK(s.at(1) == 0.75);
  CHECK(s.at(7) == 0.0);
  CHECK(s.support == std::vector<double>{1, 2, 5});
  auto c = empirical_survival({3, 3, 3});
  CHECK(c.at(2.9) == 1.0);
  CHECK(c.at(3) == 0.0);
  CHECK(kind_of([] { empirical_survival({1.0, 2.0}, {false, false}, "x>5"); }) == ErrorKind::empty_sample);
  auto k = empirical_survival({1, 2, 3, 4}, {true, false, true, false}, "odd");
  CHECK(k.n == 2);
  CHECK(k.conditioning == "odd");
  CHECK(to_csv(k) == "value,survival,n,conditioning\n1,0.5,2,odd\n3,0,2,odd\n");
}

TEST_CASE("merged samples give the mixture of survivals") {
  std::mt19937_64 g(3);
  std::geometric_distribution<int> d1(0.2), d2(0.05);
  std::vector<double> a, b, ab;
  for (int i = 0; i < 300; ++i) a.push_back(d1(g));
  for (int i = 0; i < 700; ++i) b.push_back(d2(g));
  ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  auto sa = empirical_survival(a), sb = empirical_survival(b), sm = empirical_survival(ab);
  for (double x = 0; x < 120; x += 1) {
    // counts are integers, so the identity holds exactly on counts
    const double lhs = sm.at(x) * 1000, rhs = sa.at(x) * 300 + sb.at(x) * 700;
    CHECK(std::llround(lhs) == std::llround(rhs));
  }
}

TEST_CASE("slope fits recover exact synthetic tails") {
  auto pw = empirical_survival(quantile_sample(100000, [](double s) { return std::pow(s, -0.5); }));
  auto f = fit_power_tail(pw);
  CHECK(f.slope == doctest::Approx(-2.0).epsilon(0.005));
  CHECK(f.points >= 10);
  CHECK(f.stderr_ >= 0.0);

  auto ex = empirical_survival(quantile_sample(100000, [](double s) { return -std::log(s); }));
  CHECK(fit_power_tail(ex, Transform::loglinear).slope == doctest::Approx(-1.0).epsilon(0.01));

  // log-power tail (log x)^{-1}
  auto lp = empirical_survival(quantile_sample(100000, [](double s) { return std::exp(1.0 / s); }));
  CHECK(fit_power_tail(lp, Transform::logloglog, 0.5, 0.95).slope == doctest::Approx(-1.0).epsilon(0.01));

  // scale equivariance of the loglog slope
  auto sample = quantile_sample(5000, [](double s) { return std::pow(s, -1.0 / 3) + 0.3 * s; });
  auto scaled = sample;
  for (double& v : scaled) v *= 7.5;
  CHECK(fit_power_tail(empirical_survival(sample)).slope ==
        doctest::Approx(fit_power_tail(empirical_survival(scaled)).slope).epsilon(1e-10));

  auto range = fit_power_tail_range(pw, Transform::loglog, 2, 50);
  CHECK(range.slope == doctest::Approx(-2.0).epsilon(0.005));

  CHECK(kind_of([] { fit_power_tail(empirical_survival({1, 2, 3, 4, 5})); }) == ErrorKind::insufficient_data);
  CHECK(parse_transform("loglinear") == Transform::loglinear);
  CHECK(kind_of([] { parse_transform("linear"); }) == ErrorKind::parse);
}

TEST_CASE("simulated loser wealth has the predicted exponent") {
  auto sym = UrnSystem::symmetric(RateFunction::polynomial(1, 2), 1, 2);
  EmbedParams ep;
  ep.count_nmon = false;
  auto x = run_batch(100000, 77, 0, [&](RngStream s) {
    auto o = simulate_urn_embedded(sym, s, ep);
    return static_cast<double>(o.x_inf[static_cast<size_t>(1 - o.winner)]);
  });
  CHECK(fit_power_tail(empirical_survival(x)).slope == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("Hill estimator") {
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v;
  for (int i = 0; i < 100000; ++i) v.push_back(std::pow(1 - u(g), -1.0 / 1.5));
  CHECK(hill(v, 5000) == doctest::Approx(1.5).epsilon(0.05));
  CHECK(kind_of([&] { hill(v, 0); }) == ErrorKind::insufficient_data);
}

TEST_CASE("prediction comparison") {
  auto pw = empirical_survival(quantile_sample(10000, [](double s) { return std::pow(s, -0.5); }));
  auto same = compare_prediction(pw, [&](double x) { return pw.at(x); }, 1, 50, 0.99, 1.01);
  CHECK(same.pass);
  for (double r : same.ratio) CHECK(r == 1.0);
  auto twice = compare_prediction(pw, [&](double x) { return 2 * pw.at(x); }, 1, 50, 0.8, 1.25);
  CHECK_FALSE(twice.pass);
  CHECK(twice.min_ratio == 0.5);
  CHECK(twice.max_ratio == 0.5);
  // verdicts are monotone in the tolerance
  auto near = [&](double x) { return 1.1 * std::pow(x, -2.0); };
  bool prev = false;
  for (double tol : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    bool p = compare_prediction(pw, near, 2, 40, 1 - tol, 1 + tol).pass;
    CHECK((!prev || p));
    prev = p;
  }
  CHECK(prev);
  CHECK(kind_of([&] { compare_prediction(pw, near, 1e6, 1e7, 0.5, 2); }) == ErrorKind::range);
}

TEST_CASE("log correlation") {
  std::vector<std::pair<double, double>> same, indep;
  std::mt19937_64 g(4);
  std::uniform_int_distribution<int> d(1, 1000);
  for (int i = 0; i < 5000; ++i) {
    const double a = d(g);
    same.emplace_back(a, a);
    indep.emplace_back(d(g), d(g));
  }
  CHECK(pearson_log_corr(same).r == 1.0);
  auto c = pearson_log_corr(indep);
  CHECK(c.n == 5000);
  CHECK(std::fabs(c.r) < 4 / std::sqrt(5000.0));
  // the 95% interval covers r = 0 for about 95% of independent samples
  int covered = 0;
  for (int rep = 0; rep < 400; ++rep) {
    std::vector<std::pair<double, double>> v;
    for (int i = 0; i < 500; ++i) v.emplace_back(d(g), d(g));
    auto r = pearson_log_corr(v);
    covered += r.ci_lo < 0.0 && r.ci_hi > 0.0;
  }
  CHECK(covered >= 368);
  CHECK(covered <= 393);
  CHECK(kind_of([] { pearson_log_corr({{1, 2}, {1, 3}, {1, 4}, {1, 5}}); }) == ErrorKind::degenerate);
  CHECK(kind_of([] { pearson_log_corr({{1, 2}, {0, 3}, {2, 4}}); }) == ErrorKind::domain);
}

TEST_CASE("Kolmogorov-Smirnov") {
  CHECK(ks_exponential(std::vector<double>(100, 1.0)) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-14));
  std::mt19937_64 g(11);
  std::exponential_distribution<double> e(1.0);
  int ok = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) v.push_back(e(g));
    ok += ks_exponential(v) < 0.05;
  }
  CHECK(ok >= 99);
  CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(kolmogorov_q(0.0) == 1.0);
  std::vector<double> a, b;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(e(g));
    b.push_back(e(g) * 1.3);
  }
  CHECK(ks_two_sample(a, b).p_value < 1e-3);
  CHECK(ks_two_sample(a, a).d == 0.0);
}
