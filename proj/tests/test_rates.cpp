#include <cmath>
#include <numbers>

#include "birthtail/rates.hpp"
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

// brute-force sum_{k=from}^{to} F(k)^{-p}, small terms first
long double brute(const RateFunction& f, int64_t from, int64_t to, int p) {
  long double s = 0;
  for (int64_t k = to; k >= from; --k) s += std::pow(1.0L / f(k), p);
  return s;
}

}  // namespace

TEST_CASE("parse_rate builds each family") {
  auto p = parse_rate("poly:alpha=1,beta=2");
  CHECK(p.family() == Family::polynomial);
  CHECK(p.alpha() == 1.0);
  CHECK(p.beta() == 2.0);
  auto c = parse_rate("const:lambda=1.5");
  CHECK(c.family() == Family::constant);
  CHECK(c.lambda() == 1.5);
  CHECK(parse_rate("poly:beta=2,alpha=1") == p);
  CHECK(parse_rate("exp:beta=1e0").family() == Family::exponential);
  CHECK(parse_rate("polylog:beta=2").family() == Family::polylog);
  auto t = parse_rate("table:values=1;2;4,tail=poly|alpha=1,beta=2");
  CHECK(t.family() == Family::tabulated);
  CHECK(t(2) == 2.0);
  CHECK(t(5) == 25.0);
  CHECK(parse_rate(p.spec()) == p);
  CHECK(parse_rate(t.spec()) == t);
}

TEST_CASE("parse_rate errors") {
  CHECK(kind_of([] { parse_rate("poly:alpha=0,beta=2"); }) == ErrorKind::domain);
  CHECK(kind_of([] { parse_rate("const:lambda=-1"); }) == ErrorKind::domain);
  CHECK(kind_of([] { parse_rate("exp:beta=0"); }) == ErrorKind::domain);
  CHECK(kind_of([] { parse_rate("poly:alpha=1,alpha=2,beta=2"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_rate("poly:alpha=1"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_rate("poly:alpha=1,beta=x"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_rate("foo:beta=1"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_rate("poly"); }) == ErrorKind::parse);
  CHECK(kind_of([] { parse_rate("exp:beta=1,gamma=2"); }) == ErrorKind::parse);
  try {
    parse_rate("poly:alpha=1,beta=x");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find('x') != std::string::npos);
  }
}

TEST_CASE("evaluate") {
  CHECK(evaluate(RateFunction::polynomial(1, 2), 3) == 9.0);
  CHECK(evaluate(RateFunction::exponential(1), 1) == 1.0);
  CHECK(evaluate(RateFunction::polylog(2), 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(evaluate(RateFunction::exponential(2), 3) == doctest::Approx(std::exp(4.0)));
  CHECK(evaluate(RateFunction::constant(3), 100) == 3.0);
  CHECK(kind_of([] { evaluate(RateFunction::polynomial(1, 2), 0); }) == ErrorKind::domain);
  auto bare = RateFunction::tabulated({1, 2}, nullptr);
  CHECK(bare(2) == 2.0);
  CHECK_THROWS_AS(bare(3), Error);
  for (const char* s : {"poly:alpha=0.5,beta=-1", "exp:beta=3", "polylog:beta=-2", "const:lambda=0.1"}) {
    auto f = parse_rate(s);
    for (int64_t k : {1, 2, 10, 1000}) CHECK(f(k) > 0.0);
  }
}

TEST_CASE("is_explosive") {
  CHECK(is_explosive(RateFunction::polynomial(1, 2)));
  CHECK_FALSE(is_explosive(RateFunction::constant(1)));
  CHECK_FALSE(is_explosive(RateFunction::polylog(1)));
  CHECK(is_explosive(RateFunction::polylog(1.5)));
  CHECK(is_explosive(RateFunction::exponential(0.1)));
  CHECK_FALSE(is_explosive(RateFunction::polynomial(1, 1)));
  CHECK_FALSE(is_explosive(RateFunction::polynomial(5, 0.5)));
  CHECK(is_explosive(parse_rate("table:values=1;1;1,tail=exp|beta=1")));
  CHECK(kind_of([] { RateFunction::tabulated({1, 2}, nullptr).is_explosive(); }) == ErrorKind::undecidable);
}

TEST_CASE("is_explosive agrees with partial-sum growth") {
  // sum over (N, 2N] relative to the sum up to N: tends to 0 iff convergent
  for (const char* s : {"poly:alpha=1,beta=2", "poly:alpha=2,beta=1.5", "poly:alpha=1,beta=1", "poly:alpha=1,beta=0.5",
                        "exp:beta=0.5", "polylog:beta=3", "polylog:beta=-1", "const:lambda=2"}) {
    auto f = parse_rate(s);
    const int64_t n = 500000;
    const double head = static_cast<double>(brute(f, 1, n, 1));
    const double next = static_cast<double>(brute(f, n + 1, 2 * n, 1));
    CAPTURE(s);
    CHECK(is_explosive(f) == (next / head < 0.01));
  }
}

TEST_CASE("tail_sum closed forms and oracles") {
  auto e = tail_sum(RateFunction::exponential(1), 2, 1);
  CHECK(e.value == doctest::Approx(std::exp(-2.0) * std::numbers::e / (std::numbers::e - 1)).epsilon(1e-14));
  CHECK(e.remainder_bound == 0.0);

  // direct summation of 1e7 terms plus the integral tail 1/N
  auto p = tail_sum(RateFunction::polynomial(1, 2), 100, 1);
  const long double oracle = brute(RateFunction::polynomial(1, 2), 101, 10000000, 1) + 1.0L / 10000000.5L;
  CHECK(std::fabs(p.value - static_cast<double>(oracle)) < 1e-12);
  CHECK(p.value == doctest::Approx(0.0099502).epsilon(1e-4));
  CHECK(p.remainder_bound <= 1e-10);

  CHECK(tail_sum(RateFunction::polynomial(1, 2), 0, 1).value ==
        doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-12));
  CHECK(tail_sum(RateFunction::polynomial(1, 2), 0, 2).value ==
        doctest::Approx(std::pow(std::numbers::pi, 4) / 90).epsilon(1e-12));
  CHECK(tail_sum(RateFunction::polynomial(2, 3), 0, 1).value == doctest::Approx(1.2020569031595942 / 2).epsilon(1e-12));

  CHECK(kind_of([] { tail_sum(RateFunction::constant(1), 5, 1); }) == ErrorKind::divergence);
}

TEST_CASE("tail_sum matches brute force for every explosive family") {
  for (const char* s : {"poly:alpha=1,beta=3", "exp:beta=0.7", "polylog:beta=2", "polylog:beta=3",
                        "table:values=2;3;5,tail=poly|alpha=1,beta=2.5"}) {
    auto f = parse_rate(s);
    CAPTURE(s);
    for (int64_t x : {0, 3, 40}) {
      for (int p : {1, 2}) {
        auto t = tail_sum(f, x, p);
        auto h = head_sum(f, x + 1, 2000, p);
        auto rest = tail_sum(f, 2000, p);
        CHECK(std::fabs(t.value - h.value - rest.value) <= t.remainder_bound + rest.remainder_bound + 1e-14);
        CHECK(t.remainder_bound >= 0.0);
      }
    }
    // monotone in x and vanishing
    double prev = HUGE_VAL;
    for (int64_t x : {0, 1, 10, 100, 1000, 100000}) {
      double v = tail_sum(f, x, 1).value;
      CHECK(v <= prev);
      prev = v;
    }
    CHECK(prev < 0.1);
  }
  // polylog against direct summation plus a loose integral tail estimate
  auto f = RateFunction::polylog(3);
  const double direct = static_cast<double>(brute(f, 11, 2000000, 1));
  const double rest = tail_sum(f, 2000000, 1).value;
  auto t10 = tail_sum(f, 10, 1);
  CHECK(std::fabs(t10.value - direct - rest) <= t10.remainder_bound + 1e-14);
  const double L = std::log(std::numbers::e - 1 + 2e6);
  CHECK(rest == doctest::Approx(1.0 / (2.0 * L * L)).epsilon(0.02));
}

TEST_CASE("head_sum") {
  CHECK(head_sum(RateFunction::constant(2), 1, 4, 1).value == doctest::Approx(2.0));
  CHECK(head_sum(RateFunction::polynomial(1, 1), 1, 3, 1).value == doctest::Approx(1.0 + 0.5 + 1.0 / 3));
  CHECK(head_sum(RateFunction::polynomial(1, 1), 2, 2, 2).value == doctest::Approx(0.25));
  CHECK(head_sum(RateFunction::polynomial(1, 1), 2, 2, 2).remainder_bound == 0.0);
  CHECK_THROWS_AS(head_sum(RateFunction::polynomial(1, 1), 3, 2, 1), Error);
  // head + tail = full sum
  auto f = RateFunction::polynomial(1, 2);
  CHECK(head_sum(f, 1, 50, 1).value + tail_sum(f, 50, 1).value ==
        doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-13));
}

TEST_CASE("fmt12") {
  CHECK(fmt12(0.5) == "0.5");
  CHECK(fmt12(1.0 / 3) == "0.333333333333");
}
