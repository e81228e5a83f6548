#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "birthtail/kernels.hpp"
#include "birthtail/rates.hpp"
#include "doctest.h"

using namespace birthtail;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<Isa> variants() {
  std::vector<Isa> v;
  for (Isa i : available_isas())
    if (i != Isa::scalar) v.push_back(i);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels are always available") {
  auto isas = available_isas();
  CHECK(std::find(isas.begin(), isas.end(), Isa::scalar) != isas.end());
  CHECK(kernels_for(Isa::scalar).isa == Isa::scalar);
}

TEST_CASE("deterministic exp and log are accurate") {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> ux(-700, 700), ul(-700, 700);
  for (int i = 0; i < 100000; ++i) {
    double x = ux(g);
    CHECK(std::fabs(det_exp(x) / std::exp(x) - 1) < 4e-16);
    double y = std::exp(ul(g));
    CHECK(std::fabs(det_log(y) - std::log(y)) <= 4e-16 * std::max(1.0, std::fabs(std::log(y))));
  }
  CHECK(det_exp(0.0) == 1.0);
  CHECK(det_log(1.0) == 0.0);
  CHECK(det_exp(-800.0) == 0.0);
}

TEST_CASE("uniforms are in (0,1), reproducible and block-consistent") {
  const auto& k = kernels_for(Isa::scalar);
  std::vector<double> a(1000), b(300);
  k.uniforms({1, 2}, 3, 4, 0, a.size(), a.data());
  k.uniforms({1, 2}, 3, 4, 500, b.size(), b.data());
  for (double u : a) CHECK((u > 0.0 && u < 1.0));
  CHECK(std::memcmp(a.data() + 500, b.data(), b.size() * sizeof(double)) == 0);
  double mean = 0;
  for (double u : a) mean += u;
  CHECK(mean / 1000 == doctest::Approx(0.5).epsilon(0.1));
  std::vector<double> c(1000);
  k.uniforms({1, 2}, 3, 5, 0, c.size(), c.data());
  CHECK_FALSE(bitwise_equal(a, c));
}

TEST_CASE("SIMD kernels match scalar bit for bit") {
  const auto& s = kernels_for(Isa::scalar);
  for (Isa isa : variants()) {
    CAPTURE(to_string(isa));
    const auto& v = kernels_for(isa);
    CHECK(v.isa == isa);
    for (size_t n : {1u, 3u, 4u, 7u, 64u, 1001u}) {
      for (uint64_t first : {0ull, 1ull, 5ull, 123456789ull}) {
        std::vector<double> a(n), b(n);
        s.uniforms({7, 9}, 2, 11, first, n, a.data());
        v.uniforms({7, 9}, 2, 11, first, n, b.data());
        CHECK(bitwise_equal(a, b));

        std::vector<double> inv(n);
        for (size_t j = 0; j < n; ++j) inv[j] = 1.0 / static_cast<double>((j + 1) * (j + 1));
        s.sojourns({7, 9}, 2, 11, first, n, inv.data(), a.data());
        v.sojourns({7, 9}, 2, 11, first, n, inv.data(), b.data());
        CHECK(bitwise_equal(a, b));
      }
      for (const char* spec : {"poly:alpha=1,beta=2", "poly:alpha=2.5,beta=0.7", "exp:beta=1", "exp:beta=0.3",
                               "polylog:beta=2", "const:lambda=3"}) {
        auto p = parse_rate(spec).inv_rate_params();
        for (int64_t k0 : {1, 17, 100000}) {
          std::vector<double> a(n), b(n);
          s.inv_rates(p, k0, n, a.data());
          v.inv_rates(p, k0, n, b.data());
          CHECK(bitwise_equal(a, b));
        }
      }
    }
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-745, 709);
    std::vector<double> x(10007), a(x.size()), b(x.size());
    for (double& e : x) e = u(g);
    x[0] = 0.0;
    x[1] = -1000.0;
    x[2] = 709.7;
    s.exp(x.data(), x.size(), a.data());
    v.exp(x.data(), x.size(), b.data());
    CHECK(bitwise_equal(a, b));
    for (double& e : x) e = std::exp(u(g) / 2);
    s.log(x.data(), x.size(), a.data());
    v.log(x.data(), x.size(), b.data());
    CHECK(bitwise_equal(a, b));

    // exp_sum over an alternating series with ascending rates
    const size_t m = 13;
    std::vector<double> aa(m), sg(m), lam(m), amax(m);
    for (size_t k = 0; k < m; ++k) {
      lam[k] = 0.5 + static_cast<double>(k * k);
      aa[k] = 3.0 - 0.7 * static_cast<double>(k);
      sg[k] = (k % 2) ? -1.0 : 1.0;
    }
    for (size_t k = m; k-- > 0;) amax[k] = k + 1 < m ? std::max(aa[k], amax[k + 1]) : aa[k];
    std::vector<double> t(1001), s1(t.size()), e1(t.size()), s2(t.size()), e2(t.size());
    for (size_t j = 0; j < t.size(); ++j) t[j] = 0.01 * static_cast<double>(j);
    for (const double* am : {static_cast<const double*>(nullptr), static_cast<const double*>(amax.data())}) {
      s.exp_sum(aa.data(), sg.data(), lam.data(), am, m, t.data(), t.size(), s1.data(), e1.data());
      v.exp_sum(aa.data(), sg.data(), lam.data(), am, m, t.data(), t.size(), s2.data(), e2.data());
      CHECK(bitwise_equal(s1, s2));
      CHECK(bitwise_equal(e1, e2));
    }
  }
}

TEST_CASE("inv_rates agree with the rate function") {
  for (const char* spec : {"poly:alpha=1,beta=2", "exp:beta=1", "polylog:beta=2", "const:lambda=3"}) {
    auto f = parse_rate(spec);
    std::vector<double> out(50);
    kernels().inv_rates(f.inv_rate_params(), 3, out.size(), out.data());
    for (size_t j = 0; j < out.size(); ++j) {
      const int64_t k = 3 + static_cast<int64_t>(j);
      CHECK(out[j] == f.inv_rate_det(k));
      CHECK(out[j] == doctest::Approx(1.0 / f(k)).epsilon(1e-14));
    }
  }
}

TEST_CASE("active isa can be overridden") {
  const Isa before = kernels().isa;
  set_active_isa(Isa::scalar);
  CHECK(kernels().isa == Isa::scalar);
  set_active_isa(before);
  CHECK(kernels().isa == before);
}
