#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "birthtail/error.hpp"
#include "birthtail/kernels.hpp"

namespace birthtail {

enum class Family { polynomial, exponential, polylog, constant, tabulated };

// Feedback / birth rate function F: N -> (0, inf). Immutable; cheap to copy.
class RateFunction {
public:
  static RateFunction polynomial(double alpha, double beta);
  static RateFunction exponential(double beta);
  static RateFunction polylog(double beta);
  static RateFunction constant(double lambda);
  // tail may be null: explosiveness and beyond-table queries then fail
  static RateFunction tabulated(std::vector<double> values, std::shared_ptr<const RateFunction> tail);

  Family family() const { return family_; }
  double alpha() const { return a_; }
  double beta() const { return b_; }
  double lambda() const { return a_; }
  const std::vector<double>& table() const;
  const RateFunction* tail() const { return tail_.get(); }

  double operator()(int64_t k) const { return evaluate(k); }
  double evaluate(int64_t k) const;

  // structural properties decided per family
  bool is_explosive() const;
  bool diverges() const;            // F(k) -> inf
  bool strictly_increasing() const;
  bool square_summable() const;     // sum 1/F(k)^2 < inf
  // inf_{j>k} F(j); 0 when unknown
  double tail_min_rate(int64_t k) const;
  // polynomial-type growth exponent of F (used for moment and exponent rules)
  std::string spec() const;

  // kernel parameters for 1/F on the closed-form part
  InvRateParams inv_rate_params() const;
  // deterministic 1/F(k) (matches the kernels bit for bit)
  double inv_rate_det(int64_t k) const;

  bool operator==(const RateFunction& o) const;
  bool operator!=(const RateFunction& o) const { return !(*this == o); }

private:
  Family family_ = Family::constant;
  double a_ = 1.0, b_ = 0.0;
  std::shared_ptr<const std::vector<double>> table_;
  std::shared_ptr<const std::vector<double>> table_inv_;
  std::shared_ptr<const RateFunction> tail_;
};

struct SeriesSum {
  double value = 0.0;
  double remainder_bound = 0.0;
  int64_t terms_used = 0;
};

RateFunction parse_rate(const std::string& spec);

inline double evaluate(const RateFunction& f, int64_t k) { return f.evaluate(k); }
inline bool is_explosive(const RateFunction& f) { return f.is_explosive(); }

// sum_{k>x} F(k)^{-power}
SeriesSum tail_sum(const RateFunction& f, int64_t x, int power, double tol = 1e-10);
// sum_{k=x0}^{x} F(k)^{-power}
SeriesSum head_sum(const RateFunction& f, int64_t x0, int64_t x, int power);

// format a double with 12 significant digits (the artifact-wide output format)
std::string fmt12(double v);

}  // namespace birthtail
