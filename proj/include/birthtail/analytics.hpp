#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace birthtail {

struct EmpiricalSurvival {
  std::vector<double> support;   // sorted distinct sample values
  std::vector<double> survival;  // fraction of the sample strictly above each value
  int64_t n = 0;
  std::string conditioning;

  // fraction of the sample > v
  double at(double v) const;
};

EmpiricalSurvival empirical_survival(std::vector<double> samples, const std::string& conditioning = "none");
// keeps samples[i] with keep[i]
EmpiricalSurvival empirical_survival(const std::vector<double>& samples, const std::vector<bool>& keep,
                                     const std::string& conditioning);
std::string to_csv(const EmpiricalSurvival& s);

enum class Transform { loglog, loglinear, logloglog };
const char* to_string(Transform t);
Transform parse_transform(const std::string& s);

struct SlopeFit {
  double slope = 0.0, intercept = 0.0, stderr_ = 0.0;
  double q_lo = 0.5, q_hi = 0.99;
  Transform transform = Transform::loglog;
  int points = 0;
};

// OLS of log survival against the transformed value over the support points
// whose empirical CDF lies in [q_lo, q_hi]
SlopeFit fit_power_tail(const EmpiricalSurvival& s, Transform t = Transform::loglog, double q_lo = 0.5,
                        double q_hi = 0.99);
// same on support points with value in [x_lo, x_hi]
SlopeFit fit_power_tail_range(const EmpiricalSurvival& s, Transform t, double x_lo, double x_hi);

// Hill estimate of the tail index from the k largest samples
double hill(std::vector<double> samples, int64_t k);

struct Comparison {
  std::vector<double> x, empirical, predicted, ratio;
  double min_ratio = 0.0, max_ratio = 0.0;
  bool pass = false;
};

// ratio empirical / predicted at support points in [x_lo, x_hi]; pass if every
// ratio lies in [lo, hi]
Comparison compare_prediction(const EmpiricalSurvival& s, const std::function<double(double)>& predicted,
                              double x_lo, double x_hi, double lo, double hi);

struct Correlation {
  double r = 0.0, ci_lo = 0.0, ci_hi = 0.0;
  int64_t n = 0;
};

Correlation pearson_log_corr(const std::vector<std::pair<double, double>>& pairs);

double ks_exponential(std::vector<double> samples);

struct KsTwo {
  double d = 0.0, p_value = 1.0;
};
KsTwo ks_two_sample(std::vector<double> a, std::vector<double> b);
// asymptotic Kolmogorov distribution P(K > x)
double kolmogorov_q(double x);

}  // namespace birthtail
