#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "birthtail/sim.hpp"

namespace birthtail {

namespace {
constexpr size_t block = 256;
}

PhiloxKey philox_key(uint64_t seed) {
  return {static_cast<uint32_t>(seed & 0xffffffffu), static_cast<uint32_t>(seed >> 32)};
}

UniformCursor::UniformCursor(RngStream s, uint32_t substream)
    : key_(philox_key(s.master_seed)), sub_(substream), rep_(static_cast<uint32_t>(s.replicate)), buf_(block) {}

void UniformCursor::refill() {
  kernels().uniforms(key_, sub_, rep_, drawn_, block, buf_.data());
  drawn_ += block;
  pos_ = 0;
  len_ = block;
}

double UniformCursor::next() {
  if (pos_ == len_) refill();
  return buf_[pos_++];
}

SojournCursor::SojournCursor(const RateFunction& f, int64_t x0, RngStream s, uint32_t substream)
    : f_(&f),
      params_(f.inv_rate_params()),
      x0_(x0),
      k_(x0),
      key_(philox_key(s.master_seed)),
      sub_(substream),
      rep_(static_cast<uint32_t>(s.replicate)),
      inv_(block),
      buf_(block) {
  require(x0 >= 1, ErrorKind::domain, "x0 must be >= 1");
}

void SojournCursor::refill() {
  int64_t k = k_;
  size_t j = 0;
  if (f_->family() == Family::tabulated) {
    const auto& t = f_->table();
    for (; j < block && k + static_cast<int64_t>(j) <= static_cast<int64_t>(t.size()); ++j)
      inv_[j] = f_->inv_rate_det(k + static_cast<int64_t>(j));
    require(j == block || f_->tail(), ErrorKind::domain, "k beyond table and no tail descriptor");
  }
  if (j < block) kernels().inv_rates(params_, k + static_cast<int64_t>(j), block - j, inv_.data() + j);
  kernels().sojourns(key_, sub_, rep_, static_cast<uint64_t>(k_ - x0_), block, inv_.data(), buf_.data());
  pos_ = 0;
  len_ = block;
}

double SojournCursor::next() {
  if (pos_ == len_) refill();
  const double tau = buf_[pos_++];
  const double s = sum_ + tau;
  comp_ += std::fabs(sum_) >= tau ? (sum_ - s) + tau : (tau - s) + sum_;
  sum_ = s;
  ++k_;
  return tau;
}

void SojournCursor::advance(int64_t n) {
  for (int64_t i = 0; i < n; ++i) next();
}

double remainder_exceed_bound(const RateFunction& f, int64_t k, double gap) {
  if (!(gap > 0.0)) return 1.0;
  const double mu = tail_sum(f, k - 1, 1).value;
  if (gap <= mu) return 1.0;
  const double nu = tail_sum(f, k - 1, 2).value;
  const double m = f.tail_min_rate(k - 1);
  double b = mu / gap;
  if (m > 0.0 && nu > 0.0) {
    const double s = std::min((gap - mu) / (2.0 * nu), m / 2.0);
    b = std::min(b, std::exp(-(s * (gap - mu) - s * s * nu)));
  }
  return b;
}

int default_workers() {
  if (const char* env = std::getenv("BIRTHTAIL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    require(end != env && *end == '\0' && v >= 1, ErrorKind::domain,
            std::string("BIRTHTAIL_WORKERS must be a positive integer, got '") + env + "'");
    return static_cast<int>(v);
  }
  const unsigned h = std::thread::hardware_concurrency();
  return h ? static_cast<int>(h) : 1;
}

}  // namespace birthtail
