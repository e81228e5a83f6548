#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "birthtail/kernels.hpp"
#include "birthtail/rates.hpp"
#include "birthtail/system.hpp"

namespace birthtail {

// Replicate r of a batch seeded with master_seed. Draws are a pure function of
// (master_seed, replicate, substream, draw index) via Philox4x32-10.
struct RngStream {
  uint64_t master_seed = 0;
  uint64_t replicate = 0;
};

PhiloxKey philox_key(uint64_t seed);

// Uniforms in (0,1) for one (stream, substream), generated in blocks.
class UniformCursor {
public:
  UniformCursor(RngStream s, uint32_t substream);
  double next();

private:
  void refill();
  PhiloxKey key_;
  uint32_t sub_, rep_;
  uint64_t drawn_ = 0;
  size_t pos_ = 0, len_ = 0;
  std::vector<double> buf_;
};

// Sojourn times tau(k) ~ Exp(F(k)) for k = x0, x0+1, ... with a compensated
// running sum. Restarting a cursor on the same stream reproduces every partial
// sum bit for bit.
class SojournCursor {
public:
  SojournCursor(const RateFunction& f, int64_t x0, RngStream s, uint32_t substream);

  int64_t state() const { return k_; }           // next sojourn is spent in this state
  int64_t jumps() const { return k_ - x0_; }
  double elapsed() const { return sum_ + comp_; }  // sum of drawn sojourns
  double next();                                 // draw tau(state), advance the state
  void advance(int64_t n);

private:
  void refill();
  const RateFunction* f_;
  InvRateParams params_;
  int64_t x0_, k_;
  PhiloxKey key_;
  uint32_t sub_, rep_;
  double sum_ = 0.0, comp_ = 0.0;
  size_t pos_ = 0, len_ = 0;
  std::vector<double> inv_, buf_;
};

// Upper bound on P(R > gap) for R = sum_{l >= k} tau(l), combining Markov with
// the Chernoff bound from log E e^{sR} <= s mu + s^2 nu (0 < s <= min rate / 2).
double remainder_exceed_bound(const RateFunction& f, int64_t k, double gap);

enum class StopReason { reached_t, max_jumps, explosion_detected };
const char* to_string(StopReason r);

struct BirthOutcome {
  int64_t state = 0;  // meaningful when !exploded
  bool exploded = false;
  int64_t jumps = 0;
  StopReason stop_reason = StopReason::reached_t;
};

// paper-parity summand caps: 10^6 in general, 100 for exponential feedback
int64_t default_max_jumps(const RateFunction& f);

BirthOutcome simulate_birth(const RateFunction& f, int64_t x0, double t_obs, int64_t max_jumps, RngStream s);

struct ExplosionSample {
  double t_hat = 0.0;
  double bias_bound = 0.0;
  int64_t terms = 0;
};

// first state K with sum_{k>K} 1/F(k) < eps
int64_t truncation_state(const RateFunction& f, int64_t x0, double eps);
ExplosionSample sample_explosion_time(const RateFunction& f, int64_t x0, double eps, RngStream s);

struct EmbedParams {
  double eps = 1e-12;          // probability budget for each ordering decision
  int64_t max_draws = 100000000;  // per-agent sojourn cap before a replicate is resampled
  int max_attempts = 8;
  // counting the winner's steps before the last loser jump costs about N_mon
  // draws; off, n_mon is reported as -1
  bool count_nmon = true;
};

struct UrnOutcome {
  int64_t winner = -1;
  std::vector<int64_t> x_inf;  // per agent; the winner's entry is -1 (infinite)
  int64_t n_mon = 1;
  double bias_bound = 0.0;
  RngStream seed_used;
  int attempts = 1;
};

UrnOutcome simulate_urn_embedded(const UrnSystem& sys, RngStream s, const EmbedParams& p = {});

struct DiscreteStop {
  int64_t max_steps = -1;         // < 0: unlimited
  double share_threshold = 0.0;   // > 0: stop once a share exceeds it
};

struct DiscreteOutcome {
  std::vector<int64_t> counts;
  int64_t steps = 0;
  std::string stop_reason;  // "max_steps" or "share_threshold"
  // shares recorded at steps 1, 2, 4, 8, ...
  std::vector<std::pair<int64_t, std::vector<double>>> trajectory;
};

DiscreteOutcome simulate_urn_discrete(const UrnSystem& sys, const DiscreteStop& stop, RngStream s,
                                      bool record_trajectory = false);

// #{i : X_i(n_steps) > x0_i} for one replicate
int64_t winners_count(const UrnSystem& sys, int64_t n_steps, RngStream s);

std::vector<double> dirichlet_shares(int64_t agents, RngStream s);

// ---------------------------------------------------------------- batches

int default_workers();

// Runs fn(RngStream{seed, r}) for r = 0..replicates-1 on `workers` threads and
// returns results in replicate order. The lowest-index failure is rethrown.
template <class Fn>
auto run_batch(int64_t replicates, uint64_t seed, int workers, Fn&& fn)
    -> std::vector<decltype(fn(RngStream{}))> {
  using T = decltype(fn(RngStream{}));
  require(replicates >= 1, ErrorKind::domain, "replicates must be >= 1");
  require(replicates <= (int64_t{1} << 32), ErrorKind::domain, "replicate index must fit in 32 bits");
  if (workers <= 0) workers = default_workers();
  std::vector<T> out(static_cast<size_t>(replicates));
  constexpr int64_t chunk = 16;
  std::atomic<int64_t> next{0};
  std::mutex mu;
  int64_t err_at = std::numeric_limits<int64_t>::max();
  std::exception_ptr err;
  auto work = [&] {
    for (;;) {
      const int64_t b = next.fetch_add(chunk);
      if (b >= replicates) return;
      const int64_t e = std::min(replicates, b + chunk);
      for (int64_t r = b; r < e; ++r) {
        try {
          out[static_cast<size_t>(r)] = fn(RngStream{seed, static_cast<uint64_t>(r)});
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (r < err_at) {
            err_at = r;
            err = std::current_exception();
          }
          break;
        }
      }
    }
  };
  const int n = static_cast<int>(std::min<int64_t>(workers, (replicates + chunk - 1) / chunk));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace birthtail
