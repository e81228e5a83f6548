#include <algorithm>
#include <cmath>
#include <sstream>

#include "birthtail/sim.hpp"

namespace birthtail {

// ---------------------------------------------------------------- systems

UrnSystem UrnSystem::symmetric(const RateFunction& f, int64_t x0, int64_t agents) {
  UrnSystem s;
  s.add(f, x0, agents);
  return s;
}

UrnSystem& UrnSystem::add(const RateFunction& f, int64_t x0, int64_t count) {
  require(x0 >= 1, ErrorKind::domain, "initial count x0 must be >= 1");
  require(count >= 1, ErrorKind::domain, "agent count must be >= 1");
  if (!groups_.empty() && groups_.back().f == f && groups_.back().x0 == x0)
    groups_.back().count += count;
  else
    groups_.push_back({f, x0, count});
  size_ += count;
  return *this;
}

size_t UrnSystem::group_of(int64_t i) const {
  require(i >= 0 && i < size_, ErrorKind::domain, "agent index out of range");
  int64_t base = 0;
  for (size_t g = 0; g < groups_.size(); ++g) {
    if (i < base + groups_[g].count) return g;
    base += groups_[g].count;
  }
  return groups_.size() - 1;
}

Agent UrnSystem::agent(int64_t i) const {
  const Group& g = groups_[group_of(i)];
  return {g.f, g.x0};
}

int64_t UrnSystem::explosive_count() const {
  int64_t n = 0;
  for (const auto& g : groups_)
    if (g.f.is_explosive()) n += g.count;
  return n;
}

void UrnSystem::validate() const {
  require(size_ >= 2, ErrorKind::domain, "an urn system needs at least 2 agents");
  require(explosive_count() >= 1, ErrorKind::domain, "an urn system needs at least one explosive agent");
}

std::string UrnSystem::describe() const {
  std::ostringstream os;
  for (size_t g = 0; g < groups_.size(); ++g) {
    if (g) os << "; ";
    os << groups_[g].count << "x " << groups_[g].f.spec() << "@" << groups_[g].x0;
  }
  return os.str();
}

UrnSystem parse_system(const std::string& text) {
  UrnSystem sys;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    const std::string where = "system line " + std::to_string(lineno) + ": ";
    if (line.rfind("agent=", 0) != 0) fail(ErrorKind::parse, where + "expected agent=<rate-spec>@<x0>");
    const std::string body = line.substr(6);
    const auto at = body.rfind('@');
    if (at == std::string::npos) fail(ErrorKind::parse, where + "missing @<x0>");
    const std::string xs = body.substr(at + 1);
    int64_t x0 = 0;
    size_t used = 0;
    try {
      x0 = std::stoll(xs, &used);
    } catch (...) {
      used = 0;
    }
    if (used == 0 || used != xs.size()) fail(ErrorKind::parse, where + "x0 '" + xs + "' is not an integer");
    sys.add(parse_rate(body.substr(0, at)), x0);
  }
  sys.validate();
  return sys;
}

// ---------------------------------------------------------------- embedding

namespace {

struct Rejected {};

// Residual-tail statistics of a cursor, cached per state. mu is bracketed by
// the series error so both bounds stay conservative.
struct Tail {
  const RateFunction* f = nullptr;
  int64_t k = -1;
  double mu = 0.0, mu_lo = 0.0, mu_hi = 0.0, nu = 0.0, m = 0.0;

  void at(int64_t state) {
    if (state == k) return;
    k = state;
    const SeriesSum s1 = tail_sum(*f, k - 1, 1);
    mu = s1.value;
    mu_lo = mu - s1.remainder_bound;
    mu_hi = mu + s1.remainder_bound;
    const SeriesSum s2 = tail_sum(*f, k - 1, 2);
    nu = s2.value + s2.remainder_bound;
    m = f->tail_min_rate(k - 1);
  }
  // P(R > gap): Markov, and Chernoff from log E e^{sR} <= s mu + s^2 nu (s <= m/2)
  double exceed(double gap) const {
    if (!(gap > 0.0) || gap <= mu_hi) return 1.0;
    double b = mu_hi / gap;
    if (m > 0.0 && nu > 0.0) {
      const double s = std::min((gap - mu_hi) / (2.0 * nu), m / 2.0);
      b = std::min(b, std::exp(-(s * (gap - mu_hi) - s * s * nu)));
    }
    return b;
  }
  // P(R <= gap) from log E e^{-sR} <= -s mu + s^2 nu / 2 (any s > 0)
  double below(double gap) const {
    if (gap < 0.0) return 0.0;
    if (!(gap < mu_lo) || !(nu > 0.0)) return 1.0;
    const double a = mu_lo - gap;
    return std::exp(-a * a / (2.0 * nu));
  }
};

struct Walker {
  SojournCursor c;
  Tail tail;
  bool explosive;
};

UrnOutcome embed_once(const UrnSystem& sys, RngStream s, const EmbedParams& p, int attempt) {
  const int64_t A = sys.size();
  std::vector<Agent> agents(static_cast<size_t>(A));
  for (int64_t i = 0, base = 0; i < static_cast<int64_t>(sys.groups().size()); ++i) {
    const auto& g = sys.groups()[static_cast<size_t>(i)];
    for (int64_t j = 0; j < g.count; ++j) agents[static_cast<size_t>(base + j)] = {g.f, g.x0};
    base += g.count;
  }
  auto substream = [&](int64_t i) { return static_cast<uint32_t>(i + A * attempt); };
  auto draw = [&](Walker& w, int64_t n) {
    if (w.c.jumps() >= p.max_draws) throw Rejected{};
    w.c.advance(std::min(n, p.max_draws - w.c.jumps()));
  };

  std::vector<int64_t> expl;
  std::vector<Walker> ws;
  ws.reserve(static_cast<size_t>(A));
  for (int64_t i = 0; i < A; ++i) {
    const Agent& a = agents[static_cast<size_t>(i)];
    const bool ex = a.f.is_explosive();
    ws.push_back({SojournCursor(a.f, a.x0, s, substream(i)), Tail{&agents[static_cast<size_t>(i)].f}, ex});
    if (ex) expl.push_back(i);
  }
  auto mean_tail = [&](Walker& w) {
    w.tail.at(w.c.state());
    return w.tail.mu;
  };
  auto refine = [&](Walker& w) { draw(w, std::max<int64_t>(16, w.c.jumps())); };

  // phase 1: the winner is the agent with the smallest explosion time
  int64_t w = expl.front();
  if (expl.size() > 1) {
    for (int64_t i : expl) draw(ws[static_cast<size_t>(i)], 16);
    for (;;) {
      double best = HUGE_VAL;
      for (int64_t i : expl) {
        Walker& x = ws[static_cast<size_t>(i)];
        const double v = x.c.elapsed() + mean_tail(x);
        if (v < best) {
          best = v;
          w = i;
        }
      }
      Walker& W = ws[static_cast<size_t>(w)];
      bool decided = true;
      for (int64_t j : expl) {
        if (j == w) continue;
        Walker& J = ws[static_cast<size_t>(j)];
        mean_tail(W);
        if (W.tail.exceed(J.c.elapsed() - W.c.elapsed()) < p.eps) continue;
        const double mw = mean_tail(W), mj = mean_tail(J);
        if (mw + mj < 1e-15 * std::max(1.0, W.c.elapsed()))
          fail(ErrorKind::degenerate, "explosion times of agents " + std::to_string(w + 1) + " and " +
                                          std::to_string(j + 1) + " tie within 1e-15");
        refine(mw >= mj ? W : J);
        decided = false;
        break;
      }
      if (decided) break;
    }
  }

  // phase 2: every other agent runs on [0, T_w)
  Walker& W = ws[static_cast<size_t>(w)];
  UrnOutcome out;
  out.winner = w;
  out.x_inf.assign(static_cast<size_t>(A), -1);
  double s_max = 0.0;
  int64_t loser_wins = 0;
  for (int64_t j = 0; j < A; ++j) {
    if (j == w) continue;
    const Agent& a = agents[static_cast<size_t>(j)];
    Walker& J = ws[static_cast<size_t>(j)];
    J.c = SojournCursor(a.f, a.x0, s, substream(j));
    double last = 0.0;
    for (;;) {
      if (J.c.jumps() >= p.max_draws) throw Rejected{};
      J.c.next();
      const double t = J.c.elapsed();
      bool before = false;
      for (;;) {
        if (t < W.c.elapsed()) {
          before = true;
          break;
        }
        mean_tail(W);
        if (W.tail.exceed(t - W.c.elapsed()) < p.eps) break;
        if (W.tail.below(t - W.c.elapsed()) < p.eps) {
          before = true;
          break;
        }
        if (W.tail.mu < 1e-15 * std::max(1.0, t))
          fail(ErrorKind::degenerate, "jump of agent " + std::to_string(j + 1) +
                                          " ties with the winner's explosion time within 1e-15");
        refine(W);
      }
      if (!before) break;
      last = t;
    }
    const int64_t x = J.c.state() - 1;
    out.x_inf[static_cast<size_t>(j)] = x;
    loser_wins += x - a.x0;
    s_max = std::max(s_max, last);
  }

  // phase 3: winner steps before the last loser jump
  int64_t count = 0;
  if (loser_wins > 0 && p.count_nmon) {
    const Agent& a = agents[static_cast<size_t>(w)];
    SojournCursor c(a.f, a.x0, s, substream(w));
    for (;;) {
      if (c.jumps() >= p.max_draws) throw Rejected{};
      c.next();
      if (!(c.elapsed() < s_max)) break;
      ++count;
    }
  }
  out.n_mon = p.count_nmon ? count + loser_wins + 1 : -1;
  out.bias_bound = mean_tail(W);
  out.seed_used = s;
  out.attempts = attempt + 1;
  return out;
}

}  // namespace

UrnOutcome simulate_urn_embedded(const UrnSystem& sys, RngStream s, const EmbedParams& p) {
  sys.validate();
  require(p.eps > 0.0 && p.eps < 1.0, ErrorKind::domain, "eps must be in (0,1)");
  require(p.max_draws >= 16, ErrorKind::domain, "max_draws must be >= 16");
  require(p.max_attempts >= 1, ErrorKind::domain, "max_attempts must be >= 1");
  require(static_cast<double>(sys.size()) * p.max_attempts < 4294967296.0, ErrorKind::domain,
          "too many agents for the substream layout");
  for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
    try {
      return embed_once(sys, s, p, attempt);
    } catch (const Rejected&) {
    }
  }
  fail(ErrorKind::degenerate, "replicate " + std::to_string(s.replicate) + " exceeded " +
                                  std::to_string(p.max_draws) + " draws in " + std::to_string(p.max_attempts) +
                                  " attempts");
}

// ---------------------------------------------------------------- discrete urn

namespace {

class Fenwick {
public:
  explicit Fenwick(const std::vector<double>& w) : n_(w.size()), t_(w.size() + 1) { rebuild(w); }

  void rebuild(const std::vector<double>& w) {
    std::fill(t_.begin(), t_.end(), 0.0);
    for (size_t i = 0; i < n_; ++i) {
      t_[i + 1] += w[i];
      const size_t j = (i + 1) + ((i + 1) & (~(i + 1) + 1));
      if (j <= n_) t_[j] += t_[i + 1];
    }
    top_ = 1;
    while (top_ * 2 <= n_) top_ *= 2;
  }
  void add(size_t i, double d) {
    for (size_t j = i + 1; j <= n_; j += j & (~j + 1)) t_[j] += d;
  }
  double total() const {
    double s = 0.0;
    for (size_t j = n_; j > 0; j -= j & (~j + 1)) s += t_[j];
    return s;
  }
  // smallest i with prefix(i) > target
  size_t find(double target) const {
    size_t pos = 0;
    for (size_t step = top_; step > 0; step >>= 1) {
      if (pos + step <= n_ && t_[pos + step] <= target) {
        pos += step;
        target -= t_[pos];
      }
    }
    return std::min(pos, n_ - 1);
  }

private:
  size_t n_;
  std::vector<double> t_;
  size_t top_ = 1;
};

}  // namespace

DiscreteOutcome simulate_urn_discrete(const UrnSystem& sys, const DiscreteStop& stop, RngStream s,
                                      bool record_trajectory) {
  require(sys.size() >= 1, ErrorKind::domain, "empty urn system");
  require(stop.max_steps >= 0 || stop.share_threshold > 0.0, ErrorKind::domain,
          "discrete urn needs max_steps or share_threshold");
  require(stop.share_threshold < 1.0, ErrorKind::domain, "share_threshold must be < 1");
  const size_t A = static_cast<size_t>(sys.size());
  std::vector<const RateFunction*> f(A);
  DiscreteOutcome out;
  out.counts.resize(A);
  {
    size_t i = 0;
    for (const auto& g : sys.groups())
      for (int64_t j = 0; j < g.count; ++j, ++i) {
        f[i] = &g.f;
        out.counts[i] = g.x0;
      }
  }
  std::vector<double> w(A);
  size_t inf_count = 0;
  int64_t total = 0, top = 0;
  for (size_t i = 0; i < A; ++i) {
    w[i] = f[i]->evaluate(out.counts[i]);
    if (std::isinf(w[i])) ++inf_count;
    total += out.counts[i];
    top = std::max(top, out.counts[i]);
  }
  Fenwick fw(w);
  UniformCursor u(s, 0);
  auto shares = [&] {
    std::vector<double> v(A);
    for (size_t i = 0; i < A; ++i) v[i] = static_cast<double>(out.counts[i]) / static_cast<double>(total);
    return v;
  };
  auto share_hit = [&] {
    return stop.share_threshold > 0.0 && static_cast<double>(top) > stop.share_threshold * static_cast<double>(total);
  };
  int64_t next_record = 1;
  out.stop_reason = "max_steps";
  for (;;) {
    if (stop.max_steps >= 0 && out.steps >= stop.max_steps) break;
    if (share_hit()) {
      out.stop_reason = "share_threshold";
      break;
    }
    size_t i;
    if (inf_count > 0) {
      i = 0;
      while (!std::isinf(w[i])) ++i;
    } else {
      i = fw.find(u.next() * fw.total());
    }
    const int64_t k = ++out.counts[i];
    ++total;
    top = std::max(top, k);
    const double nw = f[i]->evaluate(k);
    if (std::isinf(nw)) {
      if (!std::isinf(w[i])) ++inf_count;
      w[i] = nw;
    } else {
      fw.add(i, nw - w[i]);
      w[i] = nw;
    }
    ++out.steps;
    if ((out.steps & 4095) == 0 && inf_count == 0) fw.rebuild(w);
    if (record_trajectory && out.steps == next_record) {
      out.trajectory.emplace_back(out.steps, shares());
      next_record *= 2;
    }
  }
  if (record_trajectory && (out.trajectory.empty() || out.trajectory.back().first != out.steps))
    out.trajectory.emplace_back(out.steps, shares());
  return out;
}

int64_t winners_count(const UrnSystem& sys, int64_t n_steps, RngStream s) {
  require(n_steps >= 1, ErrorKind::domain, "n_steps must be >= 1");
  DiscreteOutcome d = simulate_urn_discrete(sys, {n_steps, 0.0}, s);
  int64_t n = 0;
  size_t i = 0;
  for (const auto& g : sys.groups())
    for (int64_t j = 0; j < g.count; ++j, ++i)
      if (d.counts[i] > g.x0) ++n;
  return n;
}

std::vector<double> dirichlet_shares(int64_t agents, RngStream s) {
  require(agents >= 2, ErrorKind::domain, "dirichlet_shares needs A >= 2");
  const size_t A = static_cast<size_t>(agents);
  std::vector<double> z(A), ones(A, 1.0);
  kernels().sojourns(philox_key(s.master_seed), 0, static_cast<uint32_t>(s.replicate), 0, A, ones.data(), z.data());
  double sum = 0.0, comp = 0.0;
  for (double v : z) {
    const double t = sum + v;
    comp += std::fabs(sum) >= v ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  sum += comp;
  for (double& v : z) v /= sum;
  return z;
}

}  // namespace birthtail
