#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "birthtail/analytics.hpp"
#include "birthtail/asymptotics.hpp"
#include "birthtail/density.hpp"
#include "birthtail/error.hpp"
#include "birthtail/experiments.hpp"
#include "birthtail/io.hpp"
#include "birthtail/rates.hpp"
#include "birthtail/sim.hpp"
#include "birthtail/system.hpp"

using namespace birthtail;

namespace {

void emit(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text << std::flush;
  else
    atomic_write(out, text);
}

std::vector<double> time_grid(const std::vector<double>& t, double t_min, double t_max, int64_t points) {
  if (!t.empty()) return t;
  require(points >= 1, ErrorKind::domain, "--points must be >= 1");
  require(t_min >= 0.0 && t_max >= t_min, ErrorKind::domain, "need 0 <= --t-min <= --t-max");
  std::vector<double> g;
  for (int64_t i = 0; i <= points; ++i)
    g.push_back(t_min + (t_max - t_min) * static_cast<double>(i) / static_cast<double>(points));
  return g;
}

UrnSystem load_system(const std::string& path) { return parse_system(read_file(path)); }

int workers_or_default(int w) { return w > 0 ? w : default_workers(); }

// inserts "values":[[x, v], ...] before the closing brace of a prediction record
std::string with_values(const std::string& json, const std::vector<double>& xs,
                        const std::function<double(double)>& fn) {
  if (xs.empty() || !fn) return json;
  std::string v = ",\"values\":[";
  for (size_t i = 0; i < xs.size(); ++i)
    v += (i ? "," : "") + std::string("[") + fmt12(xs[i]) + "," + fmt12(fn(xs[i])) + "]";
  v += "]";
  return json.substr(0, json.size() - 1) + v + "}";
}

std::string band_json(const TailPrediction& p, const std::vector<double>& xs) {
  std::string j = to_json(p);
  if (xs.empty()) return j;
  std::string v = ",\"band\":[";
  for (size_t i = 0; i < xs.size(); ++i)
    v += (i ? "," : "") + std::string("[") + fmt12(xs[i]) + "," + fmt12(p.lower(xs[i])) + "," +
         fmt12(p.upper(xs[i])) + "]";
  v += "]";
  return j.substr(0, j.size() - 1) + v + "}";
}

QuadratureParams quad_from(double step, double s_max, int n) {
  QuadratureParams q;
  q.step = step;
  q.s_max = s_max;
  q.truncation_n = n;
  return q;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explosive birth processes and generalized Polya urns"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  std::string out;
  auto add_out = [&](CLI::App* c) { c->add_option("--out", out, "Write output to this file (atomically) instead of stdout"); };

  // density / survival
  std::string rate;
  int64_t x0 = 1, x = 1;
  int trunc_n = 100;
  std::vector<double> ts;
  double t_min = 0.0, t_max = 10.0;
  int64_t points = 100;
  std::string grid_kind = "density";
  auto grid_options = [&](CLI::App* c) {
    c->add_option("--rate", rate, "Rate spec, e.g. poly:alpha=1,beta=2")->required();
    c->add_option("--x0", x0, "Initial state")->capture_default_str();
    c->add_option("--n", trunc_n, "Number of summands of the explosion time")->capture_default_str();
    c->add_option("--t", ts, "Comma-separated time points (overrides the grid)")->delimiter(',');
    c->add_option("--t-min", t_min, "Grid start")->capture_default_str();
    c->add_option("--t-max", t_max, "Grid end")->capture_default_str();
    c->add_option("--points", points, "Grid intervals")->capture_default_str();
    add_out(c);
  };
  auto* density = app.add_subcommand("density", "Explosion-time density, survival or hazard on a time grid (CSV t,value,kind)");
  grid_options(density);
  density->add_option("--kind", grid_kind, "density | survival | hazard")
      ->check(CLI::IsMember({"density", "survival", "hazard"}))
      ->capture_default_str();
  auto* survival = app.add_subcommand("survival", "Explosion-time survival P(T > t) on a time grid (CSV t,value,kind)");
  grid_options(survival);

  // predict-tail
  std::string model = "birth", system_path, target = "min";
  double t_obs = 1.0, step = 1e-4, s_max = 50.0;
  int64_t agent = 1, a = 2;
  std::vector<double> xs;
  auto* predict = app.add_subcommand("predict-tail", "Asymptotic tail prediction as a JSON record");
  predict->add_option("--model", model, "birth | loser | tailcor | band")
      ->check(CLI::IsMember({"birth", "loser", "tailcor", "band"}))
      ->capture_default_str();
  predict->add_option("--rate", rate, "Rate spec (birth)");
  predict->add_option("--x0", x0, "Initial state (birth)")->capture_default_str();
  predict->add_option("--t", t_obs, "Observation time (birth)")->capture_default_str();
  predict->add_option("--n", trunc_n, "Summands of the explosion time")->capture_default_str();
  predict->add_option("--system", system_path, "System file with agent=<rate-spec>@<x0> lines (loser, tailcor, band)");
  predict->add_option("--agent", agent, "Agent index, 1-based (loser, band)")->capture_default_str();
  predict->add_option("--a", a, "Number of losers (tailcor)")->capture_default_str();
  predict->add_option("--target", target, "min | max | sum (tailcor)")->capture_default_str();
  predict->add_option("--step", step, "Quadrature step")->capture_default_str();
  predict->add_option("--s-max", s_max, "Quadrature interval end")->capture_default_str();
  predict->add_option("--x", xs, "Comma-separated points at which to evaluate the prediction")->delimiter(',');
  add_out(predict);

  // quasi-limit
  auto* quasi = app.add_subcommand("quasi-limit", "Limit of P(X(t) > x | T > t) as t -> inf");
  quasi->add_option("--rate", rate, "Rate spec")->required();
  quasi->add_option("--x0", x0, "Initial state")->capture_default_str();
  quasi->add_option("--x", x, "Threshold x >= x0")->required();

  // simulate-birth
  std::optional<uint64_t> seed;
  int64_t replicates = 1;
  int64_t max_jumps = 0;
  int workers = 0;
  auto* sim_birth = app.add_subcommand("simulate-birth", "Simulate a birth process up to time t (CSV)");
  sim_birth->add_option("--rate", rate, "Rate spec")->required();
  sim_birth->add_option("--x0", x0, "Initial state")->capture_default_str();
  sim_birth->add_option("--t", t_obs, "Observation time")->required();
  sim_birth->add_option("--replicates", replicates, "Number of replicates")->capture_default_str();
  sim_birth->add_option("--seed", seed, "Master seed (required)")->required();
  sim_birth->add_option("--max-jumps", max_jumps, "Jump cap; 0 uses 10^6 (100 for exponential feedback)")
      ->capture_default_str();
  sim_birth->add_option("--workers", workers, "Worker threads (default BIRTHTAIL_WORKERS or all cores)");
  add_out(sim_birth);

  // simulate-urn
  std::string mode = "embedded";
  double eps = 1e-12, share = 0.0;
  int64_t max_steps = -1;
  auto* sim_urn = app.add_subcommand("simulate-urn", "Simulate a generalized Polya urn (CSV)");
  sim_urn->add_option("--system", system_path, "System file with agent=<rate-spec>@<x0> lines")->required();
  sim_urn->add_option("--replicates", replicates, "Number of replicates")->capture_default_str();
  sim_urn->add_option("--seed", seed, "Master seed (required)")->required();
  sim_urn->add_option("--workers", workers, "Worker threads (default BIRTHTAIL_WORKERS or all cores)");
  sim_urn->add_option("--mode", mode, "embedded | discrete")
      ->check(CLI::IsMember({"embedded", "discrete"}))
      ->capture_default_str();
  sim_urn->add_option("--eps", eps, "Decision error budget of the embedding")->capture_default_str();
  sim_urn->add_option("--max-steps", max_steps, "Discrete mode: step limit (< 0: none)")->capture_default_str();
  sim_urn->add_option("--share-threshold", share, "Discrete mode: stop once a share exceeds this (0: off)")
      ->capture_default_str();
  add_out(sim_urn);

  // c-constant
  int64_t agents = 0;
  std::string method = "general";
  auto* cconst = app.add_subcommand("c-constant", "Loser correlation constant c(A, a)");
  cconst->add_option("--rate", rate, "Rate spec of a symmetric system");
  cconst->add_option("--agents", agents, "System size A (symmetric system)");
  cconst->add_option("--x0", x0, "Initial state (symmetric system)")->capture_default_str();
  cconst->add_option("--system", system_path, "System file (instead of --rate/--agents)");
  cconst->add_option("--a", a, "Number of losers")->capture_default_str();
  cconst->add_option("--method", method, "general | symmetric")
      ->check(CLI::IsMember({"general", "symmetric"}))
      ->capture_default_str();
  cconst->add_option("--step", step, "Quadrature step")->capture_default_str();
  cconst->add_option("--s-max", s_max, "Quadrature interval end")->capture_default_str();
  cconst->add_option("--n", trunc_n, "Summands of each explosion time")->capture_default_str();

  // montime
  int64_t winner = 1;
  int64_t mc_replicates = 100000;
  auto* montime = app.add_subcommand("montime", "Monopoly-time tail prediction as a JSON record");
  montime->add_option("--system", system_path, "System file")->required();
  montime->add_option("--winner", winner, "Winning agent, 1-based")->capture_default_str();
  montime->add_option("--seed", seed, "Seed for the Monte Carlo constant (sub-linear losers only)");
  montime->add_option("--replicates", mc_replicates, "Monte Carlo size (sub-linear losers only)")->capture_default_str();
  montime->add_option("--workers", workers, "Worker threads");
  montime->add_option("--x", xs, "Comma-separated n at which to evaluate the prediction")->delimiter(',');
  add_out(montime);

  // experiment list | run
  auto* exp = app.add_subcommand("experiment", "Registered paper reproductions");
  exp->require_subcommand(1);
  auto* exp_list = exp->add_subcommand("list", "List experiments and their parameters");
  bool show_params = false;
  exp_list->add_flag("--params", show_params, "Also print each experiment's parameters and defaults");
  auto* exp_run = exp->add_subcommand("run", "Run an experiment, writing CSV curves and <name>.report.jsonl");
  std::string exp_name, out_dir = ".", config_path;
  std::vector<std::string> sets;
  exp_run->add_option("name", exp_name, "Experiment name")->required();
  exp_run->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  exp_run->add_option("--config", config_path, "Config file of <experiment>.<key>=value lines");
  exp_run->add_option("--set", sets, "Parameter override key=value (repeatable)");
  exp_run->add_option("--workers", workers, "Worker threads (default BIRTHTAIL_WORKERS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*density || *survival) {
      const std::string kind = *survival ? "survival" : grid_kind;
      const GridKind gk = kind == "hazard" ? GridKind::hazard : kind == "survival" ? GridKind::survival : GridKind::density;
      const ExplosionModel m(parse_rate(rate), x0, trunc_n);
      emit(out, to_csv(density_grid(m, time_grid(ts, t_min, t_max, points), gk)));
    } else if (*predict) {
      std::string j;
      if (model == "birth") {
        require(!rate.empty(), ErrorKind::parse, "--model birth needs --rate");
        const ExplosionModel m(parse_rate(rate), x0, trunc_n);
        const TailPrediction p = birth_tail_prediction(m, t_obs);
        j = with_values(to_json(p), xs, p.value);
      } else {
        require(!system_path.empty(), ErrorKind::parse, "--model " + model + " needs --system");
        const UrnSystem sys = load_system(system_path);
        const QuadratureParams q = quad_from(step, s_max, trunc_n);
        if (model == "loser") {
          const TailPrediction p = loser_tail(sys, agent - 1, q);
          j = with_values(to_json(p), xs, p.value);
        } else if (model == "tailcor") {
          const TailPrediction p = tailcor_constants(sys, a, parse_tail_target(target), q);
          j = with_values(to_json(p), xs, p.value);
        } else {
          j = band_json(sublinear_band(sys, agent - 1), xs);
        }
      }
      emit(out, j + "\n");
    } else if (*quasi) {
      std::cout << fmt12(quasi_limit_tail(parse_rate(rate), x0, x)) << "\n";
    } else if (*sim_birth) {
      const RateFunction f = parse_rate(rate);
      const int64_t cap = max_jumps > 0 ? max_jumps : default_max_jumps(f);
      auto v = run_batch(replicates, *seed, workers_or_default(workers),
                         [&](RngStream s) { return simulate_birth(f, x0, t_obs, cap, s); });
      emit(out, birth_csv(v));
    } else if (*sim_urn) {
      const UrnSystem sys = load_system(system_path);
      sys.validate();
      if (mode == "embedded") {
        EmbedParams ep;
        ep.eps = eps;
        auto v = run_batch(replicates, *seed, workers_or_default(workers),
                           [&](RngStream s) { return simulate_urn_embedded(sys, s, ep); });
        emit(out, urn_csv(v, sys.size()));
      } else {
        require(max_steps >= 0 || share > 0.0, ErrorKind::domain,
                "discrete mode needs --max-steps or --share-threshold");
        DiscreteStop st;
        st.max_steps = max_steps;
        st.share_threshold = share;
        auto v = run_batch(replicates, *seed, workers_or_default(workers),
                           [&](RngStream s) { return simulate_urn_discrete(sys, st, s); });
        std::ostringstream os;
        os << "replicate,steps,stop_reason";
        for (int64_t i = 1; i <= sys.size(); ++i) os << ",count_" << i;
        os << "\n";
        for (size_t r = 0; r < v.size(); ++r) {
          os << r << ',' << v[r].steps << ',' << v[r].stop_reason;
          for (int64_t c : v[r].counts) os << ',' << c;
          os << "\n";
        }
        emit(out, os.str());
      }
    } else if (*cconst) {
      const QuadratureParams q = quad_from(step, s_max, trunc_n);
      double c;
      if (!system_path.empty()) {
        require(method == "general", ErrorKind::parse, "--method symmetric needs --rate and --agents");
        c = correlation_constant(load_system(system_path), a, q);
      } else {
        require(!rate.empty() && agents > 0, ErrorKind::parse, "c-constant needs --system or --rate with --agents");
        const RateFunction f = parse_rate(rate);
        c = method == "symmetric" ? correlation_constant_symmetric(f, x0, agents, a, q)
                                  : correlation_constant(UrnSystem::symmetric(f, x0, agents), a, q);
      }
      std::cout << fmt12(c) << "\n";
    } else if (*montime) {
      MonTimeParams mp;
      mp.replicates = mc_replicates;
      mp.seeded = seed.has_value();
      mp.seed = seed.value_or(0);
      mp.workers = workers;
      const TailPrediction p = monopoly_tail(load_system(system_path), winner - 1, mp);
      emit(out, with_values(to_json(p), xs, p.value) + "\n");
    } else if (*exp_list) {
      for (const auto& e : list_experiments()) {
        std::cout << e.name << "\t" << e.description << "\n";
        if (show_params)
          for (const auto& [k, v] : experiment_defaults(e.name)) std::cout << "  " << e.name << "." << k << "=" << v << "\n";
      }
    } else if (*exp_run) {
      ExperimentOptions opt;
      opt.output_dir = out_dir;
      opt.workers = workers;
      if (!config_path.empty()) opt.config_text = read_file(config_path);
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        require(eq != std::string::npos && eq > 0, ErrorKind::parse, "--set expects key=value, got '" + s + "'");
        opt.overrides[s.substr(0, eq)] = s.substr(eq + 1);
      }
      const ExperimentReport r = run_experiment(exp_name, opt);
      for (const auto& m : r.metrics)
        std::cout << to_string(m.verdict) << "\t" << m.name << "\t" << (m.value ? fmt12(*m.value) : "null") << "\n";
      std::cout << "report\t" << r.artifacts.back() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "birthtail: " << e.what() << "\n";
    return e.kind() == ErrorKind::precision ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "birthtail: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
