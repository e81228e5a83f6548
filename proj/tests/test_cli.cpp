#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "birthtail/io.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "birthtail_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const std::string err = (scratch() / "stderr.txt").string();
  const std::string cmd = std::string(BIRTHTAIL_CLI_PATH) + " " + args + " 2>" + err;
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = birthtail::read_file(err);
  return r;
}

std::string write_system(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("cli: paper examples") {
  auto c = run("c-constant --rate poly:alpha=1,beta=2 --agents 3 --a 2");
  CHECK(c.code == 0);
  CHECK(std::fabs(std::stod(c.out) - 1.121) <= 0.01);
  auto q = run("quasi-limit --rate poly:alpha=1,beta=2 --x0 1 --x 1");
  CHECK(q.code == 0);
  CHECK(q.out == "0.5\n");
  auto sym = run("c-constant --rate poly:alpha=1,beta=2 --agents 3 --a 2 --method symmetric");
  CHECK(std::fabs(std::stod(sym.out) - std::stod(c.out)) < 1e-9);
}

TEST_CASE("cli: simulations are reproducible") {
  const std::string sys = write_system("sys.cfg", "# two agents\nagent=poly:alpha=1,beta=2@1\n\nagent=poly:alpha=1,beta=3@1\n");
  auto a = run("simulate-urn --system " + sys + " --replicates 10 --seed 7");
  auto b = run("simulate-urn --system " + sys + " --replicates 10 --seed 7");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("replicate,winner,n_mon,x_inf_1,x_inf_2,bias_bound\n", 0) == 0);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 11);
  auto w1 = run("simulate-urn --system " + sys + " --replicates 200 --seed 7 --workers 1");
  auto w3 = run("simulate-urn --system " + sys + " --replicates 200 --seed 7 --workers 3");
  CHECK(w1.out == w3.out);
  auto d = run("simulate-urn --system " + sys + " --replicates 5 --seed 7 --mode discrete --share-threshold 0.99");
  CHECK(d.code == 0);
  auto e1 = run("simulate-birth --rate poly:alpha=1,beta=2 --t 1 --replicates 50 --seed 3 --workers 1");
  auto e2 = run("simulate-birth --rate poly:alpha=1,beta=2 --t 1 --replicates 50 --seed 3 --workers 2");
  CHECK(e1.code == 0);
  CHECK(e1.out == e2.out);
  CHECK(e1.out.rfind("replicate,state,exploded,jumps,stop_reason\n", 0) == 0);
}

TEST_CASE("cli: exit codes") {
  CHECK(run("--help").code == 0);
  CHECK(run("density --help").code == 0);
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("quasi-limit --rate poly:alpha=1,beta=2 --x 1 --bogus 3").code == 1);
  CHECK(run("quasi-limit --rate poly:alpha=1,beta=2").code == 1);
  auto bad = run("quasi-limit --rate poly:alpha=0,beta=2 --x 1");
  CHECK(bad.code == 1);
  CHECK(bad.err.find("domain") != std::string::npos);
  CHECK(run("quasi-limit --rate poly:alpha=1,beta=2 --x 1 --x0 0").code == 1);
  CHECK(run("quasi-limit --rate nonsense --x 1").code == 1);
  CHECK(run("simulate-birth --rate poly:alpha=1,beta=2 --t 1").code == 1);  // no seed
  CHECK(run("c-constant --rate const:lambda=1 --agents 3").code == 1);
  CHECK(run("experiment run fig9").code == 1);
  auto prec = run("density --rate exp:beta=1 --n 100 --t 1e-30");
  CHECK(prec.code == 2);
  CHECK(prec.err.find("precision") != std::string::npos);
}

TEST_CASE("cli: outputs and atomic files") {
  auto g = run("density --rate poly:alpha=1,beta=2 --t 0,0.5,1");
  CHECK(g.code == 0);
  CHECK(g.out.rfind("t,value,kind\n0,0,density\n0.5,", 0) == 0);
  auto h = run("density --rate poly:alpha=1,beta=2 --t 50 --kind hazard");
  CHECK(h.out == "t,value,kind\n50,1,hazard\n");
  auto s = run("survival --rate poly:alpha=1,beta=2 --t 0,1");
  CHECK(s.out.find("0,1,survival\n") != std::string::npos);

  const std::string out = (scratch() / "grid.csv").string();
  CHECK(run("density --rate exp:beta=1 --t-max 5 --points 10 --out " + out).code == 0);
  CHECK(birthtail::read_file(out) == run("density --rate exp:beta=1 --t-max 5 --points 10").out);
  const std::string failed = (scratch() / "never.csv").string();
  CHECK(run("density --rate exp:beta=1 --n 100 --t 1e-30 --out " + failed).code == 2);
  CHECK_FALSE(fs::exists(failed));
  for (const auto& e : fs::directory_iterator(scratch()))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);

  auto p = run("predict-tail --model birth --rate poly:alpha=1,beta=2 --t 1 --x 10,20");
  CHECK(p.code == 0);
  auto j = nlohmann::json::parse(p.out);
  CHECK(j["kind"] == "power");
  CHECK(j["exponent"] == -1.0);
  CHECK(j["values"].size() == 2);
  const std::string sys = write_system("lin.cfg", "agent=poly:alpha=1,beta=1@1\nagent=poly:alpha=1,beta=2@1\n");
  auto b = run("predict-tail --model band --system " + sys + " --agent 1 --x 5");
  CHECK(b.code == 0);
  CHECK(nlohmann::json::parse(b.out)["kind"] == "band");
  auto m = run("montime --system " + write_system("m.cfg", "agent=poly:alpha=1,beta=3@1\nagent=poly:alpha=1,beta=2@1\n"));
  CHECK(m.code == 0);
  CHECK(nlohmann::json::parse(m.out)["flags"][0] == "assumes-condMonTime");
}

TEST_CASE("cli: experiments") {
  auto l = run("experiment list");
  CHECK(l.code == 0);
  CHECK(l.out.find("fig1-birth-tail\t") != std::string::npos);
  CHECK(l.out.find("table-c-constants\t") != std::string::npos);
  CHECK(l.out.find("winners-count\t") != std::string::npos);
  const fs::path dir = scratch() / "exp";
  const std::string cfg = write_system("exp.cfg", "table-c-constants.agents=3\n");
  auto r = run("experiment run table-c-constants --out-dir " + dir.string() + " --config " + cfg + " --set rates=poly:alpha=1,beta=2");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "table-c-constants.report.jsonl"));
  CHECK(fs::exists(dir / "table-c-constants.table.csv"));
  CHECK(r.out.find("pass\tc[poly:alpha=1,beta=2,A=3,a=2]") != std::string::npos);
  CHECK(run("experiment run table-c-constants --out-dir " + dir.string() + " --set nope=1").code == 1);
}
