#include <doctest.h>

#include "thickstab/io.hpp"
#include "thickstab/runner.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace thickstab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("thickstab_runner_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.ini";
  std::ofstream(p) << text;
  return p;
}

struct Outcome {
  int code;
  std::string log;
  std::string err;
};

Outcome run(const std::string& scenario, const fs::path& config, const fs::path& out,
            std::vector<std::string> overrides = {}) {
  std::ostringstream log, err;
  const int code = run_scenario({scenario, config, std::move(overrides), out}, log, err);
  return {code, log.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

const char* kQa = "scenario = qa\n[symbol]\nfamily = halfheat\n[run]\nk_max = 100\n";

const char* kThick =
    "[grid]\ndim = 1\nextent = 8\npoints = 256\n"
    "[mask]\nkind = random\nL = 1\ngamma = 0.3\nseed = 42\n"
    "[run]\nL = 1, 2\n";

}  // namespace

TEST_CASE("catalog") {
  CHECK(scenario_catalog().size() == 10);
  const auto j = nlohmann::json::parse(list_scenarios(true));
  CHECK(j.size() == 10);
  for (const auto& e : j) CHECK_FALSE(e["anchor"].get<std::string>().empty());
  CHECK(list_scenarios(false).find("negative-limit") != std::string::npos);
}

TEST_CASE("qa scenario writes 101 rows") {
  const fs::path dir = scratch("qa");
  const Outcome o = run("qa", write_config(dir, kQa), dir / "out");
  REQUIRE(o.code == kExitOk);
  const std::string csv = read_file(dir / "out" / "moments.csv");
  CHECK(csv.rfind("k,log_moment,argmax,ratio,dc_partial_sum\n", 0) == 0);
  CHECK(count_lines(csv) == 102);
  const auto manifest = nlohmann::json::parse(read_file(dir / "out" / "manifest.json"));
  CHECK(manifest["results"]["log_convex"] == true);
  CHECK(manifest["outputs"]["moments.csv"] == git_blob_hash(csv));
  CHECK(manifest["inputs"]["config"] == git_blob_hash(read_file(dir / "config.ini")));
  CHECK(manifest["resolved_config"]["run"]["k_max"] == "100");
}

TEST_CASE("validation errors exit 2 and name the key") {
  const fs::path dir = scratch("validation");
  const fs::path cfg = write_config(dir, std::string(kThick) + "");
  const Outcome typo = run("thick-check", cfg, dir / "a", {"mask.gama=0.3"});
  CHECK(typo.code == kExitValidation);
  CHECK(typo.err.find("mask.gama") != std::string::npos);

  const Outcome wrong = run("stabilize", write_config(dir, kQa), dir / "b");
  CHECK(wrong.code == kExitValidation);

  const fs::path noseed = write_config(dir, "[grid]\nextent = 8\npoints = 64\n[mask]\nkind = random\nL = 1\ngamma = 0.3\n[run]\nL = 1\n");
  const Outcome seed = run("thick-check", noseed, dir / "c");
  CHECK(seed.code == kExitValidation);
  CHECK(seed.err.find("mask.seed") != std::string::npos);

  const Outcome bad_number = run("qa", write_config(dir, kQa), dir / "d", {"run.k_max=ten"});
  CHECK(bad_number.code == kExitValidation);
  CHECK(bad_number.err.find("run.k_max") != std::string::npos);

  CHECK(run("nope", write_config(dir, kQa), dir / "e").code == kExitValidation);
}

TEST_CASE("numerical failures exit 3") {
  const fs::path dir = scratch("numerical");
  const Outcome o = run("qa", write_config(dir, kQa), dir / "out", {"symbol.family=saturating"});
  CHECK(o.code == kExitNumerical);
  CHECK(o.err.find("supremum infinite") != std::string::npos);
}

TEST_CASE("stabilize manifest") {
  const fs::path dir = scratch("stabilize");
  const fs::path cfg = write_config(dir,
                                    "[grid]\ndim = 1\nextent = 16\npoints = 64\n"
                                    "[symbol]\nfamily = halfheat\n"
                                    "[mask]\nkind = periodic\nperiod = 1\nfill = 0.5\n"
                                    "[initial]\nkind = gaussian\nwidth = 1\n"
                                    "[run]\nR = 2\nC = measured\nseed = 1\nT = 0.5\n");
  const Outcome o = run("stabilize", cfg, dir / "out");
  REQUIRE(o.code == kExitOk);
  const auto manifest = nlohmann::json::parse(read_file(dir / "out" / "manifest.json"));
  CHECK(manifest["results"].contains("fitted_rate"));
  CHECK(manifest["results"].contains("predicted_rate"));
  CHECK(manifest["results"].contains("lambda"));
  const std::string csv = read_file(dir / "out" / "trajectory.csv");
  CHECK(csv.rfind("t,norm,lyapunov,low_norm,high_norm\n", 0) == 0);
}

TEST_CASE("determinism") {
  const fs::path dir = scratch("determinism");
  const fs::path thick = write_config(dir, kThick);
  REQUIRE(run("thick-check", thick, dir / "a").code == kExitOk);
  REQUIRE(run("thick-check", thick, dir / "b").code == kExitOk);
  CHECK(read_file(dir / "a" / "thickness.csv") == read_file(dir / "b" / "thickness.csv"));
  CHECK(read_file(dir / "a" / "manifest.json") == read_file(dir / "b" / "manifest.json"));

  const fs::path obs = dir / "obs.ini";
  std::ofstream(obs) << "[grid]\nextent = 32\npoints = 256\n[symbol]\nfamily = fractional\ns = 1\n"
                        "[mask]\nkind = periodic\nperiod = 1\nfill = 0.5\n"
                        "[run]\nT = 1\nepsilon = 0.5\nseed = 5\nprobes = 8\n";
  REQUIRE(run("observability", obs, dir / "c").code == kExitOk);
  REQUIRE(run("observability", obs, dir / "d").code == kExitOk);
  CHECK(read_file(dir / "c" / "probes.csv") == read_file(dir / "d" / "probes.csv"));
}

#ifdef THICKSTAB_CLI_PATH
TEST_CASE("command line front end") {
  const fs::path dir = scratch("cli");
  const fs::path cfg = write_config(dir, kQa);
  auto sh = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const std::string exe = THICKSTAB_CLI_PATH;
  CHECK(sh(exe + " list") == 0);
  CHECK(sh(exe + " list --json") == 0);
  CHECK(sh(exe + " qa --config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "moments.csv"));
  CHECK(sh(exe + " qa --config " + cfg.string() + " --set run.kmax=3 --out " + (dir / "x").string()) == 2);
  CHECK(sh(exe + " qa --out " + (dir / "y").string()) == 2);
  CHECK(sh(exe + " bogus") == 2);
}
#endif
