#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("blockprobe-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result run(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "log.txt";
  const std::string cmd =
      std::string("\"") + BLOCKPROBE_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
#ifdef WEXITSTATUS
  r.code = WEXITSTATUS(status);
#else
  r.code = status;
#endif
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

const char* kSmall = R"({"probe": {"runs": 5, "perturbations_per_run": 6},
  "pruning": {"trials": 32, "eval_trials": 32}, "verify": {"draws": 20000}})";

nlohmann::json artifact(const fs::path& out) {
  std::ifstream in(out / "artifact.json");
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  const auto dir = scratch("usage");
  CHECK(run("", dir).code == 1);
  CHECK(run("frobnicate", dir).code == 1);
  CHECK(run("prune --k notanumber", dir).code == 1);
  CHECK(run("verify --preset nope --out " + (dir / "o").string(), dir).code == 1);
  const auto bad = write_config(dir, R"({"probe": {"runz": 3}})");
  const auto r = run("probe --config " + bad.string(), dir);
  CHECK(r.code == 1);
  CHECK(r.output.find("runz") != std::string::npos);
  CHECK(run("--help", dir).code == 0);
}

TEST_CASE("stages need their predecessors") {
  const auto dir = scratch("missing");
  const auto out = (dir / "o").string();
  CHECK(run("vote --out " + out, dir).code == 1);
  const auto cfg = write_config(dir, kSmall);
  CHECK(run("probe --config " + cfg.string() + " --out " + out, dir).code == 0);
  const auto r = run("prune --out " + out, dir);
  CHECK(r.code == 1);
  CHECK(r.output.find("artifact has no 'voting' stage; run 'vote' first") != std::string::npos);
}

TEST_CASE("verify exit codes") {
  const auto dir = scratch("verify");
  const auto ok = write_config(dir, kSmall);
  CHECK(run("verify --config " + ok.string() + " --out " + (dir / "a").string(), dir).code == 0);
  CHECK(fs::exists(dir / "a" / "verify_report.csv"));
  const auto strict = write_config(dir, R"({"verify": {"draws": 200, "tolerance": 1e-9}})");
  CHECK(run("verify --config " + strict.string() + " --out " + (dir / "b").string(), dir).code ==
        2);
}

TEST_CASE("full pipeline is deterministic across job counts") {
  const auto dir = scratch("pipeline");
  const auto cfg = write_config(dir, kSmall).string();
  nlohmann::json first;
  for (const char* jobs : {"1", "3"}) {
    const std::string out = (dir / jobs).string();
    const std::string common = " --config " + cfg + " --out " + out + " --jobs " + jobs;
    REQUIRE(run("probe" + common, dir).code == 0);
    REQUIRE(run("vote" + common, dir).code == 0);
    REQUIRE(run("reweight --low 0.96 --high 1.03" + common, dir).code == 0);
    REQUIRE(run("prune --k 2" + common, dir).code == 0);
    const auto rep = run("report" + common, dir);
    REQUIRE(rep.code == 0);
    for (const char* f : {"voting_scores.csv", "importance_scores.csv", "schedule.csv",
                          "strategies.csv"}) {
      CHECK(fs::exists(fs::path(out) / f));
    }
    const auto a = artifact(out);
    CHECK(a["deterministic"]["config"]["schedule"]["low"] == 0.96);
    CHECK(a["deterministic"]["config"]["pruning"]["k"] == 2);
    if (first.is_null()) {
      first = a["deterministic"];
    } else {
      CHECK(a["deterministic"] == first);
    }
  }
}

TEST_CASE("reweight rejects an inverted range") {
  const auto dir = scratch("range");
  const auto cfg = write_config(dir, kSmall).string();
  const std::string common = " --config " + cfg + " --out " + (dir / "o").string();
  REQUIRE(run("probe" + common, dir).code == 0);
  REQUIRE(run("vote" + common, dir).code == 0);
  CHECK(run("reweight --low 1.1 --high 1.0" + common, dir).code == 1);
}
