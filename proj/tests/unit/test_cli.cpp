#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "coinfer/experiment.hpp"
#include "coinfer/training.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "coinfer_cli_test";

std::string profile_arg() { return std::string(" --profile ") + COINFER_TEST_DATA_DIR "/alexnet_branchy.profile"; }

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + COINFER_CLI_PATH " " + args + " > " +
                          (kWork / "stdout.txt").string() + " 2> " + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Workdir() { fs::remove_all(kWork); }
};

}  // namespace

TEST_CASE("profile validate") {
  Workdir w;
  CHECK(run("profile validate " COINFER_TEST_DATA_DIR "/alexnet_branchy.profile") == 0);
  std::ofstream(kWork / "bad.profile") << R"({"format": "coinfer-profile", "version": 1})";
  CHECK(run("profile validate " + (kWork / "bad.profile").string()) == 1);
  CHECK(run("profile validate " + (kWork / "missing.profile").string()) == 1);
}

TEST_CASE("usage errors") {
  Workdir w;
  CHECK(run("") == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("evaluate") == 1);
  CHECK(run("evaluate --bandwidth 1e6 --ep 9 --pp 0 --c 8" + profile_arg()) == 1);
  CHECK(run("oracle --bandwidth 1e6 --mode carrier-pigeon" + profile_arg()) == 1);
  std::ofstream(kWork / "bad.json") << R"({"horizon": -3})";
  CHECK(run("oracle --bandwidth 1e6", "COINFER_CONFIG=" + (kWork / "bad.json").string()) == 1);
  CHECK(run("oracle --bandwidth 1e6 --config " + (kWork / "nope.json").string()) == 1);
}

TEST_CASE("evaluate and oracle write stable CSVs") {
  Workdir w;
  const std::string out = " --out-dir " + kWork.string();
  REQUIRE(run("evaluate --bandwidth 1e6 --ep 2 --pp 5 --c 8" + profile_arg() + out) == 0);
  CHECK(first_line(kWork / "evaluate.csv") ==
        "bandwidth_bps,ep,pp,c,feasible,device_latency_ms,transmission_latency_ms,edge_latency_ms,"
        "latency_ms,compute_energy_j,transmission_energy_j,energy_j,accuracy,transmitted_bytes,"
        "reward");
  CHECK(line_count(kWork / "evaluate.csv") == 2);

  REQUIRE(run("evaluate --bandwidth 1e6 --all" + profile_arg() + out) == 0);
  CHECK(line_count(kWork / "evaluate.csv") == 133);

  REQUIRE(run("oracle --bandwidth 0,1e6,1e7" + profile_arg() + out) == 0);
  CHECK(first_line(kWork / "oracle.csv") == coinfer::kSweepHeader);
  CHECK(line_count(kWork / "oracle.csv") == 4);

  REQUIRE(run("quantize-report" + profile_arg() + out) == 0);
  CHECK(first_line(kWork / "quantize_report.csv") ==
        "layer,name,kind,bits,raw_bytes,compressed_bytes,ratio,exit,accuracy_after");
}

TEST_CASE("config from the environment") {
  Workdir w;
  std::ofstream(kWork / "cfg.json") << R"({"profile": ")" COINFER_TEST_DATA_DIR
                                       R"(/alexnet_branchy.profile", "bits": [8, 16]})";
  REQUIRE(run("evaluate --bandwidth 1e6 --all --out-dir " + kWork.string(),
              "COINFER_CONFIG=" + (kWork / "cfg.json").string()) == 0);
  CHECK(line_count(kWork / "evaluate.csv") == 1 + 132 / 3 * 2);
}

TEST_CASE("train then sweep") {
  Workdir w;
  const std::string out = " --out-dir " + kWork.string();
  std::ofstream(kWork / "cfg.json") << R"({"profile": ")" COINFER_TEST_DATA_DIR
                                       R"(/alexnet_branchy.profile",
    "sac": {"hidden": [16, 16]}, "dqn": {"hidden": [16, 16]},
    "training": {"warmup_steps": 50, "log_every": 100}})";
  const std::string cfg = " --config " + (kWork / "cfg.json").string();
  REQUIRE(run("train --agent sac --steps 300 --quiet" + cfg + out) == 0);
  REQUIRE(run("train --agent dqn --steps 300 --quiet" + cfg + out) == 0);
  CHECK(first_line(kWork / "sac_metrics.csv") == coinfer::kMetricsHeader);
  CHECK(line_count(kWork / "sac_metrics.csv") == 4);
  CHECK(fs::exists(kWork / "dqn_checkpoint.json"));

  REQUIRE(run("sweep --grid 0,5e6,1e7 --checkpoint " + (kWork / "sac_checkpoint.json").string() +
              " --checkpoint " + (kWork / "dqn_checkpoint.json").string() + cfg + out) == 0);
  CHECK(first_line(kWork / "sweep.csv") == coinfer::kSweepHeader);
  CHECK(line_count(kWork / "sweep.csv") == 1 + 3 * 4);
  CHECK(first_line(kWork / "summary.csv") == coinfer::kSummaryHeader);
  CHECK(line_count(kWork / "summary.csv") == 1 + 4);

  // A checkpoint trained on a different action space is a validation error.
  CHECK(run("sweep --bits 8,16 --checkpoint " + (kWork / "sac_checkpoint.json").string() + cfg +
            out) == 1);
  std::ofstream(kWork / "junk.json") << "{not json";
  CHECK(run("sweep --checkpoint " + (kWork / "junk.json").string() + cfg + out) == 1);
}
