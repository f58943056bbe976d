#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

// Exercises the installed binary end to end; FOCALFLOW_CLI_PATH is injected by
// the build so the test never guesses at layout.

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("focalflow-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(FOCALFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

fs::path write_tiny_config(const fs::path& dir) {
  fs::path p = dir / "config.txt";
  std::ofstream(p) << "task = reach\n"
                      "demo_count = 2\n"
                      "demo_length = 24\n"
                      "chunk_size = 2\n"
                      "num_chunks = 2\n"
                      "hidden = 16\n"
                      "time_embed_dim = 4\n"
                      "epochs = 1\n"
                      "steps_per_epoch = 8\n"
                      "batch_size = 8\n"
                      "warmup_steps = 2\n"
                      "eval_episodes = 2\n"
                      "seed = 5\n";
  return p;
}

}  // namespace

TEST_CASE("help and argument errors use the documented exit codes") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("gen --help") == 0);
  CHECK(run_cli("") == 2);                   // a subcommand is required
  CHECK(run_cli("juggle") == 2);             // unknown subcommand
  CHECK(run_cli("train") == 2);              // --config is required
  CHECK(run_cli("gen --task juggle") == 2);  // rejected by the core
}

TEST_CASE("gen, train, eval, verify, sweep round trip") {
  fs::path dir = fresh_dir("roundtrip");
  fs::path cfg = write_tiny_config(dir);
  fs::path demos = dir / "demos.jsonl";
  fs::path run = dir / "run";

  CHECK(run_cli("gen --task reach --count 2 --length 24 --seed 9 --out " + demos.string()) == 0);
  CHECK(fs::exists(demos));

  CHECK(run_cli("train --config " + cfg.string() + " --variant focal --set probe_every=4 --out-dir " +
                run.string()) == 0);
  CHECK(fs::exists(run / "checkpoint.json"));
  CHECK(fs::exists(run / "metrics.jsonl"));
  CHECK(fs::exists(run / "final.json"));
  CHECK(fs::exists(run / "config.resolved"));

  // Resume on a finished run only appends a final evaluation.
  CHECK(run_cli("train --config " + cfg.string() + " --resume --out-dir " + run.string()) == 0);

  fs::path eval_dir = dir / "eval";
  CHECK(run_cli("eval --ckpt " + (run / "checkpoint.json").string() + " --demos " + demos.string() +
                " --episodes 3 --out-dir " + eval_dir.string()) == 0);
  CHECK(fs::exists(eval_dir / "episodes.csv"));
  CHECK(fs::exists(eval_dir / "summary.csv"));
  CHECK(fs::exists(eval_dir / "curves.csv"));
  CHECK(run_cli("eval --ckpt " + (run / "checkpoint.json").string() + " --demos " + demos.string() +
                " --mode sideways") == 2);

  fs::path report = dir / "report.json";
  CHECK(run_cli("verify --only parseval --quiet --report " + report.string()) == 0);
  CHECK(fs::exists(report));
  CHECK(run_cli("verify --only bogus --quiet --report " + report.string()) == 2);

  fs::path grid = dir / "grid.txt";
  std::ofstream(grid) << "base = " << cfg.string() << "\n"
                      << "set steps_per_epoch = 4\n"
                      << "sweep seed = 5, 6\n";
  fs::path sweep_dir = dir / "sweep";
  CHECK(run_cli("sweep --grid " + grid.string() + " --out-dir " + sweep_dir.string()) == 0);
  CHECK(fs::exists(sweep_dir / "summary.csv"));

  // Training in a directory that lacks a checkpoint cannot resume.
  CHECK(run_cli("train --config " + cfg.string() + " --resume --out-dir " +
                (dir / "never-ran").string()) == 2);
}
