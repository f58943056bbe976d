#include "focalflow/focalflow_c.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "focalflow/training.hpp"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("focalflow-capi-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
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

// Trains once through the C interface and returns the run directory.
fs::path trained_run_dir(const fs::path& dir) {
  fs::path cfg = write_tiny_config(dir);
  fs::path run = dir / "run";
  ff_train_summary summary{};
  char buf[512];
  int rc = ff_train(cfg.string().c_str(), nullptr, nullptr, 0, run.string().c_str(), 0, &summary,
                    buf, sizeof(buf));
  REQUIRE(rc == FF_OK);
  REQUIRE(summary.steps == 8);
  REQUIRE(std::string(buf) == run.string());
  return run;
}

}  // namespace

TEST_CASE("version and error strings are always available") {
  REQUIRE(ff_version() != nullptr);
  CHECK(std::string(ff_version()).rfind("focalflow", 0) == 0);
  REQUIRE(ff_last_error() != nullptr);
}

TEST_CASE("demo generation through the c interface") {
  fs::path dir = fresh_dir("gen");
  fs::path out = dir / "demos.jsonl";
  char buf[512];
  int rc = ff_gen_demos("reach", 2, 24, 1, out.string().c_str(), buf, sizeof(buf));
  REQUIRE(rc == FF_OK);
  CHECK(std::string(buf) == out.string());
  CHECK(fs::exists(out));

  rc = ff_gen_demos("juggle", 2, 24, 1, out.string().c_str(), nullptr, 0);
  CHECK(rc == FF_ERR_CONFIG);
  CHECK(std::string(ff_last_error()).find("juggle") != std::string::npos);

  // Resolved path does not fit in two bytes.
  char tiny[2];
  rc = ff_gen_demos("reach", 2, 24, 1, out.string().c_str(), tiny, sizeof(tiny));
  CHECK(rc == FF_ERR_CONFIG);
}

TEST_CASE("training and evaluation through the c interface") {
  fs::path dir = fresh_dir("train-eval");
  fs::path run = trained_run_dir(dir);

  CHECK(ff_train(nullptr, nullptr, nullptr, 0, nullptr, 0, nullptr, nullptr, 0) == FF_ERR_CONFIG);

  fs::path demos = dir / "demos.jsonl";
  REQUIRE(ff_gen_demos("reach", 2, 24, 9, demos.string().c_str(), nullptr, 0) == FF_OK);

  fs::path ckpt = run / "checkpoint.json";
  fs::path eval_dir = dir / "eval";
  ff_eval_summary summary{};
  int rc = ff_eval(ckpt.string().c_str(), demos.string().c_str(), "closed_loop", 3, 0, 7,
                   eval_dir.string().c_str(), &summary);
  REQUIRE(rc == FF_OK);
  CHECK(summary.episodes == 3);
  CHECK(summary.nfe_per_decision == 1.0);
  CHECK(fs::exists(eval_dir / "summary.csv"));

  rc = ff_eval(ckpt.string().c_str(), demos.string().c_str(), "sideways", 3, 0, 7,
               eval_dir.string().c_str(), &summary);
  CHECK(rc == FF_ERR_CONFIG);
}

TEST_CASE("verification through the c interface") {
  fs::path dir = fresh_dir("verify");
  fs::path report = dir / "report.json";
  int all_pass = 0;
  int rc = ff_verify("parseval", 11, report.string().c_str(), 1, &all_pass);
  REQUIRE(rc == FF_OK);
  CHECK(all_pass == 1);
  CHECK(fs::exists(report));

  rc = ff_verify("bogus", 11, report.string().c_str(), 1, &all_pass);
  CHECK(rc == FF_ERR_CONFIG);
}

TEST_CASE("sweep through the c interface") {
  fs::path dir = fresh_dir("sweep");
  fs::path cfg = write_tiny_config(dir);
  fs::path grid = dir / "grid.txt";
  std::ofstream(grid) << "base = " << cfg.string() << "\n"
                      << "set steps_per_epoch = 4\n"
                      << "sweep seed = 5, 6\n";
  char buf[512];
  fs::path out = dir / "sweep-out";
  int rc = ff_sweep(grid.string().c_str(), out.string().c_str(), buf, sizeof(buf));
  REQUIRE(rc == FF_OK);
  CHECK(std::string(buf) == out.string());
  CHECK(fs::exists(out / "summary.csv"));

  CHECK(ff_sweep((dir / "absent.txt").string().c_str(), nullptr, nullptr, 0) == FF_ERR_CONFIG);
}

TEST_CASE("policy handle: geometry, determinism, validation") {
  fs::path dir = fresh_dir("policy");
  fs::path run = trained_run_dir(dir);
  fs::path ckpt = run / "checkpoint.json";

  ff_policy* policy = nullptr;
  REQUIRE(ff_policy_open(ckpt.string().c_str(), &policy) == FF_OK);
  REQUIRE(policy != nullptr);
  CHECK(ff_policy_obs_dim(policy) == 4);
  CHECK(ff_policy_horizon(policy) == 4);
  CHECK(ff_policy_action_dim(policy) == 2);
  CHECK(ff_policy_obs_dim(nullptr) == 0);

  std::vector<double> obs{0.1, 0.2, 0.3, 0.4};
  std::vector<double> a(8), b(8), c(8);
  CHECK(ff_policy_infer(policy, obs.data(), obs.size(), 42, a.data(), a.size()) == FF_OK);
  CHECK(ff_policy_infer(policy, obs.data(), obs.size(), 42, b.data(), b.size()) == FF_OK);
  CHECK(ff_policy_infer(policy, obs.data(), obs.size(), 43, c.data(), c.size()) == FF_OK);
  CHECK(a == b);
  CHECK(a != c);

  CHECK(ff_policy_infer(policy, obs.data(), 3, 42, a.data(), a.size()) == FF_ERR_CONFIG);
  CHECK(ff_policy_infer(policy, obs.data(), obs.size(), 42, a.data(), 7) == FF_ERR_CONFIG);
  CHECK(ff_policy_infer(nullptr, obs.data(), obs.size(), 42, a.data(), a.size()) == FF_ERR_CONFIG);
  ff_policy_close(policy);
  ff_policy_close(nullptr);

  ff_policy* missing = reinterpret_cast<ff_policy*>(0x1);
  CHECK(ff_policy_open((dir / "absent.json").string().c_str(), &missing) == FF_ERR_CONFIG);
  CHECK(missing == nullptr);
  CHECK(ff_policy_open(ckpt.string().c_str(), nullptr) == FF_ERR_CONFIG);

  // Expert-replay fixtures carry no parameters worth standing a policy on.
  focalflow::Checkpoint ck = focalflow::load_checkpoint(ckpt);
  ck.oracle = true;
  fs::path oracle_path = dir / "oracle.json";
  focalflow::save_checkpoint(oracle_path, ck);
  ff_policy* oracle = nullptr;
  CHECK(ff_policy_open(oracle_path.string().c_str(), &oracle) == FF_ERR_CONFIG);
  CHECK(std::string(ff_last_error()).find("oracle") != std::string::npos);
}
