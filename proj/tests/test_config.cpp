#include "focalflow/config.hpp"

#include <string>

#include "doctest.h"
#include "focalflow/errors.hpp"

using namespace focalflow;

TEST_CASE("key-value parsing: comments, whitespace, duplicates") {
  KeyValues kv = parse_key_values(
      "# full-line comment\n"
      "\n"
      "  task = reach   # trailing comment\n"
      "batch_size=32\n"
      "batch_size = 64\n"
      "hidden = 16, 16\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("task") == "reach");
  CHECK(kv.at("batch_size") == "64");  // last assignment wins
  CHECK(kv.at("hidden") == "16, 16");
}

TEST_CASE("malformed lines report their line number") {
  try {
    parse_key_values("task = reach\nnonsense line\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_key_values("= reach\n"), ConfigError);
}

TEST_CASE("config round trips through its key-value form") {
  TrainConfig cfg;
  cfg.task = TaskId::kPickSketch;
  cfg.hidden = {48, 24};
  cfg.batch_size = 17;
  cfg.learning_rate = 2.5e-4;
  cfg.seed = 99;
  cfg.objective.variant = ObjectiveVariant::kWeightedSpectral;
  cfg.objective.lambda = 0.125;
  cfg.objective.band_mask = BandMask::kLowOnly;
  cfg.anchor.kind = AnchorKind::kFixed;
  cfg.anchor.fixed_value = 0.75;

  KeyValues kv = keys_from_config(cfg);
  TrainConfig back = config_from_keys(kv);
  CHECK(back.task == cfg.task);
  CHECK(back.hidden == cfg.hidden);
  CHECK(back.batch_size == cfg.batch_size);
  CHECK(back.learning_rate == cfg.learning_rate);
  CHECK(back.seed == cfg.seed);
  CHECK(back.objective.variant == cfg.objective.variant);
  CHECK(back.objective.lambda == cfg.objective.lambda);
  CHECK(back.objective.band_mask == cfg.objective.band_mask);
  CHECK(back.anchor.kind == cfg.anchor.kind);
  CHECK(back.anchor.fixed_value == cfg.anchor.fixed_value);

  // Serialized text parses back to the identical map.
  CHECK(parse_key_values(serialize_key_values(kv)) == kv);
}

TEST_CASE("defaults survive an empty configuration") {
  TrainConfig defaults;
  TrainConfig cfg = config_from_keys({});
  CHECK(cfg.batch_size == defaults.batch_size);
  CHECK(cfg.hidden == defaults.hidden);
  CHECK(cfg.objective.lambda == defaults.objective.lambda);
  CHECK(cfg.anchor.mu == defaults.anchor.mu);
}

TEST_CASE("unknown keys and bad values are rejected by name") {
  try {
    config_from_keys({{"learning_rte", "1e-3"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("learning_rte") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_keys({{"batch_size", "many"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"learning_rate", "fast"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"task", "juggle"}}), ConfigError);
  CHECK_THROWS_AS(config_from_keys({{"objective.variant", "focal2"}}), ConfigError);
  // Values that parse but violate validation also fail.
  CHECK_THROWS_AS(config_from_keys({{"batch_size", "0"}}), ConfigError);
}

TEST_CASE("command-line assignments override file values") {
  KeyValues kv = parse_key_values("batch_size = 32\n");
  apply_assignment(kv, "batch_size=64");
  apply_assignment(kv, "objective.lambda = 0.5");
  CHECK(kv.at("batch_size") == "64");
  CHECK(kv.at("objective.lambda") == "0.5");
  CHECK_THROWS_AS(apply_assignment(kv, "no-equals-sign"), ConfigError);
  CHECK_THROWS_AS(apply_assignment(kv, "=5"), ConfigError);
}

TEST_CASE("list-valued keys parse both spellings") {
  TrainConfig a = config_from_keys({{"hidden", "64,64"}});
  TrainConfig b = config_from_keys({{"hidden", " 64 , 64 "}});
  CHECK(a.hidden == std::vector<int>{64, 64});
  CHECK(b.hidden == a.hidden);
  TrainConfig w = config_from_keys(
      {{"chunk_size", "2"}, {"num_chunks", "2"}, {"objective.spectral_weights", "1,0.5,0.25,0.125"}});
  CHECK(w.objective.spectral_weights == std::vector<double>{1.0, 0.5, 0.25, 0.125});
}
