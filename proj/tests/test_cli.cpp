#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "fnirs/cli.hpp"
#include "fnirs/config.hpp"
#include "support.hpp"

using namespace fnirs;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Small enough for a unit test: 3 subjects, 1 trial per class, 40 s trials, short windows.
const char* kTinyConfig = R"(# tiny run
n_subjects = 3
trials_per_class = 1
trial_seconds = 40   # 400 samples
window = 40
layer_widths = 4, 3
max_epochs = 3
patience = 1
batch_size = 16
n_folds = 2
)";

}  // namespace

TEST_CASE("config parsing") {
  const CliConfig cfg = parse_config("seed = 11\n# comment\n  n_subjects=4 # trailing\n\nlayer_widths = 8,4\nstandardize = true\n");
  CHECK(cfg.seed == 11);
  CHECK(cfg.synth.seed == 11);
  CHECK(cfg.train.seed == 11);
  CHECK(cfg.synth.n_subjects == 4);
  CHECK(cfg.model.layer_widths == std::vector<std::size_t>{8, 4});
  CHECK(cfg.standardize);

  const CliConfig defaults = parse_config("");
  CHECK(defaults.train.max_epochs == 300);
  CHECK(defaults.train.patience == 50);
  CHECK(defaults.train.batch_size == 64);
  CHECK(defaults.train.learning_rate == 0.001);
  CHECK(defaults.window == 300);
  CHECK(defaults.synth.n_subjects == 18);

  CHECK_THROWS_WITH_AS(parse_config("a = 1\n"), doctest::Contains("unknown config key 'a'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("seed = 1\nbatch_size = big\n"), doctest::Contains("<config>:2"), ConfigError);
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
  CHECK(parse_config("channel_gains = 2").synth.channel_gains[23] == 2.0);
  CHECK_THROWS_AS(parse_config("channel_gains = 1,2,3"), ConfigError);

  CliConfig tweaked = defaults;
  apply_setting(tweaked, "pink_sd", "0.25");
  apply_setting(tweaked, "dropout_rate", "0.3");
  const CliConfig again = parse_config(render_config(tweaked));
  CHECK(again.synth.noise.pink_sd == 0.25);
  CHECK(again.model.dropout_rate == 0.3);
  CHECK(render_config(again) == render_config(tweaked));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"fly"}).code == 2);
  CHECK(run({"train", "--out", "x"}).code == 2);
  CHECK(run({"train", "--data", "x", "--out", "y", "--models", "cnn"}).code == 2);
  CHECK(run({"synth", "--out", "x", "--seed", "abc"}).code == 2);
  testing::TempDir dir("usage");
  testing::spit(dir / "bad.cfg", "colour = blue\n");
  const Result r = run({"synth", "--config", (dir / "bad.cfg").string(), "--out", (dir / "o").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);
}

TEST_CASE("help documents every config key and default") {
  for (const char* sub : {"synth", "train", "eval"}) {
    const Result r = run({sub, "--help"});
    CHECK(r.code == 0);
    for (const auto& key : config_keys()) {
      CHECK(r.out.find(key.name) != std::string::npos);
      CHECK(r.out.find("[default: " + key.default_value + "]") != std::string::npos);
    }
  }
}

TEST_CASE("seed is mandatory under CI") {
  testing::TempDir dir("ci");
  ::setenv("CI", "1", 1);
  const Result r = run({"synth", "--out", (dir / "o").string()});
  ::unsetenv("CI");
  CHECK(r.code == 2);
  CHECK(r.err.find("--seed") != std::string::npos);
}

TEST_CASE("runtime failures exit 1") {
  testing::TempDir dir("rt");
  const Result r = run({"train", "--data", (dir / "missing").string(), "--out", (dir / "o").string(), "--seed", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("missing") != std::string::npos);
}

TEST_CASE("gradcheck subcommand") {
  const Result r = run({"gradcheck"});
  CHECK(r.code == 0);
  for (const char* name : {"dense", "lstm_cell_step", "lstm_stack_4_steps", "bilstm_stack_4_steps", "dropout_train", "model_bilstm"})
    CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("synth, train, eval, report end to end") {
  testing::TempDir dir("e2e");
  testing::spit(dir / "tiny.cfg", kTinyConfig);
  const std::string cfg = (dir / "tiny.cfg").string(), data = (dir / "data").string();

  Result r = run({"synth", "--config", cfg, "--out", data, "--seed", "7"});
  REQUIRE(r.code == 0);
  CHECK(read_manifest(dir / "data/manifest.csv").size() == 12);

  for (const char* out : {"run1", "run2"}) {
    r = run({"train", "--config", cfg, "--data", data, "--out", (dir / out).string(), "--seed", "7", "--models", "mlp,bilstm"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("bilstm") != std::string::npos);
  }
  for (const char* f : {"results_table.csv", "curves.csv", "history.csv", "checkpoints/bilstm_fold1.ckpt"})
    CHECK(testing::slurp(dir / "run1" / f) == testing::slurp(dir / "run2" / f));

  const std::string table = testing::slurp(dir / "run1/results_table.csv");
  r = run({"report", "--run", (dir / "run1").string(), "--out", (dir / "rep").string()});
  REQUIRE(r.code == 0);
  CHECK(testing::slurp(dir / "rep/results_table.csv") == table);
  CHECK(testing::slurp(dir / "rep/curves.csv") == testing::slurp(dir / "run1/curves.csv"));

  r = run({"eval", "--config", cfg, "--checkpoint", (dir / "run1/checkpoints/mlp_fold0.ckpt").string(), "--data", data,
           "--out", (dir / "ev").string(), "--seed", "7"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("accuracy") != std::string::npos);
  const std::string preds = testing::slurp(dir / "ev/predictions.csv");
  CHECK(std::count(preds.begin(), preds.end(), '\n') == 1 + 12 * 19);
  CHECK(std::filesystem::exists(dir / "ev/confusion.csv"));
}
