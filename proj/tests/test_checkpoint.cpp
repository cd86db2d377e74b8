#include <doctest.h>

#include "fnirs/checkpoint.hpp"
#include "support.hpp"

using namespace fnirs;

TEST_CASE("checkpoint round trip is bit-exact") {
  testing::TempDir dir("ckpt");
  for (ModelKind kind : kAllModelKinds) {
    ModelSpec spec{kind, {5, 3}, 0.25, 4};
    ModelState m = build_model(spec, {7, 2}, 3);
    Rng rng(8);
    for (auto& p : m.parameters())
      for (auto& v : p.value->values()) v = rng.normal() * 1e-3 + 1.0 / 3.0;
    const auto path = dir / (std::string(to_string(kind)) + ".ckpt");
    write_checkpoint(path, m);
    const ModelState back = read_checkpoint(path);
    CHECK(back.spec.kind == kind);
    CHECK(back.spec.layer_widths == spec.layer_widths);
    CHECK(back.spec.dropout_rate == 0.25);
    CHECK(back.input.steps == 7);
    const auto a = m.parameters();
    const auto b = back.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].name == b[i].name);
      CHECK(*a[i].value == *b[i].value);
    }
    CHECK(serialize_checkpoint(back) == testing::slurp(path));
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  const std::string good = serialize_checkpoint(build_model({ModelKind::mlp, {3, 2}, 0.5, 4}, {4, 2}, 1));
  CHECK_THROWS_AS(deserialize_checkpoint("NOTACKPT" + good.substr(8)), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(good.substr(0, good.size() - 3)), CheckpointError);
  CHECK_THROWS_AS(deserialize_checkpoint(good + "x"), CheckpointError);
  std::string bad_version = good;
  bad_version[8] = 9;
  CHECK_THROWS_AS(deserialize_checkpoint(bad_version), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint("/nonexistent/model.ckpt"), CheckpointError);
}
