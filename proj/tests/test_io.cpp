#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "timdnn/io.hpp"

using namespace timdnn;
namespace fs = std::filesystem;

TEST_CASE("csv quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  std::ostringstream os;
  CsvWriter(os).row({"x", "y,z"});
  CHECK(os.str() == "x,\"y,z\"\r\n");
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("every parameter carries unit and provenance") {
  SystemConfig cfg;
  const auto params = parameters(cfg);
  CHECK(params.size() > 20);
  for (const Param& p : params) {
    CAPTURE(p.key);
    if (!std::holds_alternative<std::string*>(p.ref)) CHECK_FALSE(p.unit.empty());
    const bool known = p.provenance == "paper" || p.provenance == "derived" || p.provenance == "assumption";
    CHECK(known);
  }
  const auto j = nlohmann::json::parse(config_to_json(cfg));
  CHECK(j.at("schema_version") == kSchemaVersion);
}

TEST_CASE("config round trip and overrides") {
  SystemConfig cfg;
  apply_override(cfg, "tile.n_max=7");
  apply_override(cfg, "accel.num_tiles=16");
  CHECK(cfg.accel.tile.adc_max == 7);
  CHECK(cfg.accel.num_tiles == 16);
  const std::string text = config_to_json(cfg);
  SystemConfig back;
  apply_config_json(back, text);
  CHECK(config_to_json(back) == text);

  CHECK_THROWS_AS(apply_override(cfg, "tile.no_such_key=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "tile.n_max"), ConfigError);
  CHECK_THROWS_AS(apply_config_json(cfg, R"({"schema_version": 1, "params": {"bogus": 3}})"), ConfigError);
  CHECK_THROWS_AS(apply_config_json(cfg, R"({"schema_version": 99})"), ConfigError);
}

TEST_CASE("weight blobs round trip") {
  const fs::path dir = fs::temp_directory_path() / "timdnn_io_test";
  fs::create_directories(dir);
  TritMatrix w(3, 4);
  w << 1, 0, -1, 1, 0, 0, 1, -1, -1, 1, 0, 0;
  save_weight_blob(dir / "w.bin", w);
  CHECK(load_weight_blob(dir / "w.bin", 3, 4) == w);
  CHECK_THROWS(load_weight_blob(dir / "w.bin", 4, 4));
  fs::remove_all(dir);
}

TEST_CASE("workload descriptors") {
  for (const char* name : {"alexnet", "resnet34", "inception", "lstm_ptb", "gru_ptb"}) {
    CAPTURE(name);
    const DnnGraph g = load_workload(name, TIMDNN_WORKLOAD_DIR);
    CHECK(g.name == name);
    CHECK_NOTHROW(resolve_shapes(g));
  }
  CHECK_THROWS(load_workload("no_such_network", TIMDNN_WORKLOAD_DIR));
  const DnnGraph g = parse_workload(R"({"schema_version": 1, "name": "tiny",
      "input": {"channels": 4, "height": 1, "width": 1, "bits": 1},
      "layers": [{"type": "fc", "out_features": 2, "system": {"kind": "asymmetric",
                  "w1": 0.7, "w2": 0.4, "i1": 0.5, "i2": 0.25}}]})",
                                    ".");
  REQUIRE(g.layers.size() == 1);
  CHECK(g.layers[0].system.two_step());
  CHECK(resolve_shapes(g).back() == Shape{2, 1, 1});
}
