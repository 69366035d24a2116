#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pardet/config.hpp"
#include "pardet/error.hpp"
#include "pardet/io.hpp"
#include "pardet/pipeline.hpp"
#include "pardet/rng.hpp"

using namespace pardet;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

PipelineConfig tiny_config() {
  PipelineConfig cfg;
  cfg.seed = 2024;
  cfg.scene_count = 3;
  cfg.lidar.ray_count = 60000;
  return cfg;
}

}  // namespace

TEST_CASE("config: defaults, round trip, unknown keys rejected") {
  PipelineConfig cfg;
  CHECK(cfg.eval.cd_threshold == 0.00125);
  CHECK(cfg.lidar.max_range == 25.0);
  CHECK(cfg.lidar.budget == 32768);
  CHECK(cfg.stub.queries == 128);

  PipelineConfig back = PipelineConfig::from_json(cfg.to_json());
  CHECK(back.to_json().dump() == cfg.to_json().dump());
  CHECK(back.hash() == cfg.hash());

  nlohmann::json bad = cfg.to_json();
  bad["lidar"]["beam_divergence"] = 0.01;
  CHECK_THROWS_AS((void)PipelineConfig::from_json(bad), Error);

  nlohmann::json bad_nested = cfg.to_json();
  bad_nested["scene"]["perlin"]["lacunarity"] = 2.0;
  CHECK_THROWS_AS((void)PipelineConfig::from_json(bad_nested), Error);

  nlohmann::json bad_value = cfg.to_json();
  bad_value["eval"]["cd_threshold"] = -1.0;
  CHECK_THROWS_AS((void)PipelineConfig::from_json(bad_value), Error);
}

TEST_CASE("config hash changes with content") {
  PipelineConfig a;
  PipelineConfig b;
  b.seed = a.seed + 1;
  CHECK(a.hash() != b.hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("error codes map to the CLI exit contract") {
  CHECK(exit_code_for(ErrorCode::ConfigError) == 2);
  CHECK(exit_code_for(ErrorCode::BadRatios) == 2);
  CHECK(exit_code_for(ErrorCode::InvariantViolation) == 3);
  CHECK(exit_code_for(ErrorCode::ClassMismatch) == 3);
  CHECK(exit_code_for(ErrorCode::IoError) == 4);
  CHECK(exit_code_for(ErrorCode::MeshParseError) == 4);
}

TEST_CASE("cloud binary round trip preserves points and source ids") {
  std::string dir = fresh_dir("pardet_io_test");
  ScanCloud cloud;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    cloud.points.push_back({rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-2, 5)});
    cloud.source_ids.push_back(static_cast<uint32_t>(rng.uniform_int(12)));
  }
  std::string path = dir + "/test.cloud";
  write_cloud(cloud, path);
  ScanCloud back = read_cloud(path);
  REQUIRE(back.size() == cloud.size());
  REQUIRE(back.has_source_ids());
  for (size_t i = 0; i < cloud.size(); ++i) {
    // float32 storage: 1e-6 relative
    CHECK(back.points[i].x == doctest::Approx(cloud.points[i].x).epsilon(1e-6));
    CHECK(back.source_ids[i] == cloud.source_ids[i]);
  }

  // clouds without ids read back without ids
  ScanCloud no_ids;
  no_ids.points = {{1, 2, 3}};
  write_cloud(no_ids, path);
  CHECK(!read_cloud(path).has_source_ids());

  // not a cloud file
  atomic_write(dir + "/junk.cloud", "definitely not a cloud");
  CHECK_THROWS_AS((void)read_cloud(dir + "/junk.cloud"), Error);
  fs::remove_all(dir);
}

TEST_CASE("atomic_write leaves no temp file and replaces content") {
  std::string dir = fresh_dir("pardet_atomic_test");
  std::string path = dir + "/file.txt";
  atomic_write(path, "one");
  atomic_write(path, "two");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "two");
  CHECK(!fs::exists(path + ".tmp"));
  fs::remove_all(dir);
}

TEST_CASE("xyz debug writer emits one line per point") {
  std::string dir = fresh_dir("pardet_xyz_test");
  ScanCloud cloud;
  cloud.points = {{1, 2, 3}, {4, 5, 6}};
  write_cloud_xyz(cloud, dir + "/debug.xyz");
  std::ifstream in(dir + "/debug.xyz");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);
  fs::remove_all(dir);
}

TEST_CASE("pipeline stages produce a consistent artifact chain") {
  std::string out = fresh_dir("pardet_pipe_test");
  PipelineConfig cfg = tiny_config();

  run_gen_scenes(cfg, out, cfg.scene_count);
  CHECK(scene_count_on_disk(out) == 3);
  nlohmann::json manifest = read_json(out + "/scenes/manifest.json");
  CHECK(manifest["count"] == 3);
  CHECK(manifest["config_hash"] == cfg.hash());
  CHECK(manifest["split"].contains("train"));

  run_scan(cfg, out);
  run_predict_stub(cfg, out);
  EvalReport report = run_eval(cfg, out);
  CHECK(report.map == 1.0);  // noiseless defaults

  nlohmann::json rj = read_json(out + "/eval/report.json");
  CHECK(rj["map"] == 1.0);
  CHECK(rj["per_class"].size() == 3);
  CHECK(fs::exists(out + "/eval/report.txt"));
  CHECK(fs::exists(out + "/eval/errors.csv"));
  CHECK(fs::exists(out + "/eval/timing.csv"));

  // every stage output embeds the config hash and tool version
  for (const char* f : {"/scenes/scene_0000.json", "/truth/scene_0000.json",
                        "/preds/scene_0000.json", "/eval/report.json"}) {
    nlohmann::json j = read_json(out + f);
    CHECK(j["config_hash"] == cfg.hash());
    CHECK(j["tool_version"] == kToolVersion);
  }
  fs::remove_all(out);
}

TEST_CASE("gen-scenes with count zero writes an empty manifest") {
  std::string out = fresh_dir("pardet_zero_test");
  PipelineConfig cfg = tiny_config();
  run_gen_scenes(cfg, out, 0);
  nlohmann::json manifest = read_json(out + "/scenes/manifest.json");
  CHECK(manifest["count"] == 0);
  CHECK(manifest["scenes"].empty());
  CHECK(scene_count_on_disk(out) == 0);
  fs::remove_all(out);
}

TEST_CASE("pipeline determinism: identical artifact hashes across reruns") {
  PipelineConfig cfg = tiny_config();
  cfg.scene_count = 2;
  std::string out_a = fresh_dir("pardet_det_a");
  std::string out_b = fresh_dir("pardet_det_b");
  run_all(cfg, out_a, cfg.scene_count);
  run_all(cfg, out_b, cfg.scene_count);
  auto ha = hash_artifacts(out_a);
  auto hb = hash_artifacts(out_b);
  REQUIRE(!ha.empty());
  CHECK(ha == hb);

  // a different seed must change the clouds
  PipelineConfig other = cfg;
  other.seed += 1;
  std::string out_c = fresh_dir("pardet_det_c");
  run_all(other, out_c, cfg.scene_count);
  CHECK(hash_artifacts(out_c) != ha);
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  fs::remove_all(out_c);
}

TEST_CASE("stub predictions survive the serialization round trip") {
  std::string out = fresh_dir("pardet_roundtrip_test");
  PipelineConfig cfg = tiny_config();
  cfg.scene_count = 1;
  cfg.stub.position_sigma = 0.01;
  cfg.stub.confidence_model = ConfidenceModel::NoiseCoupled;
  run_gen_scenes(cfg, out, 1);
  run_scan(cfg, out);
  run_predict_stub(cfg, out);

  nlohmann::json pj = read_json(out + "/preds/scene_0000.json");
  REQUIRE(pj["predictions"].size() == 128);
  for (const auto& p : pj["predictions"]) {
    double sum = 0.0;
    for (double v : p["class_probs"]) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p["params"].size() == 3);
  }
  fs::remove_all(out);
}
