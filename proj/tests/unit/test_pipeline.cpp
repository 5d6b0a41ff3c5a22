#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rampsim/csv.hpp"
#include "rampsim/error.hpp"
#include "rampsim/pipeline.hpp"

using namespace rampsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_config(const fs::path& out) {
  RunConfig cfg;
  cfg.synthetic.n_steps = 6000;
  cfg.paths = 200;
  cfg.output_dir = out;
  cfg.threads = 1;
  return cfg;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"(
; comment
[ramp]
limits = 0.02, 0.04
[battery]
max_soc = 0.5
[simulation]
paths = 123
seed = 9
initial_law = fixed
[output]
dir = somewhere
)");
  CHECK(cfg.limits == std::vector<double>{0.02, 0.04});
  CHECK(cfg.battery.max_soc == 0.5);
  CHECK(cfg.battery.initial_soc == 0.25);
  CHECK(cfg.paths == 123);
  CHECK(cfg.seed == 9);
  CHECK(cfg.initial_law == "fixed");
  CHECK(cfg.output_dir == "somewhere");
  CHECK(cfg.turbine.rated_capacity == 2.0);
  CHECK(cfg.fees.up_fee == 21.52);

  CHECK_THROWS_AS(parse_config("[ramp]\nlimit = 0.01\n"), InputError);
  CHECK_THROWS_AS(parse_config("[nonsense]\na = 1\n"), InputError);
  CHECK_THROWS_AS(parse_config("[simulation]\npaths = many\n"), InputError);

  RunConfig bad;
  bad.limits = {1.5};
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("config hash ignores output location and threads") {
  RunConfig a, b;
  b.output_dir = "elsewhere";
  b.threads = 7;
  CHECK(a.hash() == b.hash());
  b.seed = 43;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("stage names") {
  for (auto s : {Stage::Ingest, Stage::Correct, Stage::Segment, Stage::Fit, Stage::Simulate, Stage::Validate})
    CHECK(parse_stage(to_string(s)) == s);
  CHECK_THROWS_AS(parse_stage("report"), InputError);
}

TEST_CASE("pipeline writes stamped artifacts and stages compose") {
  const auto root = fs::temp_directory_path() / "rampsim_unit_pipeline";
  fs::remove_all(root);
  auto cfg = small_config(root / "mono");
  run_pipeline(cfg);
  const ArtifactPaths files{cfg.output_dir};
  for (double f : cfg.limits) {
    CHECK(fs::exists(files.power(f)));
    CHECK(fs::exists(files.kernel(f)));
    CHECK(fs::exists(files.model(f)));
    CHECK(fs::exists(files.moments(f)));
    CHECK(fs::exists(files.report_json(f)));
    CHECK(fs::exists(files.report_csv(f)));
    const auto moments = slurp(files.moments(f));
    CHECK(moments.rfind("# config_hash=" + cfg.hash(), 0) == 0);
    CHECK(moments.find("t,mean,std,se_mean\n") != std::string::npos);
    const auto model = nlohmann::json::parse(slurp(files.model(f)));
    CHECK(model.at("config_hash") == cfg.hash());
    const auto back = FittedModel::from_json(model);
    CHECK(back.kernel.to_json() == model.at("kernel"));
  }
  for (const auto& [name, body] : tree(cfg.output_dir)) CHECK(name.find(".partial") == std::string::npos);

  auto staged = small_config(root / "staged");
  for (auto s : {Stage::Ingest, Stage::Correct, Stage::Segment, Stage::Fit, Stage::Simulate, Stage::Validate})
    run_stage(s, staged);
  CHECK(tree(cfg.output_dir) == tree(staged.output_dir));

  auto rerun = small_config(root / "mono");
  rerun.threads = 3;
  const auto before = tree(cfg.output_dir);
  run_pipeline(rerun);
  CHECK(tree(cfg.output_dir) == before);
  fs::remove_all(root);
}

TEST_CASE("missing upstream artifacts are named") {
  const auto root = fs::temp_directory_path() / "rampsim_unit_missing";
  fs::remove_all(root);
  auto cfg = small_config(root);
  try {
    run_stage(Stage::Simulate, cfg);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::Simulate);
    CHECK(std::string(e.what()).find("model.json") != std::string::npos);
  }
  cfg.input_path = (root / "nope.csv").string();
  try {
    run_stage(Stage::Ingest, cfg);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(std::string(e.what()).find("nope.csv") != std::string::npos);
  }
  fs::remove_all(root);
}

TEST_CASE("correct stage on a raw power file") {
  const auto root = fs::temp_directory_path() / "rampsim_unit_correct";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "power.csv") << "k,e\n0,1.00\n1,1.50\n2,1.01\n3,0.90\n4,1.03\n";
  RunConfig cfg;
  cfg.input_path = (root / "power.csv").string();
  cfg.limits = {0.01};
  cfg.output_dir = root / "out";
  run_stage(Stage::Ingest, cfg);
  run_stage(Stage::Correct, cfg);
  const auto series = read_power_csv(ArtifactPaths{cfg.output_dir}.power(0.01), 0.02, 2.0);
  const std::vector<double> expected{1.00, 1.02, 1.01, 0.99, 1.01};
  for (std::size_t k = 0; k < expected.size(); ++k) CHECK(series.corrected[k] == doctest::Approx(expected[k]));
  fs::remove_all(root);
}
