#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampsim/error.hpp"
#include "rampsim/power_pipeline.hpp"
#include "rampsim/segmentation.hpp"
#include "rampsim/simulator.hpp"

namespace rampsim {

/// Settings for one batch run. Defaults reproduce the reference scenario:
/// 2 MW turbine (cut-in 4, rated 13, cut-out 25 m/s), 0.36 MWh battery,
/// fees 21.52 / 26.50 per MWh, ramp limits of 1%, 5% and 7% of capacity.
struct RunConfig {
  std::string input_path;  // wind (timestamp,speed_ms) or power (k,e) CSV; empty: synthetic wind
  SyntheticWindParams synthetic{.n_steps = 50000, .shape = 2.0, .scale = 8.0, .autocorrelation = 0.9, .seed = 0};
  TurbineSpec turbine;
  std::vector<double> limits{0.01, 0.05, 0.07};  // fractions of rated capacity
  BatterySpec battery;
  PenaltySpec fees;
  int horizon = 24;
  std::size_t paths = 2000;
  std::uint64_t seed = 42;
  std::string initial_law = "empirical";  // or "fixed"
  std::size_t min_sample = 10;
  std::size_t eligibility = 30;
  double sign_tolerance = kDefaultSignTolerance;
  std::size_t dump_paths = 0;
  unsigned threads = 0;  // 0: all hardware threads
  std::filesystem::path output_dir = "rampsim_out";

  void validate() const;
  /// Stable `section.key=value` listing of every setting that affects outputs.
  std::string canonical() const;
  /// Hex FNV-1a of canonical().
  std::string hash() const;
};

/// Parses the INI-style configuration (sections, `key = value`, `;`/`#` comments).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

enum class Stage { Ingest, Correct, Segment, Fit, Simulate, Validate };

Stage parse_stage(const std::string& name);
std::string to_string(Stage stage);

/// Failure inside a pipeline stage; what() is prefixed with the stage name.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& message);
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

/// Per-limit fitted model: renewal kernel plus charge model.
struct FittedModel {
  SemiMarkovKernel kernel;
  ChargeModel charges;
  std::size_t sigma_observations = 0;
  std::size_t sigma_fallbacks = 0;

  nlohmann::json to_json() const;
  static FittedModel from_json(const nlohmann::json& doc);
};

/// Fits kernel, parameter samplers and σ regressions to a segmented series.
FittedModel fit_model(const Segmentation& segmentation, double limit, double capacity,
                      std::size_t min_sample = 10, std::uint64_t seed = 0);

/// Directory-name tag for a limit fraction, e.g. 0.01 -> "0.01".
std::string limit_tag(double fraction);

struct ArtifactPaths {
  std::filesystem::path root;
  std::filesystem::path wind() const { return root / "wind.csv"; }
  std::filesystem::path generated() const { return root / "generated.csv"; }
  std::filesystem::path limit_dir(double f) const { return root / ("limit_" + limit_tag(f)); }
  std::filesystem::path power(double f) const { return limit_dir(f) / "power.csv"; }
  std::filesystem::path renewal(double f) const { return limit_dir(f) / "renewal.csv"; }
  std::filesystem::path kernel(double f) const { return limit_dir(f) / "kernel.json"; }
  std::filesystem::path model(double f) const { return limit_dir(f) / "model.json"; }
  std::filesystem::path paths_dump(double f) const { return limit_dir(f) / "paths.csv"; }
  std::filesystem::path moments(double f) const { return root / ("moments_limit_" + limit_tag(f) + ".csv"); }
  std::filesystem::path empirical_moments(double f) const {
    return root / ("moments_empirical_limit_" + limit_tag(f) + ".csv");
  }
  std::filesystem::path report_json(double f) const { return root / ("validation_limit_" + limit_tag(f) + ".json"); }
  std::filesystem::path report_csv(double f) const { return root / ("validation_limit_" + limit_tag(f) + ".csv"); }
};

void run_stage(Stage stage, const RunConfig& config);
void run_pipeline(const RunConfig& config);

}  // namespace rampsim
