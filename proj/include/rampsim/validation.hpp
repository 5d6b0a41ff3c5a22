#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampsim/power_pipeline.hpp"
#include "rampsim/segmentation.hpp"
#include "rampsim/simulator.hpp"

namespace rampsim {

using RowMatrix = std::vector<std::vector<double>>;

/// 100 · ‖real − sim‖₂ / ‖real‖₂.
double rel_l2_error(std::span<const double> real, std::span<const double> sim);
/// Frobenius-norm version for matrices of equal shape.
double rel_l2_error(const RowMatrix& real, const RowMatrix& sim);

struct MapeResult {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;  // entries with real == 0
};

/// Mean absolute percentage error; zero-valued real entries are skipped.
MapeResult mape(std::span<const double> real, std::span<const double> sim);

std::vector<double> sample_mean(const RowMatrix& rows);
/// n-1 denominator.
RowMatrix sample_covariance(const RowMatrix& rows);

inline constexpr std::size_t kEligibleGroupSize = 30;

/// Number of simulated paths compared against `n_real` observed ones.
constexpr std::size_t simulation_count(std::size_t n_real) { return std::max<std::size_t>(3 * n_real, 100); }

struct GroupComparison {
  SegmentKey key;
  std::size_t n_real = 0;
  std::size_t n_sim = 0;
  double l2_mean_pct = 0.0;
  std::optional<double> l2_cov_pct;  // empty when the real covariance vanishes
};

struct MomentComparison {
  double limit_fraction = 0.0;
  MapeResult first;
  MapeResult second;
};

struct ComparisonReport {
  std::vector<GroupComparison> groups;
  std::vector<MomentComparison> moments;

  double average_mean_error() const;
  nlohmann::json to_json() const;
  void write_csv(const std::filesystem::path& path, const std::string& header_comment = {}) const;
};

/// Real vs simulated bridge statistics for every (i, j, x) group with at
/// least `eligibility` terminated observations.
ComparisonReport compare_segments(std::span<const Segment> segments, const ChargeModel& model,
                                  std::size_t eligibility = kEligibleGroupSize, std::uint64_t seed = 0,
                                  unsigned threads = 0);

/// Observed penalty process cut into consecutive windows of `horizon` steps.
struct EmpiricalPenalty {
  std::vector<std::vector<double>> windows;  // each M(0..horizon), M(0) = 0
  std::vector<InitialCondition> starts;      // battery position entering each window
};

/// Replays the SOC/penalty recursion on the observed charges of a corrected
/// series and splits it into full windows.
EmpiricalPenalty empirical_penalty(const PowerSeries& series, const BatterySpec& battery, const PenaltySpec& fees,
                                   int horizon, double sign_tolerance = kDefaultSignTolerance);

}  // namespace rampsim
