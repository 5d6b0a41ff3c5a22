#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rampsim {

/// Power curve parameters. Speeds in m/s, capacity in MW.
struct TurbineSpec {
  double cut_in_speed = 4.0;
  double cut_out_speed = 25.0;
  double rated_speed = 13.0;
  double rated_capacity = 2.0;

  void validate() const;
};

/// Ramp-rate limitation: |ē(k) - ē(k-1)| <= limit * step_hours.
struct RampPolicy {
  double limit = 0.02;  // MW per hour
  double step_hours = 1.0;

  double per_step() const { return limit * step_hours; }
  void validate() const;
};

/// Generated power e(k) and, once corrected, the injected power ē(k).
struct PowerSeries {
  std::vector<std::int64_t> steps;
  std::vector<double> generated;
  std::vector<double> corrected;  // empty until apply_ramp_limit
  double limit = 0.0;             // per-step ramp limit used for `corrected`
  double rated_capacity = 0.0;

  std::size_t size() const { return generated.size(); }
  bool is_corrected() const { return !corrected.empty(); }
};

/// Piecewise cubic power curve. Zero below (and at) cut-in and above cut-out,
/// rated capacity on [rated_speed, cut_out_speed].
double wind_to_power(double speed, const TurbineSpec& turbine);

PowerSeries power_from_wind(std::span<const double> speeds, const TurbineSpec& turbine);

/// Applies the up/down ramp correction. ē(0) defaults to e(0).
PowerSeries apply_ramp_limit(const PowerSeries& series, const RampPolicy& policy,
                             std::optional<double> initial_corrected = std::nullopt);

struct SyntheticWindParams {
  std::size_t n_steps = 8760;
  double shape = 2.0;   // Weibull k
  double scale = 8.0;   // Weibull λ, m/s
  double autocorrelation = 0.9;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Hourly wind speeds with an exact Weibull marginal: a stationary Gaussian
/// AR(1) is mapped through Φ and then the Weibull quantile function.
std::vector<double> generate_synthetic_wind(const SyntheticWindParams& params);

struct WindRecord {
  std::vector<std::string> timestamps;
  std::vector<double> speeds;
};

/// Reads `timestamp,speed_ms`. Lines starting with '#' are ignored.
WindRecord read_wind_csv(const std::filesystem::path& path);
void write_wind_csv(const std::filesystem::path& path, const WindRecord& record,
                    const std::string& header_comment = {});

/// Writes `k,e,e_bar`.
void write_power_csv(const std::filesystem::path& path, const PowerSeries& series,
                     const std::string& header_comment = {});
PowerSeries read_power_csv(const std::filesystem::path& path, double limit, double rated_capacity);

}  // namespace rampsim
