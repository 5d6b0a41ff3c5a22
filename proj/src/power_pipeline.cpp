#include "rampsim/power_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rampsim/csv.hpp"
#include "rampsim/error.hpp"
#include "rampsim/random.hpp"

namespace rampsim {

void TurbineSpec::validate() const {
  if (!(0.0 < cut_in_speed && cut_in_speed < rated_speed && rated_speed < cut_out_speed))
    throw InputError("turbine speeds must satisfy 0 < cut_in < rated < cut_out");
  if (!(rated_capacity > 0.0)) throw InputError("turbine rated capacity must be positive");
}

void RampPolicy::validate() const {
  if (!(limit > 0.0)) throw InputError("ramp limit must be positive");
  if (!(step_hours > 0.0)) throw InputError("ramp step length must be positive");
}

void SyntheticWindParams::validate() const {
  if (n_steps < 1) throw InputError("synthetic wind needs at least one step");
  if (!(shape > 0.0) || !(scale > 0.0)) throw InputError("Weibull shape and scale must be positive");
  if (!(autocorrelation >= 0.0 && autocorrelation < 1.0))
    throw InputError("autocorrelation must lie in [0, 1)");
}

double wind_to_power(double speed, const TurbineSpec& turbine) {
  if (!(speed >= 0.0)) throw InputError("wind speed must be non-negative");
  if (speed <= turbine.cut_in_speed || speed > turbine.cut_out_speed) return 0.0;
  if (speed >= turbine.rated_speed) return turbine.rated_capacity;
  const double v3 = speed * speed * speed;
  const double in3 = std::pow(turbine.cut_in_speed, 3);
  const double rated3 = std::pow(turbine.rated_speed, 3);
  return turbine.rated_capacity * (v3 - in3) / (rated3 - in3);
}

PowerSeries power_from_wind(std::span<const double> speeds, const TurbineSpec& turbine) {
  turbine.validate();
  PowerSeries series;
  series.rated_capacity = turbine.rated_capacity;
  series.steps.resize(speeds.size());
  series.generated.resize(speeds.size());
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    series.steps[k] = static_cast<std::int64_t>(k);
    series.generated[k] = wind_to_power(speeds[k], turbine);
  }
  return series;
}

PowerSeries apply_ramp_limit(const PowerSeries& series, const RampPolicy& policy,
                             std::optional<double> initial_corrected) {
  policy.validate();
  if (series.generated.empty()) throw InputError("cannot correct an empty power series");
  const double cap = series.rated_capacity > 0.0 ? series.rated_capacity
                                                 : *std::max_element(series.generated.begin(), series.generated.end());
  const double step = policy.per_step();
  const double start = initial_corrected.value_or(series.generated.front());
  if (!(start >= 0.0 && start <= cap))
    throw InputError("initial corrected power must lie in [0, rated capacity]");

  PowerSeries out = series;
  out.limit = step;
  out.rated_capacity = cap;
  out.corrected.resize(series.generated.size());
  out.corrected[0] = start;
  for (std::size_t k = 1; k < series.generated.size(); ++k) {
    const double prev = out.corrected[k - 1];
    const double e = series.generated[k];
    double value = e;
    if (e > prev + step)
      value = prev + step;
    else if (e < prev - step)
      value = prev - step;
    out.corrected[k] = std::clamp(value, 0.0, cap);
  }
  return out;
}

std::vector<double> generate_synthetic_wind(const SyntheticWindParams& params) {
  params.validate();
  Rng rng(derive_seed(params.seed, "synthetic-wind"));
  std::normal_distribution<double> normal;
  const double phi = params.autocorrelation;
  const double innovation = std::sqrt(1.0 - phi * phi);

  std::vector<double> speeds(params.n_steps);
  double z = normal(rng);
  for (std::size_t k = 0; k < params.n_steps; ++k) {
    if (k > 0) z = phi * z + innovation * normal(rng);
    // Upper tail via erfc keeps -log(1-u) accurate for large z.
    const double survival = 0.5 * std::erfc(z / std::sqrt(2.0));
    const double tail = -std::log(std::max(survival, 1e-300));
    speeds[k] = params.scale * std::pow(tail, 1.0 / params.shape);
  }
  return speeds;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

WindRecord read_wind_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto ts = table.column("timestamp");
  const auto sp = table.column("speed_ms");
  WindRecord record;
  record.timestamps.reserve(table.rows.size());
  record.speeds.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const double v = csv::to_double(row[sp]);
    if (!(v >= 0.0)) throw InputError("negative wind speed in '" + path.string() + "'");
    record.timestamps.push_back(row[ts]);
    record.speeds.push_back(v);
  }
  if (record.speeds.empty()) throw InputError("'" + path.string() + "' contains no rows");
  return record;
}

void write_wind_csv(const std::filesystem::path& path, const WindRecord& record,
                    const std::string& header_comment) {
  auto out = open_for_write(path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "timestamp,speed_ms\n";
  for (std::size_t k = 0; k < record.speeds.size(); ++k)
    out << record.timestamps[k] << ',' << csv::format_double(record.speeds[k]) << '\n';
}

void write_power_csv(const std::filesystem::path& path, const PowerSeries& series,
                     const std::string& header_comment) {
  auto out = open_for_write(path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "k,e,e_bar\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << series.steps[k] << ',' << csv::format_double(series.generated[k]) << ',';
    if (series.is_corrected()) out << csv::format_double(series.corrected[k]);
    out << '\n';
  }
}

PowerSeries read_power_csv(const std::filesystem::path& path, double limit, double rated_capacity) {
  const auto table = csv::read(path);
  const auto kc = table.column("k");
  const auto ec = table.column("e");
  // e_bar is optional: an uncorrected series leaves it out or empty.
  const bool has_bar = std::find(table.header.begin(), table.header.end(), "e_bar") != table.header.end();
  const auto bc = has_bar ? table.column("e_bar") : 0;
  PowerSeries series;
  series.limit = limit;
  series.rated_capacity = rated_capacity;
  for (const auto& row : table.rows) {
    const double e = csv::to_double(row[ec]);
    if (!(e >= 0.0 && e <= rated_capacity))
      throw InputError("power value outside [0, rated capacity] in '" + path.string() + "'");
    series.steps.push_back(csv::to_integer(row[kc]));
    series.generated.push_back(e);
    if (has_bar && !row[bc].empty()) series.corrected.push_back(csv::to_double(row[bc]));
  }
  if (series.generated.empty()) throw InputError("'" + path.string() + "' contains no rows");
  if (!series.corrected.empty() && series.corrected.size() != series.generated.size())
    throw InputError("'" + path.string() + "' has a partially filled e_bar column");
  return series;
}

}  // namespace rampsim
