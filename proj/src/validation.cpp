#include "rampsim/validation.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "rampsim/csv.hpp"
#include "rampsim/error.hpp"
#include "rampsim/parallel.hpp"

namespace rampsim {

double rel_l2_error(std::span<const double> real, std::span<const double> sim) {
  if (real.size() != sim.size()) throw InputError("relative L2 error needs equal shapes");
  double diff = 0.0, base = 0.0;
  for (std::size_t i = 0; i < real.size(); ++i) {
    diff += (real[i] - sim[i]) * (real[i] - sim[i]);
    base += real[i] * real[i];
  }
  if (!(base > 0.0)) throw InputError("relative L2 error undefined for a zero baseline");
  return 100.0 * std::sqrt(diff / base);
}

double rel_l2_error(const RowMatrix& real, const RowMatrix& sim) {
  if (real.size() != sim.size()) throw InputError("relative L2 error needs equal shapes");
  std::vector<double> a, b;
  for (std::size_t r = 0; r < real.size(); ++r) {
    if (real[r].size() != sim[r].size()) throw InputError("relative L2 error needs equal shapes");
    a.insert(a.end(), real[r].begin(), real[r].end());
    b.insert(b.end(), sim[r].begin(), sim[r].end());
  }
  return rel_l2_error(a, b);
}

MapeResult mape(std::span<const double> real, std::span<const double> sim) {
  if (real.size() != sim.size()) throw InputError("MAPE needs series of equal length");
  MapeResult out;
  double total = 0.0;
  for (std::size_t t = 0; t < real.size(); ++t) {
    if (real[t] == 0.0) {
      ++out.skipped;
      continue;
    }
    total += 100.0 * std::abs(real[t] - sim[t]) / std::abs(real[t]);
    ++out.used;
  }
  if (out.used == 0) throw InputError("MAPE undefined: every real value is zero");
  out.value = total / static_cast<double>(out.used);
  return out;
}

std::vector<double> sample_mean(const RowMatrix& rows) {
  if (rows.empty()) throw InputError("sample mean of an empty set");
  std::vector<double> mean(rows.front().size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += r[c];
  for (double& m : mean) m /= static_cast<double>(rows.size());
  return mean;
}

RowMatrix sample_covariance(const RowMatrix& rows) {
  if (rows.size() < 2) throw InputError("sample covariance needs at least two rows");
  const auto mean = sample_mean(rows);
  const auto d = mean.size();
  RowMatrix cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      cov[a][b] /= static_cast<double>(rows.size() - 1);
      cov[b][a] = cov[a][b];
    }
  return cov;
}

double ComparisonReport::average_mean_error() const {
  if (groups.empty()) return 0.0;
  double total = 0.0;
  for (const auto& g : groups) total += g.l2_mean_pct;
  return total / static_cast<double>(groups.size());
}

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json g = nlohmann::json::array();
  for (const auto& c : groups)
    g.push_back({{"i", state_value(c.key.from)},
                 {"j", state_value(c.key.to)},
                 {"x", c.key.sojourn},
                 {"n_real", c.n_real},
                 {"n_sim", c.n_sim},
                 {"l2_mean_pct", c.l2_mean_pct},
                 {"l2_cov_pct", c.l2_cov_pct ? nlohmann::json(*c.l2_cov_pct) : nlohmann::json(nullptr)}});
  nlohmann::json m = nlohmann::json::array();
  for (const auto& c : moments)
    m.push_back({{"limit_fraction", c.limit_fraction},
                 {"mape_first", c.first.value},
                 {"mape_second", c.second.value},
                 {"skipped_first", c.first.skipped},
                 {"skipped_second", c.second.skipped}});
  return {{"groups", g}, {"average_l2_mean_pct", average_mean_error()}, {"moments", m}};
}

void ComparisonReport::write_csv(const std::filesystem::path& path, const std::string& header_comment) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "i,j,x,n_real,n_sim,l2_mean_pct,l2_cov_pct\n";
  for (const auto& c : groups)
    out << state_value(c.key.from) << ',' << state_value(c.key.to) << ',' << c.key.sojourn << ',' << c.n_real << ','
        << c.n_sim << ',' << csv::format_double(c.l2_mean_pct) << ','
        << (c.l2_cov_pct ? csv::format_double(*c.l2_cov_pct) : std::string("nan")) << '\n';
}

ComparisonReport compare_segments(std::span<const Segment> segments, const ChargeModel& model,
                                  std::size_t eligibility, std::uint64_t seed, unsigned threads) {
  std::map<SegmentKey, RowMatrix> groups;
  for (const auto& seg : segments) {
    if (seg.censored || seg.from == State::Neutral) continue;
    groups[{seg.from, seg.to, seg.sojourn}].push_back(seg.charges);
  }

  ComparisonReport report;
  for (const auto& [key, real] : groups) {
    if (real.size() < eligibility) continue;
    GroupComparison cmp;
    cmp.key = key;
    cmp.n_real = real.size();
    cmp.n_sim = simulation_count(real.size());

    const auto tag = "compare:" + to_string(key.from) + ":" + to_string(key.to) + ":" + std::to_string(key.sojourn);
    RowMatrix simulated(cmp.n_sim);
    parallel_for(
        cmp.n_sim,
        [&](std::size_t p) {
          Rng rng = make_rng(seed, tag, p);
          auto draw = simulate_charge(key.from, key.to, key.sojourn, model, rng);
          simulated[p].assign(draw.values.begin() + 1, draw.values.end() - 1);
        },
        threads);

    cmp.l2_mean_pct = rel_l2_error(sample_mean(real), sample_mean(simulated));
    if (real.size() >= 2) {
      try {
        cmp.l2_cov_pct = rel_l2_error(sample_covariance(real), sample_covariance(simulated));
      } catch (const InputError&) {
        cmp.l2_cov_pct.reset();
      }
    }
    report.groups.push_back(cmp);
  }
  return report;
}

EmpiricalPenalty empirical_penalty(const PowerSeries& series, const BatterySpec& battery, const PenaltySpec& fees,
                                   int horizon, double sign_tolerance) {
  if (horizon < 1) throw InputError("window horizon must be at least 1");
  battery.validate();
  const auto states = state_sequence(series, sign_tolerance);
  std::vector<double> charges(states.size(), 0.0);
  for (std::size_t k = 0; k < states.size(); ++k)
    if (states[k] != State::Neutral) charges[k] = std::abs(series.generated[k] - series.corrected[k]);
  const auto replay = replay_penalty(states, charges, battery, fees, battery.initial_soc);

  // Steps elapsed in the current state before each step.
  std::vector<int> elapsed(states.size(), 0);
  for (std::size_t k = 1; k < states.size(); ++k) elapsed[k] = states[k] == states[k - 1] ? elapsed[k - 1] + 1 : 0;

  EmpiricalPenalty out;
  const auto h = static_cast<std::size_t>(horizon);
  for (std::size_t start = 0; start + h <= states.size(); start += h) {
    std::vector<double> window(h + 1, 0.0);
    for (std::size_t t = 1; t <= h; ++t) window[t] = replay.penalty[start + t];
    out.windows.push_back(std::move(window));
    out.starts.push_back({states[start], replay.soc[start], elapsed[start]});
  }
  return out;
}

}  // namespace rampsim
