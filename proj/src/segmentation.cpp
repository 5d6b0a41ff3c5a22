#include "rampsim/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "rampsim/error.hpp"

namespace rampsim {

State state_from_value(int value) {
  switch (value) {
    case -1: return State::Discharging;
    case 0: return State::Neutral;
    case 1: return State::Charging;
    default: throw InputError("invalid battery state " + std::to_string(value));
  }
}

std::string to_string(State s) {
  switch (s) {
    case State::Discharging: return "-1";
    case State::Neutral: return "0";
    case State::Charging: return "+1";
  }
  return "?";
}

std::vector<State> state_sequence(const PowerSeries& series, double sign_tolerance) {
  if (series.corrected.size() != series.generated.size())
    throw InputError("generated and corrected series are misaligned");
  std::vector<State> states(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double diff = series.generated[k] - series.corrected[k];
    states[k] = std::abs(diff) <= sign_tolerance ? State::Neutral
                : diff > 0.0                     ? State::Charging
                                                 : State::Discharging;
  }
  return states;
}

Segmentation extract_segments(const PowerSeries& series, double sign_tolerance) {
  if (series.corrected.size() != series.generated.size())
    throw InputError("generated and corrected series are misaligned");
  if (series.size() < 2) throw InputError("segmentation needs at least two aligned points");
  if (!(sign_tolerance >= 0.0)) throw InputError("sign tolerance must be non-negative");

  const auto states = state_sequence(series, sign_tolerance);
  const auto n = states.size();

  Segmentation out;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && states[end] == states[start]) ++end;

    RenewalPoint point;
    point.index = out.renewal.size();
    point.state = states[start];
    point.jump_time = static_cast<std::int64_t>(start);
    point.sojourn = static_cast<std::int64_t>(end - start);
    point.censored = end == n;
    out.renewal.push_back(point);

    Segment seg;
    seg.from = states[start];
    seg.to = point.censored ? seg.from : states[end];
    seg.sojourn = static_cast<int>(end - start);
    seg.start = static_cast<std::int64_t>(start);
    seg.censored = point.censored;
    seg.charges.resize(end - start, 0.0);
    if (seg.from != State::Neutral)
      for (std::size_t k = start; k < end; ++k)
        seg.charges[k - start] = std::abs(series.generated[k] - series.corrected[k]);
    seg.entry_power = start > 0 ? series.corrected[start - 1]
                                : series.corrected[0] - state_value(seg.from) * series.limit;
    out.segments.push_back(std::move(seg));

    start = end;
  }
  return out;
}

SemiMarkovKernel::SemiMarkovKernel(std::array<std::array<std::vector<double>, 3>, 3> q) : q_(std::move(q)) {
  const auto len = q_[0][0].size();
  for (const auto& row : q_)
    for (const auto& cell : row)
      if (cell.size() != len) throw InputError("kernel table rows must share one sojourn support");

  for (std::size_t i = 0; i < 3; ++i) {
    h_[i].assign(len, 0.0);
    max_sojourn_[i] = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      p_[i][j] = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        const double v = q_[i][j][k];
        if (!(v >= 0.0)) throw InputError("kernel probabilities must be non-negative");
        h_[i][k] += v;
        p_[i][j] += v;
        if (v > 0.0) max_sojourn_[i] = std::max(max_sojourn_[i], static_cast<int>(k));
      }
    }
    if (len > 0 && q_[i][i].size() == len)
      for (double v : q_[i][i])
        if (v != 0.0) throw InputError("kernel must not contain self transitions");
    total_[i] = std::accumulate(h_[i].begin(), h_[i].end(), 0.0);
  }
}

double SemiMarkovKernel::q(State i, State j, int k) const {
  const auto& row = q_[state_index(i)][state_index(j)];
  return k >= 0 && static_cast<std::size_t>(k) < row.size() ? row[k] : 0.0;
}

double SemiMarkovKernel::sojourn_probability(State i, int k) const {
  const auto& row = h_[state_index(i)];
  return k >= 0 && static_cast<std::size_t>(k) < row.size() ? row[k] : 0.0;
}

double SemiMarkovKernel::transition_probability(State i, State j) const {
  return p_[state_index(i)][state_index(j)];
}

double SemiMarkovKernel::conditional_transition(State i, State j, int k) const {
  const double h = sojourn_probability(i, k);
  return h > 0.0 ? q(i, j, k) / h : 0.0;
}

namespace {

int draw_index(std::span<const double> weights, std::size_t first, Rng& rng) {
  double total = 0.0;
  for (std::size_t k = first; k < weights.size(); ++k) total += weights[k];
  if (!(total > 0.0)) return -1;
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  int last = -1;
  for (std::size_t k = first; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last = static_cast<int>(k);
    if (u < acc) return last;
  }
  return last;
}

}  // namespace

double SemiMarkovKernel::survival(State i, int elapsed) const {
  const auto& row = h_[state_index(i)];
  double total = 0.0;
  for (std::size_t k = static_cast<std::size_t>(std::max(elapsed + 1, 0)); k < row.size(); ++k) total += row[k];
  return total;
}

int SemiMarkovKernel::sample_sojourn(State i, Rng& rng) const { return sample_sojourn_exceeding(i, 0, rng); }

int SemiMarkovKernel::sample_sojourn_exceeding(State i, int elapsed, Rng& rng) const {
  if (!has_transitions(i)) throw SimulationError("state " + to_string(i) + " has an empty sojourn law");
  const int k = draw_index(h_[state_index(i)], static_cast<std::size_t>(std::max(elapsed + 1, 1)), rng);
  if (k < 0)
    throw SimulationError("state " + to_string(i) + " has no sojourn longer than " + std::to_string(elapsed));
  return k;
}

State SemiMarkovKernel::sample_successor(State i, int sojourn, Rng& rng) const {
  std::array<double, 3> weights{};
  for (State j : kAllStates) weights[state_index(j)] = q(i, j, sojourn);
  const int idx = draw_index(weights, 0, rng);
  if (idx < 0)
    throw SimulationError("no successor observed for state " + to_string(i) + " with sojourn " +
                          std::to_string(sojourn));
  return kAllStates[static_cast<std::size_t>(idx)];
}

nlohmann::json SemiMarkovKernel::to_json() const {
  nlohmann::json doc;
  doc["states"] = {-1, 0, 1};
  doc["support_length"] = support_length();
  nlohmann::json q = nlohmann::json::array();
  for (const auto& row : q_) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) r.push_back(cell);
    q.push_back(std::move(r));
  }
  doc["q"] = std::move(q);
  doc["max_sojourn"] = max_sojourn_;
  return doc;
}

SemiMarkovKernel SemiMarkovKernel::from_json(const nlohmann::json& doc) {
  try {
    std::array<std::array<std::vector<double>, 3>, 3> q{};
    const auto& table = doc.at("q");
    if (table.size() != 3) throw InputError("kernel JSON must hold a 3x3 table");
    for (std::size_t i = 0; i < 3; ++i) {
      if (table[i].size() != 3) throw InputError("kernel JSON must hold a 3x3 table");
      for (std::size_t j = 0; j < 3; ++j) q[i][j] = table[i][j].get<std::vector<double>>();
    }
    return SemiMarkovKernel(std::move(q));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed kernel JSON: ") + e.what());
  }
}

SemiMarkovKernel estimate_kernel(std::span<const RenewalPoint> renewal) {
  std::int64_t longest = 0;
  std::array<bool, 3> visited{};
  for (const auto& point : renewal) {
    visited[state_index(point.state)] = true;
    if (!point.censored) longest = std::max(longest, point.sojourn);
  }

  std::array<std::array<std::vector<double>, 3>, 3> counts{};
  for (auto& row : counts)
    for (auto& cell : row) cell.assign(static_cast<std::size_t>(longest) + 1, 0.0);
  std::array<double, 3> leaving{};

  for (std::size_t n = 0; n < renewal.size(); ++n) {
    const auto& point = renewal[n];
    if (point.censored) continue;
    if (n + 1 >= renewal.size())
      throw InputError("terminated renewal point " + std::to_string(n) + " has no successor");
    const auto& next = renewal[n + 1];
    if (point.sojourn < 1 || next.state == point.state)
      throw InputError("renewal sequence is not a valid jump sequence at index " + std::to_string(n));
    counts[state_index(point.state)][state_index(next.state)][static_cast<std::size_t>(point.sojourn)] += 1.0;
    leaving[state_index(point.state)] += 1.0;
  }

  for (State s : kAllStates)
    if (visited[state_index(s)] && leaving[state_index(s)] == 0.0)
      throw EstimationError("state " + to_string(s) + " has no observed transitions");

  for (std::size_t i = 0; i < 3; ++i)
    if (leaving[i] > 0.0)
      for (auto& cell : counts[i])
        for (double& v : cell) v /= leaving[i];
  return SemiMarkovKernel(std::move(counts));
}

std::vector<RenewalPoint> simulate_renewal(const SemiMarkovKernel& kernel, State initial, std::size_t transitions,
                                           Rng& rng) {
  std::vector<RenewalPoint> path;
  path.reserve(transitions + 1);
  State state = initial;
  std::int64_t time = 0;
  for (std::size_t n = 0; n < transitions; ++n) {
    const int x = kernel.sample_sojourn(state, rng);
    const State next = kernel.sample_successor(state, x, rng);
    path.push_back({n, state, time, x, false});
    time += x;
    state = next;
  }
  path.push_back({transitions, state, time, 0, true});
  return path;
}

}  // namespace rampsim
