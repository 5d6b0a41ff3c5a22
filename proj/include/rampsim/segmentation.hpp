#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampsim/power_pipeline.hpp"
#include "rampsim/random.hpp"

namespace rampsim {

/// Battery operation: discharging on a down-ramp, idle, charging on an up-ramp.
enum class State : int { Discharging = -1, Neutral = 0, Charging = 1 };

inline constexpr std::array<State, 3> kAllStates{State::Discharging, State::Neutral, State::Charging};

constexpr int state_value(State s) { return static_cast<int>(s); }
constexpr std::size_t state_index(State s) { return static_cast<std::size_t>(static_cast<int>(s) + 1); }
State state_from_value(int value);
std::string to_string(State s);

/// One jump of the Markov renewal chain: J_n = state, K_n = jump_time and
/// X_{n+1} = sojourn. The last point of a finite record is censored: its
/// sojourn runs to the end of the data and no successor was observed.
struct RenewalPoint {
  std::size_t index = 0;
  State state = State::Neutral;
  std::int64_t jump_time = 0;
  std::int64_t sojourn = 0;
  bool censored = false;
};

/// Random segment (i, j, x) with its absolute charge path |e - ē| at
/// K_n, ..., K_n + x - 1.
struct Segment {
  State from = State::Neutral;
  State to = State::Neutral;  // meaningless when censored
  int sojourn = 0;
  std::int64_t start = 0;
  std::vector<double> charges;
  /// Corrected power one step before the jump, ē(K_n - 1). For a segment that
  /// opens the record it is reconstructed as ē(0) - i·ℓ.
  double entry_power = 0.0;
  bool censored = false;
};

struct Segmentation {
  std::vector<RenewalPoint> renewal;
  std::vector<Segment> segments;
};

inline constexpr double kDefaultSignTolerance = 1e-9;

/// Splits a corrected power series at every change of sgn(e - ē).
Segmentation extract_segments(const PowerSeries& series, double sign_tolerance = kDefaultSignTolerance);

/// Per-step state sequence sgn(e - ē) with the same tolerance rule.
std::vector<State> state_sequence(const PowerSeries& series, double sign_tolerance = kDefaultSignTolerance);

/// Empirical discrete-time semi-Markov kernel q_ij(k) with its marginals.
/// Sojourn support is truncated at the longest observed sojourn.
class SemiMarkovKernel {
 public:
  SemiMarkovKernel() = default;

  /// `q[i][j][k]` indexed by state_index; every inner vector has the same length.
  explicit SemiMarkovKernel(std::array<std::array<std::vector<double>, 3>, 3> q);

  double q(State i, State j, int k) const;
  double sojourn_probability(State i, int k) const;  // h_i(k)
  double transition_probability(State i, State j) const;  // p_ij
  double conditional_transition(State i, State j, int k) const;  // p_ij(k)

  bool has_transitions(State i) const { return total_[state_index(i)] > 0.0; }
  int max_sojourn(State i) const { return max_sojourn_[state_index(i)]; }
  int support_length() const { return static_cast<int>(q_[0][0].size()); }

  /// Σ_{k > elapsed} h_i(k).
  double survival(State i, int elapsed) const;

  int sample_sojourn(State i, Rng& rng) const;
  /// Sojourn drawn from h_i conditioned on exceeding `elapsed`.
  int sample_sojourn_exceeding(State i, int elapsed, Rng& rng) const;
  State sample_successor(State i, int sojourn, Rng& rng) const;

  const std::array<std::array<std::vector<double>, 3>, 3>& table() const { return q_; }

  nlohmann::json to_json() const;
  static SemiMarkovKernel from_json(const nlohmann::json& doc);

 private:
  std::array<std::array<std::vector<double>, 3>, 3> q_{};
  std::array<std::vector<double>, 3> h_{};
  std::array<std::array<double, 3>, 3> p_{};
  std::array<double, 3> total_{};
  std::array<int, 3> max_sojourn_{};
};

/// Counting estimator q_ij(k) = #(i→j with sojourn k) / #(terminated visits to i).
/// Censored renewal points are ignored. Throws EstimationError naming any state
/// that is visited but never observed to leave.
SemiMarkovKernel estimate_kernel(std::span<const RenewalPoint> renewal);

/// Simulates `transitions` jumps of the renewal chain driven by `kernel`.
std::vector<RenewalPoint> simulate_renewal(const SemiMarkovKernel& kernel, State initial,
                                           std::size_t transitions, Rng& rng);

}  // namespace rampsim
