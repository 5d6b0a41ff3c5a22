#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampsim/bridge_model.hpp"
#include "rampsim/param_estimation.hpp"
#include "rampsim/random.hpp"
#include "rampsim/segmentation.hpp"

namespace rampsim {

/// State-of-charge bounds, MWh.
struct BatterySpec {
  double min_soc = 0.0;
  double max_soc = 0.36;
  double initial_soc = 0.18;

  void validate() const;
};

/// Fees per MWh of unserved up/down ramp energy; discount rate per step.
struct PenaltySpec {
  double up_fee = 21.52;
  double down_fee = 26.50;
  double discount_rate = 0.0;

  void validate() const;
};

struct SegmentKey {
  State from = State::Charging;
  State to = State::Neutral;
  int sojourn = 1;

  auto operator<=>(const SegmentKey&) const = default;
};

/// Everything needed to simulate charge paths for one ramp limit: a parameter
/// sampler per random segment and a σ model per (from, to) pair.
class ChargeModel {
 public:
  ChargeModel() = default;
  ChargeModel(double limit, double capacity) : limit_(limit), capacity_(capacity) {}

  double limit() const { return limit_; }
  double capacity() const { return capacity_; }

  void set_sampler(SegmentKey key, std::shared_ptr<const ParamSampler> sampler);
  void set_sigma_model(SigmaModel model);

  /// Sampler for `key`, or the one with the nearest sojourn for the same
  /// (from, to) pair (ties to the shorter sojourn). Null if the pair is unknown.
  const ParamSampler* find_sampler(const SegmentKey& key, bool& exact) const;
  const SigmaModel* find_sigma_model(State from, State to) const;

  const std::map<SegmentKey, std::shared_ptr<const ParamSampler>>& samplers() const { return samplers_; }
  const std::map<std::pair<int, int>, SigmaModel>& sigma_models() const { return sigma_models_; }

  SupportSpec support(State side, int sojourn) const { return {side, sojourn, limit_, capacity_}; }

  nlohmann::json to_json() const;
  static ChargeModel from_json(const nlohmann::json& doc);

 private:
  double limit_ = 0.0;
  double capacity_ = 0.0;
  std::map<SegmentKey, std::shared_ptr<const ParamSampler>> samplers_;
  std::map<std::pair<int, int>, SigmaModel> sigma_models_;
};

struct ChargeDraw {
  std::vector<double> values;  // c_0 .. c_{x+1}
  BridgeParams params;
  bool fallback_sampler = false;
  bool sigma_clamped = false;
};

/// One charge/discharge path for the random segment (i, j, x): sample
/// (ρ, τ, h), predict σ, simulate the two-piece bridge, clip it into the
/// admissible band and add the triangle back.
ChargeDraw simulate_charge(State from, State to, int sojourn, const ChargeModel& model, Rng& rng);

/// Same, with explicit parameters (σ included).
std::vector<double> simulate_charge_with(const BridgeParams& params, int sojourn, double limit, Rng& rng);

/// Battery position at the start of a simulation.
struct InitialCondition {
  State state = State::Neutral;
  double soc = 0.18;
  int backward = 0;  // steps already spent in `state`
};

/// Renewal path plus the per-step SOC, penalty and discounted cumulative
/// penalty. Index 0 is the initial time; steps 1..T are simulated.
struct PenaltyPath {
  std::vector<State> jump_states;       // j_0 .. j_N
  std::vector<std::int64_t> jump_times; // k_0 .. k_N
  std::vector<State> state;             // Z(k)
  std::vector<int> backward;            // B(k)
  std::vector<double> soc;              // S(k)
  std::vector<double> penalty;          // M(k)
  std::vector<double> discounted;       // W(k)
  std::size_t fallback_draws = 0;

  std::size_t steps() const { return soc.empty() ? 0 : soc.size() - 1; }
};

/// Runs the semi-Markov battery simulation for `transitions` jumps, or until
/// at least `min_steps` steps exist when `transitions` is 0.
PenaltyPath simulate_penalty_path(const SemiMarkovKernel& kernel, const ChargeModel& model,
                                  const BatterySpec& battery, const PenaltySpec& fees, std::size_t transitions,
                                  const InitialCondition& initial, Rng& rng, std::size_t min_steps = 0);

/// W(k) = Σ_{m<=k} M(m) e^{-r m}.
std::vector<double> discounted_penalty(std::span<const double> penalty, double rate);

/// SOC/penalty recursion over given per-step states and charges. Element 0 of
/// `states`/`charges` is step 1. Returns S and M with S(0) = initial_soc.
struct PenaltyReplay {
  std::vector<double> soc;
  std::vector<double> penalty;
};
PenaltyReplay replay_penalty(std::span<const State> states, std::span<const double> charges,
                             const BatterySpec& battery, const PenaltySpec& fees, double initial_soc);

/// Per-step sampling moments of the discounted cumulative penalty.
struct MomentRow {
  int t = 0;
  std::vector<double> raw_moments;  // a = 1..order
  double mean = 0.0;
  double std_dev = 0.0;  // n-1 denominator
  double se_mean = 0.0;
};

/// Path generator: returns M(0..K) (at least K + 1 entries) for the given path index.
using PenaltyGenerator = std::function<std::vector<double>(std::size_t path)>;

std::vector<MomentRow> mc_moments(const PenaltyGenerator& generate, std::size_t paths, int horizon, int order,
                                  const PenaltySpec& fees, unsigned threads = 0);

/// Moments from already materialized penalty paths (each M(0..K)).
std::vector<MomentRow> sample_moments(std::span<const std::vector<double>> penalties, int horizon, int order,
                                      double discount_rate);

}  // namespace rampsim
