#include "rampsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "rampsim/error.hpp"
#include "rampsim/parallel.hpp"

namespace rampsim {

void BatterySpec::validate() const {
  if (!(min_soc <= max_soc)) throw InputError("battery minimum SOC must not exceed the maximum");
  if (!(initial_soc >= min_soc && initial_soc <= max_soc)) throw InputError("initial SOC outside battery bounds");
}

void PenaltySpec::validate() const {
  if (!(up_fee >= 0.0) || !(down_fee >= 0.0)) throw InputError("penalty fees must be non-negative");
  if (!(discount_rate >= 0.0)) throw InputError("discount rate must be non-negative");
}

void ChargeModel::set_sampler(SegmentKey key, std::shared_ptr<const ParamSampler> sampler) {
  samplers_[key] = std::move(sampler);
}

void ChargeModel::set_sigma_model(SigmaModel model) {
  sigma_models_[{state_value(model.from), state_value(model.to)}] = std::move(model);
}

const ParamSampler* ChargeModel::find_sampler(const SegmentKey& key, bool& exact) const {
  exact = false;
  if (auto it = samplers_.find(key); it != samplers_.end()) {
    exact = true;
    return it->second.get();
  }
  const ParamSampler* best = nullptr;
  int best_gap = std::numeric_limits<int>::max();
  for (const auto& [k, sampler] : samplers_) {
    if (k.from != key.from || k.to != key.to) continue;
    const int gap = std::abs(k.sojourn - key.sojourn);
    if (gap < best_gap) {
      best_gap = gap;
      best = sampler.get();
    }
  }
  return best;
}

const SigmaModel* ChargeModel::find_sigma_model(State from, State to) const {
  auto it = sigma_models_.find({state_value(from), state_value(to)});
  return it == sigma_models_.end() ? nullptr : &it->second;
}

nlohmann::json ChargeModel::to_json() const {
  nlohmann::json samplers = nlohmann::json::array();
  for (const auto& [key, sampler] : samplers_)
    samplers.push_back({{"from", state_value(key.from)},
                        {"to", state_value(key.to)},
                        {"sojourn", key.sojourn},
                        {"sampler", sampler->to_json()}});
  nlohmann::json sigmas = nlohmann::json::array();
  for (const auto& [key, model] : sigma_models_) sigmas.push_back(model.to_json());
  return {{"limit", limit_}, {"capacity", capacity_}, {"samplers", samplers}, {"sigma_models", sigmas}};
}

ChargeModel ChargeModel::from_json(const nlohmann::json& doc) {
  try {
    ChargeModel model(doc.at("limit").get<double>(), doc.at("capacity").get<double>());
    for (const auto& entry : doc.at("samplers"))
      model.set_sampler({state_from_value(entry.at("from").get<int>()), state_from_value(entry.at("to").get<int>()),
                         entry.at("sojourn").get<int>()},
                        sampler_from_json(entry.at("sampler")));
    for (const auto& entry : doc.at("sigma_models")) model.set_sigma_model(SigmaModel::from_json(entry));
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed charge model JSON: ") + e.what());
  }
}

std::vector<double> simulate_charge_with(const BridgeParams& params, int sojourn, double limit, Rng& rng) {
  if (sojourn < 1) throw InputError("charge simulation needs a sojourn of at least 1");
  const auto latent = sample_two_piece_bridge(params.tau, sojourn, params.sigma, rng);
  const auto error = clip_error(latent, params, sojourn, limit);
  std::vector<double> c(static_cast<std::size_t>(sojourn) + 2, 0.0);
  for (int k = 1; k <= sojourn; ++k) {
    const double ceiling = params.rho - (k - 1) * limit;
    c[k] = std::clamp(triangle(k, params.tau, params.height, sojourn) + error.values[k - 1], 0.0, ceiling);
  }
  return c;
}

ChargeDraw simulate_charge(State from, State to, int sojourn, const ChargeModel& model, Rng& rng) {
  if (sojourn < 1) throw InputError("charge simulation needs a sojourn of at least 1");
  ChargeDraw draw;
  if (from == State::Neutral) {
    draw.values.assign(static_cast<std::size_t>(sojourn) + 2, 0.0);
    return draw;
  }
  bool exact = false;
  const auto* sampler = model.find_sampler({from, to, sojourn}, exact);
  if (!sampler)
    throw SimulationError("no parameter sampler for segment (" + to_string(from) + ", " + to_string(to) + ")");
  const auto* sigma_model = model.find_sigma_model(from, to);
  if (!sigma_model)
    throw SimulationError("no sigma model for segment (" + to_string(from) + ", " + to_string(to) + ")");

  draw.fallback_sampler = !exact;
  draw.params = exact ? sample_params(*sampler, rng)
                      : sample_params_projected(*sampler, model.support(from, sojourn), rng);
  const auto sigma = predict_sigma(*sigma_model, draw.params.rho, draw.params.tau, draw.params.height, sojourn);
  draw.params.sigma = sigma.value;
  draw.sigma_clamped = sigma.clamped;
  draw.values = simulate_charge_with(draw.params, sojourn, model.limit(), rng);
  return draw;
}

namespace {

struct StepResult {
  double soc;
  double penalty;
};

StepResult battery_step(State state, double charge, double soc, const BatterySpec& battery, const PenaltySpec& fees) {
  switch (state) {
    case State::Charging:
      return {std::min(soc + charge, battery.max_soc),
              fees.up_fee * std::max(charge - (battery.max_soc - soc), 0.0)};
    case State::Discharging:
      return {std::max(soc - charge, battery.min_soc),
              fees.down_fee * std::max(charge - (soc - battery.min_soc), 0.0)};
    case State::Neutral:
      break;
  }
  return {soc, 0.0};
}

}  // namespace

PenaltyPath simulate_penalty_path(const SemiMarkovKernel& kernel, const ChargeModel& model,
                                  const BatterySpec& battery, const PenaltySpec& fees, std::size_t transitions,
                                  const InitialCondition& initial, Rng& rng, std::size_t min_steps) {
  battery.validate();
  fees.validate();
  if (transitions == 0 && min_steps == 0) throw InputError("need a transition count or a step horizon");
  if (initial.backward < 0) throw InputError("backward recurrence time must be non-negative");
  if (!(initial.soc >= battery.min_soc && initial.soc <= battery.max_soc))
    throw InputError("initial SOC outside battery bounds");

  PenaltyPath path;
  path.state.push_back(initial.state);
  path.backward.push_back(initial.backward);
  path.soc.push_back(initial.soc);
  path.penalty.push_back(0.0);

  State state = initial.state;
  std::int64_t time = 0;
  double soc = initial.soc;
  for (std::size_t n = 0; transitions > 0 ? n < transitions : path.steps() < min_steps; ++n) {
    const int elapsed = n == 0 ? initial.backward : 0;
    const int x = kernel.sample_sojourn_exceeding(state, elapsed, rng);
    const State next = kernel.sample_successor(state, x, rng);
    std::vector<double> charges;
    if (state == State::Neutral) {
      charges.assign(static_cast<std::size_t>(x) + 2, 0.0);
    } else {
      auto draw = simulate_charge(state, next, x, model, rng);
      if (draw.fallback_sampler) ++path.fallback_draws;
      charges = std::move(draw.values);
    }

    path.jump_states.push_back(state);
    path.jump_times.push_back(time);
    for (int k = elapsed + 1; k <= x; ++k) {
      const auto step = battery_step(state, charges[k], soc, battery, fees);
      soc = step.soc;
      path.state.push_back(state);
      path.backward.push_back(k - 1);
      path.soc.push_back(soc);
      path.penalty.push_back(step.penalty);
    }
    time += x - elapsed;
    state = next;
  }
  path.jump_states.push_back(state);
  path.jump_times.push_back(time);
  path.discounted = discounted_penalty(path.penalty, fees.discount_rate);
  return path;
}

std::vector<double> discounted_penalty(std::span<const double> penalty, double rate) {
  if (!(rate >= 0.0)) throw InputError("discount rate must be non-negative");
  std::vector<double> w(penalty.size());
  double acc = 0.0;
  for (std::size_t m = 0; m < penalty.size(); ++m) {
    acc += penalty[m] * std::exp(-rate * static_cast<double>(m));
    w[m] = acc;
  }
  return w;
}

PenaltyReplay replay_penalty(std::span<const State> states, std::span<const double> charges,
                             const BatterySpec& battery, const PenaltySpec& fees, double initial_soc) {
  if (states.size() != charges.size()) throw InputError("states and charges must align");
  PenaltyReplay out;
  out.soc.reserve(states.size() + 1);
  out.penalty.reserve(states.size() + 1);
  out.soc.push_back(initial_soc);
  out.penalty.push_back(0.0);
  double soc = initial_soc;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto step = battery_step(states[k], charges[k], soc, battery, fees);
    soc = step.soc;
    out.soc.push_back(soc);
    out.penalty.push_back(step.penalty);
  }
  return out;
}

std::vector<MomentRow> sample_moments(std::span<const std::vector<double>> penalties, int horizon, int order,
                                      double discount_rate) {
  if (penalties.size() < 2) throw InputError("moment estimation needs at least two paths");
  if (horizon < 1) throw InputError("moment horizon must be at least 1");
  if (order < 1) throw InputError("moment order must be at least 1");
  const auto n = static_cast<double>(penalties.size());
  std::vector<double> discount(static_cast<std::size_t>(horizon) + 1);
  for (int k = 0; k <= horizon; ++k) discount[k] = std::exp(-discount_rate * k);

  std::vector<MomentRow> rows(static_cast<std::size_t>(horizon));
  std::vector<double> w(penalties.size(), 0.0);
  for (std::size_t p = 0; p < penalties.size(); ++p)
    if (penalties[p].size() < static_cast<std::size_t>(horizon) + 1)
      throw InputError("penalty path " + std::to_string(p) + " is shorter than the horizon");

  for (int t = 1; t <= horizon; ++t) {
    auto& row = rows[t - 1];
    row.t = t;
    row.raw_moments.assign(static_cast<std::size_t>(order), 0.0);
    double sum = 0.0;
    for (std::size_t p = 0; p < penalties.size(); ++p) {
      w[p] += penalties[p][t] * discount[t];
      double power = 1.0;
      for (int a = 0; a < order; ++a) {
        power *= w[p];
        row.raw_moments[a] += power;
      }
      sum += w[p];
    }
    for (double& m : row.raw_moments) m /= n;
    row.mean = sum / n;
    double ss = 0.0;
    for (double value : w) ss += (value - row.mean) * (value - row.mean);
    row.std_dev = std::sqrt(ss / (n - 1.0));
    row.se_mean = row.std_dev / std::sqrt(n);
  }
  return rows;
}

std::vector<MomentRow> mc_moments(const PenaltyGenerator& generate, std::size_t paths, int horizon, int order,
                                  const PenaltySpec& fees, unsigned threads) {
  fees.validate();
  if (paths < 2) throw InputError("moment estimation needs at least two paths");
  std::vector<std::vector<double>> penalties(paths);
  parallel_for(
      paths,
      [&](std::size_t p) {
        try {
          penalties[p] = generate(p);
        } catch (const std::exception& e) {
          throw SimulationError("path " + std::to_string(p) + ": " + e.what());
        }
      },
      threads);
  return sample_moments(penalties, horizon, order, fees.discount_rate);
}

}  // namespace rampsim
