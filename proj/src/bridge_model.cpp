#include "rampsim/bridge_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rampsim/error.hpp"

namespace rampsim {

ChargeBridge embed_bridge(const Segment& segment) {
  if (segment.from == State::Neutral) throw InputError("state 0 segments carry no charge process");
  if (segment.sojourn < 1 || segment.charges.size() != static_cast<std::size_t>(segment.sojourn))
    throw InputError("segment charge path length must equal its sojourn");
  ChargeBridge bridge;
  bridge.from = segment.from;
  bridge.to = segment.to;
  bridge.sojourn = segment.sojourn;
  bridge.values.assign(static_cast<std::size_t>(segment.sojourn) + 2, 0.0);
  for (int k = 1; k <= segment.sojourn; ++k) bridge.values[k] = std::abs(segment.charges[k - 1]);
  return bridge;
}

Peak extract_peak(const ChargeBridge& bridge) {
  if (bridge.sojourn < 1) throw InputError("bridge needs at least one interior point");
  Peak peak{1, bridge.at(1)};
  for (int k = 2; k <= bridge.sojourn; ++k)
    if (bridge.at(k) > peak.height) peak = {k, bridge.at(k)};
  return peak;
}

double triangle(double t, int tau, double height, int sojourn) {
  if (tau < 1 || tau > sojourn)
    throw InputError("peak time " + std::to_string(tau) + " outside 1.." + std::to_string(sojourn));
  if (t <= tau) return height / tau * t;
  return height * (sojourn + 1 - t) / (sojourn + 1 - tau);
}

double compute_initial_power(State side, double entry_power, int sojourn, double limit, double rated_capacity) {
  const double span = limit * (sojourn + 1);
  switch (side) {
    case State::Discharging:
      return std::min(std::max(entry_power - limit, span), rated_capacity);
    case State::Charging:
      return std::max({rated_capacity - (entry_power - limit), rated_capacity - span, 0.0});
    case State::Neutral:
      break;
  }
  throw InputError("state 0 has no initial power");
}

ErrorBounds error_bounds(int k, const BridgeParams& params, int sojourn, double limit) {
  const double g = triangle(k, params.tau, params.height, sojourn);
  return {-g, params.rho - (k - 1) * limit - g};
}

ErrorPath decompose(const ChargeBridge& bridge, const BridgeParams& params, double limit) {
  ErrorPath path;
  path.values.resize(static_cast<std::size_t>(bridge.sojourn));
  path.clipped.resize(static_cast<std::size_t>(bridge.sojourn));
  for (int k = 1; k <= bridge.sojourn; ++k) {
    const auto bounds = error_bounds(k, params, bridge.sojourn, limit);
    const double e = bridge.at(k) + bounds.lower;  // 𝒞(k) - g(k)
    path.values[k - 1] = e;
    path.clipped[k - 1] = e <= bounds.lower + kClipTolerance || e >= bounds.upper - kClipTolerance;
  }
  return path;
}

ErrorPath clip_error(std::span<const double> latent, const BridgeParams& params, int sojourn, double limit) {
  if (latent.size() != static_cast<std::size_t>(sojourn))
    throw InputError("latent path length must equal the sojourn");
  ErrorPath path;
  path.values.resize(latent.size());
  path.clipped.resize(latent.size());
  for (int k = 1; k <= sojourn; ++k) {
    const auto bounds = error_bounds(k, params, sojourn, limit);
    if (bounds.upper < bounds.lower)
      throw InvalidParameterError("empty error band at k=" + std::to_string(k) +
                                  ": rho, tau, height are inconsistent");
    const double y = latent[k - 1];
    const double e = std::max(bounds.lower, std::min(y, bounds.upper));
    path.values[k - 1] = e;
    path.clipped[k - 1] = e != y;
  }
  return path;
}

BridgeTransition bb_transition(double y_prev, double s, double t, double horizon, double sigma) {
  if (!(s >= 0.0 && s < t)) throw InputError("bridge transition needs 0 <= s < t");
  if (!(t < horizon)) throw InputError("bridge transition time must precede the horizon");
  if (!(sigma > 0.0)) throw InputError("bridge volatility must be positive");
  const double remaining = horizon - s;
  return {y_prev * (horizon - t) / remaining, sigma * sigma * (t - s) * (horizon - t) / remaining};
}

std::vector<double> sample_two_piece_bridge(int tau, int sojourn, double sigma, Rng& rng) {
  if (tau < 1 || tau > sojourn) throw InputError("peak time outside the segment");
  std::vector<double> y(static_cast<std::size_t>(sojourn), 0.0);
  if (!(sigma > kSigmaFloor)) return y;

  std::normal_distribution<double> normal;
  auto run_piece = [&](int first, int last, int origin, int horizon) {
    double prev = 0.0;
    int prev_t = origin;
    for (int k = first; k <= last; ++k) {
      if (k == horizon) break;
      const auto law = bb_transition(prev, prev_t, k, horizon, sigma);
      prev = law.mean + std::sqrt(law.variance) * normal(rng);
      prev_t = k;
      y[k - 1] = prev;
    }
  };
  run_piece(1, tau, 0, tau);
  run_piece(tau + 1, sojourn, tau, sojourn + 1);
  y[tau - 1] = 0.0;
  return y;
}

}  // namespace rampsim
