#pragma once

#include <span>
#include <vector>

#include "rampsim/random.hpp"
#include "rampsim/segmentation.hpp"

namespace rampsim {

/// Volatilities below this are treated as zero: the bridge collapses to the triangle.
inline constexpr double kSigmaFloor = 1e-6;
/// Tolerance used when flagging an error value as sitting on a clipping bound.
inline constexpr double kClipTolerance = 1e-9;

/// Charge path embedded in a bridge pinned to zero at 0 and x + 1.
/// `values` has x + 2 entries, values[k] = 𝒞(k).
struct ChargeBridge {
  State from = State::Charging;
  State to = State::Neutral;
  int sojourn = 0;
  std::vector<double> values;

  double at(int k) const { return values.at(static_cast<std::size_t>(k)); }
};

struct BridgeParams {
  double rho = 0.0;     // initial corrected power proxy, MW
  int tau = 1;          // peak time in {1..x}
  double height = 0.0;  // peak height, MW
  double sigma = kSigmaFloor;
};

struct Peak {
  int tau = 1;
  double height = 0.0;
};

/// Error process around the triangle. values[k-1] = E(k) for k = 1..x;
/// clipped[k-1] marks points sitting on a clipping bound.
struct ErrorPath {
  std::vector<double> values;
  std::vector<bool> clipped;
};

struct BridgeTransition {
  double mean = 0.0;
  double variance = 0.0;
};

ChargeBridge embed_bridge(const Segment& segment);

/// argmax over k = 1..x, smallest k on ties.
Peak extract_peak(const ChargeBridge& bridge);

/// Piecewise-linear baseline through (0,0), (tau,height), (x+1,0).
double triangle(double t, int tau, double height, int sojourn);

/// Initial corrected power proxy ρ for a charging (+1) or discharging (-1) segment.
double compute_initial_power(State side, double entry_power, int sojourn, double limit, double rated_capacity);

/// Lower bound -g(k) and upper bound ρ - (k-1)ℓ - g(k) of the error process.
struct ErrorBounds {
  double lower = 0.0;
  double upper = 0.0;
};
ErrorBounds error_bounds(int k, const BridgeParams& params, int sojourn, double limit);

/// E(k) = 𝒞(k) - g(k). Points within kClipTolerance of a bound are flagged.
ErrorPath decompose(const ChargeBridge& bridge, const BridgeParams& params, double limit);

/// Clamps a latent path into the admissible band. `latent[k-1]` holds Y(k).
/// Throws InvalidParameterError when the band is empty at some k.
ErrorPath clip_error(std::span<const double> latent, const BridgeParams& params, int sojourn, double limit);

/// Law of Y(t) given Y(s) = y_prev for a bridge pinned at (horizon, 0).
BridgeTransition bb_transition(double y_prev, double s, double t, double horizon, double sigma);

/// Two independent bridges joined at the peak: the first on [0, tau], the
/// second on [tau, x+1]. Returns Y(1..x); Y(tau) is exactly zero.
std::vector<double> sample_two_piece_bridge(int tau, int sojourn, double sigma, Rng& rng);

}  // namespace rampsim
