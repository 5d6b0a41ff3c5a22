#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rampsim/bridge_model.hpp"
#include "rampsim/random.hpp"
#include "rampsim/segmentation.hpp"

namespace rampsim {

/// A (ρ, τ, h) triplet. `tau` is continuous when it comes straight out of a
/// density estimate and integral once snapped to the support.
struct ParamDraw {
  double rho = 0.0;
  double tau = 1.0;
  double height = 0.0;
};

/// Admissible region of (ρ, τ, h) for a segment of side i and sojourn x.
///
/// The ρ range is the image of the initial-power map for that side, further
/// restricted so the charge ceiling ρ - (k-1)ℓ stays non-negative on the whole
/// segment. The height is bounded by the ceiling at the peak,
/// 0 < h <= ρ - (τ-1)ℓ.
struct SupportSpec {
  State side = State::Charging;
  int sojourn = 1;
  double limit = 0.02;
  double capacity = 2.0;

  double rho_min() const;
  double rho_max() const;
  double height_max(double rho, int tau) const;
  bool empty() const { return rho_min() > rho_max(); }
  bool contains(const ParamDraw& draw) const;
  void validate() const;
};

/// Nearest integer in {1..x}, halves rounded up.
int round_peak_time(double tau, int sojourn);

/// Joint law of (ρ, τ, h) for one random segment. Implementations return
/// draws with a continuous τ; sample_params snaps and enforces the support.
class ParamSampler {
 public:
  virtual ~ParamSampler() = default;

  virtual ParamDraw draw(Rng& rng) const = 0;
  virtual nlohmann::json to_json() const = 0;

  const SupportSpec& support() const { return support_; }
  std::size_t sample_count() const { return sample_count_; }
  std::size_t observed_count() const { return observed_count_; }
  bool augmented() const { return sample_count_ > observed_count_; }

 protected:
  ParamSampler(SupportSpec support, std::size_t observed, std::size_t sample)
      : support_(support), observed_count_(observed), sample_count_(sample) {}

  SupportSpec support_;
  std::size_t observed_count_ = 0;
  std::size_t sample_count_ = 0;
};

/// Gaussian copula on rank normal scores with linearly interpolated
/// empirical-quantile marginals.
class GaussianCopulaSampler final : public ParamSampler {
 public:
  GaussianCopulaSampler(SupportSpec support, std::array<std::array<double, 3>, 3> correlation,
                        std::array<std::vector<double>, 3> sorted_marginals, std::size_t observed);

  ParamDraw draw(Rng& rng) const override;
  nlohmann::json to_json() const override;

  const std::array<std::array<double, 3>, 3>& correlation() const { return correlation_; }
  const std::array<std::vector<double>, 3>& marginals() const { return marginals_; }

 private:
  std::array<std::array<double, 3>, 3> correlation_{};
  std::array<std::array<double, 3>, 3> cholesky_{};
  std::array<std::vector<double>, 3> marginals_;
};

/// Degenerate law: always the same triplet.
class FixedParamSampler final : public ParamSampler {
 public:
  FixedParamSampler(SupportSpec support, ParamDraw value);

  ParamDraw draw(Rng&) const override { return value_; }
  nlohmann::json to_json() const override;

 private:
  ParamDraw value_;
};

std::shared_ptr<const ParamSampler> sampler_from_json(const nlohmann::json& doc);

inline constexpr std::size_t kDefaultMinSample = 10;
inline constexpr double kBootstrapJitter = 0.01;

/// Fits the copula sampler. Samples smaller than `min_sample` are bootstrap
/// augmented with ±1% (of each marginal's range) uniform jitter, keeping every
/// added point inside the support.
std::shared_ptr<const ParamSampler> fit_joint_density(std::span<const ParamDraw> triplets,
                                                      const SupportSpec& support,
                                                      std::size_t min_sample = kDefaultMinSample,
                                                      std::uint64_t seed = 0);

inline constexpr int kMaxConsecutiveRejections = 10000;

/// Draws until the snapped triplet falls in the sampler's support.
BridgeParams sample_params(const ParamSampler& sampler, Rng& rng);

/// Draws from a sampler fitted for a different sojourn and projects the result
/// onto `target`: τ snapped to {1..x}, ρ clamped to its range, h capped at h̄.
BridgeParams sample_params_projected(const ParamSampler& sampler, const SupportSpec& target, Rng& rng);

// ---------------------------------------------------------------------------
// Volatility

struct SigmaEstimate {
  double sigma = 0.0;
  double sum_squares = 0.0;  // Σ squared standardized innovations (σ = 1 units)
  int terms = 0;
};

/// Maximum likelihood σ for the two-piece bridge from the unclipped points of
/// an error path. Each unclipped point is scored against the previous
/// unclipped point of the same piece, or against the pinned origin of that
/// piece ((0,0) before the peak, (τ,0) after it).
SigmaEstimate mle_sigma(const ErrorPath& error, int tau, int sojourn, int min_terms = 2);

/// Pooled estimate over several independent paths sharing one σ.
SigmaEstimate pool_sigma(std::span<const SigmaEstimate> estimates);

/// Box-Cox transform q_λ and its inverse.
double box_cox(double value, double lambda);
/// Returns false when `prediction` lies outside the image of q_λ.
bool inverse_box_cox(double prediction, double lambda, double& value);

struct RegressionOptions {
  double lambda_min = -2.0;
  double lambda_max = 2.0;
  double lambda_step = 0.05;
  double outlier_iqr_multiplier = 3.0;
};

/// Linear model on a Box-Cox transformed response with one Cook's-distance
/// outlier pass.
struct BoxCoxRegression {
  std::vector<std::string> terms;  // "intercept" first
  std::vector<double> coefficients;
  double lambda = 1.0;
  double r_squared = 0.0;
  double adjusted_r_squared = 0.0;
  double residual_sd = 0.0;
  double normality_score = 0.0;
  std::size_t observations = 0;
  std::size_t outliers_removed = 0;

  double linear_predictor(std::span<const double> row_with_intercept) const;
};

/// `regressors[c]` is the c-th column (no intercept). Throws EstimationError
/// listing the collinear terms when the design is rank deficient.
BoxCoxRegression fit_boxcox_regression(const std::vector<std::vector<double>>& regressors,
                                       const std::vector<std::string>& names, std::span<const double> response,
                                       const RegressionOptions& options = {});

struct SigmaObservation {
  double sigma = 0.0;
  double rho = 0.0;
  int tau = 1;
  double height = 0.0;
  int sojourn = 1;
};

/// Box-Cox regression of σ̂ on ρ, τ, h, x and their pairwise products.
struct SigmaModel {
  State from = State::Charging;
  State to = State::Neutral;
  BoxCoxRegression fit;
  bool fallback = false;  // intercept-only model used when the regression could not be fitted

  static SigmaModel constant(double sigma, State from = State::Charging, State to = State::Neutral);

  nlohmann::json to_json() const;
  static SigmaModel from_json(const nlohmann::json& doc);
};

inline constexpr std::size_t kSigmaTerms = 11;

/// Design row [1, ρ, τ, h, x, ρτ, ρh, ρx, τh, τx, hx].
std::vector<double> sigma_design_row(double rho, double tau, double height, double sojourn);

SigmaModel fit_sigma_regression(std::span<const SigmaObservation> observations, const RegressionOptions& options = {});

struct SigmaPrediction {
  double value = kSigmaFloor;
  bool clamped = false;
};

SigmaPrediction predict_sigma(const SigmaModel& model, double rho, int tau, double height, int sojourn);

}  // namespace rampsim
