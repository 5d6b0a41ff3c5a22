#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rampsim/error.hpp"
#include "rampsim/param_estimation.hpp"

namespace rampsim {

double SupportSpec::rho_min() const {
  const double span = (sojourn + 1) * limit;
  const double side_min = side == State::Discharging ? std::min(span, capacity) : std::max(capacity - span, 0.0);
  return std::max(side_min, (sojourn - 1) * limit);
}

double SupportSpec::rho_max() const { return side == State::Discharging ? capacity : capacity + limit; }

double SupportSpec::height_max(double rho, int tau) const { return rho - (tau - 1) * limit; }

bool SupportSpec::contains(const ParamDraw& d) const {
  constexpr double slack = 1e-12;
  if (d.tau != std::floor(d.tau) || d.tau < 1 || d.tau > sojourn) return false;
  if (d.rho < rho_min() - slack || d.rho > rho_max() + slack) return false;
  return d.height > 0.0 && d.height <= height_max(d.rho, static_cast<int>(d.tau)) + slack;
}

void SupportSpec::validate() const {
  if (side == State::Neutral) throw InvalidParameterError("state 0 has no parameter support");
  if (sojourn < 1) throw InvalidParameterError("support needs a sojourn of at least 1");
  if (!(limit > 0.0) || !(capacity > 0.0)) throw InvalidParameterError("support needs positive limit and capacity");
  if (empty())
    throw InvalidParameterError("empty support for side " + to_string(side) + ", x=" + std::to_string(sojourn));
}

int round_peak_time(double tau, int sojourn) {
  const double nearest = std::floor(tau + 0.5);
  return static_cast<int>(std::clamp(nearest, 1.0, static_cast<double>(sojourn)));
}

namespace {

using Matrix3 = std::array<std::array<double, 3>, 3>;

Matrix3 cholesky_of(const Matrix3& corr) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = corr[r][c];
  Eigen::LLT<Eigen::Matrix3d> llt(m);
  if (llt.info() != Eigen::Success) throw EstimationError("copula correlation matrix is not positive definite");
  const Eigen::Matrix3d l = llt.matrixL();
  Matrix3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r][c] = l(r, c);
  return out;
}

// Projects a symmetric matrix with unit diagonal onto the positive definite cone.
Matrix3 nearest_correlation(const Matrix3& corr) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = corr[r][c];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m);
  Eigen::Vector3d values = eig.eigenvalues().cwiseMax(1e-6);
  Eigen::Matrix3d fixed = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  Matrix3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[r][c] = r == c ? 1.0 : fixed(r, c) / std::sqrt(fixed(r, r) * fixed(c, c));
  return out;
}

double empirical_quantile(const std::vector<double>& sorted, double u) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = std::clamp(u, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Mid-ranks mapped to normal scores Φ⁻¹(r / (n + 1)).
std::vector<double> normal_scores(const std::vector<double>& values) {
  const auto n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> scores(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      scores[order[k]] = standard_normal_quantile(rank / static_cast<double>(n + 1));
    i = j + 1;
  }
  return scores;
}

nlohmann::json support_json(const SupportSpec& s) {
  return {{"side", state_value(s.side)}, {"sojourn", s.sojourn}, {"limit", s.limit}, {"capacity", s.capacity}};
}

SupportSpec support_from_json(const nlohmann::json& doc) {
  SupportSpec s;
  s.side = state_from_value(doc.at("side").get<int>());
  s.sojourn = doc.at("sojourn").get<int>();
  s.limit = doc.at("limit").get<double>();
  s.capacity = doc.at("capacity").get<double>();
  return s;
}

}  // namespace

GaussianCopulaSampler::GaussianCopulaSampler(SupportSpec support, Matrix3 correlation,
                                             std::array<std::vector<double>, 3> sorted_marginals,
                                             std::size_t observed)
    : ParamSampler(support, observed, sorted_marginals[0].size()),
      correlation_(correlation),
      cholesky_(cholesky_of(correlation)),
      marginals_(std::move(sorted_marginals)) {
  for (const auto& m : marginals_) {
    if (m.empty() || m.size() != marginals_[0].size())
      throw InputError("copula marginals must be non-empty and of equal length");
    if (!std::is_sorted(m.begin(), m.end())) throw InputError("copula marginal tables must be sorted");
  }
}

ParamDraw GaussianCopulaSampler::draw(Rng& rng) const {
  std::normal_distribution<double> normal;
  const std::array<double, 3> n{normal(rng), normal(rng), normal(rng)};
  std::array<double, 3> value{};
  for (int r = 0; r < 3; ++r) {
    double z = 0.0;
    for (int c = 0; c <= r; ++c) z += cholesky_[r][c] * n[c];
    value[r] = empirical_quantile(marginals_[r], standard_normal_cdf(z));
  }
  return {value[0], value[1], value[2]};
}

nlohmann::json GaussianCopulaSampler::to_json() const {
  nlohmann::json doc;
  doc["type"] = "gaussian_copula";
  doc["support"] = support_json(support_);
  doc["correlation"] = correlation_;
  doc["marginals"] = {{"rho", marginals_[0]}, {"tau", marginals_[1]}, {"height", marginals_[2]}};
  doc["observed_count"] = observed_count_;
  doc["sample_count"] = sample_count_;
  doc["augmented"] = augmented();
  return doc;
}

FixedParamSampler::FixedParamSampler(SupportSpec support, ParamDraw value)
    : ParamSampler(support, 1, 1), value_(value) {}

nlohmann::json FixedParamSampler::to_json() const {
  return {{"type", "fixed"},
          {"support", support_json(support_)},
          {"value", {{"rho", value_.rho}, {"tau", value_.tau}, {"height", value_.height}}}};
}

std::shared_ptr<const ParamSampler> sampler_from_json(const nlohmann::json& doc) {
  try {
    const auto type = doc.at("type").get<std::string>();
    const auto support = support_from_json(doc.at("support"));
    if (type == "fixed") {
      const auto& v = doc.at("value");
      return std::make_shared<FixedParamSampler>(
          support, ParamDraw{v.at("rho").get<double>(), v.at("tau").get<double>(), v.at("height").get<double>()});
    }
    if (type == "gaussian_copula") {
      const auto& m = doc.at("marginals");
      std::array<std::vector<double>, 3> marginals{m.at("rho").get<std::vector<double>>(),
                                                   m.at("tau").get<std::vector<double>>(),
                                                   m.at("height").get<std::vector<double>>()};
      return std::make_shared<GaussianCopulaSampler>(support, doc.at("correlation").get<Matrix3>(),
                                                     std::move(marginals),
                                                     doc.at("observed_count").get<std::size_t>());
    }
    throw InputError("unknown sampler type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed sampler JSON: ") + e.what());
  }
}

std::shared_ptr<const ParamSampler> fit_joint_density(std::span<const ParamDraw> triplets, const SupportSpec& support,
                                                      std::size_t min_sample, std::uint64_t seed) {
  if (triplets.empty()) throw EstimationError("cannot fit a parameter density to an empty sample");
  support.validate();

  std::vector<ParamDraw> sample(triplets.begin(), triplets.end());
  if (sample.size() < min_sample) {
    std::array<double, 3> range{};
    auto coord = [](const ParamDraw& d, int c) { return c == 0 ? d.rho : c == 1 ? d.tau : d.height; };
    for (int c = 0; c < 3; ++c) {
      const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end(),
                                                [&](auto& a, auto& b) { return coord(a, c) < coord(b, c); });
      range[c] = coord(*hi, c) - coord(*lo, c);
    }
    Rng rng(derive_seed(seed, "bootstrap"));
    std::uniform_int_distribution<std::size_t> pick(0, triplets.size() - 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    while (sample.size() < min_sample) {
      const ParamDraw base = triplets[pick(rng)];
      ParamDraw added = base;
      for (int attempt = 0; attempt < 100; ++attempt) {
        ParamDraw trial{base.rho + kBootstrapJitter * range[0] * unit(rng),
                        base.tau + kBootstrapJitter * range[1] * unit(rng),
                        base.height + kBootstrapJitter * range[2] * unit(rng)};
        trial.tau = std::clamp(trial.tau, 1.0, static_cast<double>(support.sojourn));
        ParamDraw snapped = trial;
        snapped.tau = round_peak_time(trial.tau, support.sojourn);
        if (support.contains(snapped)) {
          added = trial;
          break;
        }
      }
      sample.push_back(added);
    }
  }

  const auto n = sample.size();
  std::array<std::vector<double>, 3> columns;
  for (auto& c : columns) c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    columns[0][i] = sample[i].rho;
    columns[1][i] = sample[i].tau;
    columns[2][i] = sample[i].height;
  }

  std::array<std::vector<double>, 3> scores;
  std::array<double, 3> spread{};
  for (int c = 0; c < 3; ++c) {
    scores[c] = normal_scores(columns[c]);
    const double mean = std::accumulate(scores[c].begin(), scores[c].end(), 0.0) / static_cast<double>(n);
    for (double& z : scores[c]) z -= mean;
    spread[c] = std::sqrt(std::inner_product(scores[c].begin(), scores[c].end(), scores[c].begin(), 0.0));
  }
  Matrix3 corr{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r == c) {
        corr[r][c] = 1.0;
      } else if (spread[r] > 0.0 && spread[c] > 0.0) {
        corr[r][c] = std::inner_product(scores[r].begin(), scores[r].end(), scores[c].begin(), 0.0) /
                     (spread[r] * spread[c]);
      }
    }
  }
  corr = nearest_correlation(corr);

  for (auto& c : columns) std::sort(c.begin(), c.end());
  return std::make_shared<GaussianCopulaSampler>(support, corr, std::move(columns), triplets.size());
}

BridgeParams sample_params(const ParamSampler& sampler, Rng& rng) {
  const auto& support = sampler.support();
  for (int attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt) {
    ParamDraw d = sampler.draw(rng);
    d.tau = round_peak_time(d.tau, support.sojourn);
    if (support.contains(d)) return {d.rho, static_cast<int>(d.tau), d.height, kSigmaFloor};
  }
  throw EstimationError("parameter sampler for side " + to_string(support.side) + ", x=" +
                        std::to_string(support.sojourn) + " rejected " +
                        std::to_string(kMaxConsecutiveRejections) + " consecutive draws");
}

BridgeParams sample_params_projected(const ParamSampler& sampler, const SupportSpec& target, Rng& rng) {
  target.validate();
  for (int attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt) {
    ParamDraw d = sampler.draw(rng);
    d.tau = round_peak_time(d.tau, target.sojourn);
    d.rho = std::clamp(d.rho, target.rho_min(), target.rho_max());
    d.height = std::min(d.height, target.height_max(d.rho, static_cast<int>(d.tau)));
    if (target.contains(d)) return {d.rho, static_cast<int>(d.tau), d.height, kSigmaFloor};
  }
  throw EstimationError("projected parameter sampler for x=" + std::to_string(target.sojourn) + " rejected " +
                        std::to_string(kMaxConsecutiveRejections) + " consecutive draws");
}

}  // namespace rampsim
