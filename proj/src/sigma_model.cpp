#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rampsim/error.hpp"
#include "rampsim/param_estimation.hpp"

namespace rampsim {

SigmaEstimate mle_sigma(const ErrorPath& error, int tau, int sojourn, int min_terms) {
  if (tau < 1 || tau > sojourn) throw InputError("peak time outside the segment");
  if (error.values.size() != static_cast<std::size_t>(sojourn) || error.clipped.size() != error.values.size())
    throw InputError("error path length must equal the sojourn");

  SigmaEstimate est;
  double prev_value = 0.0;
  int prev_time = 0;
  for (int k = 1; k <= sojourn; ++k) {
    if (k == tau) {
      // Pinned point: Y(τ) = 0 is known and starts the second piece.
      prev_value = 0.0;
      prev_time = tau;
      continue;
    }
    if (error.clipped[k - 1]) continue;
    const int horizon = k < tau ? tau : sojourn + 1;
    const double y = error.values[k - 1];
    const auto law = bb_transition(prev_value, prev_time, k, horizon, 1.0);
    const double innovation = y - law.mean;
    est.sum_squares += innovation * innovation / law.variance;
    ++est.terms;
    prev_value = y;
    prev_time = k;
  }
  if (est.terms < min_terms)
    throw InsufficientDataError("sigma MLE needs at least " + std::to_string(min_terms) + " unclipped points, got " +
                                std::to_string(est.terms));
  est.sigma = std::sqrt(est.sum_squares / est.terms);
  return est;
}

SigmaEstimate pool_sigma(std::span<const SigmaEstimate> estimates) {
  SigmaEstimate pooled;
  for (const auto& e : estimates) {
    pooled.sum_squares += e.sum_squares;
    pooled.terms += e.terms;
  }
  if (pooled.terms == 0) throw InsufficientDataError("no terms to pool");
  pooled.sigma = std::sqrt(pooled.sum_squares / pooled.terms);
  return pooled;
}

double box_cox(double value, double lambda) {
  if (!(value > 0.0)) throw InputError("Box-Cox transform needs a positive value");
  if (lambda == 0.0) return std::log(value);
  return (std::pow(value, lambda) - 1.0) / lambda;
}

bool inverse_box_cox(double prediction, double lambda, double& value) {
  if (lambda == 0.0) {
    value = std::exp(prediction);
    return std::isfinite(value);
  }
  const double base = lambda * prediction + 1.0;
  if (!(base > 0.0)) return false;
  value = std::pow(base, 1.0 / lambda);
  return std::isfinite(value);
}

double BoxCoxRegression::linear_predictor(std::span<const double> row) const {
  if (row.size() != coefficients.size()) throw InputError("design row length does not match the model");
  return std::inner_product(row.begin(), row.end(), coefficients.begin(), 0.0);
}

namespace {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  Eigen::VectorXd leverage;
  double rss = 0.0;
  double tss = 0.0;
};

// Column-scaled pivoted QR; rank deficiency reported through `collinear`.
OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
  const Eigen::Index p = design.cols();
  Eigen::VectorXd scale(p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const double norm = design.col(c).norm();
    scale(c) = norm > 0.0 ? norm : 1.0;
  }
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::string terms;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index r = qr.rank(); r < p; ++r) {
      if (!terms.empty()) terms += ", ";
      terms += names[static_cast<std::size_t>(perm(r))];
    }
    throw EstimationError("rank-deficient design; collinear terms: " + terms);
  }
  OlsFit fit;
  fit.beta = qr.solve(y).cwiseQuotient(scale);
  fit.residuals = y - design * fit.beta;
  fit.rss = fit.residuals.squaredNorm();
  fit.tss = (y.array() - y.mean()).square().sum();

  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(design.rows(), p);
  fit.leverage = q.rowwise().squaredNorm();
  return fit;
}

// Squared correlation between ordered residuals and Blom normal scores.
double normality_score(const Eigen::VectorXd& residuals) {
  const auto n = static_cast<std::size_t>(residuals.size());
  std::vector<double> r(residuals.data(), residuals.data() + n);
  std::sort(r.begin(), r.end());
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i)
    m[i] = standard_normal_quantile((static_cast<double>(i + 1) - 0.375) / (static_cast<double>(n) + 0.25));
  const double rm = std::accumulate(r.begin(), r.end(), 0.0) / n;
  const double mm = std::accumulate(m.begin(), m.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (r[i] - rm) * (m[i] - mm);
    sxx += (r[i] - rm) * (r[i] - rm);
    syy += (m[i] - mm) * (m[i] - mm);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

double quantile7(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (pos - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

struct LambdaChoice {
  double lambda = 1.0;
  double score = -1.0;
  OlsFit fit;
};

LambdaChoice fit_at_lambda(const Eigen::MatrixXd& design, const std::vector<double>& response,
                           const std::vector<std::string>& names, double lambda) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(response.size()));
  for (std::size_t i = 0; i < response.size(); ++i) y(static_cast<Eigen::Index>(i)) = box_cox(response[i], lambda);
  auto fit = ols(design, y, names);
  const double score = normality_score(fit.residuals);
  return {lambda, score, std::move(fit)};
}

LambdaChoice choose_lambda(const Eigen::MatrixXd& design, const std::vector<double>& response,
                           const std::vector<std::string>& names, const RegressionOptions& options) {
  LambdaChoice best;
  const int steps = static_cast<int>(std::lround((options.lambda_max - options.lambda_min) / options.lambda_step));
  Eigen::VectorXd y(static_cast<Eigen::Index>(response.size()));
  for (int s = 0; s <= steps; ++s) {
    double lambda = options.lambda_min + s * options.lambda_step;
    if (std::abs(lambda) < 1e-12) lambda = 0.0;
    for (std::size_t i = 0; i < response.size(); ++i) y(static_cast<Eigen::Index>(i)) = box_cox(response[i], lambda);
    auto fit = ols(design, y, names);
    const double score = normality_score(fit.residuals);
    if (score > best.score) best = {lambda, score, std::move(fit)};
  }
  return best;
}

}  // namespace

BoxCoxRegression fit_boxcox_regression(const std::vector<std::vector<double>>& regressors,
                                       const std::vector<std::string>& names, std::span<const double> response,
                                       const RegressionOptions& options) {
  if (names.size() != regressors.size()) throw InputError("one name per regressor column is required");
  const std::size_t p = regressors.size() + 1;
  const std::size_t n = response.size();
  for (const auto& col : regressors)
    if (col.size() != n) throw InputError("regressor columns must match the response length");
  if (n < 2 * p)
    throw InsufficientDataError("regression needs at least " + std::to_string(2 * p) + " observations, got " +
                                std::to_string(n));
  for (double v : response)
    if (!(v > 0.0)) throw InputError("Box-Cox regression needs a positive response");

  std::vector<std::string> terms{"intercept"};
  terms.insert(terms.end(), names.begin(), names.end());

  auto build = [&](const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      design(static_cast<Eigen::Index>(r), 0) = 1.0;
      for (std::size_t c = 0; c < regressors.size(); ++c)
        design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c + 1)) = regressors[c][rows[r]];
    }
    return design;
  };
  auto take = [&](const std::vector<std::size_t>& rows) {
    std::vector<double> y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) y[r] = response[rows[r]];
    return y;
  };

  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  auto first = choose_lambda(build(rows), take(rows), terms, options);

  // Cook's distance screening on the first fit.
  const double s2 = first.fit.rss / static_cast<double>(n - p);
  std::vector<double> cook(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = first.fit.leverage(static_cast<Eigen::Index>(i));
    const double r = first.fit.residuals(static_cast<Eigen::Index>(i));
    cook[i] = h >= 1.0 - 1e-12 || s2 <= 0.0 ? 0.0 : r * r * h / (static_cast<double>(p) * s2 * (1.0 - h) * (1.0 - h));
  }
  const double median = quantile7(cook, 0.5);
  const double iqr = quantile7(cook, 0.75) - quantile7(cook, 0.25);
  const double cutoff = median + options.outlier_iqr_multiplier * iqr;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (!(cook[i] > cutoff)) kept.push_back(i);

  LambdaChoice final_choice;
  std::size_t used = n;
  if (kept.size() < n && kept.size() >= p + 1) {
    try {
      // λ stays at the full-sample choice: trimming truncates the residual
      // tails and would bias the normality score.
      final_choice = fit_at_lambda(build(kept), take(kept), terms, first.lambda);
      used = kept.size();
    } catch (const EstimationError&) {
      final_choice = std::move(first);
    }
  } else {
    final_choice = std::move(first);
  }

  BoxCoxRegression out;
  out.terms = std::move(terms);
  out.coefficients.assign(final_choice.fit.beta.data(), final_choice.fit.beta.data() + final_choice.fit.beta.size());
  out.lambda = final_choice.lambda;
  out.normality_score = final_choice.score;
  out.observations = used;
  out.outliers_removed = n - used;
  const double nn = static_cast<double>(used);
  out.r_squared = final_choice.fit.tss > 0.0 ? 1.0 - final_choice.fit.rss / final_choice.fit.tss : 1.0;
  out.adjusted_r_squared = 1.0 - (1.0 - out.r_squared) * (nn - 1.0) / (nn - static_cast<double>(p));
  out.residual_sd = std::sqrt(final_choice.fit.rss / (nn - static_cast<double>(p)));
  return out;
}

std::vector<double> sigma_design_row(double rho, double tau, double height, double sojourn) {
  return {1.0,          rho,           tau,          height,          sojourn,         rho * tau,
          rho * height, rho * sojourn, tau * height, tau * sojourn, height * sojourn};
}

SigmaModel fit_sigma_regression(std::span<const SigmaObservation> observations, const RegressionOptions& options) {
  static const std::vector<std::string> names{"rho",     "tau",     "h",     "x",     "rho:tau",
                                              "rho:h",   "rho:x",   "tau:h", "tau:x", "h:x"};
  std::vector<std::vector<double>> columns(names.size(), std::vector<double>(observations.size()));
  std::vector<double> response(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    const auto row = sigma_design_row(o.rho, o.tau, o.height, o.sojourn);
    for (std::size_t c = 0; c < names.size(); ++c) columns[c][i] = row[c + 1];
    response[i] = std::max(o.sigma, kSigmaFloor);
  }
  SigmaModel model;
  model.fit = fit_boxcox_regression(columns, names, response, options);
  return model;
}

SigmaModel SigmaModel::constant(double sigma, State from, State to) {
  SigmaModel model;
  model.from = from;
  model.to = to;
  model.fallback = true;
  model.fit.lambda = 0.0;
  model.fit.terms = {"intercept", "rho", "tau", "h", "x", "rho:tau", "rho:h", "rho:x", "tau:h", "tau:x", "h:x"};
  model.fit.coefficients.assign(kSigmaTerms, 0.0);
  model.fit.coefficients[0] = std::log(std::max(sigma, kSigmaFloor));
  return model;
}

SigmaPrediction predict_sigma(const SigmaModel& model, double rho, int tau, double height, int sojourn) {
  const auto row = sigma_design_row(rho, tau, height, sojourn);
  const double prediction = model.fit.linear_predictor(row);
  double value = 0.0;
  if (!inverse_box_cox(prediction, model.fit.lambda, value)) return {kSigmaFloor, true};
  // Absorb the round-off of exp(log(floor)) so floored models stay noise free.
  if (value <= kSigmaFloor * (1.0 + 1e-9)) return {kSigmaFloor, false};
  return {value, false};
}

nlohmann::json SigmaModel::to_json() const {
  return {{"from", state_value(from)},
          {"to", state_value(to)},
          {"fallback", fallback},
          {"terms", fit.terms},
          {"coefficients", fit.coefficients},
          {"lambda", fit.lambda},
          {"r_squared", fit.r_squared},
          {"adjusted_r_squared", fit.adjusted_r_squared},
          {"residual_sd", fit.residual_sd},
          {"normality_score", fit.normality_score},
          {"observations", fit.observations},
          {"outliers_removed", fit.outliers_removed}};
}

SigmaModel SigmaModel::from_json(const nlohmann::json& doc) {
  try {
    SigmaModel model;
    model.from = state_from_value(doc.at("from").get<int>());
    model.to = state_from_value(doc.at("to").get<int>());
    model.fallback = doc.at("fallback").get<bool>();
    model.fit.terms = doc.at("terms").get<std::vector<std::string>>();
    model.fit.coefficients = doc.at("coefficients").get<std::vector<double>>();
    model.fit.lambda = doc.at("lambda").get<double>();
    model.fit.r_squared = doc.at("r_squared").get<double>();
    model.fit.adjusted_r_squared = doc.at("adjusted_r_squared").get<double>();
    model.fit.residual_sd = doc.at("residual_sd").get<double>();
    model.fit.normality_score = doc.at("normality_score").get<double>();
    model.fit.observations = doc.at("observations").get<std::size_t>();
    model.fit.outliers_removed = doc.at("outliers_removed").get<std::size_t>();
    if (model.fit.coefficients.size() != kSigmaTerms) throw InputError("sigma model needs 11 coefficients");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed sigma model JSON: ") + e.what());
  }
}

}  // namespace rampsim
