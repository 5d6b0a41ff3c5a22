#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "rampsim/bridge_model.hpp"
#include "rampsim/error.hpp"
#include "rampsim/param_estimation.hpp"

using namespace rampsim;

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Gaussian log-likelihood of the unclipped points under the bridge transition
// law, written independently of mle_sigma.
double bridge_loglik(const std::vector<double>& y, int tau, int x, double sigma) {
  double ll = 0.0, prev = 0.0;
  int prev_t = 0;
  for (int k = 1; k <= x; ++k) {
    if (k == tau) {
      prev = 0.0;
      prev_t = tau;
      continue;
    }
    const double T = k < tau ? tau : x + 1;
    const double mean = prev * (T - k) / (T - prev_t);
    const double var = sigma * sigma * (k - prev_t) * (T - k) / (T - prev_t);
    ll += -0.5 * std::log(2 * M_PI * var) - 0.5 * (y[k - 1] - mean) * (y[k - 1] - mean) / var;
    prev = y[k - 1];
    prev_t = k;
  }
  return ll;
}

SupportSpec charging_support(int x) { return {State::Charging, x, 0.02, 2.0}; }

}  // namespace

TEST_CASE("support geometry") {
  const SupportSpec up{State::Charging, 4, 0.02, 2.0};
  CHECK(up.rho_min() == doctest::Approx(1.9));
  CHECK(up.rho_max() == doctest::Approx(2.02));
  CHECK(up.contains({1.95, 2, 0.1}));
  CHECK_FALSE(up.contains({1.95, 2.5, 0.1}));
  CHECK_FALSE(up.contains({1.95, 0, 0.1}));
  CHECK_FALSE(up.contains({1.95, 2, 0.0}));
  CHECK_FALSE(up.contains({1.5, 2, 0.1}));
  CHECK(up.contains({1.95, 3, 1.95 - 2 * 0.02}));
  CHECK_FALSE(up.contains({1.95, 3, 1.95 - 2 * 0.02 + 1e-6}));

  const SupportSpec down{State::Discharging, 4, 0.02, 2.0};
  CHECK(down.rho_min() == doctest::Approx(0.1));
  CHECK(down.rho_max() == 2.0);
  CHECK_THROWS_AS((SupportSpec{State::Neutral, 4, 0.02, 2.0}.validate()), InvalidParameterError);
}

TEST_CASE("round_peak_time") {
  CHECK(round_peak_time(2.4, 5) == 2);
  CHECK(round_peak_time(0.2, 5) == 1);
  CHECK(round_peak_time(2.5, 5) == 3);
  CHECK(round_peak_time(7.9, 5) == 5);
}

TEST_CASE("sigma MLE closed form and errors") {
  ErrorPath single{{0.3, 0.0, 0.0}, {false, true, true}};
  const auto est = mle_sigma(single, 2, 3, 1);
  CHECK(est.terms == 1);
  CHECK(est.sigma * est.sigma == doctest::Approx(2 * 0.3 * 0.3).epsilon(1e-14));

  ErrorPath clipped{{0.1, 0.2, 0.3, 0.4}, {true, true, true, true}};
  CHECK_THROWS_AS(mle_sigma(clipped, 2, 4), InsufficientDataError);
}

TEST_CASE("sigma MLE maximizes the bridge likelihood") {
  Rng rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    const int x = 3 + rep % 20;
    const int tau = 1 + rep % x;
    auto y = sample_two_piece_bridge(tau, x, 0.2, rng);
    ErrorPath e{y, std::vector<bool>(y.size(), false)};
    const auto est = mle_sigma(e, tau, x, 1);
    const double best = bridge_loglik(y, tau, x, est.sigma);
    CHECK(best >= bridge_loglik(y, tau, x, est.sigma * 1.01));
    CHECK(best >= bridge_loglik(y, tau, x, est.sigma * 0.99));
  }
}

TEST_CASE("sigma MLE recovers the simulated volatility") {
  Rng rng(5);
  std::vector<SigmaEstimate> all;
  for (int p = 0; p < 200; ++p) {
    const int x = 50;
    const int tau = 1 + p % x;
    auto y = sample_two_piece_bridge(tau, x, 0.05, rng);
    all.push_back(mle_sigma({y, std::vector<bool>(y.size(), false)}, tau, x));
  }
  CHECK(std::abs(pool_sigma(all).sigma - 0.05) / 0.05 < 0.05);
}

TEST_CASE("Box-Cox helpers") {
  double v = 0.0;
  CHECK(inverse_box_cox(0.5, 0.0, v));
  CHECK(v == doctest::Approx(std::exp(0.5)));
  CHECK(inverse_box_cox(0.5, 1.0, v));
  CHECK(v == doctest::Approx(1.5));
  CHECK_FALSE(inverse_box_cox(-2.0, 1.0, v));
  for (double lambda : {-2.0, -0.5, 0.0, 0.3, 2.0}) {
    CHECK(inverse_box_cox(box_cox(0.7, lambda), lambda, v));
    CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
  }
  CHECK_THROWS_AS(box_cox(0.0, 1.0), InputError);
}

TEST_CASE("Box-Cox regression recovers a log-linear model") {
  Rng rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1e-3);
  const std::size_t n = 300;
  std::vector<std::vector<double>> cols(3, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& c : cols) c[i] = u(rng);
    y[i] = std::exp(-3.0 + 0.8 * cols[0][i] - 0.5 * cols[1][i] + 1.2 * cols[2][i] + noise(rng));
  }
  const auto fit = fit_boxcox_regression(cols, {"a", "b", "c"}, y);
  CHECK(std::abs(fit.lambda) <= 0.1 + 1e-12);
  CHECK(fit.r_squared > 0.99);
  CHECK(fit.adjusted_r_squared <= fit.r_squared);
  if (fit.lambda == 0.0) {
    CHECK(fit.coefficients[0] == doctest::Approx(-3.0).epsilon(0.01));
    CHECK(fit.coefficients[3] == doctest::Approx(1.2).epsilon(0.01));
  }

  // Permuting observations leaves the fit unchanged.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto pc = cols;
  std::vector<double> py(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) pc[c][i] = cols[c][perm[i]];
    py[i] = y[perm[i]];
  }
  const auto again = fit_boxcox_regression(pc, {"a", "b", "c"}, py);
  CHECK(again.lambda == fit.lambda);
  CHECK(again.outliers_removed == fit.outliers_removed);
  for (std::size_t c = 0; c < fit.coefficients.size(); ++c)
    CHECK(std::abs(again.coefficients[c] - fit.coefficients[c]) < 1e-9);
}

TEST_CASE("Box-Cox regression flags collinear terms") {
  std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, y{1, 3, 2, 5, 4, 6, 8, 7, 9, 10};
  try {
    fit_boxcox_regression({a, a}, {"first", "copy"}, y);
    FAIL("expected a rank-deficiency error");
  } catch (const EstimationError& e) {
    const std::string what = e.what();
    CHECK((what.find("first") != std::string::npos || what.find("copy") != std::string::npos));
  }
  CHECK_THROWS_AS(fit_boxcox_regression({a}, {"a"}, std::vector<double>{1, 2, 3}), InputError);
}

TEST_CASE("Cook's distance screening removes a gross outlier") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  const std::size_t n = 80;
  std::vector<std::vector<double>> cols(1, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = u(rng);
    y[i] = 1.0 + cols[0][i] + noise(rng);
  }
  cols[0][0] = 1.0;
  y[0] = 20.0;
  const auto fit = fit_boxcox_regression(cols, {"a"}, y);
  CHECK(fit.outliers_removed >= 1);
  CHECK(fit.observations == n - fit.outliers_removed);
}

TEST_CASE("sigma prediction") {
  const auto c = SigmaModel::constant(0.05);
  for (double rho : {0.1, 1.0, 1.9})
    for (int tau : {1, 3}) CHECK(predict_sigma(c, rho, tau, 0.05, 5).value == doctest::Approx(0.05).epsilon(1e-14));

  SigmaModel lin;
  lin.fit.lambda = 1.0;
  lin.fit.coefficients.assign(kSigmaTerms, 0.0);
  lin.fit.coefficients[1] = 0.5;  // rho
  CHECK(predict_sigma(lin, 0.2, 1, 0.1, 3).value == doctest::Approx(1.1));
  const auto clamped = predict_sigma(lin, -4.0, 1, 0.1, 3);
  CHECK(clamped.clamped);
  CHECK(clamped.value == kSigmaFloor);

  SigmaModel lg;
  lg.fit.lambda = 0.0;
  lg.fit.coefficients.assign(kSigmaTerms, 0.0);
  lg.fit.coefficients[0] = -1.0;
  CHECK(predict_sigma(lg, 1.0, 2, 0.1, 3).value == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("sigma regression on bridge-derived observations") {
  Rng rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SigmaObservation> obs;
  for (int i = 0; i < 200; ++i) {
    SigmaObservation o;
    o.rho = 1.8 + 0.2 * u(rng);
    o.sojourn = 2 + i % 15;
    o.tau = 1 + i % o.sojourn;
    o.height = 0.05 + 0.3 * u(rng);
    o.sigma = std::exp(-3.0 + 0.5 * o.height + 0.01 * o.sojourn + 0.01 * (u(rng) - 0.5));
    obs.push_back(o);
  }
  const auto model = fit_sigma_regression(obs);
  CHECK(model.fit.terms.size() == kSigmaTerms);
  CHECK(model.fit.adjusted_r_squared > 0.9);
  // Anti-transform of the fitted linear predictor reproduces the prediction.
  for (const auto& o : obs) {
    const auto p = predict_sigma(model, o.rho, o.tau, o.height, o.sojourn);
    const double lp = model.fit.linear_predictor(sigma_design_row(o.rho, o.tau, o.height, o.sojourn));
    CHECK(std::abs(box_cox(p.value, model.fit.lambda) - lp) < 1e-9);
  }
  const auto back = SigmaModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  CHECK(back.fit.coefficients == model.fit.coefficients);
  CHECK(back.fit.lambda == model.fit.lambda);
  CHECK(back.to_json() == model.to_json());
}

TEST_CASE("joint density: marginal means of an independent product") {
  const auto support = charging_support(8);
  Rng rng(41);
  std::uniform_real_distribution<double> rho_law(1.9, 2.0);
  std::uniform_int_distribution<int> tau_law(1, 8);
  std::uniform_real_distribution<double> h_law(0.05, 0.25);
  std::vector<ParamDraw> sample;
  double mr = 0, mt = 0, mh = 0;
  for (int i = 0; i < 500; ++i) {
    sample.push_back({rho_law(rng), static_cast<double>(tau_law(rng)), h_law(rng)});
    mr += sample.back().rho;
    mt += sample.back().tau;
    mh += sample.back().height;
  }
  mr /= 500, mt /= 500, mh /= 500;
  const auto sampler = fit_joint_density(sample, support, 10, 3);
  CHECK_FALSE(sampler->augmented());
  double sr = 0, st = 0, sh = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const auto p = sample_params(*sampler, rng);
    sr += p.rho;
    st += p.tau;
    sh += p.height;
  }
  CHECK(std::abs(sr / draws - 1.95) / 1.95 < 0.05);
  CHECK(std::abs(st / draws - 4.5) / 4.5 < 0.05);
  CHECK(std::abs(sh / draws - 0.15) / 0.15 < 0.05);
  CHECK(std::abs(sr / draws - mr) / mr < 0.05);
  CHECK(std::abs(st / draws - mt) / mt < 0.05);
  CHECK(std::abs(sh / draws - mh) / mh < 0.05);
}

TEST_CASE("joint density: bootstrap augmentation stays in the support") {
  const auto support = charging_support(5);
  std::vector<ParamDraw> three{{1.90, 2, 0.10}, {1.95, 3, 0.20}, {2.00, 1, 0.05}};
  const auto sampler = fit_joint_density(three, support, 10, 9);
  CHECK(sampler->augmented());
  CHECK(sampler->observed_count() == 3);
  CHECK(sampler->sample_count() == 10);
  const auto* copula = dynamic_cast<const GaussianCopulaSampler*>(sampler.get());
  REQUIRE(copula);
  for (std::size_t i = 0; i < 10; ++i) {
    ParamDraw d{copula->marginals()[0][i], static_cast<double>(round_peak_time(copula->marginals()[1][i], 5)),
                copula->marginals()[2][i]};
    CHECK(d.rho >= support.rho_min());
    CHECK(d.rho <= support.rho_max());
  }
  CHECK_THROWS_AS(fit_joint_density(std::vector<ParamDraw>{}, support), EstimationError);
}

TEST_CASE("joint density: comonotone inputs keep their rank correlation") {
  const auto support = charging_support(10);
  std::vector<ParamDraw> sample;
  for (int i = 0; i < 200; ++i) {
    const double rho = 1.8 + 0.001 * i;
    sample.push_back({rho, static_cast<double>(1 + i % 10), 0.01 + 0.0005 * i});
  }
  const auto sampler = fit_joint_density(sample, support, 10, 1);
  Rng rng(77);
  std::vector<double> r, h;
  for (int i = 0; i < 5000; ++i) {
    const auto p = sample_params(*sampler, rng);
    r.push_back(p.rho);
    h.push_back(p.height);
  }
  CHECK(pearson(ranks(r), ranks(h)) > 0.9);
}

TEST_CASE("sampler draws always lie in the support") {
  Rng rng(100);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (State side : {State::Charging, State::Discharging}) {
    for (int x : {1, 2, 7, 20}) {
      const SupportSpec support{side, x, 0.04, 2.0};
      std::vector<ParamDraw> sample;
      for (int i = 0; i < 40; ++i) {
        const double rho = support.rho_min() + u(rng) * (support.rho_max() - support.rho_min());
        const int tau = 1 + static_cast<int>(u(rng) * x) % x;
        sample.push_back({rho, static_cast<double>(tau), 1e-4 + u(rng) * (support.height_max(rho, tau) - 1e-4)});
      }
      const auto sampler = fit_joint_density(sample, support, 10, 5);
      for (int i = 0; i < 10000; ++i) {
        const auto p = sample_params(*sampler, rng);
        CHECK_MESSAGE(support.contains({p.rho, static_cast<double>(p.tau), p.height}), "x=", x);
      }
    }
  }
}

TEST_CASE("rejection limit and JSON round trip") {
  const SupportSpec support = charging_support(4);
  FixedParamSampler outside(support, {0.5, 2, 0.1});
  Rng rng(1);
  CHECK_THROWS_AS(sample_params(outside, rng), EstimationError);

  std::vector<ParamDraw> sample{{1.9, 1, 0.1}, {1.95, 2, 0.2}, {2.0, 3, 0.1}, {1.92, 4, 0.15},
                                {1.97, 2, 0.05}, {1.99, 1, 0.3}, {1.91, 3, 0.12}, {1.93, 2, 0.22},
                                {1.96, 4, 0.08}, {1.98, 1, 0.18}, {1.94, 3, 0.11}};
  const auto sampler = fit_joint_density(sample, support);
  const auto back = sampler_from_json(nlohmann::json::parse(sampler->to_json().dump()));
  CHECK(back->to_json() == sampler->to_json());
  Rng a(3), b(3);
  for (int i = 0; i < 100; ++i) {
    const auto p = sample_params(*sampler, a);
    const auto q = sample_params(*back, b);
    CHECK(p.rho == q.rho);
    CHECK(p.tau == q.tau);
    CHECK(p.height == q.height);
  }
}
