#include <doctest.h>

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <random>

#include "rampsim/bridge_model.hpp"
#include "rampsim/error.hpp"
#include "rampsim/power_pipeline.hpp"
#include "rampsim/segmentation.hpp"

using namespace rampsim;

namespace {

// Builds a series whose sign pattern sgn(e - ē) equals `signs`.
PowerSeries signed_series(const std::vector<int>& signs, double limit = 0.02) {
  PowerSeries s;
  s.limit = limit;
  s.rated_capacity = 2.0;
  for (std::size_t k = 0; k < signs.size(); ++k) {
    s.steps.push_back(static_cast<std::int64_t>(k));
    s.corrected.push_back(1.0);
    s.generated.push_back(1.0 + 0.1 * signs[k]);
  }
  return s;
}

RenewalPoint point(State s, std::int64_t x, bool censored = false) {
  RenewalPoint p;
  p.state = s;
  p.sojourn = x;
  p.censored = censored;
  return p;
}

void check_identities(const SemiMarkovKernel& kernel) {
  for (State i : kAllStates) {
    if (!kernel.has_transitions(i)) continue;
    double total = 0.0;
    for (State j : kAllStates) {
      double pij = 0.0;
      for (int k = 1; k <= kernel.support_length(); ++k) pij += kernel.q(i, j, k);
      CHECK(std::abs(pij - kernel.transition_probability(i, j)) < 1e-12);
      total += pij;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (int k = 1; k <= kernel.support_length(); ++k) {
      double h = 0.0;
      for (State j : kAllStates) h += kernel.q(i, j, k);
      CHECK(std::abs(h - kernel.sojourn_probability(i, k)) < 1e-12);
      if (h > 0.0) {
        double cond = 0.0;
        for (State j : kAllStates) {
          CHECK(std::abs(kernel.conditional_transition(i, j, k) - kernel.q(i, j, k) / h) < 1e-12);
          cond += kernel.conditional_transition(i, j, k);
        }
        CHECK(std::abs(cond - 1.0) < 1e-12);
      }
    }
  }
}

}  // namespace

TEST_CASE("identical series give one neutral segment") {
  PowerSeries s;
  s.generated = {0.5, 0.6, 0.7, 0.8};
  s.corrected = s.generated;
  s.steps = {0, 1, 2, 3};
  const auto seg = extract_segments(s);
  REQUIRE(seg.renewal.size() == 1);
  CHECK(seg.renewal[0].state == State::Neutral);
  CHECK(seg.renewal[0].sojourn == 4);
  CHECK(seg.renewal[0].censored);
  REQUIRE(seg.segments.size() == 1);
  for (double c : seg.segments[0].charges) CHECK(c == 0.0);
}

TEST_CASE("sign pattern (+,+,0,0,-) renews at 0, 2, 4") {
  const auto seg = extract_segments(signed_series({1, 1, 0, 0, -1}));
  REQUIRE(seg.renewal.size() == 3);
  CHECK(seg.renewal[0].jump_time == 0);
  CHECK(seg.renewal[1].jump_time == 2);
  CHECK(seg.renewal[2].jump_time == 4);
  CHECK(seg.renewal[0].state == State::Charging);
  CHECK(seg.renewal[1].state == State::Neutral);
  CHECK(seg.renewal[2].state == State::Discharging);
  CHECK(seg.renewal[0].sojourn == 2);
  CHECK(seg.renewal[1].sojourn == 2);
  CHECK(seg.renewal[2].censored);
  CHECK(seg.segments[0].to == State::Neutral);
  CHECK(seg.segments[0].charges == std::vector<double>{std::abs(1.1 - 1.0), std::abs(1.1 - 1.0)});
}

TEST_CASE("alternating signs give unit sojourns") {
  std::vector<int> signs;
  for (int k = 0; k < 21; ++k) signs.push_back(k % 2 ? 1 : -1);
  const auto seg = extract_segments(signed_series(signs));
  CHECK(seg.renewal.size() == signs.size());
  for (const auto& r : seg.renewal) CHECK(r.sojourn == 1);
}

TEST_CASE("sign tolerance and input errors") {
  PowerSeries s;
  s.generated = {1.0, 1.0 + 1e-12, 1.2};
  s.corrected = {1.0, 1.0, 1.0};
  s.steps = {0, 1, 2};
  const auto states = state_sequence(s);
  CHECK(states[1] == State::Neutral);
  CHECK(states[2] == State::Charging);
  s.corrected.pop_back();
  CHECK_THROWS_AS(extract_segments(s), InputError);
  PowerSeries one;
  one.generated = {1.0};
  one.corrected = {1.0};
  CHECK_THROWS_AS(extract_segments(one), InputError);
}

TEST_CASE("kernel counting example") {
  // (+1 -> 0, x = 2) three times and (+1 -> -1, x = 2) once.
  std::vector<RenewalPoint> r;
  for (int n = 0; n < 3; ++n) {
    r.push_back(point(State::Charging, 2));
    r.push_back(point(State::Neutral, 1));
  }
  r.push_back(point(State::Charging, 2));
  r.push_back(point(State::Discharging, 1));
  r.push_back(point(State::Neutral, 1, true));
  const auto k = estimate_kernel(r);
  CHECK(k.q(State::Charging, State::Neutral, 2) == 0.75);
  CHECK(k.q(State::Charging, State::Discharging, 2) == 0.25);
  CHECK(k.sojourn_probability(State::Charging, 2) == 1.0);
  CHECK(k.transition_probability(State::Charging, State::Neutral) == 0.75);
  check_identities(k);
}

TEST_CASE("kernel estimation errors") {
  std::vector<RenewalPoint> r{point(State::Charging, 2), point(State::Neutral, 3, true)};
  CHECK_THROWS_AS(estimate_kernel(r), EstimationError);
  std::vector<RenewalPoint> self{point(State::Charging, 2), point(State::Charging, 1), point(State::Neutral, 1, true)};
  CHECK_THROWS_AS(estimate_kernel(self), InputError);
}

TEST_CASE("kernel JSON round trip is exact") {
  std::mt19937_64 rng(3);
  std::vector<int> signs;
  std::uniform_int_distribution<int> u(-1, 1);
  int s = 0;
  for (int k = 0; k < 5000; ++k) {
    if (rng() % 3 == 0) {
      int t = u(rng);
      while (t == s) t = u(rng);
      s = t;
    }
    signs.push_back(s);
  }
  const auto kernel = estimate_kernel(extract_segments(signed_series(signs)).renewal);
  check_identities(kernel);
  const auto back = SemiMarkovKernel::from_json(nlohmann::json::parse(kernel.to_json().dump()));
  CHECK(back.table() == kernel.table());
  CHECK(back.to_json() == kernel.to_json());
}

TEST_CASE("renewal round trip recovers the kernel") {
  std::array<std::array<std::vector<double>, 3>, 3> q{};
  for (auto& row : q)
    for (auto& cell : row) cell.assign(6, 0.0);
  const auto D = state_index(State::Discharging), N = state_index(State::Neutral), C = state_index(State::Charging);
  q[C][N] = {0, 0.3, 0.2, 0.1, 0.0, 0.1};
  q[C][D] = {0, 0.1, 0.1, 0.0, 0.1, 0.0};
  q[N][C] = {0, 0.2, 0.2, 0.1, 0.0, 0.0};
  q[N][D] = {0, 0.1, 0.1, 0.1, 0.1, 0.1};
  q[D][N] = {0, 0.5, 0.0, 0.2, 0.0, 0.0};
  q[D][C] = {0, 0.1, 0.1, 0.0, 0.0, 0.1};
  const SemiMarkovKernel truth(q);
  check_identities(truth);

  Rng rng(99);
  auto path = simulate_renewal(truth, State::Neutral, 100000, rng);
  const auto est = estimate_kernel(path);
  for (State i : kAllStates) {
    double l1 = 0.0;
    for (State j : kAllStates)
      for (int k = 1; k <= 5; ++k) l1 += std::abs(est.q(i, j, k) - truth.q(i, j, k));
    CHECK(l1 < 0.05);
  }
  for (std::size_t n = 0; n + 1 < path.size(); ++n) {
    CHECK(path[n + 1].jump_time == path[n].jump_time + path[n].sojourn);
    CHECK(path[n + 1].state != path[n].state);
  }
}

TEST_CASE("conditioned sojourn sampling respects elapsed time") {
  std::array<std::array<std::vector<double>, 3>, 3> q{};
  for (auto& row : q)
    for (auto& cell : row) cell.assign(5, 0.0);
  q[state_index(State::Charging)][state_index(State::Neutral)] = {0, 0.25, 0.25, 0.25, 0.25};
  q[state_index(State::Neutral)][state_index(State::Charging)] = {0, 1.0, 0, 0, 0};
  const SemiMarkovKernel k(q);
  CHECK(k.survival(State::Charging, 2) == doctest::Approx(0.5));
  CHECK(k.survival(State::Charging, 4) == 0.0);
  Rng rng(5);
  for (int n = 0; n < 1000; ++n) CHECK(k.sample_sojourn_exceeding(State::Charging, 2, rng) > 2);
}

TEST_CASE("extracted segments satisfy the charge ceiling") {
  SyntheticWindParams wp;
  wp.n_steps = 20000;
  wp.seed = 17;
  const TurbineSpec turbine;
  const auto raw = power_from_wind(generate_synthetic_wind(wp), turbine);
  for (double f : {0.01, 0.05, 0.07}) {
    const double l = f * turbine.rated_capacity;
    const auto series = apply_ramp_limit(raw, {l, 1.0});
    const auto seg = extract_segments(series);
    std::int64_t covered = 0;
    for (const auto& s : seg.segments) {
      CHECK(s.start == covered);
      covered += s.sojourn;
      if (s.from == State::Neutral) continue;
      const double rho = compute_initial_power(s.from, s.entry_power, s.sojourn, l, turbine.rated_capacity);
      for (int k = 1; k <= s.sojourn; ++k) {
        const double c = s.charges[static_cast<std::size_t>(k - 1)];
        CHECK(c >= 0.0);
        CHECK(c <= rho - (k - 1) * l + 1e-9);
        const auto idx = static_cast<std::size_t>(s.start + k - 1);
        const double d = series.generated[idx] - series.corrected[idx];
        CHECK((d > 0.0 ? State::Charging : State::Discharging) == s.from);
      }
    }
    CHECK(covered == static_cast<std::int64_t>(series.size()));
  }
}
