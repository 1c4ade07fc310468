#include <cmath>

#include "doctest.h"
#include "mpqkd/scan.hpp"

using namespace mpqkd;

namespace {

// Independent root of (1 - H(Q)) q = f H(Q) by plain bisection on [0, 0.5].
double oracle_threshold(double q, double f) {
  auto h = [](double x) { return -x * std::log2(x) - (1 - x) * std::log2(1 - x); };
  double lo = 1e-12, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (q * (1 - h(mid)) - f * h(mid) > 0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("engine names") {
  for (Engine e : {Engine::Original, Engine::Info, Engine::AD}) {
    CHECK(engine_from_string(to_string(e)) == e);
  }
  CHECK_THROWS_AS(engine_from_string("fast"), std::invalid_argument);
}

TEST_CASE("mu optimisation") {
  const SystemParams p = reference_params();
  SUBCASE("interior optimum at zero distance") {
    const MuOptimum m = optimize_mu(p, 0.0, Engine::Original, {1, 3});
    CHECK(m.feasible);
    CHECK(m.result.rate > 0.0);
    CHECK(m.result.mu_opt > kMuMin);
    CHECK(m.result.mu_opt < kMuMax);
  }
  SUBCASE("fixed mu is passed through") {
    const MuOptimum m = optimize_mu(p, 100.0, Engine::AD, {1, 3}, 0.5);
    CHECK(m.result.mu_opt == 0.5);
    CHECK(m.channel.mu == 0.5);
  }
  SUBCASE("refined optimum beats a dense grid") {
    for (Engine e : {Engine::Original, Engine::AD}) {
      const MuOptimum m = optimize_mu(p, 300.0, e, {1, 3});
      REQUIRE(m.feasible);
      const double best = m.result.raw();
      const int n = 600;
      for (int i = 0; i < n; ++i) {
        const double mu = kMuMin * std::pow(kMuMax / kMuMin, static_cast<double>(i) / (n - 1));
        try {
          const ChannelDerived ch = derive_channel(p, 300.0, mu);
          const double v = evaluate_engine(e, ch, p, {1, 3}).raw();
          CHECK(best >= v - 1e-6 * std::abs(v));
        } catch (const ModelDomainError&) {
        }
      }
    }
  }
  CHECK_THROWS_AS(optimize_mu(p, -1.0, Engine::AD, {1, 3}), std::invalid_argument);
  CHECK_THROWS_AS(optimize_mu(p, 1.0, Engine::AD, {1, 3}, 0.0), std::invalid_argument);
}

TEST_CASE("distance grid and scan") {
  CHECK(distance_grid(0, 10, 2).size() == 6);
  CHECK(distance_grid(0, 10, 3).size() == 4);
  CHECK(distance_grid(0, 1, 5).size() == 1);
  CHECK(distance_grid(5, 5, 1).size() == 1);

  ScanSpec spec;
  spec.params = reference_params();
  spec.L_from = 0.0;
  spec.L_to = 0.0;
  spec.L_step = 1.0;
  const ScanTable single = scan_distance(spec);
  REQUIRE(single.rows.size() == 1);
  CHECK(single.rows[0].L_km == 0.0);
  CHECK(single.rows[0].plob == kPlobCap);

  SUBCASE("deterministic across worker counts") {
    spec.L_to = 400.0;
    spec.L_step = 50.0;
    spec.workers = 1;
    const ScanTable a = scan_distance(spec);
    spec.workers = 4;
    const ScanTable b = scan_distance(spec);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].rate_ad == b.rows[i].rate_ad);
      CHECK(a.rows[i].rate_original == b.rows[i].rate_original);
      CHECK(a.rows[i].mu_opt == b.rows[i].mu_opt);
      CHECK(a.rows[i].rate_ad >= a.rows[i].rate_info);
      CHECK(a.rows[i].raw_ad >= a.rows[i].raw_info);
    }
  }
  SUBCASE("invalid specs") {
    spec.L_step = 0.0;
    CHECK_THROWS_AS(scan_distance(spec), std::invalid_argument);
    spec.L_step = 1.0;
    spec.L_from = 10.0;
    CHECK_THROWS_AS(scan_distance(spec), std::invalid_argument);
  }
}

TEST_CASE("maximum distance") {
  const SystemParams p = reference_params();
  SUBCASE("bracketed zero crossing") {
    const double L = max_distance(p, Engine::Original, {1, 3}, 0.5);
    CHECK(L > 300.0);
    CHECK(L < 700.0);
    CHECK(optimize_mu(p, L - 1.0, Engine::Original, {1, 3}).result.raw() > 0.0);
    CHECK(optimize_mu(p, L + 1.0, Engine::Original, {1, 3}).result.raw() < 0.0);
  }
  SUBCASE("AD reaches further") {
    CHECK(max_distance(p, Engine::AD, {1, 3}) > max_distance(p, Engine::Original, {1, 3}));
  }
  SUBCASE("no crossing without noise") {
    SystemParams clean = p;
    clean.p_d = 0.0;
    clean.e_d = 0.0;
    CHECK_THROWS_AS(max_distance(clean, Engine::Original, {1, 3}), ModelDomainError);
  }
  SUBCASE("no key at zero distance") {
    SystemParams noisy = p;
    noisy.e_d = 0.5;
    CHECK_THROWS_AS(max_distance(noisy, Engine::Original, {1, 3}), ModelDomainError);
  }
}

TEST_CASE("PLOB bound") {
  CHECK(plob_bound(0.0, 0.2).capped);
  CHECK(plob_bound(0.0, 0.2).rate == kPlobCap);
  CHECK(std::abs(plob_bound(50.0, 0.2).rate - 0.152003) < 1e-6);
  CHECK_FALSE(plob_bound(50.0, 0.2).capped);
  double prev = plob_bound(0.0, 0.2).rate;
  for (double L = 1.0; L <= 600.0; L += 1.0) {
    const double v = plob_bound(L, 0.2).rate;
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
}

TEST_CASE("common-QBER thresholds") {
  const SystemParams p = reference_params();
  SUBCASE("uncalibrated device-level crossing") {
    const double t = qber_threshold(p, 1.0, Engine::Original, {1, 3}, 1e-7);
    CHECK(std::abs(t - oracle_threshold(1.0, 1.15)) < 1e-6);
    CHECK(std::abs(t - 0.098780) < 1e-5);
  }
  SUBCASE("calibration reproduces the target") {
    const double q = calibrate_qbar11(0.046, p.f);
    CHECK(std::abs(qber_threshold(p, q, Engine::Original, {1, 3}, 1e-7) - 0.046) < 1e-6);
    const double t_info = qber_threshold(p, q, Engine::Info, {1, 3});
    const double t_ad = qber_threshold(p, q, Engine::AD, {1, 3});
    CHECK(std::abs(t_info - 0.046) < 2e-4);
    CHECK(t_ad / 0.046 >= 1.8);
    CHECK(t_ad / 0.046 <= 2.1);
  }
  SUBCASE("table at Q = 0") {
    const QberTable t = scan_common_qber(p, 0.5, 0.0, 0.0, 0.01, {1, 3});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].rate_original == 0.5);
    CHECK(t.rows[0].rate_info == 0.5);
    CHECK(t.rows[0].rate_ad == 0.5);
    CHECK(t.rows[0].b_opt == 1);
  }
  SUBCASE("table ordering") {
    const QberTable t = scan_common_qber(p, calibrate_qbar11(0.046, p.f), 0.0, 0.12, 0.01, {1, 3});
    CHECK(t.rows.size() == 13);
    for (const QberRow& r : t.rows) {
      CHECK(r.rate_ad >= r.rate_info);
    }
  }
  CHECK_THROWS_AS(qber_threshold(p, 0.0, Engine::Original, {1, 3}), ModelDomainError);
  CHECK_THROWS_AS(scan_common_qber(p, 0.5, 0.0, 0.6, 0.01, {1, 3}), std::invalid_argument);
}

TEST_CASE("block-size switch coincides with the AD crossover") {
  for (double e_d : {0.01, 0.04, 0.10, 0.20}) {
    CAPTURE(e_d);
    ScanSpec spec;
    spec.params = reference_params(e_d);
    spec.L_from = 0.0;
    spec.L_to = 560.0;
    spec.L_step = 2.0;
    const ScanTable t = scan_distance(spec);
    double first_b = NAN, first_gain = NAN;
    for (const ScanRow& r : t.rows) {
      if (std::isnan(first_b) && r.b_opt > 1) first_b = r.L_km;
      if (std::isnan(first_gain) && r.rate_ad > r.rate_original * (1.0 + 1e-6)) first_gain = r.L_km;
    }
    REQUIRE_FALSE(std::isnan(first_b));
    REQUIRE_FALSE(std::isnan(first_gain));
    CHECK(std::abs(first_b - first_gain) <= 2 * spec.L_step);
    for (const ScanRow& r : t.rows) {
      if (r.L_km < first_gain && r.rate_original > 0.0) {
        CHECK(std::abs(r.rate_ad - r.rate_original) / r.rate_original < 1e-6);
      }
    }
  }
}
