#include <cmath>

#include "doctest.h"
#include "mpqkd/mc.hpp"
#include "mpqkd/model.hpp"

using namespace mpqkd;
using namespace mpqkd::mc;

namespace {

// Closed-form AD block statistics for comparison with sampling.
std::pair<double, double> ad_closed(double E, int b) {
  const double err = std::pow(E, b);
  const double qs = err + std::pow(1 - E, b);
  return {qs, err / qs};
}

}  // namespace

TEST_CASE("pair-rate sampling agrees with the renewal formula") {
  struct Case {
    double p;
    std::int64_t delta;
    std::uint64_t n;
    std::uint64_t seed;
  };
  for (const Case c : {Case{0.5, 1'000'000, 1'000'000, 42}, Case{0.1, 5, 10'000'000, 1},
                       Case{0.01, 100, 10'000'000, 7}}) {
    CAPTURE(c.p);
    CAPTURE(c.delta);
    const McEstimate est = mc_pair_rate(c.p, c.delta, c.n, c.seed);
    CHECK(est.n == c.n);
    CHECK(est.std_error > 0.0);
    CHECK(est.agrees(pair_rate(c.p, c.delta)));
  }
}

TEST_CASE("pair-rate sampling is independent of the worker count") {
  const McEstimate a = mc_pair_rate(0.1, 5, 3'000'000, 9, 1);
  const McEstimate b = mc_pair_rate(0.1, 5, 3'000'000, 9, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  const McEstimate c = mc_pair_rate(0.1, 5, 3'000'000, 10, 1);
  CHECK(a.mean != c.mean);
}

TEST_CASE("standard error scales as n^-1/2") {
  const McEstimate small = mc_pair_rate(0.1, 5, 1'000'000, 3);
  const McEstimate large = mc_pair_rate(0.1, 5, 10'000'000, 3);
  const double ratio = small.std_error / large.std_error;
  CHECK(std::abs(ratio / std::sqrt(10.0) - 1.0) < 0.2);
}

TEST_CASE("AD block sampling") {
  for (auto [E, b] : {std::pair{0.25, 2}, std::pair{0.046, 3}, std::pair{0.1, 4}}) {
    CAPTURE(E);
    CAPTURE(b);
    const AdBlockEstimate est = mc_ad_block(E, b, 10'000'000, 5);
    const auto [qs, et] = ad_closed(E, b);
    CHECK(est.q_s.agrees(qs));
    CHECK(est.e_tilde.agrees(et));
  }
  SUBCASE("error-free channel is exact") {
    const AdBlockEstimate est = mc_ad_block(0.0, 3, 100'000, 1);
    CHECK(est.q_s.mean == 1.0);
    CHECK(est.q_s.std_error == 0.0);
    CHECK(est.e_tilde.mean == 0.0);
    CHECK(est.e_tilde.agrees(0.0));
  }
  SUBCASE("worker invariance") {
    const AdBlockEstimate a = mc_ad_block(0.2, 3, 2'500'000, 17, 1);
    const AdBlockEstimate b = mc_ad_block(0.2, 3, 2'500'000, 17, 4);
    CHECK(a.q_s.mean == b.q_s.mean);
    CHECK(a.e_tilde.mean == b.e_tilde.mean);
  }
}

TEST_CASE("AD block enumeration") {
  const AdBlockExact a = enumerate_ad_block(0.1, 3);
  CHECK(a.q_s == doctest::Approx(0.73).epsilon(1e-14));
  CHECK(std::abs(a.e_tilde - 1.3698630e-3) < 1e-9);
  CHECK(std::abs(a.total - 1.0) < 1e-14);
  const AdBlockExact h = enumerate_ad_block(0.5, 4);
  CHECK(h.q_s == 0.125);
  CHECK(h.e_tilde == 0.5);
  for (int b = 1; b <= 12; ++b) {
    for (double E : {0.01, 0.046, 0.2, 0.4}) {
      const AdBlockExact x = enumerate_ad_block(E, b);
      const auto [qs, et] = ad_closed(E, b);
      CHECK(std::abs(x.q_s - qs) <= 1e-14);
      CHECK(std::abs(x.e_tilde - et) <= 1e-14);
      CHECK(std::abs(x.total - 1.0) <= 1e-13);
    }
  }
}

TEST_CASE("input guards") {
  CHECK_THROWS_AS(mc_pair_rate(0.0, 5, 1'000'000, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_pair_rate(1.0, 5, 1'000'000, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_pair_rate(0.1, 0, 1'000'000, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_pair_rate(0.1, 5, 1000, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_ad_block(1.5, 2, 1000, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_ad_block(0.1, 0, 1000, 1), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_ad_block(0.1, 21), std::invalid_argument);
  CHECK_THROWS_AS(enumerate_ad_block(0.1, 0), std::invalid_argument);
}
