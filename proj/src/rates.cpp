#include "mpqkd/rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mpqkd/search.hpp"

namespace mpqkd {

namespace {

constexpr double kNegativeSnap = 1e-15;

double snap_nonnegative(double v) { return (v < 0.0 && v >= -kNegativeSnap) ? 0.0 : v; }

// (l0, l1, l2, l3) -> transformed factors for block size b >= 2.
LambdaVector transform_factors(const LambdaVector& lv, int b) {
  const double s01 = std::pow(lv.l0 + lv.l1, b);
  const double d01 = std::pow(lv.l0 - lv.l1, b);
  const double s23 = std::pow(lv.l2 + lv.l3, b);
  const double d23 = std::pow(lv.l2 - lv.l3, b);
  const double denom = 2.0 * (s01 + s23);
  return {snap_nonnegative((s01 + d01) / denom), snap_nonnegative((s01 - d01) / denom),
          snap_nonnegative((s23 + d23) / denom), snap_nonnegative((s23 - d23) / denom)};
}

double group_entropy(double a, double b) {
  const double mass = a + b;
  if (mass <= 0.0) {
    return 0.0;
  }
  return mass * binary_entropy(a / mass);
}

void check_block_size(int b) {
  if (b < 1) {
    throw std::invalid_argument("block size b must be >= 1");
  }
}

}  // namespace

RateResult rate_devicelevel(const ChannelDerived& ch, double f) {
  RateResult result;
  auto& c = result.components;
  c.prefactor = ch.r_p * ch.r_s;
  c.bracket = 1.0 - binary_entropy(ch.e_xx);
  c.privacy_term = ch.qbar11 * c.bracket;
  c.leakage_term = f * binary_entropy(ch.E_zz);
  c.raw = c.prefactor * (c.privacy_term - c.leakage_term);
  result.rate = std::max(0.0, c.raw);
  result.mu_opt = ch.mu;
  result.b_opt = 1;
  result.lambda3_opt = ch.e_xx * ch.e_zz;
  return result;
}

std::array<double, 2> lambda3_interval(double e_xx, double e_zz) {
  return {std::max(0.0, e_xx + e_zz - 1.0), std::min(e_xx, e_zz)};
}

LambdaVector lambda_from_lambda3(double e_xx, double e_zz, double lambda3) {
  const auto [lo, hi] = lambda3_interval(e_xx, e_zz);
  if (!(lambda3 >= lo - kNegativeSnap && lambda3 <= hi + kNegativeSnap)) {
    std::ostringstream os;
    os << "lambda3 = " << lambda3 << " infeasible; feasible interval is [" << lo << ", " << hi
       << "]";
    throw ModelDomainError(os.str());
  }
  return {snap_nonnegative(1.0 - e_xx - e_zz + lambda3), snap_nonnegative(e_xx - lambda3),
          snap_nonnegative(e_zz - lambda3), snap_nonnegative(lambda3)};
}

double info_key_fraction(const LambdaVector& lv) {
  return 1.0 - group_entropy(lv.l0, lv.l1) - group_entropy(lv.l2, lv.l3);
}

LambdaVector closed_form_lambda(double q) {
  if (!(q >= 0.0 && q <= 0.5)) {
    throw ModelDomainError("closed_form_lambda requires Q in [0, 0.5]");
  }
  const double q2 = q * q;
  return {1.0 - 2.0 * q + q2, q - q2, q - q2, q2};
}

AdOutcome ad_transform(const LambdaVector& lv, double E_zz, int b) {
  check_block_size(b);
  if (!(E_zz >= 0.0 && E_zz <= 0.5 + kDomainSlack)) {
    throw ModelDomainError("ad_transform requires E_zz in [0, 0.5]");
  }
  AdOutcome out;
  out.b = b;
  if (b == 1) {
    out.lambda = lv;
    out.q_s = 1.0;
    out.e_tilde = E_zz;
    return out;
  }
  out.lambda = transform_factors(lv, b);
  const double err = std::pow(E_zz, b);
  out.q_s = err + std::pow(1.0 - E_zz, b);
  out.e_tilde = err / out.q_s;
  return out;
}

BracketMinimum minimize_bracket(double e_xx, double e_zz, int b) {
  check_block_size(b);
  const auto [lo, hi] = lambda3_interval(e_xx, e_zz);
  auto objective = [&](double l3) {
    const LambdaVector lv = lambda_from_lambda3(e_xx, e_zz, l3);
    return info_key_fraction(b == 1 ? lv : transform_factors(lv, b));
  };
  const auto best =
      search::grid_golden_minimize(objective, lo, hi, kLambdaGridPoints, kLambdaWidthTol);
  return {best.x, best.value};
}

RateComponents evaluate_ad(const ChannelDerived& ch, double f, int b, double lambda3) {
  const AdOutcome ad = ad_transform(lambda_from_lambda3(ch.e_xx, ch.e_zz, lambda3), ch.E_zz, b);
  RateComponents c;
  c.prefactor = (1.0 / b) * ad.q_s * ch.r_p * ch.r_s;
  c.bracket = info_key_fraction(ad.lambda);
  c.privacy_term = std::pow(ch.qbar11, b) * c.bracket;
  c.leakage_term = f * binary_entropy(ad.e_tilde);
  c.raw = c.prefactor * (c.privacy_term - c.leakage_term);
  return c;
}

RateResult rate_info(const ChannelDerived& ch, double f) { return rate_ad(ch, f, {1, 1}); }

RateResult rate_ad(const ChannelDerived& ch, double f, BlockRange range) {
  if (range.b_min < 1 || range.b_max < range.b_min) {
    throw std::invalid_argument("block range must satisfy 1 <= b_min <= b_max");
  }
  RateResult best;
  bool have = false;
  for (int b = range.b_min; b <= range.b_max; ++b) {
    const BracketMinimum m = minimize_bracket(ch.e_xx, ch.e_zz, b);
    const RateComponents c = evaluate_ad(ch, f, b, m.lambda3);
    if (!have || c.raw > best.components.raw) {
      best.components = c;
      best.b_opt = b;
      best.lambda3_opt = m.lambda3;
      have = true;
    }
  }
  best.mu_opt = ch.mu;
  best.rate = std::max(0.0, best.components.raw);
  return best;
}

}  // namespace mpqkd
