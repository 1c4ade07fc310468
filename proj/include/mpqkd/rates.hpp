#pragma once

#include <array>
#include <cstddef>

#include "mpqkd/model.hpp"

namespace mpqkd {

/// Bell-diagonal channel factors. Built through lambda_from_lambda3 or
/// closed_form_lambda, both of which keep the sum at 1.
struct LambdaVector {
  double l0 = 1.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;

  double sum() const { return l0 + l1 + l2 + l3; }
  std::array<double, 4> as_array() const { return {l0, l1, l2, l3}; }
};

struct AdOutcome {
  LambdaVector lambda;  // transformed factors
  double q_s = 1.0;     // block success probability
  double e_tilde = 0.0; // error rate of accepted blocks
  int b = 1;
};

/// Pieces of the rate expression at the optimum, kept for diagnostics and for
/// root-finding on the unfloored value.
struct RateComponents {
  double prefactor = 0.0;     // (1/b) q_s r_p r_s
  double privacy_term = 0.0;  // qbar11^b * bracket
  double leakage_term = 0.0;  // f H(E)
  double bracket = 0.0;
  double raw = 0.0;           // prefactor * (privacy_term - leakage_term)
};

struct RateResult {
  double rate = 0.0;  // floored at 0
  int b_opt = 1;
  double mu_opt = 0.0;
  double lambda3_opt = 0.0;
  RateComponents components;

  double raw() const { return components.raw; }
};

struct BlockRange {
  int b_min = 1;
  int b_max = 3;
};

/// Grid resolution and refinement width for the lambda3 minimisation.
inline constexpr std::size_t kLambdaGridPoints = 200;
inline constexpr double kLambdaWidthTol = 1e-10;

/// Device-level rate: r_p r_s {qbar11 [1 - H(e_xx)] - f H(E_zz)}, floored.
RateResult rate_devicelevel(const ChannelDerived& ch, double f);

/// Feasible lambda3 interval [max(0, e_xx + e_zz - 1), min(e_xx, e_zz)].
std::array<double, 2> lambda3_interval(double e_xx, double e_zz);

LambdaVector lambda_from_lambda3(double e_xx, double e_zz, double lambda3);

/// 1 - (l0+l1) h(l0/(l0+l1)) - (l2+l3) h(l2/(l2+l3)); empty groups add nothing.
double info_key_fraction(const LambdaVector& lv);

LambdaVector closed_form_lambda(double q);

AdOutcome ad_transform(const LambdaVector& lv, double E_zz, int b);

struct BracketMinimum {
  double lambda3 = 0.0;
  double bracket = 0.0;
};

/// Minimises the (possibly AD-transformed) bracket over the feasible lambda3.
BracketMinimum minimize_bracket(double e_xx, double e_zz, int b = 1);

/// Unfloored rate for a fixed block size and lambda3 (re-evaluates witnesses).
RateComponents evaluate_ad(const ChannelDerived& ch, double f, int b, double lambda3);

RateResult rate_info(const ChannelDerived& ch, double f);

RateResult rate_ad(const ChannelDerived& ch, double f, BlockRange range);

}  // namespace mpqkd
