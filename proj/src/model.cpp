#include "mpqkd/model.hpp"

#include <cmath>
#include <sstream>

namespace mpqkd {

namespace {

constexpr double kSnap = 1e-15;

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

// Checks v against [lo, hi + kDomainSlack] and returns it unchanged.
double checked(double v, double lo, double hi, const char* name) {
  if (!(v >= lo - kDomainSlack && v <= hi + kDomainSlack)) {
    std::ostringstream os;
    os << name << " = " << v << " outside [" << lo << ", " << hi << "]";
    throw ModelDomainError(os.str());
  }
  return v;
}

// 1 - (1 - 2 p_d) exp(-x), free of cancellation for small x and p_d.
double no_click_complement(double p_d, double x) {
  return 2.0 * p_d - (1.0 - 2.0 * p_d) * std::expm1(-x);
}

}  // namespace

void SystemParams::validate() const {
  require(eta_d > 0.0 && eta_d <= 1.0, "eta_d must lie in (0, 1]");
  require(alpha >= 0.0 && std::isfinite(alpha), "alpha must be finite and >= 0");
  require(p_d >= 0.0 && p_d < 0.5, "p_d must lie in [0, 0.5)");
  require(f >= 1.0 && std::isfinite(f), "f must be finite and >= 1");
  require(delta >= 1, "delta must be >= 1");
  require(e_d >= 0.0 && e_d <= 0.5, "e_d must lie in [0, 0.5]");
  require(e_0 >= 0.0 && e_0 <= 1.0, "e_0 must lie in [0, 1]");
  if (const auto* fixed = std::get_if<FixedZError>(&e_zz_model)) {
    require(fixed->value >= 0.0 && fixed->value <= 0.5, "fixed e_zz must lie in [0, 0.5]");
  }
}

SystemParams reference_params(double e_d) {
  SystemParams params;
  params.e_d = e_d;
  params.validate();
  return params;
}

double binary_entropy(double x) {
  if (!(x >= -kSnap && x <= 1.0 + kSnap)) {
    std::ostringstream os;
    os << "binary_entropy argument " << x << " outside [0, 1]";
    throw ModelDomainError(os.str());
  }
  if (x <= 0.0 || x >= 1.0) {
    return 0.0;
  }
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double per_arm_transmittance(const SystemParams& params, double length_km) {
  if (!(length_km >= 0.0)) {
    throw std::invalid_argument("distance must be >= 0");
  }
  const double arm_loss_db = params.alpha * (length_km / 2.0);
  return params.eta_d * std::pow(10.0, -arm_loss_db / 10.0);
}

double click_probability(const SystemParams& params, double eta_s, double mu) {
  if (!(mu >= 0.0)) {
    throw std::invalid_argument("mu must be >= 0");
  }
  const double pd = params.p_d;
  // Intensity settings {00, 01, 10, 11}, each with probability 1/4.
  const double single = no_click_complement(pd, eta_s * mu);
  const double both = no_click_complement(pd, 2.0 * eta_s * mu);
  return 0.25 * (2.0 * single + 2.0 * pd + both);
}

double pair_rate(double p, std::int64_t delta) {
  if (delta < 1) {
    throw std::invalid_argument("delta must be >= 1");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ModelDomainError("click probability outside [0, 1]");
  }
  if (p == 0.0) {
    return 0.0;
  }
  // s = 1 - (1-p)^delta in log space; r_p = [1/(p s) + 1/p]^-1 = p s / (1 + s).
  const double s = -std::expm1(static_cast<double>(delta) * std::log1p(-p));
  return p * s / (1.0 + s);
}

double z_pair_ratio(const SystemParams& params, double eta_s, double mu, double p) {
  if (!(p > 0.0)) {
    throw ModelDomainError("z_pair_ratio requires p > 0");
  }
  const double single = no_click_complement(params.p_d, eta_s * mu);
  const double ratio = single / p;
  return checked(ratio * ratio / 8.0, 0.0, 1.0, "r_s");
}

double z_qber(const SystemParams& params, double eta_s, double mu, double p, double r_s) {
  if (!(p > 0.0 && r_s > 0.0)) {
    throw ModelDomainError("z_qber requires p > 0 and r_s > 0");
  }
  const double both = no_click_complement(params.p_d, 2.0 * eta_s * mu);
  const double e = 0.25 * params.p_d * both / (r_s * p * p);
  return checked(e, 0.0, 0.5, "E_zz");
}

double single_photon_pair_ratio(const SystemParams& params, double eta_s, double mu, double p,
                                double r_s) {
  if (!(p > 0.0 && r_s > 0.0)) {
    throw ModelDomainError("single_photon_pair_ratio requires p > 0 and r_s > 0");
  }
  const double pd = params.p_d;
  const double p1 = mu * std::exp(-mu);
  // 1 - (1 - 2 p_d)(1 - eta_s)
  const double one_photon = 2.0 * pd + (1.0 - 2.0 * pd) * eta_s;
  const double q = p1 * p1 * one_photon * one_photon / (8.0 * r_s * p * p);
  return checked(q, 0.0, 1.0, "qbar11");
}

SinglePhotonXStats single_photon_x_stats(const SystemParams& params, double eta_a, double eta_b) {
  if (!(eta_a > 0.0 && eta_a <= 1.0 && eta_b > 0.0 && eta_b <= 1.0)) {
    throw ModelDomainError("single_photon_x_stats requires transmittances in (0, 1]");
  }
  const double pd = params.p_d;
  const double signal = eta_a * eta_b / 2.0;
  const double y11 =
      (1.0 - pd) * (1.0 - pd) *
      (signal + (2.0 * eta_a + 2.0 * eta_b - 3.0 * eta_a * eta_b) * pd +
       4.0 * (1.0 - eta_a) * (1.0 - eta_b) * pd * pd);
  // e0 - (e0 - ed) w with w the signal share of the yield.
  const double w = (1.0 - pd * pd) * signal / y11;
  const double e_xx = params.e_d * w + params.e_0 * (1.0 - w);
  checked(e_xx, 0.0, 0.5, "e_xx");
  return {checked(y11, 0.0, 1.0, "Y11"), e_xx};
}

double single_photon_z_error(const SystemParams& params, double eta_s, double E_zz) {
  struct Visitor {
    double pd;
    double eta;
    double observed;
    double operator()(DarkCountSinglePhoton) const {
      const double a = 2.0 * pd + (1.0 - 2.0 * pd) * eta;
      const double b = 2.0 * pd + (1.0 - 2.0 * pd) * eta * (2.0 - eta);
      const double err = 2.0 * 2.0 * pd * b;
      return err / (2.0 * a * a + err);
    }
    double operator()(EqualObservedZ) const { return observed; }
    double operator()(FixedZError fixed) const { return fixed.value; }
  };
  const double e = std::visit(Visitor{params.p_d, eta_s, E_zz}, params.e_zz_model);
  if (!(e >= 0.0 && e <= 0.5)) {
    std::ostringstream os;
    os << "e_zz = " << e << " outside [0, 0.5]";
    throw ModelDomainError(os.str());
  }
  return e;
}

ChannelDerived derive_channel(const SystemParams& params, double length_km, double mu) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("mu must be > 0");
  }
  ChannelDerived ch;
  ch.mu = mu;
  ch.eta_s = per_arm_transmittance(params, length_km);
  ch.p = checked(click_probability(params, ch.eta_s, mu), 0.0, 1.0, "p");
  ch.r_p = pair_rate(ch.p, params.delta);
  if (ch.r_p > ch.p / 2.0 + kDomainSlack) {
    throw ModelDomainError("r_p exceeds p/2");
  }
  ch.r_s = z_pair_ratio(params, ch.eta_s, mu, ch.p);
  ch.E_zz = z_qber(params, ch.eta_s, mu, ch.p, ch.r_s);
  ch.qbar11 = single_photon_pair_ratio(params, ch.eta_s, mu, ch.p, ch.r_s);
  const auto x = single_photon_x_stats(params, ch.eta_s, ch.eta_s);
  ch.Y11 = x.Y11;
  ch.e_xx = x.e_xx;
  ch.e_zz = single_photon_z_error(params, ch.eta_s, ch.E_zz);
  return ch;
}

std::string describe(const ZErrorModel& model) {
  struct Visitor {
    std::string operator()(DarkCountSinglePhoton) const { return "dark_count"; }
    std::string operator()(EqualObservedZ) const { return "equal_observed"; }
    std::string operator()(FixedZError fixed) const {
      std::ostringstream os;
      os << "fixed(" << fixed.value << ")";
      return os.str();
    }
  };
  return std::visit(Visitor{}, model);
}

}  // namespace mpqkd
