#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace mpqkd {

/// Raised when an input or a derived statistic leaves its physical domain.
/// Derived values are never clamped; a violation signals that the closed-form
/// approximations no longer hold for the requested operating point.
class ModelDomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Slack allowed on probability bounds of derived statistics.
inline constexpr double kDomainSlack = 1e-9;

// Single-photon Z-error models.
struct DarkCountSinglePhoton {};
struct EqualObservedZ {};
struct FixedZError {
  double value = 0.0;
};
using ZErrorModel = std::variant<DarkCountSinglePhoton, EqualObservedZ, FixedZError>;

struct SystemParams {
  double eta_d = 0.2;             // detector efficiency
  double alpha = 0.2;             // fiber loss, dB/km
  double p_d = 1.2e-8;            // dark count probability per detector per round
  double f = 1.15;                // error-correction efficiency
  std::int64_t delta = 1'000'000; // maximum pairing interval, rounds
  double e_d = 0.04;              // misalignment error rate
  double e_0 = 0.5;               // vacuum error rate
  ZErrorModel e_zz_model = DarkCountSinglePhoton{};

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

/// Reference experimental constants with the given misalignment.
SystemParams reference_params(double e_d = 0.04);

struct ChannelDerived {
  double eta_s = 0.0;
  double mu = 0.0;
  double p = 0.0;
  double r_p = 0.0;
  double r_s = 0.0;
  double E_zz = 0.0;
  double qbar11 = 0.0;
  double Y11 = 0.0;
  double e_xx = 0.0;
  double e_zz = 0.0;
};

struct SinglePhotonXStats {
  double Y11 = 0.0;
  double e_xx = 0.0;
};

/// -x log2 x - (1-x) log2(1-x); inputs within 1e-15 of [0,1] are snapped.
double binary_entropy(double x);

/// Per-arm transmittance with the relay at the midpoint of a total length L.
double per_arm_transmittance(const SystemParams& params, double length_km);

double click_probability(const SystemParams& params, double eta_s, double mu);

/// Expected pairs per round for click probability p and pairing window delta.
double pair_rate(double p, std::int64_t delta);

double z_pair_ratio(const SystemParams& params, double eta_s, double mu, double p);

double z_qber(const SystemParams& params, double eta_s, double mu, double p, double r_s);

double single_photon_pair_ratio(const SystemParams& params, double eta_s, double mu, double p,
                                double r_s);

SinglePhotonXStats single_photon_x_stats(const SystemParams& params, double eta_a, double eta_b);

double single_photon_z_error(const SystemParams& params, double eta_s, double E_zz);

/// All operating-point statistics at total distance L and intensity mu.
ChannelDerived derive_channel(const SystemParams& params, double length_km, double mu);

std::string describe(const ZErrorModel& model);

}  // namespace mpqkd
