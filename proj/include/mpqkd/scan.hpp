#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpqkd/model.hpp"
#include "mpqkd/rates.hpp"

namespace mpqkd {

enum class Engine { Original, Info, AD };

std::string to_string(Engine engine);
Engine engine_from_string(const std::string& name);

/// Intensity search window and resolution.
inline constexpr double kMuMin = 1e-4;
inline constexpr double kMuMax = 1.0;
inline constexpr std::size_t kMuGridPoints = 60;
inline constexpr double kMuRelTol = 1e-4;

/// nullopt means optimise; a value pins mu.
using MuPolicy = std::optional<double>;

/// Rate of one engine at a prepared operating point.
RateResult evaluate_engine(Engine engine, const ChannelDerived& ch, const SystemParams& params,
                           BlockRange range);

struct MuOptimum {
  RateResult result;  // result.mu_opt is the chosen intensity
  ChannelDerived channel;
  bool feasible = false;  // false if every candidate mu left the model domain
};

/// Maximises the engine's rate over mu in [kMuMin, kMuMax]: log-spaced grid,
/// then golden-section refinement in log(mu). Intensities at which the
/// channel model raises ModelDomainError are skipped.
MuOptimum optimize_mu(const SystemParams& params, double length_km, Engine engine,
                      BlockRange range, MuPolicy policy = std::nullopt);

struct ScanSpec {
  SystemParams params;
  Engine engine = Engine::AD;  // selects which optimum fills mu/b/channel columns
  double L_from = 0.0;
  double L_to = 0.0;
  double L_step = 1.0;
  MuPolicy mu_policy;
  BlockRange b_range;
  unsigned workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct ScanRow {
  double L_km = 0.0;
  double mu_opt = 0.0;
  int b_opt = 1;
  double rate_original = 0.0;
  double rate_info = 0.0;
  double rate_ad = 0.0;
  double plob = 0.0;
  double e_xx = 0.0;
  double E_zz = 0.0;
  double qbar11 = 0.0;
  double r_p = 0.0;
  double r_s = 0.0;

  // Unfloored engine optima; not serialised.
  double raw_original = 0.0;
  double raw_info = 0.0;
  double raw_ad = 0.0;
};

struct ScanTable {
  std::vector<ScanRow> rows;
};

/// Distances from_ + i * step up to and including to (within 1e-9 step).
std::vector<double> distance_grid(double from, double to, double step);

ScanTable scan_distance(const ScanSpec& spec);

/// Zero crossing of the engine's unfloored optimal rate in distance.
double max_distance(const SystemParams& params, Engine engine, BlockRange range,
                    double tol_km = 0.5, MuPolicy policy = std::nullopt);

/// Synthetic operating point with e_xx = e_zz = E_zz = Q and unit pairing
/// prefactors.
ChannelDerived common_qber_channel(double qbar11_eff, double q);

struct QberRow {
  double Q = 0.0;
  int b_opt = 1;
  double rate_original = 0.0;
  double rate_info = 0.0;
  double rate_ad = 0.0;
};

struct QberTable {
  double qbar11_eff = 0.0;
  std::vector<QberRow> rows;
};

QberTable scan_common_qber(const SystemParams& params, double qbar11_eff, double q_from,
                           double q_to, double q_step, BlockRange range);

/// Effective single-photon fraction that puts the device-level zero crossing
/// at target_q: qbar11 (1 - H(Q)) = f H(Q).
double calibrate_qbar11(double target_q, double f);

double qber_threshold(const SystemParams& params, double qbar11_eff, Engine engine,
                      BlockRange range, double tol = 1e-4);

struct PlobValue {
  double rate = 0.0;
  bool capped = false;
};

inline constexpr double kPlobCap = 10.0;

/// -log2(1 - eta) with eta = 10^(-alpha L / 10), detector efficiency excluded.
PlobValue plob_bound(double length_km, double alpha, double cap = kPlobCap);

}  // namespace mpqkd
