#include "mpqkd/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mpqkd/search.hpp"

namespace mpqkd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBracketCapKm = 1e4;

unsigned resolve_workers(unsigned requested, std::size_t jobs) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs body(i) for i in [0, n); results are written by index so the outcome
// does not depend on scheduling. The first failing index (lowest i) rethrows.
template <class Body>
void parallel_for(std::size_t n, unsigned workers, const Body& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = resolve_workers(workers, n);
  if (count <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(run);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::Original: return "original";
    case Engine::Info: return "info";
    case Engine::AD: return "ad";
  }
  return "unknown";
}

Engine engine_from_string(const std::string& name) {
  if (name == "original") return Engine::Original;
  if (name == "info") return Engine::Info;
  if (name == "ad") return Engine::AD;
  throw std::invalid_argument("unknown engine '" + name + "' (expected original|info|ad)");
}

RateResult evaluate_engine(Engine engine, const ChannelDerived& ch, const SystemParams& params,
                           BlockRange range) {
  switch (engine) {
    case Engine::Original: return rate_devicelevel(ch, params.f);
    case Engine::Info: return rate_info(ch, params.f);
    case Engine::AD: return rate_ad(ch, params.f, range);
  }
  throw std::logic_error("unhandled engine");
}

MuOptimum optimize_mu(const SystemParams& params, double length_km, Engine engine,
                      BlockRange range, MuPolicy policy) {
  if (!(length_km >= 0.0)) {
    throw std::invalid_argument("distance must be >= 0");
  }
  // Negated unfloored rate at log(mu); out-of-domain points are infeasible.
  auto loss = [&](double log_mu) {
    try {
      const ChannelDerived ch = derive_channel(params, length_km, std::exp(log_mu));
      return -evaluate_engine(engine, ch, params, range).raw();
    } catch (const ModelDomainError&) {
      return -kNegInf;
    }
  };

  double mu = 0.0;
  if (policy) {
    mu = *policy;
    if (!(mu > 0.0)) {
      throw std::invalid_argument("fixed mu must be > 0");
    }
  } else {
    const auto best = search::grid_golden_minimize(loss, std::log(kMuMin), std::log(kMuMax),
                                                   kMuGridPoints, kMuRelTol);
    mu = std::exp(best.x);
  }

  MuOptimum out;
  try {
    out.channel = derive_channel(params, length_km, mu);
    out.result = evaluate_engine(engine, out.channel, params, range);
    out.feasible = true;
  } catch (const ModelDomainError&) {
    out.result = RateResult{};
    out.result.components.raw = kNegInf;
    out.result.rate = 0.0;
    out.feasible = false;
  }
  out.result.mu_opt = mu;
  return out;
}

void ScanSpec::validate() const {
  params.validate();
  if (!(L_from >= 0.0 && L_from <= L_to)) {
    throw std::invalid_argument("scan range must satisfy 0 <= from <= to");
  }
  if (!(L_step > 0.0)) {
    throw std::invalid_argument("scan step must be > 0");
  }
  if (b_range.b_min < 1 || b_range.b_max < b_range.b_min) {
    throw std::invalid_argument("block range must satisfy 1 <= b_min <= b_max");
  }
}

std::vector<double> distance_grid(double from, double to, double step) {
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = from + step * static_cast<double>(i);
  }
  return grid;
}

ScanTable scan_distance(const ScanSpec& spec) {
  spec.validate();
  const std::vector<double> grid = distance_grid(spec.L_from, spec.L_to, spec.L_step);
  ScanTable table;
  table.rows.resize(grid.size());

  parallel_for(grid.size(), spec.workers, [&](std::size_t i) {
    const double L = grid[i];
    try {
      const MuOptimum orig = optimize_mu(spec.params, L, Engine::Original, spec.b_range,
                                         spec.mu_policy);
      const MuOptimum info = optimize_mu(spec.params, L, Engine::Info, spec.b_range,
                                         spec.mu_policy);
      const MuOptimum ad = optimize_mu(spec.params, L, Engine::AD, spec.b_range, spec.mu_policy);
      const MuOptimum& chosen = spec.engine == Engine::Original ? orig
                                : spec.engine == Engine::Info   ? info
                                                                : ad;
      ScanRow& row = table.rows[i];
      row.L_km = L;
      row.mu_opt = chosen.result.mu_opt;
      row.b_opt = ad.result.b_opt;
      row.rate_original = orig.result.rate;
      row.rate_info = info.result.rate;
      row.rate_ad = ad.result.rate;
      row.raw_original = orig.result.raw();
      row.raw_info = info.result.raw();
      row.raw_ad = ad.result.raw();
      row.plob = plob_bound(L, spec.params.alpha).rate;
      row.e_xx = chosen.channel.e_xx;
      row.E_zz = chosen.channel.E_zz;
      row.qbar11 = chosen.channel.qbar11;
      row.r_p = chosen.channel.r_p;
      row.r_s = chosen.channel.r_s;
    } catch (const ModelDomainError& e) {
      std::ostringstream os;
      os << "at L = " << L << " km: " << e.what();
      throw ModelDomainError(os.str());
    }
  });
  return table;
}

double max_distance(const SystemParams& params, Engine engine, BlockRange range, double tol_km,
                    MuPolicy policy) {
  if (!(tol_km > 0.0)) {
    throw std::invalid_argument("tolerance must be > 0");
  }
  auto rate_at = [&](double L) { return optimize_mu(params, L, engine, range, policy).result.raw(); };
  if (!(rate_at(0.0) > 0.0)) {
    throw ModelDomainError("rate is non-positive at L = 0");
  }
  double lo = 0.0;
  double hi = 100.0;
  while (rate_at(hi) > 0.0) {
    if (hi >= kBracketCapKm) {
      throw ModelDomainError("no zero crossing below 10000 km");
    }
    lo = hi;
    hi = std::min(2.0 * hi, kBracketCapKm);
  }
  return search::bisect_sign(rate_at, lo, hi, tol_km);
}

ChannelDerived common_qber_channel(double qbar11_eff, double q) {
  ChannelDerived ch;
  ch.eta_s = 1.0;
  ch.mu = 1.0;
  ch.p = 1.0;
  ch.r_p = 1.0;
  ch.r_s = 1.0;
  ch.E_zz = q;
  ch.qbar11 = qbar11_eff;
  ch.Y11 = 1.0;
  ch.e_xx = q;
  ch.e_zz = q;
  return ch;
}

QberTable scan_common_qber(const SystemParams& params, double qbar11_eff, double q_from,
                           double q_to, double q_step, BlockRange range) {
  if (!(q_from >= 0.0 && q_from <= q_to && q_to <= 0.5)) {
    throw std::invalid_argument("QBER range must satisfy 0 <= from <= to <= 0.5");
  }
  if (!(q_step > 0.0)) {
    throw std::invalid_argument("QBER step must be > 0");
  }
  if (!(qbar11_eff >= 0.0 && qbar11_eff <= 1.0)) {
    throw std::invalid_argument("qbar11_eff must lie in [0, 1]");
  }
  QberTable table;
  table.qbar11_eff = qbar11_eff;
  for (double q : distance_grid(q_from, q_to, q_step)) {
    q = std::min(q, 0.5);
    const ChannelDerived ch = common_qber_channel(qbar11_eff, q);
    const RateResult ad = rate_ad(ch, params.f, range);
    table.rows.push_back({q, ad.b_opt, rate_devicelevel(ch, params.f).rate,
                          rate_info(ch, params.f).rate, ad.rate});
  }
  return table;
}

double calibrate_qbar11(double target_q, double f) {
  const double h = binary_entropy(target_q);
  return f * h / (1.0 - h);
}

double qber_threshold(const SystemParams& params, double qbar11_eff, Engine engine,
                      BlockRange range, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("tolerance must be > 0");
  }
  auto rate_at = [&](double q) {
    return evaluate_engine(engine, common_qber_channel(qbar11_eff, q), params, range).raw();
  };
  if (!(rate_at(0.0) > 0.0)) {
    throw ModelDomainError("rate is non-positive at Q = 0");
  }
  if (rate_at(0.5) > 0.0) {
    throw ModelDomainError("no sign change of the rate in Q in [0, 0.5]");
  }
  return search::bisect_sign(rate_at, 0.0, 0.5, tol);
}

PlobValue plob_bound(double length_km, double alpha, double cap) {
  if (!(length_km >= 0.0)) {
    throw std::invalid_argument("distance must be >= 0");
  }
  const double eta = std::pow(10.0, -alpha * length_km / 10.0);
  if (eta >= 1.0) {
    return {cap, true};
  }
  const double value = -std::log1p(-eta) / std::log(2.0);
  if (value > cap) {
    return {cap, true};
  }
  return {value, false};
}

}  // namespace mpqkd
