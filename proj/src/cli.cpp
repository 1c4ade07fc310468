#include "mpqkd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mpqkd/io.hpp"
#include "mpqkd/mc.hpp"
#include "mpqkd/model.hpp"
#include "mpqkd/rates.hpp"
#include "mpqkd/scan.hpp"

namespace mpqkd::cli {

using nlohmann::ordered_json;

namespace {

// Target original-scheme QBER threshold used to calibrate the synthetic scan.
constexpr double kCalibrationQber = 0.046;

struct CommonFlags {
  std::string config_path;
  std::optional<int> b_max;
  std::optional<double> mu;
  std::optional<double> misalignment;
  unsigned workers = 0;
};

io::Config resolve_config(const CommonFlags& flags) {
  io::Config cfg = flags.config_path.empty() ? io::parse_config(nlohmann::json::object())
                                             : io::load_config(flags.config_path);
  if (flags.b_max) {
    cfg.b_range.b_max = *flags.b_max;
    if (cfg.b_range.b_max < cfg.b_range.b_min) {
      throw io::ConfigError("--b-max must be >= b_min");
    }
  }
  if (flags.mu) {
    if (!(*flags.mu > 0.0)) throw io::ConfigError("--mu must be > 0");
    cfg.mu = *flags.mu;
  }
  if (flags.misalignment) {
    cfg.params.e_d = *flags.misalignment;
    try {
      cfg.params.validate();
    } catch (const std::invalid_argument& e) {
      throw io::ConfigError(e.what());
    }
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file (defaults if omitted)");
  cmd->add_option("--b-max", flags.b_max, "largest AD block size")->check(CLI::PositiveNumber);
  cmd->add_option("--mu", flags.mu, "fix the signal intensity instead of optimising");
  cmd->add_option("--misalignment", flags.misalignment, "override the misalignment error e_d");
  cmd->add_option("--workers", flags.workers, "worker threads (0 = all cores)");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_rate(const CommonFlags& flags, double distance, const std::string& engine_name,
             std::ostream& out) {
  const io::Config cfg = resolve_config(flags);
  const Engine engine = engine_from_string(engine_name);
  if (!(distance >= 0.0)) {
    throw std::invalid_argument("--distance must be >= 0");
  }
  ordered_json rec;
  rec["L_km"] = distance;
  rec["engine"] = to_string(engine);
  ordered_json per_engine;
  std::optional<MuOptimum> chosen;
  for (Engine e : {Engine::Original, Engine::Info, Engine::AD}) {
    const MuOptimum opt = optimize_mu(cfg.params, distance, e, cfg.b_range, cfg.mu);
    per_engine[to_string(e)] = io::to_json(opt.result);
    rec["rate_" + to_string(e)] = opt.result.rate;
    if (e == engine) chosen = opt;
  }
  if (!chosen->feasible) {
    throw ModelDomainError("no intensity inside the model domain at this distance");
  }
  rec["mu_opt"] = chosen->result.mu_opt;
  rec["b_opt"] = chosen->result.b_opt;
  rec["lambda3_opt"] = chosen->result.lambda3_opt;
  rec["channel"] = io::to_json(chosen->channel);
  rec["engines"] = per_engine;
  out << rec.dump(2) << '\n';
  return kOk;
}

int cmd_scan_distance(const CommonFlags& flags, double from, double to, double step,
                      const std::string& engine_name, const std::string& out_csv,
                      const std::string& out_svg, const std::string& series_list,
                      std::ostream& out) {
  const io::Config cfg = resolve_config(flags);
  ScanSpec spec;
  spec.params = cfg.params;
  spec.engine = engine_from_string(engine_name);
  spec.L_from = from;
  spec.L_to = to;
  spec.L_step = step;
  spec.mu_policy = cfg.mu;
  spec.b_range = cfg.b_range;
  spec.workers = flags.workers;
  const ScanTable table = scan_distance(spec);

  std::ostringstream csv;
  io::write_scan_csv(csv, table);
  io::write_file(out_csv, csv.str());

  if (!out_svg.empty()) {
    std::vector<io::Series> series;
    for (const std::string& name : split_list(series_list)) {
      io::Series s{name, {}};
      for (const ScanRow& r : table.rows) {
        double y = 0.0;
        if (name == "original") y = r.rate_original;
        else if (name == "info") y = r.rate_info;
        else if (name == "ad") y = r.rate_ad;
        else if (name == "plob") y = r.plob;
        else throw std::invalid_argument("unknown series '" + name + "'");
        s.points.emplace_back(r.L_km, y);
      }
      series.push_back(std::move(s));
    }
    std::ostringstream svg;
    io::write_svg(svg,
                  {"Secret key rate vs distance (e_d = " + std::to_string(cfg.params.e_d) + ")",
                   "total distance (km)", "secret key rate (bits per round)", from,
                   std::max(to, from + step)},
                  series);
    io::write_file(out_svg, svg.str());
  }
  out << "wrote " << table.rows.size() << " rows to " << out_csv << '\n';
  return kOk;
}

int cmd_scan_qber(const CommonFlags& flags, double from, double to, double step,
                  std::optional<double> qbar11, const std::string& out_csv,
                  const std::string& out_svg, std::ostream& out) {
  const io::Config cfg = resolve_config(flags);
  const double q11 = qbar11.value_or(calibrate_qbar11(kCalibrationQber, cfg.params.f));
  const QberTable table = scan_common_qber(cfg.params, q11, from, to, step, cfg.b_range);

  std::ostringstream csv;
  io::write_qber_csv(csv, table);
  io::write_file(out_csv, csv.str());
  if (!out_svg.empty()) {
    io::Series orig{"original", {}};
    io::Series ad{"ad", {}};
    for (const QberRow& r : table.rows) {
      orig.points.emplace_back(r.Q, r.rate_original);
      ad.points.emplace_back(r.Q, r.rate_ad);
    }
    std::ostringstream svg;
    io::write_svg(svg, {"Secret key rate vs QBER (synthetic, qbar11_eff calibrated)", "QBER",
                        "secret key rate (relative)", from, std::max(to, from + step)},
                  {orig, ad});
    io::write_file(out_svg, svg.str());
  }
  ordered_json meta;
  meta["rows"] = table.rows.size();
  meta["out"] = out_csv;
  meta["qbar11_eff"] = q11;
  meta["calibrated"] = !qbar11.has_value();
  if (!qbar11) meta["calibration_target_qber"] = kCalibrationQber;
  out << meta.dump(2) << '\n';
  return kOk;
}

int cmd_thresholds(const CommonFlags& flags, double tol_km, double qber_tol,
                   std::optional<double> qbar11, std::ostream& out) {
  const io::Config cfg = resolve_config(flags);
  ordered_json rec;
  rec["misalignment"] = cfg.params.e_d;
  rec["b_range"] = {cfg.b_range.b_min, cfg.b_range.b_max};
  ordered_json lmax;
  for (Engine e : {Engine::Original, Engine::Info, Engine::AD}) {
    lmax[to_string(e)] = max_distance(cfg.params, e, cfg.b_range, tol_km, cfg.mu);
  }
  rec["l_max_km"] = lmax;
  rec["extension_km"] = lmax["ad"].get<double>() - lmax["original"].get<double>();

  const double q11 = qbar11.value_or(calibrate_qbar11(kCalibrationQber, cfg.params.f));
  ordered_json qthr;
  for (Engine e : {Engine::Original, Engine::Info, Engine::AD}) {
    qthr[to_string(e)] = qber_threshold(cfg.params, q11, e, cfg.b_range, qber_tol);
  }
  rec["qber_threshold"] = qthr;
  rec["qber_ratio_ad_original"] = qthr["ad"].get<double>() / qthr["original"].get<double>();
  ordered_json cal;
  cal["qbar11_eff"] = q11;
  cal["calibrated"] = !qbar11.has_value();
  cal["target_original_qber"] = kCalibrationQber;
  cal["model"] = "synthetic operating point: e_xx = e_zz = E_zz = Q, r_p = r_s = 1";
  rec["calibration"] = cal;
  out << rec.dump(2) << '\n';
  return kOk;
}

ordered_json estimate_json(const mc::McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}, {"seed", e.seed}};
}

}  // namespace

ValidationReport run_validation(std::uint64_t seed, std::uint64_t samples, unsigned workers) {
  ordered_json checks = ordered_json::array();
  bool all_pass = true;
  auto record = [&](ordered_json check, bool pass) {
    check["pass"] = pass;
    all_pass = all_pass && pass;
    checks.push_back(std::move(check));
  };

  struct PairCase {
    double p;
    std::int64_t delta;
  };
  const PairCase pair_cases[] = {{0.1, 5}, {0.01, 100}, {0.5, 2}};
  std::uint64_t offset = 0;
  for (const auto& c : pair_cases) {
    const double expected = pair_rate(c.p, c.delta);
    const auto est = mc::mc_pair_rate(c.p, c.delta, samples, seed + offset++, workers);
    ordered_json j;
    j["name"] = "pair_rate_mc";
    j["p"] = c.p;
    j["delta"] = c.delta;
    j["expected"] = expected;
    j["estimate"] = estimate_json(est);
    j["tolerance"] = "3 standard errors";
    record(j, est.agrees(expected));
  }

  struct BlockCase {
    double E;
    int b;
  };
  const BlockCase block_cases[] = {{0.25, 2}, {0.046, 3}};
  for (const auto& c : block_cases) {
    const AdOutcome exact = ad_transform(LambdaVector{}, c.E, c.b);
    const auto est = mc::mc_ad_block(c.E, c.b, samples, seed + offset++, workers);
    ordered_json j;
    j["name"] = "ad_block_mc";
    j["E"] = c.E;
    j["b"] = c.b;
    j["expected_q_s"] = exact.q_s;
    j["expected_e_tilde"] = exact.e_tilde;
    j["q_s"] = estimate_json(est.q_s);
    j["e_tilde"] = estimate_json(est.e_tilde);
    j["tolerance"] = "3 standard errors";
    record(j, est.q_s.agrees(exact.q_s) && est.e_tilde.agrees(exact.e_tilde));
  }

  {
    double worst = 0.0;
    for (int i = 0; i <= 5; ++i) {
      const double E = 0.1 * i;
      for (int b = 1; b <= 10; ++b) {
        const auto en = mc::enumerate_ad_block(E, b);
        const AdOutcome cf = ad_transform(LambdaVector{}, E, b);
        worst = std::max({worst, std::abs(en.q_s - cf.q_s), std::abs(en.e_tilde - cf.e_tilde)});
      }
    }
    ordered_json j;
    j["name"] = "ad_block_enumeration";
    j["grid"] = "E in {0, 0.1, ..., 0.5}, b in [1, 10]";
    j["max_abs_error"] = worst;
    j["tolerance"] = 1e-14;
    record(j, worst <= 1e-14);
  }

  for (double q : {0.02, 0.05, 0.1, 0.2, 0.3}) {
    const BracketMinimum m = minimize_bracket(q, q, 1);
    const double l3_err = std::abs(m.lambda3 - q * q);
    const double br_err = std::abs(m.bracket - (1.0 - binary_entropy(q)));
    ordered_json j;
    j["name"] = "closed_form_lambda";
    j["Q"] = q;
    j["lambda3_numeric"] = m.lambda3;
    j["lambda3_closed_form"] = q * q;
    j["lambda3_abs_error"] = l3_err;
    j["bracket_abs_error"] = br_err;
    j["tolerance"] = {{"lambda3", 1e-6}, {"bracket", 1e-9}};
    record(j, l3_err <= 1e-6 && br_err <= 1e-9);
  }

  ValidationReport report;
  report.json["seed"] = seed;
  report.json["samples"] = samples;
  report.json["checks"] = checks;
  report.json["all_pass"] = all_pass;
  report.all_pass = all_pass;
  return report;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mode-pairing QKD key-rate calculator with advantage distillation", "mpqkd"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string engine = "original";
  double distance = -1.0;
  double from = 0.0, to = 560.0, step = 2.0;
  std::string out_csv, out_svg;
  std::string series = "original,info,ad,plob";
  double tol_km = 0.5, qber_tol = 1e-4;
  std::optional<double> qbar11;
  std::uint64_t seed = 42, samples = 10'000'000;

  auto* rate = app.add_subcommand("rate", "key rates and channel record at one distance");
  add_common(rate, flags);
  rate->add_option("--distance,-L", distance, "total distance in km")->required();
  rate->add_option("--engine", engine, "engine whose optimum fills the record");

  auto* scan = app.add_subcommand("scan-distance", "rate vs distance table");
  add_common(scan, flags);
  scan->add_option("--from", from, "first distance (km)");
  scan->add_option("--to", to, "last distance (km)");
  scan->add_option("--step", step, "distance step (km)");
  scan->add_option("--out", out_csv, "CSV output path")->required();
  scan->add_option("--svg", out_svg, "optional SVG chart path");
  scan->add_option("--engine", engine, "engine whose optimum fills mu/channel columns");
  scan->add_option("--series", series, "comma list of original,info,ad,plob for the chart");

  double q_from = 0.0, q_to = 0.12, q_step = 0.001;
  auto* scan_q = app.add_subcommand("scan-qber", "rate vs QBER on the synthetic operating point");
  add_common(scan_q, flags);
  scan_q->add_option("--from", q_from, "first QBER");
  scan_q->add_option("--to", q_to, "last QBER");
  scan_q->add_option("--step", q_step, "QBER step");
  scan_q->add_option("--qbar11", qbar11, "effective single-photon fraction (default calibrated)");
  scan_q->add_option("--out", out_csv, "CSV output path")->required();
  scan_q->add_option("--svg", out_svg, "optional SVG chart path");

  auto* thr = app.add_subcommand("thresholds", "maximum distance and QBER thresholds");
  add_common(thr, flags);
  thr->add_option("--tol-km", tol_km, "distance bisection tolerance");
  thr->add_option("--qber-tol", qber_tol, "QBER bisection tolerance");
  thr->add_option("--qbar11", qbar11, "effective single-photon fraction (default calibrated)");

  auto* val = app.add_subcommand("validate", "Monte Carlo and exact oracle checks");
  add_common(val, flags);
  val->add_option("--seed", seed, "base RNG seed");
  val->add_option("--samples", samples, "rounds / blocks per Monte Carlo check");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (rate->parsed()) {
      return cmd_rate(flags, distance, engine, out);
    }
    if (scan->parsed()) {
      return cmd_scan_distance(flags, from, to, step, scan->count("--engine") ? engine : "ad",
                               out_csv, out_svg, series, out);
    }
    if (scan_q->parsed()) {
      return cmd_scan_qber(flags, q_from, q_to, q_step, qbar11, out_csv, out_svg, out);
    }
    if (thr->parsed()) {
      return cmd_thresholds(flags, tol_km, qber_tol, qbar11, out);
    }
    if (val->parsed()) {
      if (samples < kMinValidationSamples) {
        err << "error: --samples must be >= " << kMinValidationSamples << '\n';
        return kUsage;
      }
      resolve_config(flags);
      const ValidationReport report = run_validation(seed, samples, flags.workers);
      out << report.json.dump(2) << '\n';
      return report.all_pass ? kOk : kValidationFailed;
    }
  } catch (const ModelDomainError& e) {
    err << "model domain error: " << e.what() << '\n';
    return kModelDomain;
  } catch (const io::IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace mpqkd::cli
