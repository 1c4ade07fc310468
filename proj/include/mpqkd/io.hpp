#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mpqkd/model.hpp"
#include "mpqkd/rates.hpp"
#include "mpqkd/scan.hpp"

namespace mpqkd::io {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Config {
  SystemParams params;
  BlockRange b_range;
  MuPolicy mu;
};

/// Accepted keys; anything else is rejected.
///   eta_d, alpha_db_per_km, dark_count, error_correction_f, pairing_interval,
///   misalignment, vacuum_error, e_zz_model, b_min, b_max, mu
Config parse_config(const nlohmann::json& doc);
Config load_config(const std::string& path);

/// printf("%.6e") with the exponent stripped of '+' and leading zeros:
/// 0 -> "0.000000e0", 1.5e-7 -> "1.500000e-7".
std::string format_sci(double value);

inline constexpr const char* kScanCsvHeader =
    "L_km,mu_opt,b_opt,rate_original,rate_info,rate_ad,plob,e_xx,E_zz,qbar11,r_p,r_s";
inline constexpr const char* kQberCsvHeader = "Q,b_opt,rate_original,rate_info,rate_ad";

void write_scan_csv(std::ostream& os, const ScanTable& table);
ScanTable parse_scan_csv(std::istream& is);
void write_qber_csv(std::ostream& os, const QberTable& table);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label = "secret key rate (bits per round)";
  double x_min = 0.0;
  double x_max = 1.0;
};

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 600;
inline constexpr int kSvgMinDecade = -12;
inline constexpr int kSvgMaxDecade = 0;

/// Log-y line chart; values are clamped into [1e-12, 1].
void write_svg(std::ostream& os, const ChartSpec& chart, const std::vector<Series>& series);

nlohmann::ordered_json to_json(const ChannelDerived& ch);
nlohmann::ordered_json to_json(const RateResult& r);

/// Opens path for writing or throws IoError.
void write_file(const std::string& path, const std::string& contents);

}  // namespace mpqkd::io
