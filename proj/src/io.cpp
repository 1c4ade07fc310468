#include "mpqkd/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace mpqkd::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "eta_d",        "alpha_db_per_km", "dark_count", "error_correction_f",
      "pairing_interval", "misalignment", "vacuum_error", "e_zz_model",
      "b_min",        "b_max",           "mu"};
  return keys;
}

double number_field(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number()) {
    throw ConfigError(std::string("config key '") + key + "' must be a number");
  }
  return v.get<double>();
}

std::int64_t integer_field(const json& doc, const char* key, std::int64_t fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) {
      return static_cast<std::int64_t>(d);
    }
  }
  throw ConfigError(std::string("config key '") + key + "' must be an integer");
}

std::string fixed_one_decimal(double v) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.1f", v);
  return buf.data();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw IoError("malformed number '" + s + "'");
  return v;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt2(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string tick_label(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Rounds a raw step up to 1, 2 or 5 times a power of ten.
double nice_step(double raw) {
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

Config parse_config(const json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().contains(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  Config cfg;
  SystemParams& p = cfg.params;
  p.eta_d = number_field(doc, "eta_d", p.eta_d);
  p.alpha = number_field(doc, "alpha_db_per_km", p.alpha);
  p.p_d = number_field(doc, "dark_count", p.p_d);
  p.f = number_field(doc, "error_correction_f", p.f);
  p.delta = integer_field(doc, "pairing_interval", p.delta);
  p.e_d = number_field(doc, "misalignment", p.e_d);
  p.e_0 = number_field(doc, "vacuum_error", p.e_0);
  if (doc.contains("e_zz_model")) {
    const json& m = doc.at("e_zz_model");
    if (m.is_number()) {
      p.e_zz_model = FixedZError{m.get<double>()};
    } else if (m == "dark_count") {
      p.e_zz_model = DarkCountSinglePhoton{};
    } else if (m == "equal_observed") {
      p.e_zz_model = EqualObservedZ{};
    } else {
      throw ConfigError("e_zz_model must be \"dark_count\", \"equal_observed\" or a number");
    }
  }
  cfg.b_range.b_min = static_cast<int>(integer_field(doc, "b_min", 1));
  cfg.b_range.b_max = static_cast<int>(integer_field(doc, "b_max", 3));
  if (cfg.b_range.b_min < 1 || cfg.b_range.b_max < cfg.b_range.b_min) {
    throw ConfigError("config requires 1 <= b_min <= b_max");
  }
  if (doc.contains("mu") && !doc.at("mu").is_null()) {
    const double mu = number_field(doc, "mu", 0.0);
    if (!(mu > 0.0)) throw ConfigError("config mu must be > 0 or null");
    cfg.mu = mu;
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::string format_sci(double value) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6e", value);
  std::string s = buf.data();
  const auto e = s.find('e');
  if (e == std::string::npos) return s;  // inf / nan
  std::string mantissa = s.substr(0, e);
  std::string exponent = s.substr(e + 1);
  std::string sign;
  if (!exponent.empty() && (exponent[0] == '+' || exponent[0] == '-')) {
    if (exponent[0] == '-') sign = "-";
    exponent.erase(0, 1);
  }
  const auto nz = exponent.find_first_not_of('0');
  exponent = nz == std::string::npos ? "0" : exponent.substr(nz);
  if (exponent == "0") sign.clear();
  return mantissa + "e" + sign + exponent;
}

void write_scan_csv(std::ostream& os, const ScanTable& table) {
  os << kScanCsvHeader << '\n';
  for (const ScanRow& r : table.rows) {
    os << fixed_one_decimal(r.L_km) << ',' << format_sci(r.mu_opt) << ',' << r.b_opt << ','
       << format_sci(r.rate_original) << ',' << format_sci(r.rate_info) << ','
       << format_sci(r.rate_ad) << ',' << format_sci(r.plob) << ',' << format_sci(r.e_xx) << ','
       << format_sci(r.E_zz) << ',' << format_sci(r.qbar11) << ',' << format_sci(r.r_p) << ','
       << format_sci(r.r_s) << '\n';
  }
}

ScanTable parse_scan_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kScanCsvHeader) {
    throw IoError("scan CSV header mismatch");
  }
  ScanTable table;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 12) {
      throw IoError("scan CSV row has " + std::to_string(cells.size()) + " fields, expected 12");
    }
    ScanRow r;
    r.L_km = parse_double(cells[0]);
    r.mu_opt = parse_double(cells[1]);
    r.b_opt = std::stoi(cells[2]);
    r.rate_original = parse_double(cells[3]);
    r.rate_info = parse_double(cells[4]);
    r.rate_ad = parse_double(cells[5]);
    r.plob = parse_double(cells[6]);
    r.e_xx = parse_double(cells[7]);
    r.E_zz = parse_double(cells[8]);
    r.qbar11 = parse_double(cells[9]);
    r.r_p = parse_double(cells[10]);
    r.r_s = parse_double(cells[11]);
    table.rows.push_back(r);
  }
  return table;
}

void write_qber_csv(std::ostream& os, const QberTable& table) {
  os << kQberCsvHeader << '\n';
  for (const QberRow& r : table.rows) {
    os << format_sci(r.Q) << ',' << r.b_opt << ',' << format_sci(r.rate_original) << ','
       << format_sci(r.rate_info) << ',' << format_sci(r.rate_ad) << '\n';
  }
}

void write_svg(std::ostream& os, const ChartSpec& chart, const std::vector<Series>& series) {
  static constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#e377c2", "#2ca02c",
                                                         "#000000", "#ff7f0e", "#9467bd"};
  constexpr double left = 90.0, right = 30.0, top = 50.0, bottom = 70.0;
  const double plot_w = kSvgWidth - left - right;
  const double plot_h = kSvgHeight - top - bottom;
  const double x_span = chart.x_max > chart.x_min ? chart.x_max - chart.x_min : 1.0;
  const double decades = kSvgMaxDecade - kSvgMinDecade;

  auto px = [&](double x) { return left + (x - chart.x_min) / x_span * plot_w; };
  auto py = [&](double y) {
    const double clamped = std::clamp(y, std::pow(10.0, kSvgMinDecade), 1.0);
    return top + (kSvgMaxDecade - std::log10(clamped)) / decades * plot_h;
  };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\""
     << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth << ' ' << kSvgHeight << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kSvgWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
     << xml_escape(chart.title) << "</text>\n";
  os << "<rect x=\"" << fmt2(left) << "\" y=\"" << fmt2(top) << "\" width=\"" << fmt2(plot_w)
     << "\" height=\"" << fmt2(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int d = kSvgMinDecade; d <= kSvgMaxDecade; ++d) {
    const double y = py(std::pow(10.0, d));
    os << "<line x1=\"" << fmt2(left - 5) << "\" y1=\"" << fmt2(y) << "\" x2=\"" << fmt2(left)
       << "\" y2=\"" << fmt2(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt2(left - 8) << "\" y=\"" << fmt2(y + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">1e" << d << "</text>\n";
  }
  const double step = nice_step(x_span / 8.0);
  for (double x = std::ceil(chart.x_min / step) * step; x <= chart.x_max + 1e-9 * step;
       x += step) {
    const double X = px(x);
    os << "<line x1=\"" << fmt2(X) << "\" y1=\"" << fmt2(top + plot_h) << "\" x2=\"" << fmt2(X)
       << "\" y2=\"" << fmt2(top + plot_h + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt2(X) << "\" y=\"" << fmt2(top + plot_h + 20)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(x) << "</text>\n";
  }
  os << "<text x=\"" << fmt2(left + plot_w / 2) << "\" y=\"" << kSvgHeight - 20
     << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(chart.x_label) << "</text>\n";
  os << "<text x=\"20\" y=\"" << fmt2(top + plot_h / 2) << "\" text-anchor=\"middle\" "
     << "font-size=\"13\" transform=\"rotate(-90 20 " << fmt2(top + plot_h / 2) << ")\">"
     << xml_escape(chart.y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % kColors.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].points.size(); ++i) {
      const auto& [x, y] = series[s].points[i];
      os << (i ? " " : "") << fmt2(px(x)) << ',' << fmt2(py(y));
    }
    os << "\"/>\n";
  }

  // Legend, top-right inside the plot area.
  const double lx = left + plot_w - 170.0;
  double ly = top + 15.0;
  os << "<rect x=\"" << fmt2(lx - 10) << "\" y=\"" << fmt2(top + 2) << "\" width=\"175\" height=\""
     << fmt2(18.0 * static_cast<double>(series.size()) + 8.0)
     << "\" fill=\"white\" stroke=\"#999999\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % kColors.size()];
    os << "<line x1=\"" << fmt2(lx) << "\" y1=\"" << fmt2(ly) << "\" x2=\"" << fmt2(lx + 25)
       << "\" y2=\"" << fmt2(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt2(lx + 32) << "\" y=\"" << fmt2(ly + 4) << "\" font-size=\"12\">"
       << xml_escape(series[s].name) << "</text>\n";
    ly += 18.0;
  }
  os << "</svg>\n";
}

ordered_json to_json(const ChannelDerived& ch) {
  ordered_json j;
  j["eta_s"] = ch.eta_s;
  j["mu"] = ch.mu;
  j["p"] = ch.p;
  j["r_p"] = ch.r_p;
  j["r_s"] = ch.r_s;
  j["E_zz"] = ch.E_zz;
  j["qbar11"] = ch.qbar11;
  j["Y11"] = ch.Y11;
  j["e_xx"] = ch.e_xx;
  j["e_zz"] = ch.e_zz;
  return j;
}

ordered_json to_json(const RateResult& r) {
  ordered_json j;
  j["rate"] = r.rate;
  j["raw"] = r.raw();
  j["mu_opt"] = r.mu_opt;
  j["b_opt"] = r.b_opt;
  j["lambda3_opt"] = r.lambda3_opt;
  j["components"] = {{"prefactor", r.components.prefactor},
                     {"bracket", r.components.bracket},
                     {"privacy_term", r.components.privacy_term},
                     {"leakage_term", r.components.leakage_term}};
  return j;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << contents;
  out.flush();
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
}

}  // namespace mpqkd::io
