#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mpqkd/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = mpqkd::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "mpqkd_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("rate subcommand") {
  const Run r = run({"rate", "--distance", "300"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("L_km").get<double>() == 300.0);
  CHECK(j.at("rate_original").get<double>() > 0.0);
  CHECK(j.at("rate_ad").get<double>() >= j.at("rate_info").get<double>());
  CHECK(j.at("channel").contains("qbar11"));

  const Run fixed = run({"rate", "-L", "100", "--mu", "0.5"});
  REQUIRE(fixed.code == 0);
  CHECK(json::parse(fixed.out).at("mu_opt").get<double>() == 0.5);

  CHECK(run({"rate", "--distance=-5"}).code == mpqkd::cli::kUsage);
  CHECK(run({"rate"}).code == mpqkd::cli::kUsage);
  CHECK(run({"rate", "-L", "10", "--engine", "bogus"}).code == mpqkd::cli::kUsage);
  CHECK(run({"frobnicate"}).code == mpqkd::cli::kUsage);
}

TEST_CASE("scan-distance subcommand") {
  const fs::path dir = temp_dir();
  const fs::path csv = dir / "scan.csv";
  const fs::path svg = dir / "scan.svg";
  const Run r = run({"scan-distance", "--from", "0", "--to", "10", "--step", "50", "--out",
                     csv.string(), "--svg", svg.string()});
  REQUIRE(r.code == 0);
  CHECK(line_count(csv) == 2);
  CHECK(fs::exists(svg));

  const Run bad = run({"scan-distance", "--to", "10", "--out", "/nonexistent/dir/x.csv"});
  CHECK(bad.code == mpqkd::cli::kIo);
  const Run neg = run({"scan-distance", "--from", "10", "--to", "5", "--out", csv.string()});
  CHECK(neg.code == mpqkd::cli::kUsage);
}

TEST_CASE("scan-qber subcommand") {
  const fs::path csv = temp_dir() / "qber.csv";
  const Run r = run({"scan-qber", "--from", "0", "--to", "0.1", "--step", "0.01", "--out",
                     csv.string()});
  REQUIRE(r.code == 0);
  CHECK(line_count(csv) == 12);
}

TEST_CASE("thresholds subcommand") {
  const Run r = run({"thresholds"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("extension_km").get<double>() > 0.0);
  CHECK(j.at("qber_ratio_ad_original").get<double>() > 1.0);
  CHECK(run({"thresholds", "--misalignment", "0.5"}).code == mpqkd::cli::kModelDomain);
}

TEST_CASE("validate subcommand") {
  CHECK(run({"validate", "--samples", "1000"}).code == mpqkd::cli::kUsage);
  const Run a = run({"validate", "--seed", "3", "--samples", "200000"});
  const Run b = run({"validate", "--seed", "3", "--samples", "200000", "--workers", "2"});
  CHECK(a.out == b.out);
  CHECK(json::parse(a.out).at("seed").get<int>() == 3);
}

TEST_CASE("config handling") {
  const fs::path dir = temp_dir();
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"eta": 0.2})";
  CHECK(run({"rate", "-L", "10", "--config", bad.string()}).code == mpqkd::cli::kUsage);
  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{";
  CHECK(run({"rate", "-L", "10", "--config", broken.string()}).code == mpqkd::cli::kUsage);
  const fs::path good = dir / "good.json";
  std::ofstream(good) << R"({"misalignment": 0.01, "mu": 0.25})";
  const Run r = run({"rate", "-L", "10", "--config", good.string()});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out).at("mu_opt").get<double>() == 0.25);
}
