#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <Eigen/Dense>
#include <json.hpp>

#include "iphase/cli.hpp"
#include "iphase/geomodel.hpp"
#include "iphase/sequences.hpp"

using namespace iphase;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("iphase-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> csv_rows(const std::string& doc) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(doc);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("tables writes one file per table") {
    const fs::path dir = scratch_dir("tables");
    const auto r = cli({"tables", "--format", "csv", "--out", dir.string()});
    CHECK(r.code == kExitPass);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".csv";
    CHECK(files == 5);
    CHECK(fs::exists(dir / "gravimeter.csv"));
    CHECK(fs::exists(dir / "perturbative.csv"));
    fs::remove_all(dir);
  }

  TEST_CASE("tables filter") {
    const auto r = cli({"tables", "--preset", "gravimeter", "--format", "json"});
    CHECK(r.code == kExitPass);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.at("tables").size() == 1);
    CHECK(j["tables"][0]["table"] == "gravimeter");
  }

  TEST_CASE("strict tolerance with the sidereal rate fails on a named row") {
    const auto r = cli({"tables", "--tolerance", "strict", "--set", "omega_rad_s=7.292115e-5"});
    CHECK(r.code == kExitToleranceFailure);
    CHECK(r.err.find("grav.2") != std::string::npos);
    CHECK(cli({"tables", "--tolerance", "strict"}).code == kExitPass);
  }

  TEST_CASE("run") {
    const auto r = cli({"run", "--preset", "clock", "--modes", "full"});
    CHECK(r.code == kExitPass);
    for (const char* field : {"prop_rad", "laser_rad", "sep_rad", "total_rad"}) {
      CHECK(r.out.find(field) != std::string::npos);
    }
    const auto zero = cli({"run", "--preset", "gravimeter", "--set", "T=0", "--format", "json"});
    CHECK(zero.code == kExitPass);
    CHECK(nlohmann::json::parse(zero.out).at("total_rad").get<double>() == 0.0);
  }

  TEST_CASE("config file and flags agree") {
    const fs::path dir = scratch_dir("config");
    const fs::path toml = dir / "exp.toml";
    std::ofstream(toml) << "[sequence]\npreset = \"gravimeter\"\nT = \"300 ms\"\n\n"
                           "[environment]\nlatitude_deg = 45\n\n"
                           "[evaluation]\nmodes = \"no_gradient,full\"\n\n"
                           "[output]\nformat = \"csv\"\n";
    const auto from_file = cli({"run", "--config", toml.string()});
    const auto from_flags = cli({"run", "--preset", "gravimeter", "--set", "T=0.3", "--set",
                                 "latitude_deg=45", "--modes", "no_gradient,full", "--format", "csv"});
    CHECK(from_file.code == kExitPass);
    CHECK(from_file.out == from_flags.out);
    // Flags override the file.
    const auto override = cli({"run", "--config", toml.string(), "--set", "T=0.4"});
    const auto plain = cli({"run", "--preset", "gravimeter", "--set", "latitude_deg=45", "--modes",
                            "no_gradient,full", "--format", "csv"});
    CHECK(override.out == plain.out);
    fs::remove_all(dir);
  }

  TEST_CASE("compare") {
    CHECK(cli({"compare", "--preset", "gravimeter"}).code == kExitPass);
    CHECK(cli({"compare", "--preset", "gyroscope", "--target", "1e-9"}).code == kExitPass);
    CHECK(cli({"compare", "--preset", "unknown"}).code == kExitUsage);
    CHECK(cli({"compare", "--preset", "gravimeter", "--target", "1e-15"}).code == kExitToleranceFailure);
  }

  TEST_CASE("sweep over T grows as T^2") {
    const auto r = cli({"sweep", "--preset", "gravimeter", "--axis", "T=0.1:0.4:16", "--format", "csv"});
    REQUIRE(r.code == kExitPass);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 16);
    Eigen::MatrixXd A(16, 2);
    Eigen::VectorXd y(16);
    for (int i = 0; i < 16; ++i) {
      if (i > 0) CHECK(rows[i][0] > rows[i - 1][0]);
      A(i, 0) = std::log(rows[i][0]);
      A(i, 1) = 1.0;
      y(i) = std::log(std::abs(rows[i].back()));
    }
    const Eigen::VectorXd fit = A.colPivHouseholderQr().solve(y);
    CHECK(std::abs(fit(0) - 2.0) <= 0.01);
  }

  TEST_CASE("sweep over latitude follows sin") {
    const auto r = cli({"sweep", "--preset", "gyroscope", "--axis", "latitude_deg=0:90:10"});
    REQUIRE(r.code == kExitPass);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 10);
    Eigen::MatrixXd A(10, 2);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) {
      const double lat = rows[i][0] * std::numbers::pi / 180.0;
      A(i, 0) = std::sin(lat);
      A(i, 1) = std::cos(lat);
      y(i) = rows[i].back();
    }
    const Eigen::VectorXd fit = A.colPivHouseholderQr().solve(y);
    const double T = 1.0 / 290.0;
    const double sagnac = 2 * wavevector_from_wavelength(426e-9) * T * T * kTableRotationRate * 290.0;
    CHECK(fit(0) == doctest::Approx(sagnac).epsilon(1e-3));
    CHECK((A * fit - y).cwiseAbs().maxCoeff() <= 1e-6);
  }

  TEST_CASE("two-axis sweep is sorted and complete") {
    const auto r = cli({"sweep", "--preset", "gravimeter", "--axis", "T=0.4:0.2:3", "--axis",
                        "latitude_deg=0:60:2", "--format", "csv"});
    REQUIRE(r.code == kExitPass);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][0] == 0.2);
    CHECK(rows[0][1] == 0.0);
    CHECK(rows[1][1] == 60.0);
    CHECK(rows[5][0] == 0.4);
  }

  TEST_CASE("usage errors") {
    CHECK(cli({"sweep", "--preset", "gravimeter", "--axis", "T=0.1:0.1:16"}).code == kExitUsage);
    CHECK(cli({"sweep", "--preset", "gravimeter", "--axis", "T=0.1:0.4:0"}).code == kExitUsage);
    CHECK(cli({"sweep", "--preset", "gravimeter", "--axis", "bogus"}).code == kExitUsage);
    CHECK(cli({"sweep", "--preset", "gravimeter"}).code == kExitUsage);
    CHECK(cli({"run", "--preset", "gravimeter", "--set", "speed=3"}).code == kExitUsage);
    CHECK(cli({"run", "--preset", "gravimeter", "--set", "T=0.4 m"}).code == kExitUsage);
    CHECK(cli({"run", "--preset", "gravimeter", "--format", "xml"}).code == kExitUsage);
    CHECK(cli({"run", "--preset", "gravimeter", "--modes", "full,free_fall"}).code == kExitUsage);
    CHECK(cli({"run"}).code == kExitUsage);
    CHECK(cli({"run", "--config", "/nonexistent/exp.toml"}).code == kExitUsage);
    CHECK(cli({"tables", "--tolerance", "loose"}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({}).code == kExitUsage);
  }

  TEST_CASE("export-catalog") {
    const auto j = cli({"export-catalog"});
    CHECK(j.code == kExitPass);
    CHECK(nlohmann::json::parse(j.out).at("terms").size() == 36);
    const auto c = cli({"export-catalog", "--format", "csv"});
    CHECK(c.out.rfind("id,table,", 0) == 0);
    CHECK(cli({"export-catalog", "--format", "text"}).code == kExitUsage);
  }

  TEST_CASE("default output directory") {
    const fs::path dir = scratch_dir("env");
    setenv("IPHASE_OUT_DIR", dir.string().c_str(), 1);
    const auto r = cli({"run", "--preset", "gyroscope", "--format", "json"});
    unsetenv("IPHASE_OUT_DIR");
    CHECK(r.code == kExitPass);
    CHECK(fs::exists(dir / "run-gyroscope.json"));
    CHECK(nlohmann::json::parse(slurp(dir / "run-gyroscope.json")).at("preset") == "gyroscope");
    fs::remove_all(dir);
  }

  TEST_CASE("machine formats are deterministic") {
    CHECK(cli({"tables", "--format", "json"}).out == cli({"tables", "--format", "json"}).out);
    const std::vector<std::string> sweep{"sweep", "--preset", "clock", "--axis", "T=0.1:0.4:9", "--format", "csv"};
    CHECK(cli(sweep).out == cli(sweep).out);
  }
}
