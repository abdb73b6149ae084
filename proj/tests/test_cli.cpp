#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "rzl/cli.hpp"
#include "rzl/error.hpp"
#include "rzl/szego.hpp"

using namespace rzl;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "rzl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::string last_line(const std::string& s) {
  auto t = s;
  while (!t.empty() && t.back() == '\n') t.pop_back();
  return t.substr(t.rfind('\n') + 1);
}

nlohmann::json summary_of(const std::string& err) {
  return nlohmann::json::parse(err.substr(0, err.rfind('}') + 1));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("complex grammar") {
  CHECK(cli::parse_complex("1+0i") == cplx(1.0, 0.0));
  CHECK(cli::parse_complex("-0.5-2i") == cplx(-0.5, -2.0));
  CHECK(cli::parse_complex("3") == cplx(3.0, 0.0));
  CHECK(cli::parse_complex("2.5i") == cplx(0.0, 2.5));
  CHECK(cli::parse_complex("-i") == cplx(0.0, -1.0));
  CHECK(cli::parse_complex("1e-3+2E+1i") == cplx(1e-3, 20.0));
  CHECK(cli::parse_complex("+1-i") == cplx(1.0, -1.0));
  for (const char* bad : {"", "1+", "abc", "1 + 2i", "1+2j", "nan", "inf", "1+2i3"})
    CHECK_THROWS_AS(cli::parse_complex(bad), Error);
  CHECK(cli::parse_complex_vector("1+0i,0+1i") == CVec{cplx(1, 0), cplx(0, 1)});
  CHECK(cli::parse_int_list("50,100,200") == std::vector<int>{50, 100, 200});
  CHECK_THROWS_AS(cli::parse_int_list("50,,100"), Error);
  CHECK_THROWS_AS(cli::parse_int_list("5.0"), Error);
}

TEST_CASE("figures: angular correlation oscillates") {
  const auto r = run({"figures", "--lambda-max", "30", "--steps", "300"});
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  CHECK(header == "lambda,k_perp,k_theta");
  REQUIRE(rows.size() == 301);
  int changes = 0;
  for (std::size_t k = 1; k < rows.size(); ++k)
    if ((rows[k][2] > 1.0) != (rows[k - 1][2] > 1.0)) ++changes;
  CHECK(changes >= 3);
  const auto s = summary_of(r.err);
  CHECK(s["gates"]["k_theta_oscillates"] == "pass");
}

TEST_CASE("figures: normal correlation tends to 1") {
  const auto r = run({"figures"});
  CHECK(r.code == 0);
  const auto rows = parse_csv(r.out);
  CHECK(std::abs(rows.back()[1] - 1.0) < 0.05);
  CHECK(rows.front()[1] < 1.0);
}

TEST_CASE("converge-density on the circle") {
  const auto r = run({"converge-density", "--profile", "circle", "--z", "1+0i", "--u", "0+0i", "--N-list", "50,100,200"});
  CHECK(r.code == 0);
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  CHECK(header == "N,D_scaled,err_D,flagged");
  REQUIRE(rows.size() == 3);
  // D/N^2 = (1 + 2/N) / (12 pi): exactly 1% above the limit at N = 200.
  CHECK(std::abs(rows.back()[1] * 12 * M_PI - 1.0) <= 0.01 + 1e-12);
  const auto s = summary_of(r.err);
  CHECK(s["subcommand"] == "converge-density");
  CHECK(s["config"]["N_list"].size() == 3);
  CHECK(std::abs(s["metrics"]["rate_D"].get<double>() + 1.0) < 0.3);
  CHECK(s["gates"]["last_error_within_10pct"] == "pass");
}

TEST_CASE("converge-pair flags slow convergence with exit 4") {
  const auto r = run({"converge-pair", "--profile", "sphere", "--z", "1+0i,0+0i", "--u", "1+0i,0+0i", "--N-list", "5,10,20"});
  CHECK(r.code == 4);
  CHECK(last_line(r.err).rfind("ERROR 4 ", 0) == 0);
  const auto rows = parse_csv(r.out);
  CHECK(rows.back().back() == 1.0);
}

TEST_CASE("precondition errors exit 2 with one ERROR line") {
  const std::vector<std::vector<std::string>> cases = {
      {"converge-density", "--profile", "circle", "--z", "1.2+0i", "--N-list", "50,100,200"},
      {"converge-pair", "--profile", "sphere", "--z", "1+0i,0+0i", "--u", "0+0i,1+0i", "--N-list", "20,40,80"},
      {"converge-density", "--profile", "circle", "--z", "1+0i", "--N-list", "50,40,200"},
      {"converge-density", "--profile", "circle", "--z", "1+0i,0+0i", "--N-list", "5,10,20"},
      {"converge-density", "--profile", "torus", "--z", "1", "--N-list", "5,10,20"},
      {"figures", "--lambda-min", "0"},
      {"figures", "--steps", "x"},
      {"mc-circle", "--trials", "10"},
      {"norms", "--profile", "ellipsoid:1,2,3", "--N", "3"},
      {"bogus"},
      {},
  };
  for (const auto& args : cases) {
    const auto r = run(args);
    CHECK(r.code == 2);
    CHECK(last_line(r.err).rfind("ERROR 2 ", 0) == 0);
    CHECK(r.out.empty());
  }
}

TEST_CASE("help exits 0") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("a+bi") != std::string::npos);
}

TEST_CASE("limits-curve") {
  const auto r = run({"limits-curve", "--profile", "sphere", "--z", "1+0i,0+0i", "--u", "1+0i,0+0i", "--lambda-min", "0",
                      "--lambda-max", "2", "--steps", "2"});
  CHECK(r.code == 0);
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  CHECK(header == "lambda,re_beta,im_beta,D_inf,K_inf,K_tilde_inf");
  REQUIRE(rows.size() == 3);
  CHECK(std::abs(rows[0][3] - 1.0 / (18 * M_PI)) < 1e-15);
  CHECK(std::isnan(rows[0][5]));
  CHECK(rows[2][1] == 2.0);
}

TEST_CASE("identical configs give byte-identical CSV") {
  const std::vector<std::string> mc = {"mc-circle", "--N", "40", "--trials", "200", "--seed", "7", "--bins", "3"};
  const auto a = run(mc), b = run(mc);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("re_u,im_u,count,empirical,predicted,z_score\n", 0) == 0);
  auto other = mc;
  other[6] = "8";
  CHECK(run(other).out != a.out);
  const std::vector<std::string> pair = {"converge-pair", "--profile", "sphere", "--z", "1+0i,0+0i", "--u",
                                         "2+0i,0+0i", "--N-list", "10,20,40"};
  CHECK(run(pair).out == run(pair).out);
}

TEST_CASE("output files") {
  const auto dir = std::filesystem::temp_directory_path() / "rzl_cli_test";
  std::filesystem::create_directories(dir);
  const auto table = (dir / "t.txt").string(), summary = (dir / "s.json").string();
  const auto r = run({"norms", "--profile", "sphere", "--N", "12", "--out", table, "--summary", summary});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(table);
  const auto t = szego::read_table(in);
  CHECK(t.N() == 12);
  CHECK(t.m() == 1);
  const auto direct = szego::compute_norms(geometry::RadialProfile::sphere(1), 12);
  for (std::size_t k = 0; k < t.norms().size(); ++k) CHECK(t.norms()[k] == direct.norms()[k]);
  std::ifstream js(summary);
  const auto s = nlohmann::json::parse(js);
  CHECK(s["subcommand"] == "norms");
  CHECK(s.contains("config"));
  CHECK(s.contains("metrics"));
  CHECK(s.contains("gates"));
  const auto bad = run({"norms", "--N", "3", "--out", (dir / "missing" / "x.txt").string()});
  CHECK(bad.code == 2);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
