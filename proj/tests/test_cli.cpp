#include "rrsens/cli.hpp"

#include "rrsens/csv.hpp"
#include "rrsens/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rrsens;

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"rrsens"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rrsens_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// small binary dataset with enough signal to fit cleanly
fs::path write_binary_csv(const fs::path& dir) {
  Rng rng(12345);
  std::ostringstream out;
  out << "treated,score,x\n";
  for (int i = 0; i < 80; ++i) {
    const double x = rng.normal(0, 1);
    const int t = rng.uniform() < 1.0 / (1.0 + std::exp(-0.5 * x)) ? 1 : 0;
    const double y = 1.0 + 0.8 * t + 0.5 * x + rng.normal(0, 0.5);
    out << t << ',' << y << ',' << x << '\n';
  }
  const fs::path path = dir / "data.csv";
  std::ofstream f(path);
  f << out.str();
  return path;
}

size_t count_lines(const std::string& text) {
  size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

}  // namespace

TEST_CASE("analyze writes the three outputs and collapses at Gamma0 = 1") {
  const fs::path dir = fresh_dir("analyze");
  const fs::path data = write_binary_csv(dir);
  const fs::path out = dir / "out";

  const int rc = run_cli({"analyze", "--data", data.string(), "--treatment-col", "treated",
                          "--outcome-col", "score", "--covariates", "x", "--Gamma0", "1",
                          "--boot", "50", "--seed", "7", "--out", out.string()});
  REQUIRE(rc == 0);

  const std::string results = slurp(out / "results.csv");
  CHECK(count_lines(results) == 2);  // header + single contrast at Gamma0=1
  const std::string plotdata = slurp(out / "plotdata.csv");
  CHECK(count_lines(plotdata) == 2);

  // point interval has zero width on the Gamma0=1 row
  std::istringstream rows(results);
  std::string header, row;
  std::getline(rows, header);
  std::getline(rows, row);
  std::vector<std::string> cells;
  std::istringstream cell_stream(row);
  std::string cell;
  while (std::getline(cell_stream, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() >= 6);
  CHECK(std::abs(std::stod(cells[4]) - std::stod(cells[5])) < 1e-10);

  const std::string json_text = slurp(out / "results.json");
  CHECK(json_text.find("\"schema_version\"") != std::string::npos);
  CHECK(slurp(out / "gps_model.json").find("\"gps_model\"") != std::string::npos);
}

TEST_CASE("analyze output is byte-identical across thread counts") {
  const fs::path dir = fresh_dir("determinism");
  const fs::path data = write_binary_csv(dir);

  auto run_with = [&](const std::string& tag, const std::string& threads) {
    const fs::path out = dir / tag;
    const int rc =
        run_cli({"analyze", "--data", data.string(), "--treatment-col", "treated",
                 "--outcome-col", "score", "--covariates", "x", "--Gamma0", "1,1.5,2",
                 "--boot", "60", "--seed", "42", "--threads", threads, "--out", out.string()});
    REQUIRE(rc == 0);
    return slurp(out / "results.csv");
  };
  const std::string serial = run_with("t1", "1");
  const std::string parallel = run_with("t8", "8");
  CHECK(serial == parallel);
}

TEST_CASE("plotdata has one record per contrast and Gamma0") {
  const fs::path dir = fresh_dir("plotdata");
  const fs::path data = write_binary_csv(dir);
  const fs::path out = dir / "out";
  const int rc = run_cli({"analyze", "--data", data.string(), "--treatment-col", "treated",
                          "--outcome-col", "score", "--covariates", "x", "--Gamma0",
                          "1,1.25,1.5,1.75", "--boot", "0", "--out", out.string()});
  REQUIRE(rc == 0);
  CHECK(count_lines(slurp(out / "plotdata.csv")) == 1 + 1 * 4);
  // no bootstrap -> CI columns are NA markers
  CHECK(slurp(out / "results.csv").find(",NA,NA,") != std::string::npos);
}

TEST_CASE("config file drives analyze and flags override it") {
  const fs::path dir = fresh_dir("config");
  const fs::path data = write_binary_csv(dir);
  const fs::path out = dir / "out";
  const fs::path config = dir / "run.json";
  {
    std::ofstream f(config);
    f << "{\n"
      << "  \"data\": \"" << data.string() << "\",\n"
      << "  \"schema\": {\"treatment\": \"treated\", \"outcome\": \"score\","
      << " \"covariates\": [\"x\"]},\n"
      << "  \"Gamma0_grid\": [1, 2],\n"
      << "  \"bootstrap\": {\"reps\": 40},\n"
      << "  \"seed\": 3,\n"
      << "  \"out\": \"" << out.string() << "\"\n"
      << "}\n";
  }
  REQUIRE(run_cli({"analyze", "--config", config.string()}) == 0);
  CHECK(count_lines(slurp(out / "results.csv")) == 3);

  // flag overrides the grid from the file
  REQUIRE(run_cli({"analyze", "--config", config.string(), "--Gamma0", "1"}) == 0);
  CHECK(count_lines(slurp(out / "results.csv")) == 2);
}

TEST_CASE("bad inputs exit nonzero with a diagnostic") {
  const fs::path dir = fresh_dir("errors");
  const fs::path data = write_binary_csv(dir);

  // missing column
  CHECK(run_cli({"analyze", "--data", data.string(), "--treatment-col", "nope",
                 "--outcome-col", "score", "--covariates", "x", "--out",
                 (dir / "o1").string()}) != 0);
  // Gamma0 below 1
  CHECK(run_cli({"analyze", "--data", data.string(), "--treatment-col", "treated",
                 "--outcome-col", "score", "--covariates", "x", "--Gamma0", "0.5", "--out",
                 (dir / "o2").string()}) != 0);
  // gamma0 and Gamma0 together
  CHECK(run_cli({"analyze", "--data", data.string(), "--treatment-col", "treated",
                 "--outcome-col", "score", "--covariates", "x", "--Gamma0", "1", "--gamma0",
                 "0", "--out", (dir / "o3").string()}) != 0);
  // no such file
  CHECK(run_cli({"analyze", "--data", (dir / "missing.csv").string(), "--treatment-col", "t",
                 "--outcome-col", "y", "--covariates", "x", "--out", (dir / "o4").string()}) != 0);
}

TEST_CASE("odds-ratio baseline doubles the result rows") {
  const fs::path dir = fresh_dir("orbase");
  const fs::path data = write_binary_csv(dir);
  const fs::path out = dir / "out";
  const int rc = run_cli({"analyze", "--data", data.string(), "--treatment-col", "treated",
                          "--outcome-col", "score", "--covariates", "x", "--Gamma0", "1,2",
                          "--boot", "0", "--or-baseline", "--out", out.string()});
  REQUIRE(rc == 0);
  const std::string results = slurp(out / "results.csv");
  CHECK(count_lines(results) == 1 + 2 * 2);
  CHECK(results.find("risk_ratio") != std::string::npos);
  CHECK(results.find("odds_ratio") != std::string::npos);
}

TEST_CASE("simulate writes a deterministic study report") {
  const fs::path dir = fresh_dir("simulate");
  const auto args = [&](const std::string& tag, const std::string& threads) {
    return std::vector<std::string>{
        "simulate", "--scenario", "1",       "--n",       "150",  "--reps",    "6",
        "--boot",   "30",         "--gamma0", "0,0.5",    "--seed", "9",
        "--oracle-n", "100000",   "--threads", threads,   "--out", (dir / tag).string()};
  };
  REQUIRE(run_cli(args("a", "1")) == 0);
  REQUIRE(run_cli(args("b", "4")) == 0);
  const std::string csv_a = slurp(dir / "a" / "results.csv");
  CHECK(csv_a == slurp(dir / "b" / "results.csv"));
  CHECK(slurp(dir / "a" / "results.json") == slurp(dir / "b" / "results.json"));
  CHECK(count_lines(csv_a) == 1 + 3 * 2);  // three default contrasts, two gamma values
  CHECK(csv_a.find("tau_1_2") != std::string::npos);
}

TEST_CASE("oracle emits zero-width rows at gamma0 = 0") {
  const fs::path dir = fresh_dir("oracle");
  const fs::path out = dir / "out";
  const int rc = run_cli({"oracle", "--scenario", "1", "--gamma0", "0,0.5", "--contrast", "1:2",
                          "--oracle-n", "100000", "--out", out.string()});
  REQUIRE(rc == 0);
  const std::string results = slurp(out / "results.csv");
  CHECK(count_lines(results) == 3);
  std::istringstream rows(results);
  std::string header, row0;
  std::getline(rows, header);
  std::getline(rows, row0);
  std::vector<std::string> cells;
  std::istringstream cs(row0);
  std::string cell;
  while (std::getline(cs, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() == 5);
  CHECK(std::stod(cells[3]) == doctest::Approx(std::stod(cells[4])).epsilon(1e-12));
}
