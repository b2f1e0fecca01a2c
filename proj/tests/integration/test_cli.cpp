// End-to-end checks of the command-line tool: exit codes, output files,
// and byte-level determinism. The binary path arrives as the first
// program argument (wired through CTest).

#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fregls/bench.hpp"
#include "fregls/format.hpp"
#include "fregls/io.hpp"

namespace {

std::string g_binary;

int run_cli(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("fregls_cli_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_wide_sample(const std::string& path, const fregls::FunctionalSample& s) {
  std::ostringstream out;
  for (int j = 0; j < s.m(); ++j) out << (j ? "," : "") << fregls::format_sig(s.grid.points(j), 12);
  out << "\n";
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) out << (j ? "," : "") << fregls::format_sig(s.values(i, j), 12);
    out << "\n";
  }
  fregls::write_text_file(path, out.str());
}

void write_scalar(const std::string& path, const Eigen::VectorXd& y) {
  std::ostringstream out;
  out << "y\n";
  for (int i = 0; i < y.size(); ++i) out << fregls::format_sig(y(i), 12) << "\n";
  fregls::write_text_file(path, out.str());
}

void write_panel_files(const fregls::Panel& panel, const std::string& resp_path,
                       const std::string& cov_path) {
  std::ostringstream resp, cov;
  resp << "group,week,rate\n";
  const auto& grid = panel.groups.front().covariates.at("X").grid;
  cov << "group,week";
  for (int j = 0; j < grid.size(); ++j) cov << "," << fregls::format_sig(grid.points(j), 12);
  cov << "\n";
  for (const auto& g : panel.groups) {
    const auto& x = g.covariates.at("X");
    for (int w = 0; w < g.y.size(); ++w) {
      resp << g.name << "," << w + 1 << "," << fregls::format_sig(g.y(w), 12) << "\n";
      cov << g.name << "," << w + 1;
      for (int j = 0; j < x.m(); ++j) cov << "," << fregls::format_sig(x.values(w, j), 12);
      cov << "\n";
    }
  }
  fregls::write_text_file(resp_path, resp.str());
  fregls::write_text_file(cov_path, cov.str());
}

// Toy regression data shared by the fit/predict cases.
struct ToyData {
  TempDir dir;
  std::string x_csv, y_csv;
  ToyData() : dir("fit") {
    const fregls::Grid grid = fregls::Grid::uniform(0.0, 1.0, 31);
    const fregls::FunctionalSample x = fregls::simulate_wiener(50, grid, 11);
    const Eigen::VectorXd beta = fregls::make_beta(fregls::Scenario::A, grid);
    Eigen::VectorXd y = x.values * grid.weights.cwiseProduct(beta);
    x_csv = dir.file("x.csv");
    y_csv = dir.file("y.csv");
    write_wide_sample(x_csv, x);
    write_scalar(y_csv, y);
  }
};

}  // namespace

TEST_CASE("fit writes a summary and exits cleanly") {
  ToyData toy;
  const std::string out = toy.dir.file("out");
  const int code = run_cli("fit --x " + toy.x_csv + " --y " + toy.y_csv +
                           " --basis fpc --k-min 1 --k-max 4 --family ar1 --out " + out);
  CHECK(code == 0);
  CHECK(std::filesystem::exists(out + "/fit_summary.csv"));
  CHECK(std::filesystem::exists(out + "/beta_curve.csv"));
}

TEST_CASE("fit validation failures exit with code 2") {
  ToyData toy;

  SUBCASE("malformed covariate CSV") {
    const std::string bad = toy.dir.file("bad.csv");
    fregls::write_text_file(bad, "0,0.5,1\n1,oops,3\n");
    CHECK(run_cli("fit --x " + bad + " --y " + toy.y_csv + " --out " + toy.dir.file("o")) == 2);
  }

  SUBCASE("response length mismatch") {
    const std::string y_short = toy.dir.file("short_y.csv");
    write_scalar(y_short, Eigen::VectorXd::Ones(7));
    CHECK(run_cli("fit --x " + toy.x_csv + " --y " + y_short + " --out " + toy.dir.file("o")) ==
          2);
  }

  SUBCASE("unknown flag") {
    CHECK(run_cli("fit --x " + toy.x_csv + " --y " + toy.y_csv + " --bogus 3") == 2);
  }

  SUBCASE("missing subcommand") { CHECK(run_cli("") == 2); }
}

TEST_CASE("degenerate curves exit with the numerical code 3") {
  TempDir dir("rank");
  const fregls::Grid grid = fregls::Grid::uniform(0.0, 1.0, 11);
  fregls::FunctionalSample flat(grid, Eigen::MatrixXd::Ones(20, 11));
  const std::string x_csv = dir.file("x.csv");
  write_wide_sample(x_csv, flat);
  const std::string y_csv = dir.file("y.csv");
  write_scalar(y_csv, Eigen::VectorXd::LinSpaced(20, 0.0, 1.0));
  CHECK(run_cli("fit --x " + x_csv + " --y " + y_csv + " --out " + dir.file("o")) == 3);
}

TEST_CASE("predict writes per-horizon rows") {
  ToyData toy;
  const fregls::Grid grid = fregls::Grid::uniform(0.0, 1.0, 31);
  const fregls::FunctionalSample x_new = fregls::simulate_wiener(2, grid, 77);
  const std::string new_csv = toy.dir.file("new_x.csv");
  write_wide_sample(new_csv, x_new);
  const std::string out = toy.dir.file("pred_out");
  const int code = run_cli("predict --x " + toy.x_csv + " --y " + toy.y_csv + " --new-x " +
                           new_csv + " --horizons 1,2 --k-min 1 --k-max 3 --out " + out);
  CHECK(code == 0);
  const std::string table = fregls::read_text_file(out + "/predictions.csv");
  CHECK(table.find("horizon") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);  // header + 2 horizons
}

TEST_CASE("simulate is reproducible byte for byte") {
  TempDir dir("sim");
  const std::string base = " simulate --scenario a --snr 0.1 --phi 0.6 --n 40 --replicas 4"
                           " --k-min 1 --k-max 3 --grid-size 31 --horizons 1,2 --seed 99 --out ";
  CHECK(run_cli(base + dir.file("a")) == 0);
  CHECK(run_cli(base + dir.file("b")) == 0);
  for (const char* name : {"table1_selected_k.csv", "table2_beta_mse.csv", "table3_phi_mse.csv",
                           "table4_mspe.csv", "replicas.csv", "manifest.json"}) {
    const std::string a = fregls::read_text_file(dir.file("a") + "/" + name);
    const std::string b = fregls::read_text_file(dir.file("b") + "/" + name);
    CHECK(a == b);
    CHECK_FALSE(a.empty());
  }

  SUBCASE("a different seed changes the tables") {
    CHECK(run_cli(" simulate --scenario a --snr 0.1 --phi 0.6 --n 40 --replicas 4"
                  " --k-min 1 --k-max 3 --grid-size 31 --horizons 1,2 --seed 100 --out " +
                  dir.file("c")) == 0);
    CHECK(fregls::read_text_file(dir.file("a") + "/table2_beta_mse.csv") !=
          fregls::read_text_file(dir.file("c") + "/table2_beta_mse.csv"));
  }

  SUBCASE("invalid phi is rejected up front") {
    CHECK(run_cli(" simulate --phi 1.2 --seed 1 --out " + dir.file("d")) == 2);
  }

  SUBCASE("the seed is mandatory") {
    CHECK(run_cli(" simulate --phi 0.5 --out " + dir.file("e")) == 2);
  }

  SUBCASE("a key=value config file stands in for flags") {
    const std::string conf = dir.file("sim.conf");
    fregls::write_text_file(conf,
                            "scenario=a\n"
                            "snr=0.1\n"
                            "phi=0.6\n"
                            "n=40\n"
                            "replicas=4\n"
                            "k-min=1\n"
                            "k-max=3\n"
                            "grid-size=31\n"
                            "horizons=1,2\n"
                            "seed=99\n"
                            "# trailing comment line\n"
                            "out=" + dir.file("via_config") + "\n");
    CHECK(run_cli("simulate --config " + conf) == 0);
    // identical settings through flags produce byte-identical tables
    CHECK(fregls::read_text_file(dir.file("via_config") + "/table4_mspe.csv") ==
          fregls::read_text_file(dir.file("a") + "/table4_mspe.csv"));

    CHECK(run_cli("simulate --config " + dir.file("nope.conf")) == 2);
  }
}

TEST_CASE("dcor screening table") {
  TempDir dir("dcor");
  const fregls::Grid grid = fregls::Grid::uniform(0.0, 1.0, 21);
  const fregls::FunctionalSample x = fregls::simulate_wiener(40, grid, 5);
  const std::string x_csv = dir.file("x.csv");
  write_wide_sample(x_csv, x);
  const Eigen::VectorXd y = x.values.col(20);
  const std::string y_csv = dir.file("y.csv");
  write_scalar(y_csv, y);

  const std::string out = dir.file("out");
  CHECK(run_cli("dcor --functional X=" + x_csv + " --response y=" + y_csv + " --out " + out) ==
        0);
  const std::string table = fregls::read_text_file(out + "/screening.csv");
  CHECK(table.find("R,X,y") == 0);
  CHECK(table.find("X,1") != std::string::npos);

  SUBCASE("sample size mismatch exits with 2") {
    const std::string y_short = dir.file("y_short.csv");
    write_scalar(y_short, y.head(10));
    CHECK(run_cli("dcor --functional X=" + x_csv + " --response y=" + y_short + " --out " +
                  dir.file("o2")) == 2);
  }
}

TEST_CASE("roll evaluates a synthetic panel end to end") {
  TempDir dir("roll");
  fregls::SyntheticPanelConfig pcfg;
  pcfg.n_groups = 2;
  pcfg.weeks = 58;
  pcfg.grid_size = 15;
  pcfg.phi = 0.8;
  pcfg.seed = 31;
  const fregls::Panel panel = fregls::make_synthetic_panel(pcfg);
  const std::string resp = dir.file("resp.csv");
  const std::string cov = dir.file("cov.csv");
  write_panel_files(panel, resp, cov);

  const std::string out = dir.file("out");
  const int code = run_cli("roll --response " + resp + " --covariate X=" + cov +
                           " --set X --n-train 45 --horizons 1 --origins 4 --k-min 1 --k-max 2"
                           " --seed 3 --out " + out);
  CHECK(code == 0);
  const std::string table = fregls::read_text_file(out + "/rolling_mspe.csv");
  CHECK(table.find("covariates,flm_h1,fgls_h1") == 0);
  CHECK(std::filesystem::exists(out + "/manifest.json"));
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_tests <path-to-fregls-binary> [doctest args]\n");
    return 1;
  }
  g_binary = argv[1];
  std::vector<char*> args;
  args.push_back(argv[0]);
  for (int i = 2; i < argc; ++i) args.push_back(argv[i]);
  doctest::Context context(static_cast<int>(args.size()), args.data());
  return context.run();
}
