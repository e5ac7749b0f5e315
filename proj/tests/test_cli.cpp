#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "kbreg/commands.hpp"

using namespace kbreg;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("kbreg_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
  }
};

std::string small_dataset() {
  std::string csv = "x,y\n";
  std::mt19937 gen(4);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 12; ++i) {
    const double x = -3.0 + 0.5 * i;
    csv += format_double(x) + "," + format_double(std::sin(x) + 0.1 * nd(gen)) + "\n";
  }
  return csv;
}

RunConfig make_rc(const std::string& command, const std::string& config_text,
                  const std::string& data_path) {
  RunConfig rc;
  rc.command = command;
  rc.config = Config::from_string(config_text);
  rc.data_path = data_path;
  return rc;
}

}  // namespace

TEST_CASE("ingest_csv happy paths") {
  TempDir tmp;
  const std::string p = tmp.file("d.csv", "x,y\n1,2\n3,4\n5,6\n");
  const Dataset d = ingest_csv(p);
  CHECK(d.size() == 3);
  CHECK(d.dim() == 1);
  CHECK(d.outputs(2) == 6.0);

  const std::string p2 = tmp.file("d2.csv", "x1,x2,y\n1,2,3\n4,5,6\n");
  const Dataset d2 = ingest_csv(p2);
  CHECK(d2.dim() == 2);
  CHECK(d2.inputs(1, 1) == 5.0);
}

TEST_CASE("ingest_csv rejects malformed input with located errors") {
  TempDir tmp;
  try {
    ingest_csv(tmp.file("blank.csv", "x,y\n1,2\n\n3,4\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    ingest_csv(tmp.file("text.csv", "x,y\n1,two\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("column 2") != std::string::npos);
  }
  CHECK_THROWS_AS(ingest_csv(tmp.file("nan.csv", "x,y\n1,nan\n")), ParseError);
  CHECK_THROWS_AS(ingest_csv(tmp.file("inf.csv", "x,y\n1,inf\n")), ParseError);
  CHECK_THROWS_AS(ingest_csv(tmp.file("noy.csv", "x,z\n1,2\n")), ParseError);
  CHECK_THROWS_AS(ingest_csv(tmp.file("empty.csv", "x,y\n")), EmptyDataset);
}

TEST_CASE("config parsing") {
  const Config cfg = Config::from_string(
      "# comment\nmodel = gp\nkernel.family = squared-exp-general\nkernel.a = 1.5\nseed = 7\n");
  CHECK(cfg.str("model") == "gp");
  CHECK(cfg.num("kernel.a") == 1.5);
  CHECK(cfg.uint_or("seed", 0) == 7);
  CHECK(cfg.section("kernel").size() == 2);
  CHECK(!cfg.digest.empty());

  CHECK_THROWS_AS(Config::from_string("novalue\n"), ConfigError);
  CHECK_THROWS_AS(Config::from_string("a = 1\na = 2\n"), ConfigError);
}

TEST_CASE("predict command produces the expected columns") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv", small_dataset());
  const std::string cfg =
      "model = gp\nkernel.family = squared-exp-general\nkernel.a = 1\nkernel.lambda = 2\n"
      "noise_var = 0.25\ngrid.from = -3\ngrid.to = 3\ngrid.count = 11\n";
  const CommandResult result = run_command(make_rc("predict", cfg, data));
  CHECK(result.table.columns == std::vector<std::string>{"x", "mean", "variance"});
  CHECK(result.table.rows() == 11);
  CHECK(result.table.metadata.count("config_digest") == 1);
}

TEST_CASE("smooth command writes a covariance sidecar") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv", small_dataset());
  const std::string cfg =
      "model = qgp\nkernel.family = squared-exp-general\nkernel.a = 1\nkernel.lambda = 2\n"
      "noise_var = 0.25\n";
  const CommandResult result = run_command(make_rc("smooth", cfg, data));
  CHECK(result.table.columns == std::vector<std::string>{"index", "mean", "variance"});
  REQUIRE(result.sidecars.size() == 1);
  CHECK(result.sidecars[0].first == ".cov.csv");
  CHECK(result.sidecars[0].second.rows() == 12);
}

TEST_CASE("compare gp-qgp reports vanishing mean deltas") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv", small_dataset());
  const std::string cfg =
      "model = gp\nkernel.family = squared-exp-general\nkernel.a = 1\nkernel.lambda = 2\n"
      "noise_var = 0.25\ncompare.pair = gp-qgp\ngrid.from = -4\ngrid.to = 4\ngrid.count = 21\n";
  const CommandResult result = run_command(make_rc("compare", cfg, data));
  const double max_delta = std::stod(result.table.metadata.at("max_abs_mean_delta"));
  CHECK(max_delta <= 1e-9);
  CHECK(result.table.rows() == 22);  // 21 points + summary row
}

TEST_CASE("compare kalman-gp reports vanishing smoothing deltas") {
  TempDir tmp;
  std::string csv = "t,y\n";
  std::mt19937 gen(9);
  std::normal_distribution<double> nd;
  for (int t = 1; t <= 30; ++t) csv += std::to_string(t) + "," + format_double(nd(gen)) + "\n";
  const std::string data = tmp.file("series.csv", csv);
  const std::string cfg =
      "model = kalman\nkalman.gamma = 0.8\nkalman.process_var = 0.36\nnoise_var = 0.25\n"
      "compare.pair = kalman-gp\n";
  const CommandResult result = run_command(make_rc("compare", cfg, data));
  CHECK(std::stod(result.table.metadata.at("max_abs_mean_delta")) <= 1e-8);
  CHECK(std::stod(result.table.metadata.at("max_abs_var_delta")) <= 1e-8);
}

TEST_CASE("kalman command emits the full track") {
  TempDir tmp;
  std::string csv = "t,y\n1,0.5\n2,-0.3\n3,0.9\n";
  const std::string data = tmp.file("series.csv", csv);
  const std::string cfg = "model = kalman\nkalman.gamma = 0.5\nkalman.process_var = 0.75\nnoise_var = 1\n";
  const CommandResult result = run_command(make_rc("kalman", cfg, data));
  CHECK(result.table.columns ==
        std::vector<std::string>{"t", "mu_pred", "var_pred", "mu_filt", "var_filt", "mu_smooth",
                                 "var_smooth"});
  CHECK(result.table.rows() == 3);

  // non-integer timestamps are rejected
  const std::string bad = tmp.file("bad.csv", "t,y\n1,0.5\n2.5,-0.3\n3,0.9\n");
  CHECK_THROWS_AS(run_command(make_rc("kalman", cfg, bad)), ConfigError);
}

TEST_CASE("sample command is byte-deterministic under a fixed seed") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv", small_dataset());
  const std::string cfg =
      "model = gp\nkernel.family = squared-exp-general\nkernel.a = 1\nkernel.lambda = 2\n"
      "noise_var = 0.25\ngrid.from = -2\ngrid.to = 2\ngrid.count = 5\n"
      "sample.count = 6\nseed = 99\n";
  const CommandResult a = run_command(make_rc("sample", cfg, data));
  const CommandResult b = run_command(make_rc("sample", cfg, data));
  CHECK(a.table.to_csv() == b.table.to_csv());
  CHECK(a.table.columns.size() == 7);  // x + 6 draws

  RunConfig rc = make_rc("sample", cfg, data);
  rc.seed = 100;  // the --seed override changes the draws
  const CommandResult c = run_command(rc);
  CHECK(a.table.to_csv() != c.table.to_csv());
  CHECK(c.table.metadata.at("seed") == "100");
}

TEST_CASE("learn command records a non-increasing trace") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv", small_dataset());
  const std::string cfg =
      "model = gp\nkernel.family = squared-exp-general\nkernel.a = 1\nkernel.lambda = 1\n"
      "noise_var = 0.5\nlearn.params = kernel.lambda,noise_var\nlearn.max_iter = 60\n";
  const CommandResult result = run_command(make_rc("learn", cfg, data));
  const auto& cols = result.table.columns;
  CHECK(std::find(cols.begin(), cols.end(), "objective") != cols.end());
  const Vector& objective = result.table.data.back();
  for (Index i = 1; i < objective.size(); ++i) CHECK(objective(i) <= objective(i - 1));
  CHECK(result.table.metadata.count("learned.kernel.lambda") == 1);
}

TEST_CASE("relevance command prunes irrelevant bases") {
  TempDir tmp;
  std::string csv = "x,y\n";
  for (int i = 0; i < 15; ++i) {
    const double x = i * 0.7;
    const double y = 2.0 * std::exp(-(x - 3.5) * (x - 3.5) / 0.5);
    csv += format_double(x) + "," + format_double(y) + "\n";
  }
  const std::string data = tmp.file("d.csv", csv);
  const std::string cfg =
      "model = rvm\nkernel.family = squared-exp-general\nkernel.a = 1\nkernel.lambda = 0.5\n"
      "noise_var = 0.001\nprior.variance = 1\nrelevance.max_iter = 20\n";
  const CommandResult result = run_command(make_rc("relevance", cfg, data));
  CHECK(result.table.rows() == 15);
  const long surviving = std::stol(result.table.metadata.at("surviving"));
  CHECK(surviving < 15);
  CHECK(surviving >= 1);
}

TEST_CASE("smoother predict through the cli") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv", "x,y\n0,1\n1,3\n2,7\n");
  const std::string cfg =
      "model = smoother\nsmoother.method = lagrange\ngrid.from = 3\ngrid.to = 3\ngrid.count = 1\n";
  const CommandResult result = run_command(make_rc("predict", cfg, data));
  CHECK(result.table.data[1](0) == doctest::Approx(13.0));
}

TEST_CASE("errors carry machine-readable codes") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv", small_dataset());
  try {
    run_command(make_rc("predict",
                        "model = gp\nkernel.family = nope\ngrid.from = 0\ngrid.to = 1\ngrid.count = 2\n",
                        data));
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.code() == "DOMAIN_ERROR");
  }
  try {
    run_command(make_rc("warp", "model = gp\n", data));
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == "CONFIG_ERROR");
  }
}

TEST_CASE("table csv round trip formatting") {
  TableOutput t;
  Vector v(2);
  v << 1.0 / 3.0, 2.0;
  t.add_column("a", v);
  t.metadata["k"] = "v";
  const std::string csv = t.to_csv();
  CHECK(csv.find("# k = v\n") != std::string::npos);
  CHECK(csv.find("0.33333333333333331") != std::string::npos);
}
