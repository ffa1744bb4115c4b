#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

const char* kCli = ADVI_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = std::string(kCli) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("advi_cli_tests_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

const char* kCounts = R"({"x": [0, 1, 2, 1, 0, 3, 1, 2]})";

std::string fit_cmd(const fs::path& data, const fs::path& out,
                    const fs::path& diag, const std::string& extra = "") {
  return "fit weibull_poisson --data " + data.string() + " --output " +
         out.string() + " --diagnostic " + diag.string() +
         " --seed 7 --max-iters 400 --samples 50 " + extra;
}

}  // namespace

TEST_CASE("fit writes samples and diagnostics") {
  const fs::path data = write_file("counts.json", kCounts);
  const fs::path out = work_dir() / "samples.csv";
  const fs::path diag = work_dir() / "diag.csv";
  REQUIRE(run(fit_cmd(data, out, diag)) == 0);

  const auto sample_lines = lines_of(slurp(out));
  REQUIRE(sample_lines.size() == 51);  // header + requested draws
  CHECK(sample_lines[0] == "theta.1");
  for (std::size_t i = 1; i < sample_lines.size(); ++i) {
    CHECK(std::stod(sample_lines[i]) > 0.0);  // positive by construction
  }

  const auto diag_lines = lines_of(slurp(diag));
  REQUIRE(diag_lines.size() >= 3);
  CHECK(diag_lines[0] == "iter,elapsed_seconds,elbo");
  CHECK(diag_lines[1].substr(0, 2) == "1,");
}

TEST_CASE("repeated runs are byte identical") {
  const fs::path data = write_file("counts2.json", kCounts);
  const fs::path out1 = work_dir() / "s1.csv";
  const fs::path out2 = work_dir() / "s2.csv";
  const fs::path d1 = work_dir() / "d1.csv";
  const fs::path d2 = work_dir() / "d2.csv";
  REQUIRE(run(fit_cmd(data, out1, d1)) == 0);
  REQUIRE(run(fit_cmd(data, out2, d2)) == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(slurp(d1) == slurp(d2));

  // The thread count must not change a single byte either.
  const fs::path out4 = work_dir() / "s4.csv";
  const fs::path d4 = work_dir() / "d4.csv";
  REQUIRE(run(fit_cmd(data, out4, d4, "--threads 4 --grad-samples 4")) == 0);
  const fs::path out1t = work_dir() / "s1t.csv";
  const fs::path d1t = work_dir() / "d1t.csv";
  REQUIRE(run(fit_cmd(data, out1t, d1t, "--threads 1 --grad-samples 4")) == 0);
  CHECK(slurp(out4) == slurp(out1t));
  CHECK(slurp(d4) == slurp(d1t));
}

TEST_CASE("distinct exit codes per failure class") {
  const fs::path data = write_file("counts3.json", kCounts);
  const fs::path out = work_dir() / "unused.csv";
  const fs::path diag = work_dir() / "unused_diag.csv";

  SUBCASE("unknown model") {
    CHECK(run("fit no_such_model --data " + data.string()) == 2);
  }
  SUBCASE("missing data file") {
    CHECK(run("fit weibull_poisson --data " +
              (work_dir() / "absent.json").string()) == 3);
  }
  SUBCASE("malformed data file") {
    const fs::path bad = write_file("bad.json", "this is not json");
    CHECK(run("fit weibull_poisson --data " + bad.string()) == 3);
  }
  SUBCASE("schema mismatch") {
    CHECK(run("fit gmm --data " + data.string()) == 3);
  }
  SUBCASE("unwritable output path") {
    CHECK(run(fit_cmd(data, "/nonexistent-dir/out.csv", diag)) == 4);
  }
  SUBCASE("bad eta value") {
    CHECK(run(fit_cmd(data, out, diag, "--eta banana")) == 5);
    CHECK(run(fit_cmd(data, out, diag, "--eta -3")) == 5);
  }
  SUBCASE("minibatch larger than the data") {
    CHECK(run(fit_cmd(data, out, diag, "--minibatch 999")) == 5);
  }
}

TEST_CASE("saved parameters can be reloaded by the eval commands") {
  const fs::path data = write_file("counts4.json", kCounts);
  const fs::path out = work_dir() / "s5.csv";
  const fs::path diag = work_dir() / "d5.csv";
  const fs::path params = work_dir() / "params.json";
  REQUIRE(run(fit_cmd(data, out, diag, "--save-params " + params.string())) ==
          0);
  CHECK(fs::exists(params));

  const fs::path cov = work_dir() / "cov.csv";
  REQUIRE(run("eval covariance weibull_poisson --data " + data.string() +
              " --params " + params.string() + " --samples 200 --output " +
              cov.string()) == 0);
  const auto cov_lines = lines_of(slurp(cov));
  REQUIRE(cov_lines.size() == 2);  // header + the 1x1 covariance row
  CHECK(cov_lines[0] == "theta.1");
  CHECK(std::stod(cov_lines[1]) > 0.0);

  SUBCASE("parameters are tied to their model") {
    CHECK(run("eval covariance gmm --data " + data.string() + " --params " +
              params.string() + " --output " + cov.string()) != 0);
  }
}

TEST_CASE("held-out evaluation reports one summary row") {
  const fs::path data = write_file("train.json", kCounts);
  const fs::path held = write_file("held.json", R"({"x": [1, 2, 0]})");
  const fs::path out = work_dir() / "predictive.csv";
  REQUIRE(run("eval predictive weibull_poisson --data " + data.string() +
              " --held-out " + held.string() + " --seed 7 --max-iters 400" +
              " --samples 200 --output " + out.string()) == 0);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "held_out_points,samples,avg_log_predictive");
  CHECK(lines[1].substr(0, 6) == "3,200,");
  const double value = std::stod(lines[1].substr(6));
  CHECK(std::isfinite(value));
  CHECK(value < 0.0);
}

TEST_CASE("variance study runs end to end") {
  const fs::path out = work_dir() / "variance.csv";
  REQUIRE(run("eval variance_study --fixture gamma_10_10 --replications 200"
              " --seed 3 --output " +
              out.string()) == 0);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "fixture,estimator,m,coordinate,variance");
  CHECK(lines[1].rfind("gamma_10_10,advi,", 0) == 0);
}
