#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "clpaths_cli_test";

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CLPATHS_CLI + "\" " + args + " > \"" + (kScratch / "stdout.txt").string() +
                          "\" 2> \"" + (kScratch / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = kScratch / name;
  std::ofstream(p) << text;
  return p;
}

struct Scratch {
  Scratch() {
    fs::remove_all(kScratch);
    fs::create_directories(kScratch);
  }
};

}  // namespace

TEST_CASE("cli exit codes") {
  Scratch s;
  const std::string out = (kScratch / "out").string();
  const fs::path ok = write_config("ok.json", R"({"density": {"mode": "line", "exp_poly": {"2": [-0.5, 0]}},
    "observables": ["x^2"], "output": {"dir": ")" + out + R"("}})");
  CHECK(run_cli("analyze " + ok.string()) == 0);
  CHECK(fs::exists(fs::path(out) / "config.resolved.json"));

  CHECK(run_cli("analyze " + (kScratch / "missing.json").string()) == 2);
  CHECK(run_cli("analyze " + write_config("bad.json", "{\"density\": ").string()) == 2);
  CHECK(slurp(kScratch / "stderr.txt").find("malformed JSON") != std::string::npos);
  CHECK(run_cli("analyze " + write_config("unknown.json", R"({"density": {"mode": "line",
    "exp_poly": {"2": [-0.5, 0]}}, "colour": 1})").string()) == 2);
  CHECK(run_cli("frobnicate " + ok.string()) == 2);

  const fs::path grow = write_config("grow.json", R"({"density": {"mode": "line", "exp_poly": {"2": [0.5, 0]}},
    "observables": ["x"], "output": {"dir": ")" + out + R"("},
    "paths": [{"label": "R", "start": {"type": "infinity", "angle": 3.141592653589793},
               "end": {"type": "infinity", "angle": 0}}]})");
  CHECK(run_cli("integrate " + grow.string()) == 1);

  CHECK(run_cli("--version") == 0);
  CHECK(slurp(kScratch / "stdout.txt").find("1.0.0") != std::string::npos);

  fs::create_directories(kScratch / "empty");
  CHECK(run_cli("plotdata " + ok.string() + " --run " + (kScratch / "empty").string()) == 2);
}

TEST_CASE("simulate then plotdata: grid density matches the raw histogram") {
  Scratch s;
  const std::string run = (kScratch / "run").string(), plot = (kScratch / "plot").string();
  const std::string body = R"("density": {"mode": "line", "exp_poly": {"2": [-0.5, 0]}}, "observables": ["x^2"],
    "cl": {"n_walkers": 4, "dt": 1e-3, "t_burn": 1, "t_measure": 20, "meas_interval": 0.1,
           "histogram": {"nx": 16, "ny": 8, "replicas": 2}, "trace_walkers": 1, "trace_interval": 1},)";
  const fs::path sim = write_config("sim.json", "{" + body + R"("output": {"dir": ")" + run + R"("}})");
  const fs::path pd = write_config("pd.json", "{" + body + R"("output": {"dir": ")" + plot + R"("}})");
  REQUIRE(run_cli("simulate " + sim.string()) == 0);
  REQUIRE(run_cli("plotdata " + pd.string() + " --run " + run) == 0);

  std::ifstream hj(fs::path(run) / "histogram.json");
  const auto h = nlohmann::json::parse(hj).at("result");
  const int nx = h.at("nx"), ny = h.at("ny");
  const double dx = (h.at("x_hi").get<double>() - h.at("x_lo").get<double>()) / nx;
  const double dy = (h.at("y_hi").get<double>() - h.at("y_lo").get<double>()) / ny;
  std::vector<double> counts(static_cast<std::size_t>(nx * ny));
  std::ifstream bin(fs::path(run) / "histogram.bin", std::ios::binary);
  bin.read(reinterpret_cast<char*>(counts.data()), static_cast<std::streamsize>(counts.size() * sizeof(double)));
  REQUIRE(bin);
  double total = 0.0;
  for (double c : counts) total += c;
  REQUIRE(total > 0);

  std::ifstream grid(fs::path(plot) / "grid.csv");
  std::string line;
  int rows = 0;
  double worst = 0.0;
  bool header = true;
  while (std::getline(grid, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      CHECK(line == "ix,iy,x,y,P,vx_mean,vy_mean");
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string f;
    std::vector<double> v;
    while (std::getline(ss, f, ',')) v.push_back(std::stod(f));
    REQUIRE(v.size() == 7);
    const auto k = static_cast<std::size_t>(v[1]) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(v[0]);
    worst = std::max(worst, std::abs(v[4] - counts[k] / (total * dx * dy)));
    ++rows;
  }
  CHECK(rows == nx * ny);
  CHECK(worst < 1e-12);
  CHECK(fs::exists(fs::path(plot) / "paths.csv"));
}

TEST_CASE("fit reads the records of a previous run") {
  Scratch s;
  const std::string run = (kScratch / "run").string(), fitdir = (kScratch / "fit").string();
  const std::string body = R"j("density": {"mode": "line", "poly_factors": [{"a": [0, 1], "alpha": 2}],
                                "exp_poly": {"2": [-1.6, 0]}},
    "observables": ["x", "x^2", "exp(ix)"],
    "cl": {"n_walkers": 4, "dt": 1e-3, "t_burn": 1, "t_measure": 20, "histogram": {"enabled": false}},)j";
  const fs::path sim = write_config("sim.json", "{" + body + R"("output": {"dir": ")" + run + R"("}})");
  const fs::path fc = write_config("fit.json", "{" + body + R"("output": {"dir": ")" + fitdir + R"("}})");
  REQUIRE(run_cli("simulate " + sim.string()) == 0);
  REQUIRE(run_cli("fit " + fc.string() + " --run " + run) == 0);
  std::ifstream in(fs::path(fitdir) / "fit.json");
  const auto doc = nlohmann::json::parse(in);
  const auto& coef = doc.at("result").at("fit").at("coefficients");
  REQUIRE(coef.size() == 2);
  double re = 0.0, im = 0.0;
  for (const auto& c : coef) {
    re += c.at("value")[0].get<double>();
    im += c.at("value")[1].get<double>();
  }
  CHECK(std::abs(re - 1.0) < 1e-12);
  CHECK(std::abs(im) < 1e-12);
}
