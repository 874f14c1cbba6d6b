#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "beamcap/cli.hpp"
#include "beamcap/io_json.hpp"

using namespace beamcap;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "beamcap_cli_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_reference_channel() {
  const auto path = temp_dir() / "channel.json";
  std::ofstream f(path);
  f << R"({"gains": [[3,0],[1,0],[0.5,0],[0.1,0]]})";
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("solve reports the certified transition-region solution") {
  const auto channel = write_reference_channel();
  const auto r = run_cli({"solve", "--channel", channel.string(), "--pa", "1", "--tp", "2"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("k").get<int>() == 1);
  CHECK(j.at("capacity_nats").get<double>() == doctest::Approx(2.8900930133).epsilon(1e-9));
  CHECK(j.at("kkt").at("pass").get<bool>());
}

TEST_CASE("solve hits equal-amplitude signaling for a large total cap") {
  const auto channel = write_reference_channel();
  const auto r = run_cli({"solve", "--channel", channel.string(), "--pa", "1", "--tp", "8"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("k").get<int>() == 4);
  CHECK(j.at("capacity_nats").get<double>() == doctest::Approx(3.0982888619).epsilon(1e-9));
  for (const auto& a : j.at("amplitudes")) {
    CHECK(a.get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("solve on a single antenna") {
  const auto path = temp_dir() / "single.json";
  {
    std::ofstream f(path);
    f << R"({"gains": [[2,0]]})";
  }
  const auto r = run_cli({"solve", "--channel", path.string(), "--pa", "1", "--tp", "3"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("capacity_nats").get<double>() == doctest::Approx(std::log1p(4.0)).epsilon(1e-12));
}

TEST_CASE("solve accepts polar channels and heterogeneous caps") {
  const auto path = temp_dir() / "polar.json";
  {
    std::ofstream f(path);
    f << R"({"magnitudes": [3, 1], "phases": [0.4, -1.0]})";
  }
  const auto r = run_cli(
      {"solve", "--channel", path.string(), "--pa-list", "1,4", "--tp", "3", "--bits"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("k").get<int>() == 1);
  CHECK(j.at("capacity_bits").get<double>() ==
        doctest::Approx(3.019706646527570 / std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("malformed input exits with code 1 and a message") {
  const auto r = run_cli({"solve", "--channel", "/nonexistent.json", "--pa", "1", "--tp", "2"});
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
  const auto path = temp_dir() / "broken.json";
  {
    std::ofstream f(path);
    f << R"({"gains": "oops"})";
  }
  CHECK(run_cli({"solve", "--channel", path.string(), "--pa", "1", "--tp", "2"}).code == 1);
  // budget list length mismatch
  const auto ch = write_reference_channel();
  CHECK(run_cli({"solve", "--channel", ch.string(), "--pa-list", "1,1", "--tp", "2"}).code == 1);
  // missing subcommand
  CHECK(run_cli({}).code == 1);
}

TEST_CASE("help exits cleanly") {
  const auto r = run_cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("solve") != std::string::npos);
}

TEST_CASE("sweep writes the capacity and amplitude CSV") {
  const auto channel = write_reference_channel();
  const auto out = temp_dir() / "sweep.csv";
  const auto r = run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-start",
                          "0.1", "--tp-stop", "6.0", "--tp-step", "0.1", "--out", out.string()});
  CHECK(r.code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("P_T,C_joint,C_MRT,C_EGT,C_approx,k,a_1,a_2,a_3,a_4") != std::string::npos);

  // parse rows: k non-decreasing, joint capacity below the bound on every row
  std::istringstream lines(csv);
  std::string line;
  long prev_k = -1;
  std::size_t rows = 0;
  bool saw_k[5] = {false, false, false, false, false};
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'P') continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 10);
    const double c_joint = v[1], c_mrt = v[2], c_egt = v[3], c_approx = v[4];
    const long k = static_cast<long>(v[5]);
    CHECK(c_joint <= std::min(c_mrt, c_egt) + 1e-12);
    CHECK(c_approx == doctest::Approx(std::min(c_mrt, c_egt)).epsilon(1e-12));
    CHECK(k >= prev_k);
    prev_k = k;
    saw_k[k] = true;
    ++rows;
  }
  CHECK(rows == 60);
  for (int k = 0; k <= 4; ++k) CHECK(saw_k[k]);
}

TEST_CASE("sweep output is byte-stable across runs and worker counts") {
  const auto channel = write_reference_channel();
  const auto out1 = temp_dir() / "sweep1.csv";
  const auto out2 = temp_dir() / "sweep2.csv";
  setenv("BEAMCAP_THREADS", "1", 1);
  CHECK(run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-list",
                 "0.5,1,1.5,2,3,4,5", "--out", out1.string()})
            .code == 0);
  setenv("BEAMCAP_THREADS", "4", 1);
  CHECK(run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-list",
                 "0.5,1,1.5,2,3,4,5", "--out", out2.string()})
            .code == 0);
  unsetenv("BEAMCAP_THREADS");
  CHECK(slurp(out1) == slurp(out2));
}

TEST_CASE("sweep with heterogeneous caps") {
  const auto path = temp_dir() / "two.json";
  {
    std::ofstream f(path);
    f << R"({"gains": [[3,0],[1,0]]})";
  }
  const auto out = temp_dir() / "het.csv";
  const auto r = run_cli({"sweep", "--channel", path.string(), "--pa-list", "1,4", "--tp-list",
                          "1,3,5,6", "--out", out.string()});
  CHECK(r.code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("# pa: 1,4") != std::string::npos);
  // bad caps exit 1 instead of crashing a worker
  CHECK(run_cli({"sweep", "--channel", path.string(), "--pa-list", "1,-4", "--tp-list", "1,2",
                 "--out", out.string()})
            .code == 1);
  CHECK(run_cli({"sweep", "--channel", path.string(), "--pa", "1", "--tp-list", "-1,2", "--out",
                 out.string()})
            .code == 1);
}

TEST_CASE("sweep rejects degenerate grids") {
  const auto channel = write_reference_channel();
  const auto out = temp_dir() / "bad.csv";
  CHECK(run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-list", "2.0",
                 "--out", out.string()})
            .code == 1);
  CHECK(run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-list", "2.0,1.0",
                 "--out", out.string()})
            .code == 1);
  CHECK(run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-start", "1",
                 "--tp-stop", "0.5", "--tp-step", "0.1", "--out", out.string()})
            .code == 1);
}

TEST_CASE("sweep can emit a chart") {
  const auto channel = write_reference_channel();
  const auto out = temp_dir() / "chart.csv";
  const auto svg = temp_dir() / "chart.svg";
  CHECK(run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-list", "1,2,3,4",
                 "--out", out.string(), "--svg", svg.string()})
            .code == 0);
  CHECK(slurp(svg).find("<svg") != std::string::npos);
}

TEST_CASE("verify passes and reports worst residuals") {
  const auto r =
      run_cli({"verify", "--instances", "40", "--seed", "0", "--max-m", "6", "--oracle-grid"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("worst_snr_gap").get<double>() <= 1e-6);
  CHECK(j.at("negative_controls").at("caught") == j.at("negative_controls").at("constructed"));
  CHECK(j.at("grid").at("worst_excess").get<double>() <= 1e-9);
}

TEST_CASE("sweep number format is frozen at 12 significant digits") {
  const auto channel = write_reference_channel();
  const auto out = temp_dir() / "golden.csv";
  CHECK(run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-list", "0.1,2",
                 "--out", out.string()})
            .code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("0.1,0.706063405826,0.706063405826,3.09828886188,0.706063405826,0,"
                 "0.936585811582,0.312195270527,0.156097635264,0.0312195270527\n") !=
        std::string::npos);
  CHECK(csv.find("2,2.89009301328,3.06898273529,3.09828886188,3.06898273529,1,"
                 "0.707106781187,0.629940788349,0.314970394174,0.0629940788349\n") !=
        std::string::npos);
}

TEST_CASE("verify reports and serializes failures under an impossible tolerance") {
  // The closed form and the maximizer agree to ~1e-15; a 1e-22 demand must
  // fail, exit 2, and serialize an instance for replay.
  const auto r = run_cli({"verify", "--instances", "5", "--seed", "0", "--tol", "1e-22"});
  CHECK(r.code == 2);
  const json j = json::parse(r.out);
  CHECK_FALSE(j.at("pass").get<bool>());
  CHECK(j.at("failing_check").get<std::string>() == "oracle");
  REQUIRE(j.contains("failing_instance"));

  const auto path = temp_dir() / "failing.json";
  {
    std::ofstream f(path);
    f << j.at("failing_instance").dump();
  }
  const auto replay = run_cli({"verify", "--replay", path.string()});
  CHECK(replay.code == 0);  // default tolerance: the instance itself is sound
  const json jr = json::parse(replay.out);
  CHECK(jr.at("instance") == j.at("failing_instance"));
}

TEST_CASE("verify check-selection flags") {
  const auto oracle_only = run_cli({"verify", "--instances", "10", "--seed", "2", "--oracle"});
  CHECK(oracle_only.code == 0);
  const json jo = json::parse(oracle_only.out);
  CHECK(jo.at("negative_controls").at("constructed").get<int>() == 0);
  const auto kkt_only = run_cli({"verify", "--instances", "10", "--seed", "2", "--kkt"});
  CHECK(kkt_only.code == 0);
  const json jk = json::parse(kkt_only.out);
  CHECK(jk.at("worst_snr_gap").get<double>() == 0.0);
  CHECK(jk.at("negative_controls").at("constructed").get<int>() > 0);
}

TEST_CASE("verify replays a serialized instance") {
  const auto path = temp_dir() / "replay.json";
  {
    std::ofstream f(path);
    f << R"({"channel": {"gains": [[3,0],[1,0]]}, "tp": 3.0, "pa_list": [1.0, 4.0]})";
  }
  const auto r = run_cli({"verify", "--replay", path.string()});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("solution").at("k").get<int>() == 1);
}

TEST_CASE("full verification sweep passes at the documented scale") {
  const auto r = run_cli({"verify", "--instances", "1000", "--seed", "0", "--max-m", "8"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("pass").get<bool>());
  CHECK(j.at("worst_snr_gap").get<double>() <= 1e-6);
  CHECK(j.at("instances").get<int>() == 1000);
}

TEST_CASE("bits flag rescales capacities") {
  const auto channel = write_reference_channel();
  const auto out = temp_dir() / "bits.csv";
  CHECK(run_cli({"sweep", "--channel", channel.string(), "--pa", "1", "--tp-list", "1,2",
                 "--out", out.string(), "--bits"})
            .code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("# units: bits") != std::string::npos);
  std::istringstream lines(csv);
  std::string line;
  while (std::getline(lines, line) && (line.empty() || line[0] == '#' || line[0] == 'P')) {
  }
  std::istringstream cells(line);
  std::string cell;
  std::getline(cells, cell, ',');
  std::getline(cells, cell, ',');
  CHECK(std::stod(cell) == doctest::Approx(2.421256622711544 / std::log(2.0)).epsilon(1e-9));

  const auto erg = run_cli({"ergodic", "--model", "iid", "--rx", "1", "--tx", "1", "--pa", "1",
                            "--tp", "1", "--samples", "1000", "--seed", "0", "--bits"});
  CHECK(erg.code == 0);
  CHECK(json::parse(erg.out).contains("capacity_bits"));
}

TEST_CASE("ergodic estimate with JSON output") {
  const auto r = run_cli({"ergodic", "--model", "iid", "--rx", "1", "--tx", "1", "--pa", "1",
                          "--tp", "1", "--samples", "20000", "--seed", "0"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("p_star").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("samples").get<std::size_t>() == 20000);
  CHECK(std::abs(j.at("capacity_nats").get<double>() - 0.5963473623) <=
        3.0 * j.at("std_error").get<double>());
}

TEST_CASE("ergodic output is byte-stable across worker counts") {
  const std::vector<std::string> args{"ergodic", "--model", "iid",     "--rx",   "2",
                                      "--tx",    "2",       "--pa",    "1",      "--tp",
                                      "2",       "--samples", "5000",  "--seed", "3"};
  setenv("BEAMCAP_THREADS", "1", 1);
  const auto a = run_cli(args);
  setenv("BEAMCAP_THREADS", "3", 1);
  const auto b = run_cli(args);
  unsetenv("BEAMCAP_THREADS");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("ergodic with a receive correlation matrix") {
  const auto path = temp_dir() / "rr.json";
  {
    std::ofstream f(path);
    f << R"([[[1,0],[0.4,0.1]],[[0.4,-0.1],[1,0]]])";
  }
  const auto r = run_cli({"ergodic", "--model", "semi", "--rr", path.string(), "--tx", "2",
                          "--pa", "1", "--tp", "2", "--samples", "2000", "--seed", "1"});
  CHECK(r.code == 0);
  // invalid matrix: exit 1
  const auto bad = temp_dir() / "rr_bad.json";
  {
    std::ofstream f(bad);
    f << R"([[[1,0],[2,0]],[[0.1,0],[1,0]]])";
  }
  CHECK(run_cli({"ergodic", "--model", "semi", "--rr", bad.string(), "--tx", "2", "--pa", "1",
                 "--tp", "2", "--samples", "2000"})
            .code == 1);
  CHECK(run_cli({"ergodic", "--model", "semi", "--tx", "2", "--pa", "1", "--tp", "2"}).code == 1);
}

TEST_CASE("ergodic dominance and counterexample modes") {
  const auto dom = run_cli({"ergodic", "--model", "iid", "--rx", "4", "--tx", "4", "--pa", "1",
                            "--tp", "4", "--samples", "4000", "--seed", "0", "--dominance"});
  CHECK(dom.code == 0);
  const json jd = json::parse(dom.out);
  CHECK(jd.at("first_wins_3sigma").get<bool>());

  const auto ce =
      run_cli({"ergodic", "--model", "txcorr", "--rx", "2", "--tx", "2", "--pa", "1", "--tp",
               "1", "--samples", "4000", "--seed", "0", "--counterexample"});
  CHECK(ce.code == 0);
  const json jc = json::parse(ce.out);
  CHECK(jc.at("first_wins_3sigma").get<bool>());
  CHECK(jc.at("concentrated").at("p_star").get<double>() == doctest::Approx(1.0));
  CHECK(jc.at("isotropic").at("p_star").get<double>() == doctest::Approx(0.5));
}
