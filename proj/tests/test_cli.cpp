#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "macrosup/dataio.hpp"
#include "reference_values.hpp"

// The CLI binary under test; the build passes its location in.
#ifndef MACROSUP_CLI_PATH
#error "MACROSUP_CLI_PATH must be defined"
#endif

namespace {

const std::string kWorkDir = "/tmp/macrosup_cli_tests";

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
  std::filesystem::create_directories(kWorkDir);
  static int counter = 0;
  const std::string tag = std::to_string(++counter);
  const std::string out_path = kWorkDir + "/stdout." + tag;
  const std::string err_path = kWorkDir + "/stderr." + tag;
  const std::string cmd = env + (env.empty() ? "" : " ") + MACROSUP_CLI_PATH +
                          " " + args + " >" + out_path + " 2>" + err_path;
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = (raw >= 0 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Ensures the scratch directory exists and holds a small simulated run pair.
struct Fixture {
  std::string x_file = kWorkDir + "/vac_x.qs";
  std::string p_file = kWorkDir + "/vac_p.qs";
  Fixture() {
    std::filesystem::create_directories(kWorkDir);
    static bool made = false;
    if (!made) {
      const auto rx = run_cli("simulate --vacuum --quadrature x "
                              "--count 20000 --seed 7 --out " + x_file);
      const auto rp = run_cli("simulate --vacuum --quadrature p "
                              "--count 20000 --seed 8 --out " + p_file);
      made = rx.exit_code == 0 && rp.exit_code == 0;
      REQUIRE(made);
    }
  }
};

double json_number(const std::string& text, const std::string& pointer) {
  const auto doc = nlohmann::json::parse(text);
  return doc.at(nlohmann::json::json_pointer(pointer)).get<double>();
}
}  // namespace

TEST_SUITE("command line") {
  TEST_CASE("analytic separation search on known states") {
    const auto r = run_cli("smax --vacuum");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "0.50929"));
    CHECK(r.err.empty());

    const auto j = run_cli("smax --squeezing-db -5.7 --purity 0.85 --json");
    CHECK(j.exit_code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["kind"] == "smax");
    CHECK(contains(doc["convention"].get<std::string>(), "shot-noise"));
    CHECK(std::fabs(doc["results"]["s_max"].get<double>() - ref::kSmax30mW) <
          2e-6);
    CHECK(doc["results"]["status"] == "ok");
    CHECK(doc["inputs"].contains("state"));

    // the magnitude spelling of the squeezing flag means the same state
    const auto m = run_cli(
        "smax --squeezing-db-mag 5.7 --purity 0.85 --json");
    CHECK(m.exit_code == 0);
    CHECK(json_number(m.out, "/results/s_max") ==
          doc["results"]["s_max"].get<double>());
  }

  TEST_CASE("simulate writes a readable series with its record") {
    Fixture fx;
    const auto series = macrosup::read_series(fx.x_file);
    CHECK(series.samples.size() == 20000);
    CHECK(series.quadrature == macrosup::Quadrature::x);
    CHECK(series.metadata.at("seed") == "7");
    CHECK(series.metadata.at("source") == "simulation");

    // binary encoding round trips through the same reader
    const std::string bin = kWorkDir + "/vac_bin.qs";
    const auto r = run_cli("simulate --vacuum --quadrature x --count 500 "
                           "--seed 7 --binary --out " + bin);
    CHECK(r.exit_code == 0);
    const auto b = macrosup::read_series(bin);
    CHECK(b.samples.size() == 500);
    for (std::size_t i = 0; i < 500; ++i)
      REQUIRE(b.samples[i] == series.samples[i]);

    // --json echoes a document with the sample digest
    const auto j = run_cli("simulate --vacuum --quadrature p --count 100 "
                           "--seed 3 --json --out " + kWorkDir + "/tmp_p.qs");
    CHECK(j.exit_code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["kind"] == "simulate");
    CHECK(contains(doc["results"]["digest"].get<std::string>(), "fnv1a64:"));
  }

  TEST_CASE("witness evaluation on simulated data") {
    Fixture fx;
    const auto r = run_cli("witness --x-file " + fx.x_file + " --p-file " +
                           fx.p_file + " --distance-s 0.5 --json");
    CHECK(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["kind"] == "witness");
    const double lhs = doc["results"]["lhs"].get<double>();
    CHECK(lhs > 0.9);
    CHECK(lhs < 1.05);
    CHECK(doc["results"]["violated"] == (lhs < 1.0));
    CHECK(doc["results"].contains("region_stats"));

    // with a bootstrap the document gains an uncertainty
    const auto b = run_cli("witness --x-file " + fx.x_file + " --p-file " +
                           fx.p_file +
                           " --distance-s 0.5 --bootstrap 120 --seed 5 --json");
    CHECK(b.exit_code == 0);
    const double unc = json_number(b.out, "/results/uncertainty_lhs");
    CHECK(unc > 0.0);
    CHECK(unc < 0.2);
  }

  TEST_CASE("witness scan tabulates the crossing") {
    Fixture fx;
    const auto r = run_cli("witness --x-file " + fx.x_file + " --p-file " +
                           fx.p_file + " --scan --scan-from 0.3 --scan-to 0.7 "
                           "--scan-points 5");
    CHECK(r.exit_code == 0);
    std::istringstream lines(r.out);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "distance_S,lhs");
    std::vector<double> svals, lvals;
    while (std::getline(lines, line)) {
      const auto comma = line.find(',');
      REQUIRE(comma != std::string::npos);
      svals.push_back(macrosup::parse_double(line.substr(0, comma)));
      lvals.push_back(macrosup::parse_double(line.substr(comma + 1)));
    }
    REQUIRE(svals.size() == 5);
    CHECK(svals.front() == 0.3);
    CHECK(svals.back() == 0.7);
    // the vacuum crossing near 0.51 falls inside this scan window
    CHECK(lvals.front() < 1.0);
    CHECK(lvals.back() > 1.0);
  }

  TEST_CASE("empirical separation search on simulated data") {
    Fixture fx;
    const auto r = run_cli("smax --x-file " + fx.x_file + " --p-file " +
                           fx.p_file + " --bootstrap 120 --seed 9 --json");
    CHECK(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    const double s_max = doc["results"]["s_max"].get<double>();
    const double unc = doc["results"]["uncertainty"].get<double>();
    CHECK(std::fabs(s_max - ref::kSmaxVacuum) < 0.05);
    CHECK(unc > 0.0);
    CHECK(std::fabs(s_max - ref::kSmaxVacuum) < 6.0 * unc + 1e-3);
    CHECK(doc["results"]["status"] == "ok");
  }

  TEST_CASE("theory curve command") {
    const std::string out = kWorkDir + "/curve.csv";
    const auto r = run_cli("theory-curve --state -5.7,0.85 --s-from 0 "
                           "--s-to 1 --s-points 26 --out " + out);
    CHECK(r.exit_code == 0);
    // the crossing estimate for this state sits near 0.81
    CHECK(contains(r.out, "0.81"));
    const std::string table = slurp(out);
    CHECK(contains(table, "distance_S,lhs"));
    std::size_t rows = 0;
    for (char ch : table) rows += ch == '\n' ? 1 : 0;
    CHECK(rows == 27);

    // vacuum route via the state flags
    const auto v = run_cli("theory-curve --vacuum --s-points 26 --json");
    CHECK(v.exit_code == 0);
    const auto doc = nlohmann::json::parse(v.out);
    CHECK(doc["kind"] == "theory_curve");
    const auto& pts = doc["results"]["curves"][0]["curve"];
    REQUIRE(pts.size() == 26);
    CHECK(pts[0]["lhs"].get<double>() == doctest::Approx(0.36338).epsilon(1e-4));
  }

  TEST_CASE("contour command writes the grid table") {
    const std::string out = kWorkDir + "/contour_small.csv";
    const auto r = run_cli("contour --db-from -5.7 --db-to -5.7 --db-points 1 "
                           "--purity-from 0.85 --purity-to 0.85 "
                           "--purity-points 1 --out " + out);
    CHECK(r.exit_code == 0);
    const auto grid = macrosup::read_contour_csv(out);
    REQUIRE(grid.s_max.size() == 1);
    CHECK(std::fabs(grid.s_max[0] - ref::kSmax30mW) < 2e-6);
  }

  TEST_CASE("histogram command labels the lobes") {
    Fixture fx;
    const std::string out = kWorkDir + "/hist.csv";
    const auto r = run_cli("histogram --x-file " + fx.x_file +
                           " --distance-s 0.8 --bin-width 0.1 --out " + out);
    CHECK(r.exit_code == 0);
    const std::string table = slurp(out);
    CHECK(contains(table, "histogram,bin_lo,bin_hi,density"));
    CHECK(contains(table, "neg,"));
    CHECK(contains(table, "mid,"));
    CHECK(contains(table, "pos,"));

    // a separation beyond the sampled span flags the missing outer lobes
    const auto far = run_cli("histogram --x-file " + fx.x_file +
                             " --distance-s 50 --bin-width 0.1 --out " +
                             kWorkDir + "/hist_far.csv");
    CHECK(far.exit_code == 0);
    CHECK(contains(far.out, "outer region empty"));
  }

  TEST_CASE("relative outputs honor the output directory variable") {
    const std::string sub = kWorkDir + "/outdir";
    std::filesystem::create_directories(sub);
    const auto r = run_cli("simulate --vacuum --quadrature x --count 50 "
                           "--seed 1 --out rel_series.qs",
                           "MACROSUP_OUT_DIR=" + sub);
    CHECK(r.exit_code == 0);
    CHECK(macrosup::read_series(sub + "/rel_series.qs").samples.size() == 50);

    // absolute paths ignore it
    const auto a = run_cli("simulate --vacuum --quadrature x --count 50 "
                           "--seed 1 --out " + kWorkDir + "/abs_series.qs",
                           "MACROSUP_OUT_DIR=" + sub);
    CHECK(a.exit_code == 0);
    CHECK(macrosup::read_series(kWorkDir + "/abs_series.qs").samples.size() ==
          50);
  }

  TEST_CASE("usage errors exit 2 with a tagged message") {
    Fixture fx;
    const std::vector<std::string> cases = {
        "smax --squeezing-db -5.7 --purity 1.2",
        "smax --squeezing-db 3 --purity 0.9",
        "smax",
        "smax --vacuum --var-x 2 --var-p 1",
        "contour --db-from 0 --db-to -5",
        "theory-curve --s-points 1 --vacuum",
        "simulate --vacuum --quadrature x",
        "simulate --vacuum --count 10 --out /tmp/x.qs",
        "simulate --vacuum --quadrature z --count 10 --out /tmp/x.qs",
        "witness --x-file a --p-file b",
        "witness --x-file a --p-file b --distance-s 0.5 --scan",
        "witness --x-file " + fx.x_file + " --p-file " + fx.p_file +
            " --distance-s -1",
        "nonsense-subcommand",
        "smax --vacuum --nonsense-flag",
    };
    for (const auto& c : cases) {
      CAPTURE(c);
      const auto r = run_cli(c);
      CHECK(r.exit_code == 2);
      CHECK(contains(r.err, "error[usage]:"));
      CHECK(r.err.find('\n') == r.err.size() - 1);
    }
  }

  TEST_CASE("histogram usage errors") {
    Fixture fx;
    const auto r = run_cli("histogram --x-file " + fx.x_file +
                           " --distance-s 0.5 --bin-width 0");
    CHECK(r.exit_code == 2);
    CHECK(contains(r.err, "error[usage]:"));
  }

  TEST_CASE("data errors exit 3 with a tagged message") {
    Fixture fx;
    const auto missing = run_cli("witness --x-file /tmp/no_such_x.qs --p-file " +
                                 fx.p_file + " --distance-s 0.5");
    CHECK(missing.exit_code == 3);
    CHECK(contains(missing.err, "error[data]:"));
    CHECK(contains(missing.err, "no_such_x.qs"));

    const std::string mangled = kWorkDir + "/mangled.qs";
    std::ofstream(mangled) << "format_version: 1\nnot a real header\n";
    const auto bad = run_cli("witness --x-file " + mangled + " --p-file " +
                             fx.p_file + " --distance-s 0.5");
    CHECK(bad.exit_code == 3);
    CHECK(contains(bad.err, "error[data]:"));

    const std::string future = kWorkDir + "/future.qs";
    std::ofstream(future) << "format_version: 2\nquadrature: x\n"
                             "calibration_snu: 1\ncount: 0\nencoding: text\n\n";
    const auto ver = run_cli("smax --x-file " + future + " --p-file " +
                             fx.p_file);
    CHECK(ver.exit_code == 3);
    CHECK(contains(ver.err, "error[data]:"));
  }

  TEST_CASE("numeric failures exit 4 with a tagged message") {
    Fixture fx;
    // no samples reach |x| >= 25, so the outer regions cannot be scored
    const auto r = run_cli("witness --x-file " + fx.x_file + " --p-file " +
                           fx.p_file + " --distance-s 50");
    CHECK(r.exit_code == 4);
    CHECK(contains(r.err, "error[numeric]:"));
  }

  TEST_CASE("analytic smax below threshold reports rather than fails") {
    const auto r = run_cli("smax --squeezing-db 0 --purity 0.5 --json");
    CHECK(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["results"]["status"] == "no_violation_at_zero");
    CHECK(doc["results"]["s_max"] == 0.0);
  }
}
