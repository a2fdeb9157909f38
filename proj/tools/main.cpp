// macrosup: command-line surface for the superposition-witness toolkit.
//
// Subcommands: simulate, witness, smax, theory-curve, contour, histogram.
// Exit codes: 0 success, 2 usage, 3 data format, 4 numeric failure. Errors
// print one machine-parseable line: "error[usage|data|numeric]: ...".
// Relative --out paths land under $MACROSUP_OUT_DIR when that is set.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "macrosup/dataio.hpp"
#include "macrosup/errors.hpp"
#include "macrosup/sampler.hpp"
#include "macrosup/series.hpp"
#include "macrosup/snu.hpp"
#include "macrosup/witness.hpp"

using namespace macrosup;

namespace {

std::string resolve_out(const std::string& path) {
  if (path.empty() || path.front() == '/') return path;
  const char* dir = std::getenv("MACROSUP_OUT_DIR");
  if (!dir || !*dir) return path;
  std::string d = dir;
  if (d.back() != '/') d += '/';
  return d + path;
}

std::string indexed_path(const std::string& base, std::size_t k) {
  const auto slash = base.find_last_of('/');
  const auto dot = base.find_last_of('.');
  if (dot == std::string::npos ||
      (slash != std::string::npos && dot < slash))
    return base + "." + std::to_string(k);
  return base.substr(0, dot) + "." + std::to_string(k) + base.substr(dot);
}

double flag_double(const std::string& text, const char* flag) {
  try {
    return parse_double(text);
  } catch (const DataFormatError&) {
    throw std::invalid_argument(std::string(flag) + ": malformed number '" +
                                text + "'");
  }
}

nlohmann::json state_json(const GaussianStateSpec& s) {
  return {{"mean_x", s.mean_x},
          {"mean_p", s.mean_p},
          {"var_x", s.var_x},
          {"var_p", s.var_p}};
}

// Shared flags describing one Gaussian state. Three routes: --vacuum,
// squeezing+purity, or explicit variances; --mean-x/--mean-p displace the
// first two routes.
struct StateFlags {
  bool vacuum = false;
  std::optional<double> squeezing_db;
  std::optional<double> squeezing_db_mag;
  std::optional<double> purity;
  std::optional<double> mean_x, mean_p, var_x, var_p;

  void attach(CLI::App& cmd) {
    cmd.add_flag("--vacuum", vacuum,
                 "vacuum state (unit variances, zero means)");
    cmd.add_option("--squeezing-db", squeezing_db,
                   "squeezing in dB, <= 0 (below shot noise)");
    cmd.add_option("--squeezing-db-mag", squeezing_db_mag,
                   "squeezing magnitude in dB, > 0 (stored as its negative)");
    cmd.add_option("--purity", purity, "state purity in (0, 1]");
    cmd.add_option("--mean-x", mean_x, "x-quadrature mean, SNU^(1/2)");
    cmd.add_option("--mean-p", mean_p, "p-quadrature mean, SNU^(1/2)");
    cmd.add_option("--var-x", var_x, "explicit x-quadrature variance, SNU");
    cmd.add_option("--var-p", var_p, "explicit p-quadrature variance, SNU");
  }

  bool any() const {
    return vacuum || squeezing_db || squeezing_db_mag || purity || mean_x ||
           mean_p || var_x || var_p;
  }

  GaussianStateSpec resolve() const {
    const bool has_sq =
        squeezing_db.has_value() || squeezing_db_mag.has_value() ||
        purity.has_value();
    const bool has_var = var_x.has_value() || var_p.has_value();
    const int routes = (vacuum ? 1 : 0) + (has_sq ? 1 : 0) + (has_var ? 1 : 0);
    if (routes == 0 && !(mean_x || mean_p))
      throw std::invalid_argument(
          "no state given: use --vacuum, --squeezing-db(-mag) with --purity, "
          "or --var-x/--var-p");
    if (routes > 1)
      throw std::invalid_argument(
          "conflicting state flags: pick one of --vacuum, squeezing+purity, "
          "or explicit variances");

    GaussianStateSpec state;  // vacuum; a bare --mean-x displaces it
    if (has_sq) {
      if (squeezing_db && squeezing_db_mag)
        throw std::invalid_argument(
            "--squeezing-db and --squeezing-db-mag are mutually exclusive");
      if (!squeezing_db && !squeezing_db_mag)
        throw std::invalid_argument(
            "--purity needs --squeezing-db or --squeezing-db-mag");
      if (!purity)
        throw std::invalid_argument(
            "squeezed states need --purity alongside the squeezing level");
      if (squeezing_db && *squeezing_db > 0.0)
        throw std::invalid_argument(
            "--squeezing-db must be <= 0; use --squeezing-db-mag for "
            "magnitudes");
      if (squeezing_db_mag && !(*squeezing_db_mag > 0.0))
        throw std::invalid_argument("--squeezing-db-mag must be > 0");
      const double db = squeezing_db ? *squeezing_db : -*squeezing_db_mag;
      state = from_squeezing_purity(SqueezingPuritySpec(db, *purity));
    } else if (has_var) {
      if (!var_x || !var_p)
        throw std::invalid_argument(
            "explicit states need both --var-x and --var-p");
      return GaussianStateSpec(mean_x.value_or(0.0), mean_p.value_or(0.0),
                               *var_x, *var_p);
    }
    if (mean_x || mean_p)
      state = GaussianStateSpec(mean_x.value_or(state.mean_x),
                                mean_p.value_or(state.mean_p), state.var_x,
                                state.var_p);
    return state;
  }
};

// ---------------------------------------------------------------------------

struct SimulateOpts {
  StateFlags state;
  std::string quadrature = "x";
  std::size_t count = 1000000;
  std::uint64_t seed = 0;
  double efficiency = 1.0;
  bool binary = false;
  std::optional<double> sideband_hz, rbw_hz;
  std::string out;
  bool json = false;
};

void run_simulate(const SimulateOpts& o) {
  AcquisitionSpec spec;
  spec.state = o.state.resolve();
  if (o.quadrature == "x")
    spec.quadrature = Quadrature::x;
  else if (o.quadrature == "p")
    spec.quadrature = Quadrature::p;
  else
    throw std::invalid_argument("--quadrature must be 'x' or 'p'");
  spec.count = o.count;
  spec.seed = o.seed;
  spec.efficiency = o.efficiency;
  spec.sideband_hz = o.sideband_hz;
  spec.rbw_hz = o.rbw_hz;

  const QuadratureSeries series = sample_quadrature(spec);
  const std::string path = resolve_out(o.out);
  write_series(series, path,
               o.binary ? SeriesEncoding::binary : SeriesEncoding::text);

  const double m = sample_mean(series.samples);
  const double v = series.samples.size() >= 2
                       ? sample_variance(series.samples, m)
                       : 0.0;
  if (o.json) {
    const auto doc = make_document(
        "simulate",
        {{"state", state_json(spec.state)},
         {"quadrature", o.quadrature},
         {"count", o.count},
         {"seed", o.seed},
         {"efficiency", o.efficiency}},
        {{"path", path},
         {"sample_mean", m},
         {"sample_variance", v},
         {"digest", series_digest(series)}});
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "wrote " << path << ": " << series.samples.size() << " "
              << o.quadrature << "-quadrature samples, sample variance "
              << format_double(v) << "\n";
  }
}

// ---------------------------------------------------------------------------

struct WitnessOpts {
  std::string x_file, p_file;
  std::optional<double> distance_s;
  bool scan = false;
  double scan_from = 0.0, scan_to = 1.0;
  std::size_t scan_points = 26;
  std::optional<double> center;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
  bool json = false;
};

void run_witness(const WitnessOpts& o) {
  if (o.scan == o.distance_s.has_value())
    throw std::invalid_argument("pick exactly one of --distance-s or --scan");

  const RunPair pair =
      make_run_pair(read_series(o.x_file), read_series(o.p_file));
  const double center =
      o.center ? *o.center : sample_mean(pair.x_series.samples);
  const double var_p = sample_variance(
      pair.p_series.samples, sample_mean(pair.p_series.samples));

  nlohmann::json inputs{
      {"x_file", o.x_file},
      {"p_file", o.p_file},
      {"x_digest", series_digest(pair.x_series)},
      {"p_digest", series_digest(pair.p_series)},
      {"x_count", pair.x_series.samples.size()},
      {"p_count", pair.p_series.samples.size()},
      {"center", center},
      {"center_policy", o.center ? "explicit" : "sample_mean"}};

  if (o.distance_s) {
    const double S = *o.distance_s;
    const RegionStats stats =
        region_stats_empirical(pair.x_series, BinningSpec(S, center));
    WitnessResult res = witness_lhs(stats, var_p, S);
    if (o.bootstrap > 0) {
      BootstrapOptions bo;
      bo.statistic = BootstrapStatistic::lhs;
      bo.distance_S = S;
      bo.center = o.center;
      bo.resamples = o.bootstrap;
      bo.seed = o.seed;
      bo.threads = o.threads;
      res.uncertainty_lhs =
          bootstrap_uncertainty(pair.x_series, pair.p_series, bo).uncertainty;
      inputs["bootstrap_resamples"] = o.bootstrap;
      inputs["seed"] = o.seed;
    }
    nlohmann::json results = res;
    results["region_stats"] = stats;
    const auto doc = make_document("witness", inputs, std::move(results));
    if (!o.out.empty()) write_document(doc, resolve_out(o.out));
    if (o.json) {
      std::cout << doc.dump(2) << "\n";
    } else {
      std::cout << "S = " << format_double(S)
                << ": lhs = " << format_double(res.lhs);
      if (res.uncertainty_lhs)
        std::cout << " +- " << format_double(*res.uncertainty_lhs);
      std::cout << (res.violated ? " (violated: coherence witnessed)"
                                 : " (not violated)")
                << "\n";
    }
    return;
  }

  if (o.scan_points < 2)
    throw std::invalid_argument("--scan-points must be >= 2");
  if (!(o.scan_from >= 0.0) || !(o.scan_to > o.scan_from))
    throw std::invalid_argument("scan range must satisfy 0 <= from < to");
  std::vector<CurvePoint> curve;
  curve.reserve(o.scan_points);
  for (std::size_t i = 0; i < o.scan_points; ++i) {
    const double S = o.scan_from + (o.scan_to - o.scan_from) *
                                       (static_cast<double>(i) /
                                        static_cast<double>(o.scan_points - 1));
    const RegionStats stats =
        region_stats_empirical(pair.x_series, BinningSpec(S, center));
    curve.push_back({S, witness_lhs(stats, var_p, S).lhs});
  }
  if (o.json) {
    const auto doc = make_document("witness_scan", inputs,
                                   {{"curve", curve}, {"var_p", var_p}});
    if (!o.out.empty()) write_document(doc, resolve_out(o.out));
    std::cout << doc.dump(2) << "\n";
  } else if (!o.out.empty()) {
    const std::string path = resolve_out(o.out);
    write_curve_csv(curve, path);
    std::cout << "wrote " << path << ": " << curve.size() << " scan points\n";
  } else {
    write_curve_csv(curve, std::cout);
  }
}

// ---------------------------------------------------------------------------

struct SmaxOpts {
  StateFlags state;
  std::string x_file, p_file;
  std::optional<double> center;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
  bool json = false;
};

void run_smax(const SmaxOpts& o) {
  SmaxResult res;
  nlohmann::json inputs;
  const bool have_files = !o.x_file.empty() || !o.p_file.empty();
  if (have_files) {
    if (o.x_file.empty() || o.p_file.empty())
      throw std::invalid_argument(
          "the data route needs both --x-file and --p-file");
    if (o.state.any())
      throw std::invalid_argument(
          "give either a state spec or a data pair, not both");
    const RunPair pair =
        make_run_pair(read_series(o.x_file), read_series(o.p_file));
    SmaxOptions so;
    so.center = o.center;
    so.bootstrap_resamples = o.bootstrap;
    so.seed = o.seed;
    so.threads = o.threads;
    res = smax_empirical(pair.x_series, pair.p_series, so);
    inputs = {{"x_file", o.x_file},
              {"p_file", o.p_file},
              {"x_digest", series_digest(pair.x_series)},
              {"p_digest", series_digest(pair.p_series)},
              {"x_count", pair.x_series.samples.size()},
              {"p_count", pair.p_series.samples.size()},
              {"center_policy", o.center ? "explicit" : "sample_mean"},
              {"bootstrap_resamples", o.bootstrap},
              {"seed", o.seed}};
    if (o.center) inputs["center"] = *o.center;
  } else {
    const GaussianStateSpec state = o.state.resolve();
    res = smax_analytic(state, o.center);
    inputs = {{"state", state_json(state)},
              {"center_policy", o.center ? "explicit" : "state_mean"}};
    if (o.center) inputs["center"] = *o.center;
  }

  if (res.status == SmaxStatus::bracket_not_found)
    throw NumericError(
        "s_max bracket not found: lhs stayed below 1 up to S = " +
        format_double(res.search_ceiling) +
        (res.ceiling_shrunk ? " (data-depletion ceiling)" : " (search cap)"));

  const auto doc = make_document("smax", inputs, res);
  if (!o.out.empty()) write_document(doc, resolve_out(o.out));
  if (o.json) {
    std::cout << doc.dump(2) << "\n";
  } else if (res.status == SmaxStatus::no_violation_at_zero) {
    std::cout << "no violation at S = 0; s_max = 0\n";
  } else {
    std::cout << "s_max = " << format_double(res.s_max);
    if (res.uncertainty) std::cout << " +- " << format_double(*res.uncertainty);
    if (res.ceiling_shrunk)
      std::cout << " [search ceiling shrank to "
                << format_double(res.search_ceiling) << "]";
    std::cout << "\n";
  }
}

// ---------------------------------------------------------------------------

struct CurveOpts {
  StateFlags state;
  std::vector<std::string> states;  // repeatable "squeezing_db,purity"
  double s_from = 0.0, s_to = 1.0;
  std::size_t s_points = 101;
  std::string out;
  bool json = false;
};

std::optional<double> crossing_from_curve(const std::vector<CurvePoint>& c) {
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i - 1].lhs < 1.0 && c[i].lhs >= 1.0) {
      const double t = (1.0 - c[i - 1].lhs) / (c[i].lhs - c[i - 1].lhs);
      return c[i - 1].distance_S +
             t * (c[i].distance_S - c[i - 1].distance_S);
    }
  return std::nullopt;
}

void run_curve(const CurveOpts& o) {
  std::vector<std::pair<std::string, GaussianStateSpec>> specs;
  if (o.state.any()) specs.emplace_back("state", o.state.resolve());
  for (const std::string& s : o.states) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument(
          "--state needs 'squeezing_db,purity', got '" + s + "'");
    const double db = flag_double(s.substr(0, comma), "--state");
    const double pur = flag_double(s.substr(comma + 1), "--state");
    specs.emplace_back(s, from_squeezing_purity(SqueezingPuritySpec(db, pur)));
  }
  if (specs.empty())
    throw std::invalid_argument(
        "theory-curve needs at least one state (--vacuum, state flags, or "
        "--state)");
  if (o.s_points < 2) throw std::invalid_argument("--s-points must be >= 2");
  if (!(o.s_from >= 0.0) || !(o.s_to > o.s_from))
    throw std::invalid_argument("S grid must satisfy 0 <= from < to");

  std::vector<double> grid(o.s_points);
  for (std::size_t i = 0; i < o.s_points; ++i)
    grid[i] = o.s_from + (o.s_to - o.s_from) *
                             (static_cast<double>(i) /
                              static_cast<double>(o.s_points - 1));

  nlohmann::json curves = nlohmann::json::array();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& [label, state] = specs[k];
    const auto curve = theory_curve(state, grid);
    if (!o.out.empty()) {
      const std::string path = resolve_out(
          specs.size() == 1 ? o.out : indexed_path(o.out, k));
      write_curve_csv(curve, path);
    }
    curves.push_back({{"label", label},
                      {"state", state_json(state)},
                      {"curve", curve}});
    if (!o.json) {
      const auto cross = crossing_from_curve(curve);
      std::cout << label << ": "
                << (cross ? "lhs crosses 1 near S = " + format_double(*cross)
                          : "no crossing inside the S grid")
                << "\n";
    }
  }
  if (o.json) {
    const auto doc = make_document(
        "theory_curve",
        {{"s_from", o.s_from}, {"s_to", o.s_to}, {"s_points", o.s_points}},
        {{"curves", std::move(curves)}});
    std::cout << doc.dump(2) << "\n";
  }
}

// ---------------------------------------------------------------------------

struct ContourOpts {
  double db_from = -12.0, db_to = 0.0;
  std::size_t db_points = 61;
  double purity_from = 0.5, purity_to = 1.0;
  std::size_t purity_points = 51;
  std::string out = "contour.csv";
  bool json = false;
};

void run_contour(const ContourOpts& o) {
  const ContourGrid grid =
      contour_grid(o.db_from, o.db_to, o.db_points, o.purity_from,
                   o.purity_to, o.purity_points);
  const std::string path = resolve_out(o.out);
  write_contour_csv(grid, path);
  const nlohmann::json inputs{{"db_from", o.db_from},
                              {"db_to", o.db_to},
                              {"db_points", o.db_points},
                              {"purity_from", o.purity_from},
                              {"purity_to", o.purity_to},
                              {"purity_points", o.purity_points}};
  if (o.json) {
    std::cout << make_document("contour", inputs, grid).dump(2) << "\n";
  } else {
    std::cout << "wrote " << path << ": "
              << grid.squeezing_db.size() * grid.purity.size()
              << " grid nodes\n";
  }
}

// ---------------------------------------------------------------------------

struct HistOpts {
  std::string x_file;
  double distance_s = 0.0;
  double bin_width = 0.0;
  std::optional<double> center;
  std::string out;
  bool json = false;
};

void run_histogram(const HistOpts& o) {
  const QuadratureSeries series = read_series(o.x_file);
  if (series.samples.empty())
    throw std::invalid_argument("histogram needs a non-empty series");
  const double center =
      o.center ? *o.center : sample_mean(series.samples);
  const RegionHistograms h = region_histograms(
      series, BinningSpec(o.distance_s, center), o.bin_width);
  if (!o.out.empty()) write_histograms_csv(h, resolve_out(o.out));
  const nlohmann::json inputs{{"x_file", o.x_file},
                              {"digest", series_digest(series)},
                              {"count", series.samples.size()},
                              {"distance_S", o.distance_s},
                              {"bin_width", o.bin_width},
                              {"center", center}};
  if (o.json) {
    std::cout << make_document("histogram", inputs, h).dump(2) << "\n";
  } else {
    std::cout << "regions -1/0/+1: " << h.neg.count << "/" << h.mid.count
              << "/" << h.pos.count << " samples";
    if (h.neg.empty || h.pos.empty) std::cout << " (outer region empty)";
    std::cout << "\n";
    if (o.out.empty()) write_histograms_csv(h, std::cout);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Witness toolkit for generalized macroscopic superpositions in "
      "Gaussian quadrature data (shot-noise units)"};
  app.require_subcommand(1);
  app.footer(
      "Relative --out paths are placed under $MACROSUP_OUT_DIR when it is "
      "set.");

  SimulateOpts sim;
  {
    CLI::App* c = app.add_subcommand(
        "simulate", "Generate a seeded quadrature series file");
    sim.state.attach(*c);
    c->add_option("--quadrature", sim.quadrature, "which quadrature: x or p")
        ->required();
    c->add_option("--count", sim.count, "number of samples (default 10^6)");
    c->add_option("--seed", sim.seed, "master RNG seed");
    c->add_option("--efficiency", sim.efficiency,
                  "detection efficiency in [0,1] (beam-splitter loss)");
    c->add_flag("--binary", sim.binary,
                "binary64 payload instead of text samples");
    c->add_option("--sideband-hz", sim.sideband_hz,
                  "acquisition sideband frequency metadata");
    c->add_option("--rbw-hz", sim.rbw_hz,
                  "resolution bandwidth metadata");
    c->add_option("--out", sim.out, "output series path")->required();
    c->add_flag("--json", sim.json, "print the result document to stdout");
    c->callback([&] { run_simulate(sim); });
  }

  WitnessOpts wit;
  {
    CLI::App* c = app.add_subcommand(
        "witness", "Evaluate the witness inequality on a recorded run pair");
    c->add_option("--x-file", wit.x_file, "x-quadrature series file")
        ->required();
    c->add_option("--p-file", wit.p_file, "p-quadrature series file")
        ->required();
    c->add_option("--distance-s", wit.distance_s,
                  "evaluate at one separation S");
    c->add_flag("--scan", wit.scan, "tabulate lhs(S) over a grid instead");
    c->add_option("--scan-from", wit.scan_from, "scan grid start (default 0)");
    c->add_option("--scan-to", wit.scan_to, "scan grid end (default 1)");
    c->add_option("--scan-points", wit.scan_points,
                  "scan grid size (default 26)");
    c->add_option("--center", wit.center,
                  "bin center (default: sample mean of the x run)");
    c->add_option("--bootstrap", wit.bootstrap,
                  "bootstrap resamples for the lhs uncertainty (0 = off)");
    c->add_option("--seed", wit.seed, "bootstrap seed");
    c->add_option("--threads", wit.threads, "bootstrap worker threads");
    c->add_option("--out", wit.out, "result document (or scan table) path");
    c->add_flag("--json", wit.json, "print the result document to stdout");
    c->callback([&] { run_witness(wit); });
  }

  SmaxOpts smx;
  {
    CLI::App* c = app.add_subcommand(
        "smax",
        "Largest violated separation, from a state spec or from data");
    smx.state.attach(*c);
    c->add_option("--x-file", smx.x_file, "x-quadrature series file");
    c->add_option("--p-file", smx.p_file, "p-quadrature series file");
    c->add_option("--center", smx.center,
                  "bin center (default: marginal/sample mean)");
    c->add_option("--bootstrap", smx.bootstrap,
                  "bootstrap resamples for the data route (default 1000)");
    c->add_option("--seed", smx.seed, "bootstrap seed");
    c->add_option("--threads", smx.threads, "bootstrap worker threads");
    c->add_option("--out", smx.out, "result document path");
    c->add_flag("--json", smx.json, "print the result document to stdout");
    c->callback([&] { run_smax(smx); });
  }

  CurveOpts crv;
  {
    CLI::App* c = app.add_subcommand(
        "theory-curve", "Tabulate the analytic lhs(S) curve per state");
    crv.state.attach(*c);
    c->add_option("--state", crv.states,
                  "extra state as 'squeezing_db,purity' (repeatable)");
    c->add_option("--s-from", crv.s_from, "S grid start (default 0)");
    c->add_option("--s-to", crv.s_to, "S grid end (default 1)");
    c->add_option("--s-points", crv.s_points, "S grid size (default 101)");
    c->add_option("--out", crv.out,
                  "table path; multiple states get an index suffix");
    c->add_flag("--json", crv.json, "print the result document to stdout");
    c->callback([&] { run_curve(crv); });
  }

  ContourOpts cnt;
  {
    CLI::App* c = app.add_subcommand(
        "contour", "s_max over a squeezing x purity grid");
    c->add_option("--db-from", cnt.db_from, "squeezing axis start (dB)");
    c->add_option("--db-to", cnt.db_to, "squeezing axis end (dB)");
    c->add_option("--db-points", cnt.db_points, "squeezing axis size");
    c->add_option("--purity-from", cnt.purity_from, "purity axis start");
    c->add_option("--purity-to", cnt.purity_to, "purity axis end");
    c->add_option("--purity-points", cnt.purity_points, "purity axis size");
    c->add_option("--out", cnt.out, "grid table path (default contour.csv)");
    c->add_flag("--json", cnt.json, "print the result document to stdout");
    c->callback([&] { run_contour(cnt); });
  }

  HistOpts hst;
  {
    CLI::App* c = app.add_subcommand(
        "histogram",
        "Per-region and full probability densities of an x-quadrature run");
    c->add_option("--x-file", hst.x_file, "x-quadrature series file")
        ->required();
    c->add_option("--distance-s", hst.distance_s, "region separation S")
        ->required();
    c->add_option("--bin-width", hst.bin_width, "histogram bin width")
        ->required();
    c->add_option("--center", hst.center,
                  "bin center (default: sample mean)");
    c->add_option("--out", hst.out, "density table path");
    c->add_flag("--json", hst.json, "print the result document to stdout");
    c->callback([&] { run_histogram(hst); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error[numeric]: " << e.what() << "\n";
    return 4;
  } catch (const DataFormatError& e) {
    std::cerr << "error[data]: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error[data]: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
