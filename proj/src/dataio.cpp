#include "macrosup/dataio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "macrosup/errors.hpp"

namespace macrosup {

static_assert(std::endian::native == std::endian::little,
              "series binary payloads are little-endian binary64");

const char* const kConventionNote =
    "shot-noise units: vacuum quadrature variance = 1; regions split at "
    "center -/+ S/2 with closed outer intervals; witness violated when "
    "lhs < 1";

const char* to_string(Quadrature q) { return q == Quadrature::x ? "x" : "p"; }

RunPair make_run_pair(QuadratureSeries x_series, QuadratureSeries p_series) {
  if (x_series.quadrature != Quadrature::x)
    throw std::invalid_argument("make_run_pair: first series must be the x run");
  if (p_series.quadrature != Quadrature::p)
    throw std::invalid_argument(
        "make_run_pair: second series must be the p run");
  if (x_series.calibration_snu != p_series.calibration_snu)
    throw std::invalid_argument(
        "make_run_pair: runs disagree on shot-noise calibration");
  return {std::move(x_series), std::move(p_series)};
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw DataFormatError("malformed number: '" + std::string(text) + "'");
  return v;
}

namespace {

constexpr std::size_t kMaxDeclaredCount = std::size_t{1} << 40;

constexpr const char* kReservedKeys[] = {"format_version", "quadrature",
                                         "calibration_snu", "count",
                                         "encoding"};

bool is_reserved_key(const std::string& key) {
  for (const char* r : kReservedKeys)
    if (key == r) return true;
  return false;
}

[[noreturn]] void fail(const std::string& msg) { throw DataFormatError(msg); }

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataFormatError("cannot open '" + path + "' for reading");
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataFormatError("cannot open '" + path + "' for writing");
  return f;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

struct KeyValue {
  std::string key;
  std::string value;
};

KeyValue split_header_line(const std::string& line, int lineno) {
  const auto pos = line.find(": ");
  if (pos == std::string::npos)
    fail("line " + std::to_string(lineno) + ": expected 'key: value'");
  return {line.substr(0, pos), line.substr(pos + 2)};
}

}  // namespace

QuadratureSeries read_series(std::istream& in) {
  int lineno = 0;
  std::string line;
  const auto next_line = [&]() -> const std::string& {
    if (!std::getline(in, line))
      fail("unexpected end of file after line " + std::to_string(lineno));
    ++lineno;
    strip_cr(line);
    return line;
  };
  const auto expect = [&](const char* key) -> std::string {
    const KeyValue kv = split_header_line(next_line(), lineno);
    if (kv.key != key)
      fail("line " + std::to_string(lineno) + ": expected '" + key +
           "', found '" + kv.key + "'");
    return kv.value;
  };

  {
    const std::string version = expect("format_version");
    int v = -1;
    const auto res =
        std::from_chars(version.data(), version.data() + version.size(), v);
    if (res.ec != std::errc{} || res.ptr != version.data() + version.size())
      fail("line 1: malformed format_version '" + version + "'");
    if (v != kSeriesFormatVersion)
      throw VersionError("series format_version " + version +
                         "; this reader handles " +
                         std::to_string(kSeriesFormatVersion));
  }

  QuadratureSeries series;
  {
    const std::string q = expect("quadrature");
    if (q == "x")
      series.quadrature = Quadrature::x;
    else if (q == "p")
      series.quadrature = Quadrature::p;
    else
      fail("line " + std::to_string(lineno) +
           ": quadrature must be 'x' or 'p', found '" + q + "'");
  }
  {
    const std::string cal = expect("calibration_snu");
    try {
      series.calibration_snu = parse_double(cal);
    } catch (const DataFormatError&) {
      fail("line " + std::to_string(lineno) + ": malformed calibration_snu '" +
           cal + "'");
    }
    if (!std::isfinite(series.calibration_snu) || series.calibration_snu <= 0.0)
      fail("line " + std::to_string(lineno) +
           ": calibration_snu must be positive");
  }
  std::size_t count = 0;
  {
    const std::string c = expect("count");
    const auto res = std::from_chars(c.data(), c.data() + c.size(), count);
    if (res.ec != std::errc{} || res.ptr != c.data() + c.size())
      fail("line " + std::to_string(lineno) + ": malformed count '" + c + "'");
    if (count > kMaxDeclaredCount)
      fail("line " + std::to_string(lineno) + ": declared count " + c +
           " is implausibly large");
  }
  bool binary = false;
  {
    const std::string enc = expect("encoding");
    if (enc == "binary")
      binary = true;
    else if (enc != "text")
      fail("line " + std::to_string(lineno) +
           ": encoding must be 'text' or 'binary', found '" + enc + "'");
  }

  for (;;) {
    if (!std::getline(in, line))
      fail("unexpected end of file: missing blank line after header");
    ++lineno;
    strip_cr(line);
    if (line.empty()) break;
    const KeyValue kv = split_header_line(line, lineno);
    if (is_reserved_key(kv.key))
      fail("line " + std::to_string(lineno) + ": duplicate reserved key '" +
           kv.key + "'");
    if (!series.metadata.emplace(kv.key, kv.value).second)
      fail("line " + std::to_string(lineno) + ": duplicate metadata key '" +
           kv.key + "'");
  }

  if (binary) {
    series.samples.resize(count);
    if (count > 0) {
      const std::streamsize want =
          static_cast<std::streamsize>(count * sizeof(double));
      in.read(reinterpret_cast<char*>(series.samples.data()), want);
      if (in.gcount() != want)
        fail("binary payload truncated: expected " + std::to_string(want) +
             " bytes, got " + std::to_string(in.gcount()));
    }
    if (in.peek() != std::char_traits<char>::eof())
      fail("trailing content after binary payload");
    for (std::size_t i = 0; i < count; ++i)
      if (!std::isfinite(series.samples[i]))
        fail("record " + std::to_string(i) + ": non-finite sample");
  } else {
    series.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(in, line))
        fail("expected " + std::to_string(count) +
             " sample records, file ends after " + std::to_string(i));
      ++lineno;
      strip_cr(line);
      double v{};
      const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
      if (res.ec != std::errc{} || res.ptr != line.data() + line.size())
        fail("line " + std::to_string(lineno) + " (record " +
             std::to_string(i) + "): malformed sample '" + line + "'");
      if (!std::isfinite(v))
        fail("line " + std::to_string(lineno) + " (record " +
             std::to_string(i) + "): non-finite sample");
      series.samples.push_back(v);
    }
    if (in.peek() != std::char_traits<char>::eof())
      fail("trailing content after final sample record");
  }
  return series;
}

QuadratureSeries read_series(const std::string& path) {
  auto f = open_in(path);
  try {
    return read_series(f);
  } catch (const VersionError& e) {
    throw VersionError(path + ": " + e.what());
  } catch (const DataFormatError& e) {
    throw DataFormatError(path + ": " + e.what());
  }
}

void write_series(const QuadratureSeries& series, std::ostream& out,
                  SeriesEncoding encoding) {
  if (!std::isfinite(series.calibration_snu) || series.calibration_snu <= 0.0)
    throw std::invalid_argument(
        "write_series: calibration_snu must be positive and finite");
  for (std::size_t i = 0; i < series.samples.size(); ++i)
    if (!std::isfinite(series.samples[i]))
      throw std::invalid_argument("write_series: sample record " +
                                  std::to_string(i) + " is not finite");
  for (const auto& [key, value] : series.metadata) {
    if (key.empty() || key.find(':') != std::string::npos ||
        key.find('\n') != std::string::npos ||
        key.find('\r') != std::string::npos)
      throw std::invalid_argument("write_series: invalid metadata key '" + key +
                                  "'");
    if (is_reserved_key(key))
      throw std::invalid_argument("write_series: metadata key '" + key +
                                  "' is reserved");
    if (value.find('\n') != std::string::npos ||
        value.find('\r') != std::string::npos)
      throw std::invalid_argument("write_series: metadata value for '" + key +
                                  "' contains a line break");
  }

  out << "format_version: " << kSeriesFormatVersion << '\n';
  out << "quadrature: " << to_string(series.quadrature) << '\n';
  out << "calibration_snu: " << format_double(series.calibration_snu) << '\n';
  out << "count: " << series.samples.size() << '\n';
  out << "encoding: " << (encoding == SeriesEncoding::binary ? "binary" : "text")
      << '\n';
  for (const auto& [key, value] : series.metadata)
    out << key << ": " << value << '\n';
  out << '\n';

  if (encoding == SeriesEncoding::binary) {
    if (!series.samples.empty())
      out.write(reinterpret_cast<const char*>(series.samples.data()),
                static_cast<std::streamsize>(series.samples.size() *
                                             sizeof(double)));
  } else {
    for (const double v : series.samples) out << format_double(v) << '\n';
  }
  if (!out) fail("series write failed");
}

void write_series(const QuadratureSeries& series, const std::string& path,
                  SeriesEncoding encoding) {
  auto f = open_out(path);
  write_series(series, f, encoding);
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string series_digest(const QuadratureSeries& series) {
  const auto* data =
      reinterpret_cast<const unsigned char*>(series.samples.data());
  const std::uint64_t h =
      fnv1a64({data, series.samples.size() * sizeof(double)});
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

void to_json(nlohmann::json& j, const WitnessResult& r) {
  j = nlohmann::json{{"distance_S", r.distance_S}, {"delta", r.delta},
                     {"ave_var_x", r.ave_var_x},   {"var_p", r.var_p},
                     {"lhs", r.lhs},               {"violated", r.violated}};
  if (r.uncertainty_lhs) j["uncertainty_lhs"] = *r.uncertainty_lhs;
}

void to_json(nlohmann::json& j, const SmaxResult& r) {
  j = nlohmann::json{{"s_max", r.s_max},
                     {"status", to_string(r.status)},
                     {"ceiling_shrunk", r.ceiling_shrunk},
                     {"search_ceiling", r.search_ceiling},
                     {"degenerate_redraws", r.degenerate_redraws}};
  if (r.uncertainty) j["uncertainty"] = *r.uncertainty;
}

void to_json(nlohmann::json& j, const RegionStats& s) {
  j = nlohmann::json{{"prob", s.prob},     {"mean", s.mean},
                     {"var", s.var},       {"count", s.count},
                     {"mean_x", s.mean_x}, {"var_x", s.var_x},
                     {"center", s.center}, {"empirical", s.empirical}};
}

void to_json(nlohmann::json& j, const ContourGrid& g) {
  nlohmann::json rows = nlohmann::json::array();
  const std::size_t n_db = g.squeezing_db.size();
  for (std::size_t i = 0; i < g.purity.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t jj = 0; jj < n_db; ++jj)
      row.push_back(g.s_max[i * n_db + jj]);
    rows.push_back(std::move(row));
  }
  j = nlohmann::json{{"squeezing_db", g.squeezing_db},
                     {"purity", g.purity},
                     {"s_max", std::move(rows)}};
}

void to_json(nlohmann::json& j, const Histogram& h) {
  j = nlohmann::json{{"edges", h.edges},
                     {"density", h.density},
                     {"count", h.count},
                     {"empty", h.empty}};
}

void to_json(nlohmann::json& j, const RegionHistograms& h) {
  j = nlohmann::json{{"bin_width", h.bin_width},
                     {"full", h.full},
                     {"neg", h.neg},
                     {"mid", h.mid},
                     {"pos", h.pos}};
}

void to_json(nlohmann::json& j, const CurvePoint& p) {
  j = nlohmann::json{{"distance_S", p.distance_S}, {"lhs", p.lhs}};
}

nlohmann::json make_document(const std::string& kind, nlohmann::json inputs,
                             nlohmann::json results) {
  return nlohmann::json{{"schema_version", kResultSchemaVersion},
                        {"kind", kind},
                        {"convention", kConventionNote},
                        {"inputs", std::move(inputs)},
                        {"results", std::move(results)}};
}

void write_document(const nlohmann::json& doc, std::ostream& out) {
  out << doc.dump(2) << '\n';
  if (!out) fail("result document write failed");
}

void write_document(const nlohmann::json& doc, const std::string& path) {
  auto f = open_out(path);
  write_document(doc, f);
}

nlohmann::json read_document(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(std::string("malformed result document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version"))
    fail("result document lacks a schema_version field");
  const auto& sv = doc["schema_version"];
  if (!sv.is_number_integer() || sv.get<int>() != kResultSchemaVersion)
    throw VersionError("result document schema_version " + sv.dump() +
                       "; this reader handles " +
                       std::to_string(kResultSchemaVersion));
  return doc;
}

nlohmann::json read_document(const std::string& path) {
  auto f = open_in(path);
  try {
    return read_document(f);
  } catch (const VersionError& e) {
    throw VersionError(path + ": " + e.what());
  } catch (const DataFormatError& e) {
    throw DataFormatError(path + ": " + e.what());
  }
}

void write_result(const WitnessResult& result, const nlohmann::json& inputs,
                  const std::string& path) {
  write_document(make_document("witness", inputs, result), path);
}

void write_result(const SmaxResult& result, const nlohmann::json& inputs,
                  const std::string& path) {
  write_document(make_document("smax", inputs, result), path);
}

void write_result(const ContourGrid& grid, const nlohmann::json& inputs,
                  const std::string& path) {
  write_document(make_document("contour", inputs, grid), path);
}

void write_contour_csv(const ContourGrid& grid, std::ostream& out) {
  const std::size_t n_db = grid.squeezing_db.size();
  if (grid.s_max.size() != n_db * grid.purity.size())
    throw std::invalid_argument("write_contour_csv: grid shape mismatch");
  out << "squeezing_db,purity,s_max\n";
  for (std::size_t i = 0; i < grid.purity.size(); ++i)
    for (std::size_t j = 0; j < n_db; ++j)
      out << format_double(grid.squeezing_db[j]) << ','
          << format_double(grid.purity[i]) << ','
          << format_double(grid.s_max[i * n_db + j]) << '\n';
  if (!out) fail("contour table write failed");
}

void write_contour_csv(const ContourGrid& grid, const std::string& path) {
  auto f = open_out(path);
  write_contour_csv(grid, f);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

ContourGrid read_contour_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail("empty contour table");
  strip_cr(line);
  if (line != "squeezing_db,purity,s_max")
    fail("contour table header mismatch: '" + line + "'");

  std::vector<std::array<double, 3>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    const auto fields = split_fields(line);
    if (fields.size() != 3)
      fail("line " + std::to_string(lineno) + ": expected 3 fields");
    std::array<double, 3> row{};
    for (int k = 0; k < 3; ++k) {
      try {
        row[k] = parse_double(fields[k]);
      } catch (const DataFormatError&) {
        fail("line " + std::to_string(lineno) + ": malformed number '" +
             std::string(fields[k]) + "'");
      }
    }
    rows.push_back(row);
  }
  if (rows.empty()) fail("contour table has no data rows");

  ContourGrid grid;
  for (const auto& r : rows) {
    grid.squeezing_db.push_back(r[0]);
    grid.purity.push_back(r[1]);
  }
  const auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(grid.squeezing_db);
  uniq(grid.purity);

  const std::size_t n_db = grid.squeezing_db.size();
  const std::size_t n_purity = grid.purity.size();
  if (rows.size() != n_db * n_purity)
    fail("contour table is not a complete grid: " + std::to_string(rows.size()) +
         " rows for " + std::to_string(n_db) + "x" + std::to_string(n_purity) +
         " axes");
  grid.s_max.assign(n_db * n_purity,
                    std::numeric_limits<double>::quiet_NaN());
  const auto index_of = [](const std::vector<double>& axis, double v) {
    return static_cast<std::size_t>(
        std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
  };
  for (const auto& r : rows) {
    const std::size_t j = index_of(grid.squeezing_db, r[0]);
    const std::size_t i = index_of(grid.purity, r[1]);
    double& cell = grid.s_max[i * n_db + j];
    if (!std::isnan(cell)) fail("duplicate contour node in table");
    cell = r[2];
  }
  return grid;
}

ContourGrid read_contour_csv(const std::string& path) {
  auto f = open_in(path);
  try {
    return read_contour_csv(f);
  } catch (const DataFormatError& e) {
    throw DataFormatError(path + ": " + e.what());
  }
}

void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& out) {
  out << "distance_S,lhs\n";
  for (const auto& pt : curve)
    out << format_double(pt.distance_S) << ',' << format_double(pt.lhs)
        << '\n';
  if (!out) fail("curve table write failed");
}

void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::string& path) {
  auto f = open_out(path);
  write_curve_csv(curve, f);
}

void write_histograms_csv(const RegionHistograms& h, std::ostream& out) {
  out << "histogram,bin_lo,bin_hi,density\n";
  const std::pair<const char*, const Histogram*> parts[] = {
      {"full", &h.full}, {"neg", &h.neg}, {"mid", &h.mid}, {"pos", &h.pos}};
  for (const auto& [name, hist] : parts) {
    if (hist->empty) continue;
    for (std::size_t i = 0; i < hist->density.size(); ++i)
      out << name << ',' << format_double(hist->edges[i]) << ','
          << format_double(hist->edges[i + 1]) << ','
          << format_double(hist->density[i]) << '\n';
  }
  if (!out) fail("histogram table write failed");
}

void write_histograms_csv(const RegionHistograms& h, const std::string& path) {
  auto f = open_out(path);
  write_histograms_csv(h, f);
}

}  // namespace macrosup
