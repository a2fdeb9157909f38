#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "macrosup/series.hpp"
#include "macrosup/witness.hpp"

namespace macrosup {

inline constexpr int kSeriesFormatVersion = 1;
inline constexpr int kResultSchemaVersion = 1;

// Stamped into every result document so a reader needs no side channel to
// interpret the numbers.
extern const char* const kConventionNote;

enum class SeriesEncoding { text, binary };

// --- quadrature series files ------------------------------------------------
//
// Canonical layout: a header of "key: value" lines (format_version,
// quadrature, calibration_snu, count, encoding — in that order — then
// metadata keys in sorted order), one blank line, then the samples: one
// shortest-round-trip decimal per line (text) or a little-endian binary64
// array (binary). Identical input yields identical bytes, and a write/read
// cycle reproduces every sample bit for bit.

QuadratureSeries read_series(std::istream& in);
QuadratureSeries read_series(const std::string& path);
void write_series(const QuadratureSeries& series, std::ostream& out,
                  SeriesEncoding encoding = SeriesEncoding::text);
void write_series(const QuadratureSeries& series, const std::string& path,
                  SeriesEncoding encoding = SeriesEncoding::text);

// --- content digests ----------------------------------------------------------

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

// "fnv1a64:<16 hex digits>" over the little-endian bytes of the samples;
// result documents reference their input data by this digest.
std::string series_digest(const QuadratureSeries& series);

// --- result documents (JSON, schema kResultSchemaVersion) -------------------

void to_json(nlohmann::json& j, const WitnessResult& r);
void to_json(nlohmann::json& j, const SmaxResult& r);
void to_json(nlohmann::json& j, const RegionStats& s);
void to_json(nlohmann::json& j, const ContourGrid& g);
void to_json(nlohmann::json& j, const Histogram& h);
void to_json(nlohmann::json& j, const RegionHistograms& h);
void to_json(nlohmann::json& j, const CurvePoint& p);

// Envelope shared by all result documents: schema_version, kind, the
// convention note, the echoed inputs, and the derived quantities.
nlohmann::json make_document(const std::string& kind, nlohmann::json inputs,
                             nlohmann::json results);

void write_document(const nlohmann::json& doc, std::ostream& out);
void write_document(const nlohmann::json& doc, const std::string& path);

// Parses a result document and validates its schema_version: VersionError on
// mismatch, DataFormatError on malformed JSON.
nlohmann::json read_document(std::istream& in);
nlohmann::json read_document(const std::string& path);

void write_result(const WitnessResult& result, const nlohmann::json& inputs,
                  const std::string& path);
void write_result(const SmaxResult& result, const nlohmann::json& inputs,
                  const std::string& path);
void write_result(const ContourGrid& grid, const nlohmann::json& inputs,
                  const std::string& path);

// --- delimited tables (comma-separated, one header row) ----------------------

void write_contour_csv(const ContourGrid& grid, std::ostream& out);
void write_contour_csv(const ContourGrid& grid, const std::string& path);
ContourGrid read_contour_csv(std::istream& in);
ContourGrid read_contour_csv(const std::string& path);

void write_curve_csv(const std::vector<CurvePoint>& curve, std::ostream& out);
void write_curve_csv(const std::vector<CurvePoint>& curve,
                     const std::string& path);

void write_histograms_csv(const RegionHistograms& h, std::ostream& out);
void write_histograms_csv(const RegionHistograms& h, const std::string& path);

// --- low-level helpers --------------------------------------------------------

// Shortest decimal that parses back to the same binary64.
std::string format_double(double v);

// Strict full-string parse; DataFormatError on anything left over.
double parse_double(std::string_view text);

}  // namespace macrosup
