#pragma once

#include <map>
#include <string>
#include <vector>

namespace macrosup {

enum class Quadrature { x, p };

const char* to_string(Quadrature q);

// A time series of quadrature samples, already normalized to shot-noise
// units: a vacuum series has sample variance ~ 1. `calibration_snu` records
// the variance divisor that was applied upstream. Metadata is free-form
// key/value (source, seed or instrument, sideband_hz, rbw_hz, timestamp, ...).
struct QuadratureSeries {
  std::vector<double> samples;
  Quadrature quadrature = Quadrature::x;
  double calibration_snu = 1.0;
  std::map<std::string, std::string> metadata;
};

// Conjugate-quadrature acquisitions taken in separate runs.
struct RunPair {
  QuadratureSeries x_series;
  QuadratureSeries p_series;
};

// Validates quadrature tags (x then p) and that the two runs share the same
// shot-noise calibration. Throws std::invalid_argument on mismatch.
RunPair make_run_pair(QuadratureSeries x_series, QuadratureSeries p_series);

// Paired phase-space samples; only a simulation can provide these, since real
// acquisitions measure the two quadratures in separate runs.
struct JointSamples {
  std::vector<double> x;
  std::vector<double> p;
};

}  // namespace macrosup
