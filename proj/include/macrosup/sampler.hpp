#pragma once

#include <cstdint>
#include <optional>

#include "macrosup/series.hpp"
#include "macrosup/snu.hpp"

namespace macrosup {

// Recipe for one simulated homodyne acquisition run.
struct AcquisitionSpec {
  GaussianStateSpec state;
  Quadrature quadrature = Quadrature::x;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  double efficiency = 1.0;
  // Acquisition-chain bookkeeping carried into metadata for parity with real
  // recordings; the samples themselves stay i.i.d.
  std::optional<double> sideband_hz;
  std::optional<double> rbw_hz;
};

// `count` i.i.d. normal draws of the chosen quadrature of
// apply_loss(spec.state, spec.efficiency), already shot-noise normalized.
// Deterministic in (seed, count): samples are produced in fixed-size chunks
// whose seeds derive from (master seed, stream, chunk index), so any thread
// count yields bit-identical output.
QuadratureSeries sample_quadrature(const AcquisitionSpec& spec,
                                   unsigned threads = 1);

// Independent (x, p) pairs with zero cross-covariance. Each marginal is
// bit-identical to sample_quadrature's output for the same state, count, and
// seed, because both draw from the same per-quadrature seed streams.
JointSamples sample_joint(const GaussianStateSpec& state, std::size_t count,
                          std::uint64_t seed, unsigned threads = 1);

}  // namespace macrosup
