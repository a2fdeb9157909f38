#include "macrosup/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "macrosup/rng.hpp"

namespace macrosup {

namespace {

constexpr std::size_t kChunkSize = 65536;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void fill_chunk(double* out, std::size_t n, std::uint64_t chunk_seed,
                double mean, double sigma) {
  std::mt19937_64 rng(chunk_seed);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::size_t i = 0;
  while (i < n) {
    const double u1 = 1.0 - detail::u01(rng());  // (0, 1]: log stays finite
    const double u2 = detail::u01(rng());
    const double r = std::sqrt(-2.0 * std::log(u1));
    out[i++] = mean + sigma * r * std::cos(two_pi * u2);
    if (i < n) out[i++] = mean + sigma * r * std::sin(two_pi * u2);
  }
}

std::vector<double> draw(std::size_t count, std::uint64_t seed,
                         std::uint64_t stream, double mean, double sigma,
                         unsigned threads) {
  std::vector<double> out(count);
  const std::size_t n_chunks = (count + kChunkSize - 1) / kChunkSize;
  const auto run_chunks = [&](std::size_t c_begin, std::size_t c_end) {
    for (std::size_t c = c_begin; c < c_end; ++c) {
      const std::size_t begin = c * kChunkSize;
      const std::size_t len = std::min(kChunkSize, count - begin);
      fill_chunk(out.data() + begin, len, detail::derive_seed(seed, stream, c),
                 mean, sigma);
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(
      1, std::min<std::size_t>(threads, n_chunks));
  if (n_workers == 1) {
    run_chunks(0, n_chunks);
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (n_chunks + n_workers - 1) / n_workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t b = std::min(w * per, n_chunks);
      const std::size_t e = std::min(b + per, n_chunks);
      pool.emplace_back(run_chunks, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace

QuadratureSeries sample_quadrature(const AcquisitionSpec& spec,
                                   unsigned threads) {
  require(spec.count >= 1, "sample_quadrature: count must be >= 1");
  require(std::isfinite(spec.efficiency) && spec.efficiency >= 0.0 &&
              spec.efficiency <= 1.0,
          "sample_quadrature: efficiency must lie in [0, 1]");

  const GaussianStateSpec lossy = apply_loss(spec.state, spec.efficiency);
  const bool is_x = spec.quadrature == Quadrature::x;
  const double mean = is_x ? lossy.mean_x : lossy.mean_p;
  const double sigma = std::sqrt(is_x ? lossy.var_x : lossy.var_p);
  const std::uint64_t stream =
      is_x ? detail::kStreamQuadratureX : detail::kStreamQuadratureP;

  QuadratureSeries series;
  series.quadrature = spec.quadrature;
  series.calibration_snu = 1.0;
  series.samples = draw(spec.count, spec.seed, stream, mean, sigma, threads);
  series.metadata["source"] = "simulation";
  series.metadata["seed"] = std::to_string(spec.seed);
  series.metadata["efficiency"] = format_number(spec.efficiency);
  series.metadata["state_mean_x"] = format_number(spec.state.mean_x);
  series.metadata["state_mean_p"] = format_number(spec.state.mean_p);
  series.metadata["state_var_x"] = format_number(spec.state.var_x);
  series.metadata["state_var_p"] = format_number(spec.state.var_p);
  if (spec.sideband_hz)
    series.metadata["sideband_hz"] = format_number(*spec.sideband_hz);
  if (spec.rbw_hz) series.metadata["rbw_hz"] = format_number(*spec.rbw_hz);
  return series;
}

JointSamples sample_joint(const GaussianStateSpec& state, std::size_t count,
                          std::uint64_t seed, unsigned threads) {
  require(count >= 1, "sample_joint: count must be >= 1");
  JointSamples joint;
  joint.x = draw(count, seed, detail::kStreamQuadratureX, state.mean_x,
                 std::sqrt(state.var_x), threads);
  joint.p = draw(count, seed, detail::kStreamQuadratureP, state.mean_p,
                 std::sqrt(state.var_p), threads);
  return joint;
}

}  // namespace macrosup
