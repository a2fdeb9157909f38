#include "macrosup/witness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "macrosup/errors.hpp"
#include "macrosup/rng.hpp"

namespace macrosup {

namespace {

constexpr double kBisectionTol = 1e-6;     // absolute, on S
constexpr double kBracketGrowth = 2.0;
constexpr double kBracketCapSigmas = 20.0;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

[[noreturn]] void throw_insufficient(int region, std::uint64_t have) {
  const char* name = region < 0 ? "-1" : (region > 0 ? "+1" : "0");
  throw InsufficientRegionSamples(
      region, "region " + std::string(name) + " holds " +
                  std::to_string(have) + " sample(s); need at least 2");
}

int region_index(int region) { return region + 1; }

}  // namespace

BinningSpec::BinningSpec(double S, double c) : distance_S(S), center(c) {
  require(std::isfinite(S) && S >= 0.0,
          "BinningSpec: distance_S must be finite and >= 0");
  require(std::isfinite(c), "BinningSpec: center must be finite");
}

BinningSpec BinningSpec::centered(double S, const GaussianStateSpec& state) {
  return BinningSpec(S, state.mean_x);
}

const char* to_string(SmaxStatus status) {
  switch (status) {
    case SmaxStatus::ok: return "ok";
    case SmaxStatus::no_violation_at_zero: return "no_violation_at_zero";
    case SmaxStatus::bracket_not_found: return "bracket_not_found";
  }
  return "unknown";
}

RegionStats region_stats_analytic(const GaussianStateSpec& state,
                                  const BinningSpec& bins) {
  RegionStats out;
  out.mean_x = state.mean_x;
  out.var_x = state.var_x;
  out.center = bins.center;
  out.empirical = false;

  // Work relative to the bin center so huge displacements cost no precision.
  const double mu = state.mean_x - bins.center;
  const double half = 0.5 * bins.distance_S;
  const double inf = std::numeric_limits<double>::infinity();

  const auto neg = truncated_moments(mu, state.var_x, -inf, -half);
  const auto pos = truncated_moments(mu, state.var_x, half, inf);
  if (!neg) throw_insufficient(-1, 0);
  if (!pos) throw_insufficient(+1, 0);
  out.prob[kRegionNeg] = neg->prob;
  out.mean[kRegionNeg] = neg->mean;
  out.var[kRegionNeg] = neg->var;
  out.prob[kRegionPos] = pos->prob;
  out.mean[kRegionPos] = pos->mean;
  out.var[kRegionPos] = pos->var;

  if (half > 0.0) {
    if (const auto mid = truncated_moments(mu, state.var_x, -half, half)) {
      out.prob[kRegionMid] = mid->prob;
      out.mean[kRegionMid] = mid->mean;
      out.var[kRegionMid] = mid->var;
    }
    // An underflowed middle region simply carries no probability.
  }
  return out;
}

RegionStats region_stats_empirical(const QuadratureSeries& samples,
                                   const BinningSpec& bins) {
  const auto& xs = samples.samples;
  const std::size_t n = xs.size();

  RegionStats out;
  out.center = bins.center;
  out.empirical = true;

  std::array<std::size_t, 3> cnt{};
  std::array<long double, 3> sum{};
  long double gsum = 0.0L;
  for (const double x : xs) {
    const int i = region_index(bins.region_of(x));
    const double rel = x - bins.center;
    ++cnt[i];
    sum[i] += rel;
    gsum += rel;
  }
  if (cnt[kRegionNeg] < 2) throw_insufficient(-1, cnt[kRegionNeg]);
  if (cnt[kRegionPos] < 2) throw_insufficient(+1, cnt[kRegionPos]);

  std::array<double, 3> mean{};
  for (int i = 0; i < 3; ++i)
    mean[i] = cnt[i] > 0 ? static_cast<double>(sum[i] / cnt[i]) : 0.0;
  const double gmean = static_cast<double>(gsum / n);

  std::array<long double, 3> ssq{};
  long double gssq = 0.0L;
  for (const double x : xs) {
    const int i = region_index(bins.region_of(x));
    const double rel = x - bins.center;
    const double d = rel - mean[i];
    ssq[i] += static_cast<long double>(d) * d;
    const double g = rel - gmean;
    gssq += static_cast<long double>(g) * g;
  }

  for (int i = 0; i < 3; ++i) {
    out.count[i] = cnt[i];
    out.prob[i] = static_cast<double>(cnt[i]) / static_cast<double>(n);
    out.mean[i] = mean[i];
    out.var[i] = cnt[i] > 1 ? static_cast<double>(ssq[i] / (cnt[i] - 1)) : 0.0;
  }
  out.mean_x = bins.center + gmean;
  out.var_x = n > 1 ? static_cast<double>(gssq / (n - 1)) : 0.0;
  return out;
}

double delta(const RegionStats& stats, double S) {
  const double half = 0.5 * S;
  const double dp = stats.mean[kRegionPos] + half;
  const double dm = stats.mean[kRegionNeg] - half;
  return dp * dp + dm * dm + 0.5 * S * S + stats.var[kRegionPos] +
         stats.var[kRegionNeg];
}

WitnessResult witness_lhs(const RegionStats& stats, double var_p, double S) {
  require(std::isfinite(var_p) && var_p > 0.0,
          "witness_lhs: var_p must be positive and finite");
  WitnessResult r{};
  r.distance_S = S;
  r.var_p = var_p;
  r.delta = delta(stats, S);
  r.ave_var_x = stats.prob[kRegionPos] * stats.var[kRegionPos] +
                stats.prob[kRegionNeg] * stats.var[kRegionNeg];
  r.lhs = (r.ave_var_x + stats.prob[kRegionMid] * r.delta) * var_p;
  r.violated = r.lhs < 1.0;
  return r;
}

NoCoherenceDiagnostic no_coherence_bound(const JointSamples& joint,
                                         const BinningSpec& bins) {
  const std::size_t n = joint.x.size();
  require(n == joint.p.size(),
          "no_coherence_bound: x and p sample lists differ in length");
  require(n >= 2, "no_coherence_bound: need at least two joint samples");

  std::array<std::size_t, 3> cnt{};
  std::array<long double, 3> sum{};
  long double gsum = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const int i = region_index(bins.region_of(joint.x[k]));
    ++cnt[i];
    sum[i] += joint.p[k];
    gsum += joint.p[k];
  }
  for (int i = 0; i < 3; ++i)
    if (cnt[i] == 1) throw_insufficient(i - 1, 1);

  std::array<double, 3> mean{};
  for (int i = 0; i < 3; ++i)
    mean[i] = cnt[i] > 0 ? static_cast<double>(sum[i] / cnt[i]) : 0.0;
  const double gmean = static_cast<double>(gsum / n);

  std::array<long double, 3> ssq{};
  long double gssq = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const int i = region_index(bins.region_of(joint.x[k]));
    const double d = joint.p[k] - mean[i];
    ssq[i] += static_cast<long double>(d) * d;
    const double g = joint.p[k] - gmean;
    gssq += static_cast<long double>(g) * g;
  }

  NoCoherenceDiagnostic out{};
  out.region_counts = cnt;
  out.var_p_mixed = static_cast<double>(gssq / (n - 1));
  double weighted = 0.0;
  int used = 0;
  for (int i = 0; i < 3; ++i) {
    if (cnt[i] < 2) continue;
    ++used;
    const double var_i = static_cast<double>(ssq[i] / (cnt[i] - 1));
    weighted += (static_cast<double>(cnt[i]) / static_cast<double>(n)) * var_i;
  }
  out.weighted_var_p = weighted;
  out.slack = out.var_p_mixed - out.weighted_var_p;
  out.std_error = out.var_p_mixed *
                  std::sqrt(2.0 * std::max(used - 1, 1)) /
                  static_cast<double>(n);
  return out;
}

namespace detail {

SmaxResult find_crossing(const std::function<double(double)>& lhs_at,
                         double sigma_x) {
  SmaxResult result;
  const double cap = kBracketCapSigmas * sigma_x;
  result.search_ceiling = cap;

  const double f0 = lhs_at(0.0);
  if (f0 >= 1.0) {
    result.status = SmaxStatus::no_violation_at_zero;
    result.search_ceiling = 0.0;
    return result;
  }

  const auto bisect = [&](double lo, double hi) {
    while (hi - lo > kBisectionTol) {
      const double mid = 0.5 * (lo + hi);
      if (lhs_at(mid) < 1.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  double lo = 0.0;
  double hi = sigma_x;
  while (true) {
    double f_hi;
    try {
      f_hi = lhs_at(hi);
    } catch (const InsufficientRegionSamples&) {
      // The data ran out before S reached `hi`. Evaluability only shrinks
      // with S, so binary-search the frontier and decide there.
      result.ceiling_shrunk = true;
      double good = lo;
      double f_good = f0;
      double bad = hi;
      while (bad - good > kBisectionTol) {
        const double mid = 0.5 * (good + bad);
        try {
          const double f = lhs_at(mid);
          good = mid;
          f_good = f;
          if (f >= 1.0) break;
        } catch (const InsufficientRegionSamples&) {
          bad = mid;
        }
      }
      result.search_ceiling = good;
      if (f_good >= 1.0) {
        result.s_max = bisect(lo, good);
        result.status = SmaxStatus::ok;
      } else {
        // Violated all the way to the data's edge: report the largest S
        // actually confirmed rather than a root.
        result.s_max = good;
        result.status = SmaxStatus::bracket_not_found;
      }
      return result;
    }

    if (f_hi >= 1.0) {
      result.s_max = bisect(lo, hi);
      result.status = SmaxStatus::ok;
      return result;
    }
    if (hi >= cap) {
      result.s_max = hi;  // largest S confirmed violated
      result.status = SmaxStatus::bracket_not_found;
      return result;
    }
    lo = hi;
    hi = std::min(hi * kBracketGrowth, cap);
  }
}

}  // namespace detail

SmaxResult smax_analytic(const GaussianStateSpec& state,
                         std::optional<double> center) {
  const double c = center.value_or(state.mean_x);
  const auto lhs_at = [&](double S) {
    return witness_lhs(region_stats_analytic(state, BinningSpec(S, c)),
                       state.var_p, S)
        .lhs;
  };
  return detail::find_crossing(lhs_at, std::sqrt(state.var_x));
}

double sample_mean(std::span<const double> values) {
  require(!values.empty(), "sample_mean: empty sample list");
  long double s = 0.0L;
  for (const double v : values) s += v;
  return static_cast<double>(s / values.size());
}

double sample_variance(std::span<const double> values, double mean) {
  require(values.size() >= 2, "sample_variance: need at least two samples");
  long double s = 0.0L;
  for (const double v : values) {
    const double d = v - mean;
    s += static_cast<long double>(d) * d;
  }
  return static_cast<double>(s / (values.size() - 1));
}

// ---------------------------------------------------------------------------
// Empirical engine: sorted samples plus prefix sums make every re-binning of
// the same data O(log N), which is what keeps the bootstrap affordable.

namespace {

struct PrefixView {
  const double* xs;         // sorted values, centered at the reference center
  std::size_t n;            // base sample count
  const std::uint32_t* w;   // resample counts among first k values; null = identity
  const double* p1;         // resampled prefix sums of x
  const double* p2;         // resampled prefix sums of x^2
  std::uint64_t total;      // resample size (== n when w is null)
};

struct RegionAgg {
  std::uint64_t cnt;
  double mean_rel;
  double var;
};

RegionAgg aggregate(const PrefixView& v, std::size_t i0, std::size_t i1,
                    double shift) {
  const std::uint64_t c0 = v.w ? v.w[i0] : i0;
  const std::uint64_t c1 = v.w ? v.w[i1] : i1;
  const std::uint64_t cnt = c1 - c0;
  if (cnt == 0) return {0, 0.0, 0.0};
  const double s1 = v.p1[i1] - v.p1[i0];
  const double s2 = v.p2[i1] - v.p2[i0];
  const double mean_abs = s1 / static_cast<double>(cnt);
  double var = 0.0;
  if (cnt > 1) {
    const long double ss =
        static_cast<long double>(s2) -
        static_cast<long double>(s1) * s1 / static_cast<double>(cnt);
    var = static_cast<double>(ss) / static_cast<double>(cnt - 1);
    if (var < 0.0) var = 0.0;
  }
  return {cnt, mean_abs - shift, var};
}

double lhs_from_prefix(const PrefixView& v, double S, double shift,
                       double var_p) {
  const double half = 0.5 * S;
  const double* first = v.xs;
  const double* last = v.xs + v.n;
  const std::size_t i_pos = std::lower_bound(first, last, shift + half) - first;
  std::size_t i_neg = std::upper_bound(first, last, shift - half) - first;
  // With S = 0 the two cuts coincide; boundary samples belong to +1.
  i_neg = std::min(i_neg, i_pos);

  const RegionAgg neg = aggregate(v, 0, i_neg, shift);
  const RegionAgg pos = aggregate(v, i_pos, v.n, shift);
  if (neg.cnt < 2) throw_insufficient(-1, neg.cnt);
  if (pos.cnt < 2) throw_insufficient(+1, pos.cnt);

  const double total = static_cast<double>(v.total);
  const double prob_n = static_cast<double>(neg.cnt) / total;
  const double prob_p = static_cast<double>(pos.cnt) / total;
  const double prob_0 = 1.0 - prob_n - prob_p;

  const double dp = pos.mean_rel + half;
  const double dm = neg.mean_rel - half;
  const double d = dp * dp + dm * dm + 0.5 * S * S + pos.var + neg.var;
  return (prob_p * pos.var + prob_n * neg.var + prob_0 * d) * var_p;
}

struct EmpiricalEngine {
  std::vector<double> xs;   // sorted, centered
  std::vector<double> p1;   // plain prefix sums over xs
  std::vector<double> p2;
  std::vector<double> pc;   // p samples, centered at their own mean
  double center_fixed;      // absolute reference center subtracted from xs
  bool recenter;            // re-center each bootstrap resample on its mean
  double var_p;
  double sigma_x;

  PrefixView plain_view() const {
    return {xs.data(), xs.size(), nullptr, p1.data(), p2.data(), xs.size()};
  }
};

EmpiricalEngine make_engine(const QuadratureSeries& x_samples,
                            const QuadratureSeries& p_samples,
                            std::optional<double> center) {
  require(!x_samples.samples.empty(), "x-series is empty");
  require(p_samples.samples.size() >= 2,
          "p-series needs at least two samples");

  EmpiricalEngine e;
  e.recenter = !center.has_value();
  e.center_fixed = center.value_or(sample_mean(x_samples.samples));

  e.xs.resize(x_samples.samples.size());
  for (std::size_t i = 0; i < e.xs.size(); ++i)
    e.xs[i] = x_samples.samples[i] - e.center_fixed;
  std::sort(e.xs.begin(), e.xs.end());

  const std::size_t n = e.xs.size();
  e.p1.resize(n + 1);
  e.p2.resize(n + 1);
  e.p1[0] = e.p2[0] = 0.0;
  long double a1 = 0.0L, a2 = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    a1 += e.xs[i];
    a2 += static_cast<long double>(e.xs[i]) * e.xs[i];
    e.p1[i + 1] = static_cast<double>(a1);
    e.p2[i + 1] = static_cast<double>(a2);
  }

  const double pm = sample_mean(p_samples.samples);
  e.var_p = sample_variance(p_samples.samples, pm);
  e.pc.resize(p_samples.samples.size());
  for (std::size_t i = 0; i < e.pc.size(); ++i)
    e.pc[i] = p_samples.samples[i] - pm;

  const double xm = n >= 2 ? sample_mean(e.xs) : 0.0;
  e.sigma_x = n >= 2 ? std::sqrt(sample_variance(e.xs, xm)) : 1.0;
  return e;
}

// One bootstrap worker's scratch space, reused across resamples.
struct ResampleBuffers {
  std::vector<double> exps;
  std::vector<std::uint32_t> w;
  std::vector<double> p1;
  std::vector<double> p2;
};

// Draws a multinomial resample of the n sorted base values via the
// exponential-spacings representation of n sorted uniforms, filling prefix
// snapshots (w, p1, p2) at every base index. Sequential memory access only.
// Returns the resample mean.
double resample_prefix(std::mt19937_64& rng, const std::vector<double>& xs,
                       ResampleBuffers& buf) {
  const std::size_t n = xs.size();
  double total = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double e = -std::log(1.0 - detail::u01(rng()));
    buf.exps[i] = e;
    total += e;
  }
  const double scale = static_cast<double>(n) / total;
  buf.w[0] = 0;
  buf.p1[0] = 0.0;
  buf.p2[0] = 0.0;
  std::size_t cell = 0;  // last snapshot boundary written
  std::uint32_t cnt = 0;
  double acc1 = 0.0, acc2 = 0.0;
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += buf.exps[i];
    std::size_t j = static_cast<std::size_t>(t * scale);
    if (j >= n) j = n - 1;
    while (cell < j) {
      ++cell;
      buf.w[cell] = cnt;
      buf.p1[cell] = acc1;
      buf.p2[cell] = acc2;
    }
    ++cnt;
    acc1 += xs[j];
    acc2 += xs[j] * xs[j];
  }
  while (cell < n) {
    ++cell;
    buf.w[cell] = cnt;
    buf.p1[cell] = acc1;
    buf.p2[cell] = acc2;
  }
  return acc1 / static_cast<double>(n);
}

// Unbiased variance of a multinomial resample of pc (already centered).
double resample_variance(std::mt19937_64& rng, const std::vector<double>& pc,
                         std::vector<double>& exps) {
  const std::size_t n = pc.size();
  double total = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double e = -std::log(1.0 - detail::u01(rng()));
    exps[i] = e;
    total += e;
  }
  const double scale = static_cast<double>(n) / total;
  double t = 0.0;
  long double s1 = 0.0L, s2 = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    t += exps[i];
    std::size_t j = static_cast<std::size_t>(t * scale);
    if (j >= n) j = n - 1;
    s1 += pc[j];
    s2 += static_cast<long double>(pc[j]) * pc[j];
  }
  const long double ss = s2 - s1 * s1 / static_cast<double>(n);
  return static_cast<double>(ss) / static_cast<double>(n - 1);
}

struct BootstrapRun {
  std::vector<double> stats;
  std::size_t redraws = 0;
};

BootstrapRun run_bootstrap(const EmpiricalEngine& engine,
                           const BootstrapOptions& options) {
  require(options.resamples >= 100,
          "bootstrap_uncertainty: need at least 100 resamples");
  if (options.statistic == BootstrapStatistic::lhs)
    require(std::isfinite(options.distance_S) && options.distance_S >= 0.0,
            "bootstrap_uncertainty: distance_S must be finite and >= 0");

  const std::size_t nx = engine.xs.size();
  const std::size_t np = engine.pc.size();
  require(nx >= 4, "bootstrap_uncertainty: too few x samples");

  const std::size_t B = options.resamples;
  BootstrapRun run;
  run.stats.assign(B, 0.0);
  std::vector<std::size_t> redraws_per_worker;

  const unsigned n_workers =
      std::max(1u, std::min<unsigned>(options.threads,
                                      static_cast<unsigned>(B)));
  redraws_per_worker.assign(n_workers, 0);

  const auto worker = [&](unsigned wi, std::size_t k_begin, std::size_t k_end) {
    ResampleBuffers buf;
    buf.exps.resize(std::max(nx, np) + 1);
    buf.w.resize(nx + 1);
    buf.p1.resize(nx + 1);
    buf.p2.resize(nx + 1);

    for (std::size_t k = k_begin; k < k_end; ++k) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt >= 1000)
          throw NumericError(
              "bootstrap: resample " + std::to_string(k) +
              " kept emptying an outer region after 1000 redraws");
        const std::uint64_t idx = k + (attempt << 32);
        std::mt19937_64 rng_x(
            detail::derive_seed(options.seed, detail::kStreamBootstrapX, idx));
        std::mt19937_64 rng_p(
            detail::derive_seed(options.seed, detail::kStreamBootstrapP, idx));

        const double mean_k = resample_prefix(rng_x, engine.xs, buf);
        const double var_p_k = resample_variance(rng_p, engine.pc, buf.exps);
        const double shift = engine.recenter ? mean_k : 0.0;

        PrefixView view{engine.xs.data(), nx, buf.w.data(), buf.p1.data(),
                        buf.p2.data(), nx};
        try {
          if (options.statistic == BootstrapStatistic::lhs) {
            run.stats[k] =
                lhs_from_prefix(view, options.distance_S, shift, var_p_k);
          } else {
            const long double ss =
                static_cast<long double>(buf.p2[nx]) -
                static_cast<long double>(buf.p1[nx]) * buf.p1[nx] /
                    static_cast<double>(nx);
            const double sigma_k = std::sqrt(
                std::max(0.0, static_cast<double>(ss) /
                                  static_cast<double>(nx - 1)));
            const auto lhs_at = [&](double S) {
              return lhs_from_prefix(view, S, shift, var_p_k);
            };
            const SmaxResult r = detail::find_crossing(lhs_at, sigma_k);
            if (r.status != SmaxStatus::ok) {
              ++redraws_per_worker[wi];
              continue;
            }
            run.stats[k] = r.s_max;
          }
        } catch (const InsufficientRegionSamples&) {
          ++redraws_per_worker[wi];
          continue;
        }
        break;
      }
    }
  };

  if (n_workers == 1) {
    worker(0, 0, B);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t per = (B + n_workers - 1) / n_workers;
    for (unsigned wi = 0; wi < n_workers; ++wi) {
      const std::size_t b = std::min<std::size_t>(wi * per, B);
      const std::size_t e = std::min<std::size_t>(b + per, B);
      pool.emplace_back([&, wi, b, e] {
        try {
          worker(wi, b, e);
        } catch (...) {
          const std::lock_guard<std::mutex> lk(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (const std::size_t r : redraws_per_worker) run.redraws += r;
  return run;
}

double standard_deviation(const std::vector<double>& v) {
  const double m = sample_mean(v);
  return std::sqrt(sample_variance(v, m));
}

}  // namespace

BootstrapResult bootstrap_uncertainty(const QuadratureSeries& x_samples,
                                      const QuadratureSeries& p_samples,
                                      const BootstrapOptions& options) {
  const EmpiricalEngine engine =
      make_engine(x_samples, p_samples, options.center);
  const BootstrapRun run = run_bootstrap(engine, options);
  BootstrapResult out;
  out.uncertainty = standard_deviation(run.stats);
  out.resamples = options.resamples;
  out.degenerate_redraws = run.redraws;
  return out;
}

SmaxResult smax_empirical(const QuadratureSeries& x_samples,
                          const QuadratureSeries& p_samples,
                          const SmaxOptions& options) {
  const EmpiricalEngine engine =
      make_engine(x_samples, p_samples, options.center);
  const PrefixView view = engine.plain_view();
  const auto lhs_at = [&](double S) {
    return lhs_from_prefix(view, S, 0.0, engine.var_p);
  };
  SmaxResult result = detail::find_crossing(lhs_at, engine.sigma_x);

  if (options.bootstrap_resamples > 0 && result.status == SmaxStatus::ok) {
    BootstrapOptions bo;
    bo.statistic = BootstrapStatistic::smax;
    bo.center = options.center;
    bo.resamples = options.bootstrap_resamples;
    bo.seed = options.seed;
    bo.threads = options.threads;
    const BootstrapRun run = run_bootstrap(engine, bo);
    result.uncertainty = standard_deviation(run.stats);
    result.degenerate_redraws = run.redraws;
  }
  return result;
}

std::vector<CurvePoint> theory_curve(const GaussianStateSpec& state,
                                     const std::vector<double>& s_grid) {
  std::vector<CurvePoint> out;
  out.reserve(s_grid.size());
  for (const double S : s_grid) {
    require(std::isfinite(S) && S >= 0.0,
            "theory_curve: grid values must be finite and >= 0");
    const BinningSpec bins = BinningSpec::centered(S, state);
    out.push_back(
        {S, witness_lhs(region_stats_analytic(state, bins), state.var_p, S).lhs});
  }
  return out;
}

ContourGrid contour_grid(double db_lo, double db_hi, std::size_t n_db,
                         double purity_lo, double purity_hi,
                         std::size_t n_purity) {
  require(n_db >= 1 && n_purity >= 1, "contour_grid: resolution must be >= 1");
  require(std::isfinite(db_lo) && std::isfinite(db_hi) && db_lo <= db_hi &&
              db_hi <= 0.0,
          "contour_grid: squeezing range must satisfy lo <= hi <= 0");
  require(purity_lo > 0.0 && purity_lo <= purity_hi && purity_hi <= 1.0,
          "contour_grid: purity range must satisfy 0 < lo <= hi <= 1");
  require(n_db > 1 || db_lo == db_hi,
          "contour_grid: a single squeezing column needs lo == hi");
  require(n_purity > 1 || purity_lo == purity_hi,
          "contour_grid: a single purity row needs lo == hi");

  ContourGrid grid;
  grid.squeezing_db.resize(n_db);
  grid.purity.resize(n_purity);
  for (std::size_t j = 0; j < n_db; ++j)
    grid.squeezing_db[j] =
        n_db == 1 ? db_lo
                  : db_lo + (db_hi - db_lo) * (static_cast<double>(j) /
                                               static_cast<double>(n_db - 1));
  for (std::size_t i = 0; i < n_purity; ++i)
    grid.purity[i] =
        n_purity == 1
            ? purity_lo
            : purity_lo + (purity_hi - purity_lo) *
                              (static_cast<double>(i) /
                               static_cast<double>(n_purity - 1));

  grid.s_max.resize(n_db * n_purity);
  for (std::size_t i = 0; i < n_purity; ++i) {
    for (std::size_t j = 0; j < n_db; ++j) {
      const auto state = from_squeezing_purity(
          SqueezingPuritySpec(grid.squeezing_db[j], grid.purity[i]));
      const SmaxResult r = smax_analytic(state);
      if (r.status == SmaxStatus::bracket_not_found)
        throw NumericError("contour_grid: no crossing below the search cap");
      grid.s_max[i * n_db + j] = r.status == SmaxStatus::ok ? r.s_max : 0.0;
    }
  }
  return grid;
}

namespace {

// Histogram over bins anchor + k*w (k may be negative); bins are [lo, hi).
Histogram histogram_upward(const std::vector<double>& vals, double anchor,
                           double w) {
  Histogram h;
  if (vals.empty()) return h;
  std::ptrdiff_t kmin = 0, kmax = 0;
  bool first = true;
  std::vector<std::ptrdiff_t> idx(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const auto k =
        static_cast<std::ptrdiff_t>(std::floor((vals[i] - anchor) / w));
    idx[i] = k;
    if (first || k < kmin) kmin = k;
    if (first || k > kmax) kmax = k;
    first = false;
  }
  const std::size_t nb = static_cast<std::size_t>(kmax - kmin + 1);
  h.density.assign(nb, 0.0);
  for (const auto k : idx) h.density[static_cast<std::size_t>(k - kmin)] += 1.0;
  const double norm = 1.0 / (static_cast<double>(vals.size()) * w);
  for (auto& d : h.density) d *= norm;
  h.edges.resize(nb + 1);
  for (std::size_t i = 0; i <= nb; ++i)
    h.edges[i] = anchor + static_cast<double>(kmin + static_cast<std::ptrdiff_t>(i)) * w;
  h.count = vals.size();
  h.empty = false;
  return h;
}

// Bins (anchor - (k+1)w, anchor - kw] counted downward from the anchor, then
// emitted in ascending order. Keeps the top edge of the negative region
// pinned at the anchor so boundary samples stay in their closed outer bin.
Histogram histogram_downward(const std::vector<double>& vals, double anchor,
                             double w) {
  Histogram h;
  if (vals.empty()) return h;
  std::ptrdiff_t kmin = 0, kmax = 0;
  bool first = true;
  std::vector<std::ptrdiff_t> idx(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const auto k =
        static_cast<std::ptrdiff_t>(std::floor((anchor - vals[i]) / w));
    idx[i] = k;
    if (first || k < kmin) kmin = k;
    if (first || k > kmax) kmax = k;
    first = false;
  }
  const std::size_t nb = static_cast<std::size_t>(kmax - kmin + 1);
  h.density.assign(nb, 0.0);
  for (const auto k : idx)
    h.density[static_cast<std::size_t>(kmax - k)] += 1.0;
  const double norm = 1.0 / (static_cast<double>(vals.size()) * w);
  for (auto& d : h.density) d *= norm;
  h.edges.resize(nb + 1);
  for (std::size_t i = 0; i <= nb; ++i)
    h.edges[i] =
        anchor - static_cast<double>(kmax + 1 - static_cast<std::ptrdiff_t>(i)) * w;
  h.count = vals.size();
  h.empty = false;
  return h;
}

}  // namespace

RegionHistograms region_histograms(const QuadratureSeries& samples,
                                   const BinningSpec& bins, double bin_width) {
  require(std::isfinite(bin_width) && bin_width > 0.0,
          "region_histograms: bin width must be positive and finite");

  std::vector<double> neg, mid, pos;
  for (const double x : samples.samples) {
    switch (bins.region_of(x)) {
      case -1: neg.push_back(x); break;
      case 0: mid.push_back(x); break;
      default: pos.push_back(x); break;
    }
  }

  const double half = 0.5 * bins.distance_S;
  RegionHistograms out;
  out.bin_width = bin_width;
  out.full = histogram_upward(samples.samples, bins.center, bin_width);
  out.neg = histogram_downward(neg, bins.center - half, bin_width);
  out.mid = histogram_upward(mid, bins.center - half, bin_width);
  out.pos = histogram_upward(pos, bins.center + half, bin_width);
  return out;
}

}  // namespace macrosup
