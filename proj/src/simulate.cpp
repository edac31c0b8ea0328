#include "canon/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "canon/analysis.hpp"
#include "canon/error.hpp"
#include "canon/rng.hpp"

namespace canon {

std::int64_t horizon(int k, int m, double epsilon) {
  if (k <= 0) return 1;
  const double t = std::floor(static_cast<double>(k) * m * std::log(k / epsilon));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(t));
}

std::int64_t stability_window(std::int64_t T) {
  return static_cast<std::int64_t>(std::ceil(0.05 * static_cast<double>(T)));
}

std::vector<Configuration> eta0_candidates(const FermiSpec& fermi) {
  if (fermi.volume() < fermi.k) throw InfeasibleModel("sum of degeneracies is smaller than k");
  const int m = fermi.m;
  std::vector<int> top(m, 0);
  int left = fermi.k;
  for (int j = m - 1; j >= 0 && left > 0; --j) {
    const int put = static_cast<int>(std::min<std::int64_t>(fermi.n[j], left));
    top[j] = put;
    left -= put;
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fermi.v[a] < fermi.v[b]; });
  std::vector<int> low(m, 0);
  left = fermi.k;
  for (int j : order) {
    if (left == 0) break;
    const int put = static_cast<int>(std::min<std::int64_t>(fermi.n[j], left));
    low[j] = put;
    left -= put;
  }
  return {Configuration(std::move(top)), Configuration(std::move(low))};
}

std::vector<Configuration> eta0_candidates(const ModelSpec& spec) {
  if (spec.fermi()) return eta0_candidates(*spec.fermi());
  const int m = spec.m();
  std::vector<int> base(m);
  int left = spec.k();
  for (int j = 0; j < m; ++j) {
    base[j] = spec.potential(j).support_lo();
    left -= base[j];
  }
  const auto fill = [&](bool from_top) {
    std::vector<int> occ = base;
    int rest = left;
    for (int s = 0; s < m && rest > 0; ++s) {
      const int j = from_top ? m - 1 - s : s;
      const int put = std::min(spec.potential(j).support_hi() - occ[j], rest);
      occ[j] += put;
      rest -= put;
    }
    return Configuration(std::move(occ));
  };
  return {fill(true), fill(false)};
}

std::int64_t CoarseBinning::cell(double phi) const {
  if (!degenerate() && phi >= lo && phi <= hi) {
    if (phi == hi) return bins - 1;
    // rounding can push a point just below hi into cell `bins`
    return std::min<std::int64_t>(bins - 1, static_cast<std::int64_t>(std::floor((phi - lo) / width)));
  }
  return static_cast<std::int64_t>(std::floor((phi - lo) / width));
}

int CoarseBinning::bin(double phi) const {
  const std::int64_t c = cell(phi);
  return (c < 0 || c >= bins) ? -1 : static_cast<int>(c);
}

CoarseBinning coarse_bins(std::span<const double> samples, int bins) {
  if (samples.empty()) throw std::invalid_argument("coarse_bins needs at least one sample");
  if (bins < 1) throw std::invalid_argument("bins must be positive");
  CoarseBinning b;
  b.bins = bins;
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (!std::isfinite(*mn) || !std::isfinite(*mx)) throw std::invalid_argument("coarse_bins needs finite samples");
  b.lo = *mn;
  b.hi = *mx;
  b.width = b.hi > b.lo ? (b.hi - b.lo) / bins : 1e-6;
  return b;
}

std::vector<double> binned_masses(const CoarseBinning& binning, std::span<const double> samples) {
  std::vector<std::int64_t> counts(binning.bins, 0);
  for (double phi : samples) {
    const int b = binning.bin(phi);
    if (b >= 0) ++counts[b];
  }
  std::vector<double> mass(binning.bins);
  const double n = static_cast<double>(samples.size());
  for (int b = 0; b < binning.bins; ++b) mass[b] = counts[b] / n;
  return mass;
}

namespace {

// Runs one chain for t_max steps, calling record(t, phi(X_t)) for t = 0..t_max.
template <class Record>
void trace_chain(const ModelSpec& spec, const Configuration& eta0, std::uint64_t seed, std::int64_t t_max,
                 Record&& record) {
  ChainState s = ChainState::start(spec, eta0, seed);
  double phi = free_entropy(spec, s.config);
  record(0, phi);
  for (std::int64_t t = 1; t <= t_max; ++t) {
    if (step(spec, s)) phi = free_entropy(spec, s.config);
    record(t, phi);
  }
}

}  // namespace

std::vector<double> build_reference(const ModelSpec& spec, std::span<const Configuration> starts, int N,
                                    std::int64_t T, std::uint64_t seed, Exec exec) {
  if (N < 1 || T < 1) throw std::invalid_argument("build_reference needs N >= 1 and T >= 1");
  const std::int64_t S = static_cast<std::int64_t>(starts.size());
  std::vector<double> out(static_cast<std::size_t>(S * T * N));
  const std::int64_t jobs = S * N;
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (std::int64_t job = 0; job < jobs; ++job) {
    const std::int64_t c = job / N;
    const std::int64_t l = job % N;
    const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(l)});
    double* base = out.data() + c * T * N;
    trace_chain(spec, starts[c], s, 2 * T, [&](std::int64_t t, double phi) {
      if (t > T) base[(t - T - 1) * N + l] = phi;
    });
  }
  return out;
}

std::vector<double> coarse_tv_series(const ModelSpec& spec, const Configuration& eta0, int N,
                                     std::int64_t t_max, const CoarseBinning& binning,
                                     std::span<const double> ref_mass, std::uint64_t seed, Exec exec) {
  if (N < 1) throw std::invalid_argument("coarse_tv_series needs N >= 1");
  if (static_cast<int>(ref_mass.size()) != binning.bins)
    throw std::invalid_argument("reference masses do not match the binning");
  const std::int64_t steps = t_max + 1;
  std::vector<std::int32_t> cells(static_cast<std::size_t>(steps * N));
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (int l = 0; l < N; ++l) {
    const std::uint64_t s = derive_seed(seed, {static_cast<std::uint64_t>(l)});
    trace_chain(spec, eta0, s, t_max, [&](std::int64_t t, double phi) { cells[t * N + l] = binning.bin(phi); });
  }
  std::vector<double> series(steps);
  std::vector<int> counts(binning.bins);
  for (std::int64_t t = 0; t < steps; ++t) {
    std::fill(counts.begin(), counts.end(), 0);
    int outside = 0;
    for (int l = 0; l < N; ++l) {
      const int b = cells[t * N + l];
      if (b < 0)
        ++outside;
      else
        ++counts[b];
    }
    double sum = static_cast<double>(outside) / N;
    for (int b = 0; b < binning.bins; ++b) sum += std::abs(static_cast<double>(counts[b]) / N - ref_mass[b]);
    series[t] = std::min(1.0, 0.5 * sum);
  }
  return series;
}

MixingEstimate estimate_mixing(std::span<const double> series, double epsilon, std::int64_t window) {
  const std::int64_t n = static_cast<std::int64_t>(series.size());
  if (n == 0) throw std::invalid_argument("empty series");
  std::int64_t run_start = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    if (series[s] > epsilon) {
      run_start = s + 1;
      continue;
    }
    if (s == std::min(run_start + window, n - 1)) return MixingEstimate{run_start, true};
  }
  return MixingEstimate{n - 1, false};
}

void SimPlan::validate() const {
  if (!fermi && !custom) throw std::invalid_argument("simulation plan has no model");
  if (N < 2) throw std::invalid_argument("N must be at least 2");
  if (bins < 1) throw std::invalid_argument("bins must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (fermi && !custom && betas.empty()) throw std::invalid_argument("empty beta list");
}

BetaRun estimate_dbar(const ModelSpec& spec, const SimPlan& plan, std::uint64_t index, Exec exec) {
  BetaRun run;
  run.beta = spec.fermi() ? spec.fermi()->beta : 0.0;
  run.T = horizon(spec.k(), spec.m(), plan.epsilon);
  const std::vector<Configuration> candidates = eta0_candidates(spec);
  const std::vector<Configuration>& starts = plan.eta0.empty() ? candidates : plan.eta0;
  for (const auto& eta : starts)
    if (!is_positive(spec, eta)) throw std::invalid_argument("start " + to_string(eta) + " has zero weight");

  const std::vector<double> ref =
      build_reference(spec, candidates, plan.N, run.T, derive_seed(plan.seed, {index, 0}), exec);
  run.binning = coarse_bins(ref, plan.bins);
  run.ref_mass = binned_masses(run.binning, ref);

  run.dbar.assign(static_cast<std::size_t>(2 * run.T + 1), 0.0);
  for (std::size_t e = 0; e < starts.size(); ++e) {
    const std::vector<double> tv = coarse_tv_series(spec, starts[e], plan.N, 2 * run.T, run.binning,
                                                    run.ref_mass, derive_seed(plan.seed, {index, 1, e}), exec);
    for (std::size_t t = 0; t < tv.size(); ++t) run.dbar[t] = std::max(run.dbar[t], tv[t]);
  }
  run.estimate = estimate_mixing(run.dbar, plan.epsilon, stability_window(run.T));
  run.bound = mixing_bound(spec, plan.epsilon);
  return run;
}

std::vector<BetaRun> beta_sweep(const SimPlan& plan, Exec exec) {
  plan.validate();
  std::vector<BetaRun> runs;
  if (plan.custom) {
    runs.push_back(estimate_dbar(*plan.custom, plan, 0, exec));
    return runs;
  }
  for (std::size_t b = 0; b < plan.betas.size(); ++b) {
    FermiSpec f = *plan.fermi;
    f.beta = plan.betas[b];
    runs.push_back(estimate_dbar(build_fermi(f), plan, b, exec));
  }
  return runs;
}

namespace {

FermiSpec geometric_profile(int k, int m) {
  FermiSpec f;
  f.k = k;
  f.m = m;
  for (int j = 1; j <= m; ++j) {
    f.v.push_back(static_cast<double>(j) / m);
    f.n.push_back(std::int64_t{1} << j);
  }
  return f;
}

}  // namespace

std::vector<std::int64_t> case2_degeneracies() {
  const int m = 20;
  const std::int64_t volume = (std::int64_t{1} << 21) - 2;
  RandomStream rng(derive_seed(kCase2Seed, {}));
  std::vector<std::int64_t> n(m, 0);
  for (std::int64_t s = 0; s < volume; ++s) ++n[rng.index(m)];
  return n;
}

SimPlan preset(std::string_view name) {
  SimPlan p;
  p.betas = {0.0, 4.0, 16.0, 63.0, 1000.0};
  if (name == "desk") {
    p.fermi = geometric_profile(10, 8);
    p.N = 256;
    p.bins = 16;
  } else if (name == "case1") {
    p.fermi = geometric_profile(50, 20);
  } else if (name == "case2") {
    FermiSpec f = geometric_profile(50, 20);
    f.n = case2_degeneracies();
    p.fermi = f;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return p;
}

std::vector<std::string> preset_names() { return {"desk", "case1", "case2"}; }

std::vector<double> default_beta_grid() {
  std::vector<double> betas{0.0};
  for (int i = 1; i <= 50; ++i) betas.push_back(std::pow(1000.0, i / 50.0));
  return betas;
}

}  // namespace canon
