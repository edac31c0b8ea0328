#pragma once

// Ensemble estimation of mixing times on state spaces too large to
// enumerate: empirical measures of N independent chains, a reference built
// from the window (T, 2T] of two ensembles, free-entropy coarse-graining into
// M bins, the coarse TV series dbar(t) and the crossing time t_hat.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "canon/exact.hpp"
#include "canon/kernel.hpp"
#include "canon/measures.hpp"

namespace canon {

// floor(k m ln(k / eps)), at least 1.
std::int64_t horizon(int k, int m, double epsilon);

// ceil(0.05 T): how long a crossing must hold before it counts.
std::int64_t stability_window(std::int64_t T);

// [top candidate, saturated candidate]. The top candidate is (0,..,0,k) when
// level m can hold k particles, otherwise levels are filled from m downward.
// The saturated one fills levels by increasing energy up to n_j.
std::vector<Configuration> eta0_candidates(const FermiSpec& fermi);

// Same for any model: Fermi models defer to the overload above; custom
// models start from the support minima and fill from the top (first) or the
// bottom (second) level up to the support maxima.
std::vector<Configuration> eta0_candidates(const ModelSpec& spec);

struct CoarseBinning {
  double lo = 0.0;
  double hi = 0.0;
  double width = 1e-6;
  int bins = 1;

  bool degenerate() const noexcept { return !(hi > lo); }
  // Cell index on the whole real line, aligned to lo. The point hi belongs
  // to cell bins-1.
  std::int64_t cell(double phi) const;
  // Cell index clamped to -1 for every cell outside 0..bins-1.
  int bin(double phi) const;
  double cell_lo(int b) const { return lo + b * width; }
  double cell_hi(int b) const { return lo + (b + 1) * width; }
};

CoarseBinning coarse_bins(std::span<const double> samples, int bins);

// Probability vector over the bins; samples outside 0..bins-1 are not counted
// but still enter the denominator.
std::vector<double> binned_masses(const CoarseBinning& binning, std::span<const double> samples);

// Free-entropy values of `starts.size()` independent N-chain ensembles over
// t = T+1..2T, laid out [start][t - T - 1][chain].
std::vector<double> build_reference(const ModelSpec& spec, std::span<const Configuration> starts, int N,
                                    std::int64_t T, std::uint64_t seed, Exec exec = Exec::parallel);

// Coarse TV between the ensemble law at time t and `ref_mass`, for t = 0..t_max,
// from a fresh N-chain ensemble started at eta0.
std::vector<double> coarse_tv_series(const ModelSpec& spec, const Configuration& eta0, int N,
                                     std::int64_t t_max, const CoarseBinning& binning,
                                     std::span<const double> ref_mass, std::uint64_t seed,
                                     Exec exec = Exec::parallel);

struct MixingEstimate {
  std::int64_t t_hat = 0;
  bool mixed = false;
};

// First t with series[s] <= eps for every s in [t, min(t + window, end)].
// Never crossed: t_hat = last index, mixed = false.
MixingEstimate estimate_mixing(std::span<const double> series, double epsilon, std::int64_t window);

struct SimPlan {
  std::optional<FermiSpec> fermi;  // beta is overridden by `betas`
  std::optional<ModelSpec> custom;  // single run, betas ignored
  std::vector<double> betas{0.0};
  int N = 1024;
  int bins = 32;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  std::vector<Configuration> eta0;  // empty: eta0_candidates

  // Throws std::invalid_argument on N < 2, bins < 1, eps outside (0,1) or no model.
  void validate() const;
};

struct BetaRun {
  double beta = 0.0;
  std::int64_t T = 0;
  CoarseBinning binning;
  std::vector<double> ref_mass;
  std::vector<double> dbar;  // t = 0..2T, max over eta0
  MixingEstimate estimate;
  double bound = 0.0;
};

// Full pipeline for one model: reference, binning, dbar series, t_hat.
// `index` is mixed into every stream seed.
BetaRun estimate_dbar(const ModelSpec& spec, const SimPlan& plan, std::uint64_t index,
                      Exec exec = Exec::parallel);

// estimate_dbar for every beta of the plan (or once for a custom model).
std::vector<BetaRun> beta_sweep(const SimPlan& plan, Exec exec = Exec::parallel);

// desk (k=10, m=8), case1 and case2 (k=50, m=20).
SimPlan preset(std::string_view name);
std::vector<std::string> preset_names();

// Degeneracies of the case2 preset: 2^21 - 2 slots spread uniformly
// over 20 levels with a fixed seed.
std::vector<std::int64_t> case2_degeneracies();
inline constexpr std::uint64_t kCase2Seed = 20;

// 0 together with 1000^{i/50}, i = 1..50.
std::vector<double> default_beta_grid();

}  // namespace canon
