#pragma once

// The site/particle Metropolis-like kernel:
//   p(eta, eta^{ij}) = k_i^delta / l_delta * 1/m * exp(-[psi_i(k_i - 1) - psi_j(k_j)]^+)
// with the remaining mass on the diagonal. delta = 1 is the particle-uniform
// kernel; 0 < delta < 1 interpolates towards a site-uniform choice.

#include <compare>
#include <cstdint>
#include <vector>

#include "canon/measures.hpp"
#include "canon/rng.hpp"

namespace canon {

// Occupation vector (k_1, ..., k_m).
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<int> occ) : occ_(std::move(occ)) {}

  int operator[](int j) const noexcept { return occ_[j]; }
  int& operator[](int j) noexcept { return occ_[j]; }
  int m() const noexcept { return static_cast<int>(occ_.size()); }
  int total() const noexcept;
  const std::vector<int>& occupancy() const noexcept { return occ_; }

  // eta^{ij}: one particle from i to j.
  Configuration moved(int i, int j) const;

  auto operator<=>(const Configuration&) const = default;

 private:
  std::vector<int> occ_;
};

std::string to_string(const Configuration& eta);

// Sum of phi_j(k_j) is finite and the occupation sums to k.
bool is_positive(const ModelSpec& spec, const Configuration& eta);

// Binary sum tree over site weights k_i^delta: O(log m) update and draw.
// Every internal node is recomputed from its children on update, so the
// stored sums never drift.
class SiteSelector {
 public:
  SiteSelector() = default;
  SiteSelector(const ModelSpec& spec, const Configuration& eta);

  void set(int site, double weight) noexcept;
  double total() const noexcept { return tree_.empty() ? 0.0 : tree_[1]; }
  double weight(int site) const noexcept { return tree_[leaves_ + site]; }

  // Site whose cumulative interval contains s, for 0 <= s < total().
  int find(double s) const noexcept;

  bool consistent_with(const ModelSpec& spec, const Configuration& eta) const;

 private:
  int leaves_ = 0;
  int sites_ = 0;
  std::vector<double> tree_;
};

struct ChainState {
  Configuration config;
  SiteSelector selector;
  RandomStream rng;
  std::int64_t time = 0;

  // Exit law of the current configuration for skip-ahead stepping.
  bool exits_valid = false;
  double exit_mass = 0.0;
  std::vector<double> exit_cumulative;
  std::vector<std::pair<int, int>> exit_moves;

  static ChainState start(const ModelSpec& spec, Configuration eta, std::uint64_t seed);
};

double transition_prob(const ModelSpec& spec, const Configuration& eta, int i, int j);

// ln p(eta, eta^{ij}); -inf when the move is impossible.
double log_transition_prob(const ModelSpec& spec, const Configuration& eta, int i, int j);

double holding_prob(const ModelSpec& spec, const Configuration& eta);

// One step. Always consumes exactly three draws: site selector, target level,
// acceptance uniform. Returns true when the configuration changed.
bool step(const ModelSpec& spec, ChainState& state);

void run(const ModelSpec& spec, ChainState& state, std::int64_t steps);

struct SkipOutcome {
  std::int64_t elapsed = 0;
  bool absorbing = false;
};

// Jumps straight to the next distinct configuration. Consumes two draws
// (geometric holding time, exit move). On an absorbing configuration nothing
// is drawn and `absorbing` is set.
SkipOutcome skip_ahead_step(const ModelSpec& spec, ChainState& state);

// Advances state.time by exactly `steps` using skip-ahead jumps; the
// configuration at the end has the law of run(spec, state, steps).
void run_skip_ahead(const ModelSpec& spec, ChainState& state, std::int64_t steps);

}  // namespace canon
