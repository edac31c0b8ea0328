#pragma once

// Executable versions of the two coalescent couplings:
//  - colored: labelled particles with a red/blue coloring (delta = 1 only);
//  - delta:   site-level interval splitting for 0 < delta <= 1.
// Both keep rho = (1/2) sum_i |k1_i - k2_i| non-increasing and check it at
// every step.

#include <cstdint>
#include <optional>
#include <vector>

#include "canon/kernel.hpp"
#include "canon/measures.hpp"
#include "canon/rng.hpp"

namespace canon {

enum class CouplingVariant { colored, delta };

int discrepancy(const Configuration& a, const Configuration& b);

enum class Color : std::uint8_t { blue, red };

// Two labelled-particle configurations omega1, omega2 : {0..k-1} -> {0..m-1}
// with a canonical coloring: in every level the lowest-labelled
// min(k1_i, k2_i) particles are blue, the rest red. The blue bijection Phi
// pairs the r-th blue particle of a level in omega1 with the r-th blue
// particle of the same level in omega2.
class ColoredPair {
 public:
  static ColoredPair from_configurations(const Configuration& x1, const Configuration& x2);

  const std::vector<int>& omega1() const noexcept { return omega1_; }
  const std::vector<int>& omega2() const noexcept { return omega2_; }
  const std::vector<Color>& colors1() const noexcept { return colors1_; }
  const std::vector<Color>& colors2() const noexcept { return colors2_; }
  const Configuration& config1() const noexcept { return occ1_; }
  const Configuration& config2() const noexcept { return occ2_; }
  int rho() const noexcept { return rho_; }

  // Phi(x) for a blue particle x of omega1.
  int partner(int x) const noexcept { return partner_[x]; }
  // Red particles of omega2 in label order.
  const std::vector<int>& reds2() const noexcept { return reds2_; }

  // Moves particle x of side (1 or 2) to level j without recoloring.
  void move(int side, int x, int j);
  // Recomputes occupancies, coloring, Phi and rho from omega1/omega2.
  void recolor();
  // Full recount of the blue/red conditions; throws CorruptedCoupling.
  void check_invariants() const;

 private:
  int k_ = 0;
  int m_ = 0;
  std::vector<int> omega1_, omega2_;
  std::vector<Color> colors1_, colors2_;
  std::vector<int> partner_;
  std::vector<int> reds2_;
  Configuration occ1_, occ2_;
  int rho_ = 0;
};

struct DeltaPair {
  Configuration x1;
  Configuration x2;
  int rho = 0;

  static DeltaPair from_configurations(const Configuration& x1, const Configuration& x2);
};

// Site-selection weights of the delta coupling: R1 = {k1 > k2}, R2 = {k2 > k1},
// B = {k1 = k2}.
struct DeltaWeights {
  double w1 = 0.0;   // R1, first configuration
  double w1p = 0.0;  // R2, first configuration
  double w2 = 0.0;   // R2, second configuration
  double w2p = 0.0;  // R1, second configuration
  double wB = 0.0;
};

DeltaWeights delta_weights(const ModelSpec& spec, const Configuration& x1, const Configuration& x2);

// Joint site draw of the delta coupling from two uniforms (u_site for I on
// [0, l_delta), u_resample for I' on T). -1 means "no site".
struct SiteChoice {
  int i1 = -1;
  int i2 = -1;
  bool shared = false;  // i1 == i2 and one uniform drives both moves
};

SiteChoice select_sites_delta(const ModelSpec& spec, const Configuration& x1, const Configuration& x2,
                              double u_site, double u_resample);

// Joint level draw of the colored coupling (levels of the chosen particles).
struct ParticleChoice {
  int x1 = 0;
  int x2 = 0;
  bool red = false;
};

ParticleChoice select_particles_colored(const ColoredPair& pair, RandomStream& rng);

// One coupled step. Draw budget per step: colored 5, delta 5.
void coupled_step_colored(const ModelSpec& spec, ColoredPair& pair, RandomStream& rng);
void coupled_step_delta(const ModelSpec& spec, DeltaPair& pair, RandomStream& rng);

// Either coupling behind one interface, for drivers that do not care which.
class CoupledChain {
 public:
  CoupledChain(const ModelSpec& spec, const Configuration& x1, const Configuration& x2,
               CouplingVariant variant, std::uint64_t seed);

  void step();
  int rho() const noexcept;
  const Configuration& config1() const noexcept;
  const Configuration& config2() const noexcept;
  std::int64_t time() const noexcept { return time_; }

 private:
  const ModelSpec* spec_;
  CouplingVariant variant_;
  std::optional<ColoredPair> colored_;
  std::optional<DeltaPair> delta_;
  RandomStream rng_;
  std::int64_t time_ = 0;
};

struct CouplingResult {
  std::optional<std::int64_t> tau;  // nullopt on timeout
  int final_rho = 0;
  std::vector<int> rho_trace;  // rho_0..rho_T when requested
};

CouplingResult coupling_time(const ModelSpec& spec, const Configuration& eta0, const Configuration& theta0,
                             std::uint64_t seed, std::int64_t max_t, CouplingVariant variant,
                             bool keep_trace = false);

// alpha of the contraction E[rho'] <= (1 - 1/alpha) rho.
double contraction_alpha(const ModelSpec& spec, CouplingVariant variant);

// Lower bound on P(rho decreases) from a pair with discrepancy rho.
double decrement_floor(const ModelSpec& spec, CouplingVariant variant, int rho);

struct RateCheck {
  double rate = 0.0;   // empirical P(rho' = rho - 1)
  double floor = 0.0;  // theoretical lower bound
  double sigma = 0.0;  // binomial standard error at the floor
  double mean_next_rho = 0.0;
  std::int64_t increases = 0;
  bool passed = false;  // rate >= floor - 4 sigma and no increase
};

RateCheck decrement_rate_check(const ModelSpec& spec, const Configuration& x1, const Configuration& x2,
                               CouplingVariant variant, std::int64_t samples, std::uint64_t seed);

}  // namespace canon
