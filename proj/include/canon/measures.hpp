#pragma once

// Site potentials, their discrete calculus, and the conditional product
// model nu(k_1..k_m) ~ prod_j exp(phi_j(k_j)) on k_1 + ... + k_m = k.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "canon/ext_real.hpp"

namespace canon {

// Absolute tolerance for delta comparisons and monotonicity checks.
inline constexpr double kTol = 1e-12;

// One site's log-weight phi on {0..k}. Values outside the table are -inf.
class LevelPotential {
 public:
  // Validates interval support and log-concavity. `site` is only used in
  // error messages.
  static LevelPotential from_table(std::vector<ExtReal> phi, int site = 0);

  // Table plus a caller-supplied forward difference (used when a closed form
  // is more accurate than differencing). `grad` must have phi.size() - 1 entries.
  static LevelPotential from_table_and_grad(std::vector<ExtReal> phi, std::vector<ExtReal> grad,
                                            int site = 0);

  ExtReal operator()(int x) const noexcept {
    return (x < 0 || x >= static_cast<int>(phi_.size())) ? kNegInf : phi_[x];
  }

  // nabla^+ phi at x in 0..K-1: +inf below the support, -inf at/above its top.
  ExtReal grad(int x) const noexcept { return grad_[x]; }

  // -Delta_x phi = nabla^+_{x-1} phi - nabla^+_x phi for interior x, +inf where
  // a neighbour leaves the support.
  ExtReal neg_laplacian(int x) const;

  int table_size() const noexcept { return static_cast<int>(phi_.size()); }
  int support_lo() const noexcept { return lo_; }
  int support_hi() const noexcept { return hi_; }
  const std::vector<ExtReal>& table() const noexcept { return phi_; }

 private:
  std::vector<ExtReal> phi_;
  std::vector<ExtReal> grad_;
  int lo_ = 0;
  int hi_ = 0;
};

struct FermiSpec {
  int k = 0;
  int m = 0;
  double beta = 0.0;
  std::vector<double> v;
  std::vector<std::int64_t> n;

  std::int64_t volume() const;
};

struct DeltaResult {
  double delta = 1.0;
  // Site and interior index where the infimum is attained; -1 when delta == 1.
  int witness_site = -1;
  int witness_index = -1;
};

class ModelSpec {
 public:
  ModelSpec(int k, std::vector<LevelPotential> potentials, DeltaResult delta,
            std::optional<FermiSpec> fermi);

  int k() const noexcept { return k_; }
  int m() const noexcept { return m_; }
  const std::vector<LevelPotential>& potentials() const noexcept { return potentials_; }
  const LevelPotential& potential(int j) const noexcept { return potentials_[j]; }
  double delta() const noexcept { return delta_.delta; }
  const DeltaResult& delta_info() const noexcept { return delta_; }
  double l_delta() const noexcept { return l_delta_; }
  const std::optional<FermiSpec>& fermi() const noexcept { return fermi_; }

  // psi^[delta]_j(x) for x in -1..k-1; psi(-1) = +inf.
  ExtReal psi(int j, int x) const noexcept { return psi_[j * (k_ + 1) + x + 1]; }

  // Row pointer valid for indices -1..k-1.
  const ExtReal* psi_row(int j) const noexcept { return psi_.data() + j * (k_ + 1) + 1; }

  // x^delta for x in 0..k, with 0 -> 0 (also when delta == 0).
  double site_weight(int x) const noexcept { return weights_[x]; }

 private:
  int k_;
  int m_;
  std::vector<LevelPotential> potentials_;
  DeltaResult delta_;
  double l_delta_;
  std::optional<FermiSpec> fermi_;
  std::vector<ExtReal> psi_;
  std::vector<double> weights_;
};

// ln C(n, x) for x = 0..x_max by cumulative log sums; -inf where x > n.
std::vector<double> log_binomial_table(std::int64_t n, int x_max);

double l_delta_of(int k, int m, double delta);

ModelSpec build_fermi(const FermiSpec& spec);

ModelSpec build_custom(int k, int m, std::vector<std::vector<ExtReal>> phi_tables);

DeltaResult compute_delta(std::span<const LevelPotential> potentials, int k);

// Vacancy picture: k' = n - k particles, energies negated.
FermiSpec dualize(const FermiSpec& spec);

}  // namespace canon
