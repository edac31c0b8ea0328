#pragma once

// Brute-force oracle on small state spaces: enumeration of X_{k,m}, exact nu,
// the transition matrix, d(t), t_eps, and reversibility checks.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "canon/kernel.hpp"
#include "canon/measures.hpp"

namespace canon {

inline constexpr std::size_t kDefaultStateCap = 200000;
// Matrix powers keep one dense row per start; this bounds that memory.
inline constexpr std::size_t kDefaultPowerCap = 3000;

enum class Exec { serial, parallel };

// C(k+m-1, m-1), in long double so large-model counts do not overflow.
long double count_states(int k, int m);

// All compositions of k into m parts, lexicographically ascending.
std::vector<Configuration> enumerate_states(int k, int m, std::size_t cap = kDefaultStateCap);

struct ExactDist {
  std::vector<Configuration> states;
  std::vector<double> probs;
  double log_Q = 0.0;
  std::map<Configuration, std::size_t> index;

  std::size_t index_of(const Configuration& eta) const { return index.at(eta); }
};

ExactDist exact_nu(const ModelSpec& spec, std::size_t cap = kDefaultStateCap);

// Kernel rows in compressed sparse form (each row has at most m(m-1)+1
// entries), plus the transpose for gather-style v*P products.
class TransitionMatrix {
 public:
  TransitionMatrix(const ModelSpec& spec, const ExactDist& dist);

  std::size_t size() const noexcept { return n_; }
  double at(std::size_t row, std::size_t col) const;
  std::vector<double> dense() const;
  double row_sum(std::size_t row) const;

  // out = v * P
  void apply_left(std::span<const double> v, std::span<double> out) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> row_ptr_, col_;
  std::vector<double> val_;
  std::vector<std::size_t> t_ptr_, t_row_;
  std::vector<double> t_val_;
};

// Half-L1 distance with compensated summation.
double tv_distance(std::span<const double> p, std::span<const double> q);

// d(t) for t = 0..t_max, maximised over nu-positive starts.
std::vector<double> exact_d_series(const ModelSpec& spec, int t_max, Exec exec = Exec::parallel,
                                   std::size_t cap = kDefaultPowerCap);

double exact_d(const ModelSpec& spec, int t);

// t_eps for each requested epsilon; nullopt when not reached by t_cap.
std::vector<std::optional<std::int64_t>> exact_mixing_times(const ModelSpec& spec,
                                                            std::span<const double> epsilons,
                                                            std::int64_t t_cap,
                                                            Exec exec = Exec::parallel,
                                                            std::size_t cap = kDefaultPowerCap);

std::optional<std::int64_t> exact_mixing_time(const ModelSpec& spec, double epsilon,
                                              std::int64_t t_cap);

// (k ^ m)^{1-delta} / delta * k m ln(k / eps); the delta = 1 case is k m ln(k / eps).
double mixing_bound(const ModelSpec& spec, double epsilon);

// max over ordered pairs (eta, eta^{ij}) of nu-positive states of
// |nu(eta) p(eta, eta^{ij}) / (nu(eta^{ij}) p(eta^{ij}, eta)) - 1|, computed
// in log space with the product-form ratio nu(eta^{ij}) / nu(eta).
double check_detailed_balance(const ModelSpec& spec, std::size_t cap = kDefaultStateCap);

// || nu P - nu ||_inf
double stationarity_residual(const ModelSpec& spec, std::size_t cap = kDefaultStateCap);

}  // namespace canon
