#pragma once

// Auxiliary algorithms around the model: free entropy, the naive sequential
// sampler (wrong for k > 1, kept as a counterexample), the greedy
// most-probable configuration, and the rejection-sampling cost against a
// multinomial envelope.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "canon/exact.hpp"
#include "canon/kernel.hpp"
#include "canon/measures.hpp"
#include "canon/rng.hpp"

namespace canon {

// sum_j phi_j(k_j); -inf iff nu(eta) = 0.
ExtReal free_entropy(const ModelSpec& spec, const Configuration& eta);

// Places k particles one at a time, level j with probability proportional to
// exp(-beta v_j) times its remaining degeneracy.
Configuration naive_sample(const FermiSpec& fermi, RandomStream& rng);
Configuration naive_sample(const FermiSpec& fermi, std::uint64_t seed);

// Exact law of naive_sample by dynamic programming over partial placements.
std::map<Configuration, double> naive_law(const FermiSpec& fermi);

// TV distance between a sparse law and an exact distribution on the same space.
double tv_to_exact(const std::map<Configuration, double>& law, const ExactDist& dist);

struct MostProbable {
  std::vector<Configuration> configs;  // greedy output first
  ExtReal free_entropy = kNegInf;
};

// Greedy: add particles one by one where nabla^+ phi_j is largest, lowest j on
// ties. With all_maximizers the state space is enumerated and every maximizer
// is returned (ascending lexicographic order).
MostProbable most_probable(const ModelSpec& spec, bool all_maximizers = false,
                           std::size_t cap = kDefaultStateCap);

struct RejectionRatio {
  double ratio = 1.0;
  double log_ratio = 0.0;
  Configuration argmax;
};

// max over nu-positive eta of nu(eta) / M_q(eta), M_q the multinomial(k, q)
// law. Empty q means uniform.
RejectionRatio rejection_ratio(const ModelSpec& spec, std::span<const double> q = {},
                               std::size_t cap = kDefaultStateCap);

}  // namespace canon
