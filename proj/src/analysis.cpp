#include "canon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "canon/error.hpp"

namespace canon {

ExtReal free_entropy(const ModelSpec& spec, const Configuration& eta) {
  ExtReal s = 0.0;
  for (int j = 0; j < spec.m(); ++j) {
    const ExtReal p = spec.potential(j)(eta[j]);
    if (p == kNegInf) return kNegInf;
    s += p;
  }
  return s;
}

namespace {

void check_feasible(const FermiSpec& f) {
  if (f.k < 0 || f.m <= 0 || static_cast<int>(f.v.size()) != f.m || static_cast<int>(f.n.size()) != f.m)
    throw std::invalid_argument("malformed Fermi specification");
  if (f.volume() < f.k) throw InfeasibleModel("sum of degeneracies is smaller than k");
}

// Placement probabilities for the next particle given the occupancy so far.
std::vector<double> placement_probs(const FermiSpec& f, const std::vector<int>& occ) {
  std::vector<double> lw(f.m, kNegInf);
  double top = kNegInf;
  for (int j = 0; j < f.m; ++j) {
    const std::int64_t left = f.n[j] - occ[j];
    if (left <= 0) continue;
    lw[j] = -f.beta * f.v[j] + std::log(static_cast<double>(left));
    top = std::max(top, lw[j]);
  }
  double z = 0.0;
  for (double& w : lw) {
    w = w == kNegInf ? 0.0 : std::exp(w - top);
    z += w;
  }
  for (double& w : lw) w /= z;
  return lw;
}

}  // namespace

Configuration naive_sample(const FermiSpec& fermi, RandomStream& rng) {
  check_feasible(fermi);
  std::vector<int> occ(fermi.m, 0);
  for (int p = 0; p < fermi.k; ++p) {
    const std::vector<double> probs = placement_probs(fermi, occ);
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = -1;
    for (int j = 0; j < fermi.m; ++j) {
      if (probs[j] <= 0.0) continue;
      pick = j;
      acc += probs[j];
      if (u < acc) break;
    }
    ++occ[pick];
  }
  return Configuration(std::move(occ));
}

Configuration naive_sample(const FermiSpec& fermi, std::uint64_t seed) {
  RandomStream rng(seed);
  return naive_sample(fermi, rng);
}

std::map<Configuration, double> naive_law(const FermiSpec& fermi) {
  check_feasible(fermi);
  std::map<Configuration, double> layer{{Configuration(std::vector<int>(fermi.m, 0)), 1.0}};
  for (int p = 0; p < fermi.k; ++p) {
    std::map<Configuration, double> next;
    for (const auto& [eta, mass] : layer) {
      const std::vector<double> probs = placement_probs(fermi, eta.occupancy());
      for (int j = 0; j < fermi.m; ++j) {
        if (probs[j] <= 0.0) continue;
        Configuration up = eta;
        ++up[j];
        next[up] += mass * probs[j];
      }
    }
    layer = std::move(next);
  }
  return layer;
}

double tv_to_exact(const std::map<Configuration, double>& law, const ExactDist& dist) {
  std::vector<double> p(dist.states.size(), 0.0);
  double outside = 0.0;
  for (const auto& [eta, mass] : law) {
    auto it = dist.index.find(eta);
    if (it == dist.index.end())
      outside += mass;
    else
      p[it->second] += mass;
  }
  return tv_distance(p, dist.probs) + 0.5 * outside;
}

MostProbable most_probable(const ModelSpec& spec, bool all_maximizers, std::size_t cap) {
  std::vector<int> occ(spec.m());
  int placed = 0;
  for (int j = 0; j < spec.m(); ++j) {
    occ[j] = spec.potential(j).support_lo();
    placed += occ[j];
  }
  if (placed > spec.k()) throw InfeasibleModel("support lower bounds exceed k");
  for (; placed < spec.k(); ++placed) {
    int best = -1;
    ExtReal gain = kNegInf;
    for (int j = 0; j < spec.m(); ++j) {
      if (occ[j] + 1 >= spec.potential(j).table_size()) continue;
      const ExtReal g = spec.potential(j).grad(occ[j]);
      if (g > gain) {
        gain = g;
        best = j;
      }
    }
    if (best < 0) throw InfeasibleModel("no level can take another particle");
    ++occ[best];
  }
  MostProbable out;
  out.configs.emplace_back(std::move(occ));
  out.free_entropy = free_entropy(spec, out.configs.front());
  if (!all_maximizers) return out;

  const auto states = enumerate_states(spec.k(), spec.m(), cap);
  const double slack = 1e-9 * std::max(1.0, std::abs(out.free_entropy));
  std::vector<Configuration> ties;
  for (const auto& eta : states) {
    const ExtReal f = free_entropy(spec, eta);
    if (f > out.free_entropy + slack)
      throw std::logic_error("greedy configuration is not a maximizer: " + to_string(eta) + " beats it");
    if (f >= out.free_entropy - slack && eta != out.configs.front()) ties.push_back(eta);
  }
  out.configs.insert(out.configs.end(), ties.begin(), ties.end());
  return out;
}

RejectionRatio rejection_ratio(const ModelSpec& spec, std::span<const double> q, std::size_t cap) {
  const int m = spec.m();
  std::vector<double> log_q(m, -std::log(static_cast<double>(m)));
  if (!q.empty()) {
    if (static_cast<int>(q.size()) != m) throw std::invalid_argument("q needs one entry per level");
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      if (!(q[j] > 0.0)) throw std::invalid_argument("q entries must be positive");
      sum += q[j];
      log_q[j] = std::log(q[j]);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("q must sum to 1");
  }
  const ExactDist dist = exact_nu(spec, cap);
  const double log_kfact = std::lgamma(spec.k() + 1.0);
  RejectionRatio out;
  out.log_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < dist.states.size(); ++s) {
    if (dist.probs[s] <= 0.0) continue;
    const Configuration& eta = dist.states[s];
    double log_mult = log_kfact;
    for (int j = 0; j < m; ++j) log_mult += eta[j] * log_q[j] - std::lgamma(eta[j] + 1.0);
    const double log_nu = free_entropy(spec, eta) - dist.log_Q;
    const double r = log_nu - log_mult;
    if (r > out.log_ratio) {
      out.log_ratio = r;
      out.argmax = eta;
    }
  }
  out.ratio = std::exp(out.log_ratio);
  return out;
}

}  // namespace canon
