#include "canon/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "canon/error.hpp"

namespace canon {

ExtReal parse_ext_real(const std::string& token) {
  if (token == "-inf") return kNegInf;
  if (token == "inf" || token == "+inf") return kPosInf;
  std::size_t used = 0;
  const double x = std::stod(token, &used);
  if (used != token.size() || std::isnan(x)) throw std::invalid_argument("bad number: " + token);
  return x;
}

namespace {

std::vector<ExtReal> forward_differences(const std::vector<ExtReal>& phi, int lo, int hi) {
  const int size = static_cast<int>(phi.size());
  std::vector<ExtReal> grad(size > 0 ? size - 1 : 0);
  for (int x = 0; x + 1 < size; ++x) {
    if (x + 1 < lo)
      grad[x] = kPosInf;
    else if (x >= hi)
      grad[x] = kNegInf;
    else if (x < lo)
      grad[x] = kPosInf;  // phi(x) = -inf, phi(x+1) finite
    else
      grad[x] = phi[x + 1] - phi[x];
  }
  return grad;
}

void find_support(const std::vector<ExtReal>& phi, int site, int& lo, int& hi) {
  lo = -1;
  hi = -1;
  for (int x = 0; x < static_cast<int>(phi.size()); ++x) {
    const ExtReal v = phi[x];
    if (std::isnan(v)) throw InvalidPotential(site, x, "NaN value");
    if (v == kPosInf) throw InvalidPotential(site, x, "+inf value");
    if (v == kNegInf) continue;
    if (lo < 0) {
      lo = x;
    } else if (hi != x - 1) {
      throw InvalidPotential(site, x, "support is not an interval");
    }
    hi = x;
  }
  if (lo < 0) throw InvalidPotential(site, 0, "empty support");
}

}  // namespace

LevelPotential LevelPotential::from_table(std::vector<ExtReal> phi, int site) {
  int lo = 0;
  int hi = 0;
  find_support(phi, site, lo, hi);
  auto grad = forward_differences(phi, lo, hi);
  return from_table_and_grad(std::move(phi), std::move(grad), site);
}

LevelPotential LevelPotential::from_table_and_grad(std::vector<ExtReal> phi,
                                                   std::vector<ExtReal> grad, int site) {
  if (phi.empty()) throw InvalidPotential(site, 0, "empty table");
  if (grad.size() + 1 != phi.size()) throw std::invalid_argument("gradient table size mismatch");
  LevelPotential p;
  find_support(phi, site, p.lo_, p.hi_);
  // Log-concavity: phi(x-1) + phi(x+1) <= 2 phi(x). The tolerance scales with
  // the magnitude of the values so large beta*v offsets do not trip it.
  for (int x = p.lo_ + 1; x < p.hi_; ++x) {
    const double scale = std::max({1.0, std::abs(phi[x - 1]), std::abs(phi[x]), std::abs(phi[x + 1])});
    if (phi[x - 1] + phi[x + 1] > 2.0 * phi[x] + kTol * scale)
      throw InvalidPotential(site, x, "not log-concave");
  }
  p.phi_ = std::move(phi);
  p.grad_ = std::move(grad);
  return p;
}

ExtReal LevelPotential::neg_laplacian(int x) const {
  if (x < lo_ || x > hi_) return kPosInf;  // outside the support: no constraint
  if (x <= 0 || x + 1 >= table_size()) return kPosInf;  // table edge
  const ExtReal left = grad_[x - 1];
  const ExtReal right = grad_[x];
  if (left == kPosInf || right == kNegInf) return kPosInf;
  return left - right;
}

std::int64_t FermiSpec::volume() const {
  return std::accumulate(n.begin(), n.end(), std::int64_t{0});
}

std::vector<double> log_binomial_table(std::int64_t n, int x_max) {
  std::vector<double> out(x_max + 1, kNegInf);
  double acc = 0.0;
  out[0] = 0.0;
  for (int x = 1; x <= x_max; ++x) {
    if (x > n) break;
    acc += std::log(static_cast<double>(n - x + 1)) - std::log(static_cast<double>(x));
    out[x] = acc;
  }
  return out;
}

double l_delta_of(int k, int m, double delta) {
  if (k == 0) return 0.0;
  return std::pow(static_cast<double>(k), delta) *
         std::pow(static_cast<double>(std::min(k, m)), 1.0 - delta);
}

ModelSpec::ModelSpec(int k, std::vector<LevelPotential> potentials, DeltaResult delta,
                     std::optional<FermiSpec> fermi)
    : k_(k),
      m_(static_cast<int>(potentials.size())),
      potentials_(std::move(potentials)),
      delta_(delta),
      l_delta_(l_delta_of(k, m_, delta.delta)),
      fermi_(std::move(fermi)) {
  if (k_ < 0 || m_ < 1) throw std::invalid_argument("model needs k >= 0 and m >= 1");
  for (const auto& p : potentials_)
    if (p.table_size() != k_ + 1) throw std::invalid_argument("potential table must cover 0..k");
  psi_.assign(static_cast<std::size_t>(m_) * (k_ + 1), kPosInf);
  for (int j = 0; j < m_; ++j) {
    for (int x = 0; x < k_; ++x) {
      const ExtReal g = potentials_[j].grad(x);
      psi_[j * (k_ + 1) + x + 1] = is_finite(g) ? g + delta_.delta * std::log1p(x) : g;
    }
  }
  weights_.resize(k_ + 1);
  weights_[0] = 0.0;
  for (int x = 1; x <= k_; ++x) weights_[x] = std::pow(static_cast<double>(x), delta_.delta);
}

DeltaResult compute_delta(std::span<const LevelPotential> potentials, int k) {
  DeltaResult best;
  double inf_ratio = kPosInf;
  for (int j = 0; j < static_cast<int>(potentials.size()); ++j) {
    for (int x = 1; x <= k - 1; ++x) {
      const ExtReal lap = potentials[j].neg_laplacian(x);
      if (!is_finite(lap)) continue;
      const double ratio = lap / std::log((1.0 + x) / x);
      if (ratio < inf_ratio) {
        inf_ratio = ratio;
        best.witness_site = j;
        best.witness_index = x;
      }
    }
  }
  if (inf_ratio >= 1.0 - kTol) return DeltaResult{};
  best.delta = std::max(0.0, inf_ratio);
  return best;
}

ModelSpec build_fermi(const FermiSpec& spec) {
  if (spec.k < 0 || spec.m < 1) throw std::invalid_argument("Fermi model needs k >= 0, m >= 1");
  if (static_cast<int>(spec.v.size()) != spec.m || static_cast<int>(spec.n.size()) != spec.m)
    throw std::invalid_argument("v and n must have m entries");
  if (!(spec.beta >= 0.0) || !std::isfinite(spec.beta))
    throw std::invalid_argument("beta must be finite and non-negative");
  for (int j = 0; j < spec.m; ++j) {
    if (spec.n[j] < 1) throw std::invalid_argument("degeneracies must be positive");
    if (!std::isfinite(spec.v[j])) throw std::invalid_argument("energies must be finite");
  }
  if (spec.volume() < spec.k)
    throw InfeasibleModel("infeasible model: sum of degeneracies " + std::to_string(spec.volume()) +
                          " < k = " + std::to_string(spec.k));

  std::vector<LevelPotential> pots;
  pots.reserve(spec.m);
  for (int j = 0; j < spec.m; ++j) {
    const auto lb = log_binomial_table(spec.n[j], spec.k);
    const double field = -spec.beta * spec.v[j];
    std::vector<ExtReal> phi(spec.k + 1);
    for (int x = 0; x <= spec.k; ++x) phi[x] = is_finite(lb[x]) ? field * x + lb[x] : kNegInf;
    // Closed-form nabla^+ phi avoids cancellation between large table values.
    std::vector<ExtReal> grad(spec.k);
    for (int x = 0; x < spec.k; ++x) {
      grad[x] = (x + 1 <= spec.n[j])
                    ? field + std::log(static_cast<double>(spec.n[j] - x)) - std::log1p(x)
                    : kNegInf;
    }
    pots.push_back(LevelPotential::from_table_and_grad(std::move(phi), std::move(grad), j));
  }
  // Binomial weights are ultra log-concave.
  return ModelSpec(spec.k, std::move(pots), DeltaResult{}, spec);
}

ModelSpec build_custom(int k, int m, std::vector<std::vector<ExtReal>> phi_tables) {
  if (k < 0 || m < 1) throw std::invalid_argument("custom model needs k >= 0, m >= 1");
  if (static_cast<int>(phi_tables.size()) != m)
    throw std::invalid_argument("expected " + std::to_string(m) + " potential tables");
  std::vector<LevelPotential> pots;
  pots.reserve(m);
  int lo_sum = 0;
  int hi_sum = 0;
  for (int j = 0; j < m; ++j) {
    if (static_cast<int>(phi_tables[j].size()) != k + 1)
      throw InvalidPotential(j, static_cast<int>(phi_tables[j].size()),
                             "table must cover 0..k (" + std::to_string(k + 1) + " entries)");
    pots.push_back(LevelPotential::from_table(std::move(phi_tables[j]), j));
    lo_sum += pots.back().support_lo();
    hi_sum += pots.back().support_hi();
  }
  if (lo_sum > k || hi_sum < k)
    throw InfeasibleModel("infeasible model: no configuration with positive weight");
  const DeltaResult delta = compute_delta(pots, k);
  return ModelSpec(k, std::move(pots), delta, std::nullopt);
}

FermiSpec dualize(const FermiSpec& spec) {
  FermiSpec dual = spec;
  dual.k = static_cast<int>(spec.volume() - spec.k);
  for (auto& v : dual.v) v = -v;
  return dual;
}

}  // namespace canon
