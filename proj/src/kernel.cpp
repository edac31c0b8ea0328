#include "canon/kernel.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "canon/error.hpp"

namespace canon {

int Configuration::total() const noexcept { return std::accumulate(occ_.begin(), occ_.end(), 0); }

Configuration Configuration::moved(int i, int j) const {
  Configuration out = *this;
  --out.occ_[i];
  ++out.occ_[j];
  return out;
}

std::string to_string(const Configuration& eta) {
  std::string s = "(";
  for (int j = 0; j < eta.m(); ++j) {
    if (j) s += ',';
    s += std::to_string(eta[j]);
  }
  return s + ")";
}

bool is_positive(const ModelSpec& spec, const Configuration& eta) {
  if (eta.m() != spec.m() || eta.total() != spec.k()) return false;
  for (int j = 0; j < spec.m(); ++j) {
    if (eta[j] < 0 || !is_finite(spec.potential(j)(eta[j]))) return false;
  }
  return true;
}

SiteSelector::SiteSelector(const ModelSpec& spec, const Configuration& eta) : sites_(spec.m()) {
  leaves_ = 1;
  while (leaves_ < sites_) leaves_ *= 2;
  tree_.assign(2 * leaves_, 0.0);
  for (int i = 0; i < sites_; ++i) tree_[leaves_ + i] = spec.site_weight(eta[i]);
  for (int n = leaves_ - 1; n >= 1; --n) tree_[n] = tree_[2 * n] + tree_[2 * n + 1];
}

void SiteSelector::set(int site, double weight) noexcept {
  int n = leaves_ + site;
  tree_[n] = weight;
  for (n /= 2; n >= 1; n /= 2) tree_[n] = tree_[2 * n] + tree_[2 * n + 1];
}

int SiteSelector::find(double s) const noexcept {
  int n = 1;
  while (n < leaves_) {
    const double left = tree_[2 * n];
    if (s < left || tree_[2 * n + 1] <= 0.0) {
      n = 2 * n;
    } else {
      s -= left;
      n = 2 * n + 1;
    }
  }
  return n - leaves_;
}

bool SiteSelector::consistent_with(const ModelSpec& spec, const Configuration& eta) const {
  SiteSelector fresh(spec, eta);
  return fresh.tree_ == tree_;
}

ChainState ChainState::start(const ModelSpec& spec, Configuration eta, std::uint64_t seed) {
  if (!is_positive(spec, eta))
    throw std::invalid_argument("start configuration " + to_string(eta) + " has zero weight");
  ChainState st;
  st.selector = SiteSelector(spec, eta);
  st.config = std::move(eta);
  st.rng = RandomStream(seed);
  return st;
}

namespace {

inline double move_exponent(const ModelSpec& spec, const Configuration& eta, int i, int j) {
  return ext_sub(spec.psi(i, eta[i] - 1), spec.psi(j, eta[j]));
}

void check_pair(const ModelSpec& spec, int i, int j) {
  if (i == j) throw std::invalid_argument("transition_prob needs i != j; use holding_prob");
  if (i < 0 || j < 0 || i >= spec.m() || j >= spec.m())
    throw std::out_of_range("level index out of range");
}

}  // namespace

double transition_prob(const ModelSpec& spec, const Configuration& eta, int i, int j) {
  check_pair(spec, i, j);
  if (eta[i] == 0) return 0.0;
  return spec.site_weight(eta[i]) / spec.l_delta() / spec.m() *
         acceptance(move_exponent(spec, eta, i, j));
}

double log_transition_prob(const ModelSpec& spec, const Configuration& eta, int i, int j) {
  check_pair(spec, i, j);
  if (eta[i] == 0) return kNegInf;
  const double a = move_exponent(spec, eta, i, j);
  if (a == kPosInf) return kNegInf;
  return std::log(spec.site_weight(eta[i])) - std::log(spec.l_delta()) - std::log(spec.m()) -
         positive_part(a);
}

double holding_prob(const ModelSpec& spec, const Configuration& eta) {
  double out = 0.0;
  for (int i = 0; i < spec.m(); ++i) {
    if (eta[i] == 0) continue;
    for (int j = 0; j < spec.m(); ++j)
      if (j != i) out += transition_prob(spec, eta, i, j);
  }
  return 1.0 - out;
}

namespace {

inline void apply_move(const ModelSpec& spec, ChainState& st, int i, int j) {
  auto& eta = st.config;
  --eta[i];
  ++eta[j];
  st.selector.set(i, spec.site_weight(eta[i]));
  st.selector.set(j, spec.site_weight(eta[j]));
  st.exits_valid = false;
  assert(st.selector.consistent_with(spec, eta));
}

void require_positive_delta(const ModelSpec& spec) {
  if (!(spec.delta() > 0.0))
    throw UnsupportedKernel("delta = 0: the site/particle kernel needs a positive concavity parameter");
}

}  // namespace

bool step(const ModelSpec& spec, ChainState& st) {
  require_positive_delta(spec);
  const double u_site = st.rng.uniform();
  const int j = static_cast<int>(st.rng.index(static_cast<std::uint64_t>(spec.m())));
  const double u_acc = st.rng.uniform();
  ++st.time;

  const double target = u_site * spec.l_delta();
  if (!(target < st.selector.total())) return false;  // no site chosen
  const int i = st.selector.find(target);
  if (i == j) return false;
  const auto& eta = st.config;
  const double a = spec.psi_row(i)[eta[i] - 1] - spec.psi_row(j)[eta[j]];
  if (a > 0.0 && !(u_acc < std::exp(-a))) return false;
  apply_move(spec, st, i, j);
  return true;
}

void run(const ModelSpec& spec, ChainState& state, std::int64_t steps) {
  for (std::int64_t t = 0; t < steps; ++t) step(spec, state);
}

namespace {

void refresh_exits(const ModelSpec& spec, ChainState& st) {
  st.exit_cumulative.clear();
  st.exit_moves.clear();
  double acc = 0.0;
  for (int i = 0; i < spec.m(); ++i) {
    if (st.config[i] == 0) continue;
    for (int j = 0; j < spec.m(); ++j) {
      if (j == i) continue;
      const double p = transition_prob(spec, st.config, i, j);
      if (p <= 0.0) continue;
      acc += p;
      st.exit_cumulative.push_back(acc);
      st.exit_moves.emplace_back(i, j);
    }
  }
  st.exit_mass = acc;
  st.exits_valid = true;
}

}  // namespace

namespace {

struct Jump {
  std::int64_t elapsed;
  int i;
  int j;
};

// Draws (holding time, exit move) from the cached exit law. The geometric
// variable on {1, 2, ...} has P(E > n) = hold^n and is inverted with U in (0, 1].
Jump draw_jump(ChainState& st) {
  const double u_geo = st.rng.uniform();
  const double u_sel = st.rng.uniform();
  std::int64_t elapsed = 1;
  if (st.exit_mass < 1.0) {
    const double e = std::ceil(std::log(1.0 - u_geo) / std::log1p(-st.exit_mass));
    constexpr double cap = static_cast<double>(std::numeric_limits<std::int64_t>::max() / 4);
    elapsed = e >= cap ? static_cast<std::int64_t>(cap)
                       : std::max<std::int64_t>(1, static_cast<std::int64_t>(e));
  }
  const double target = u_sel * st.exit_mass;
  std::size_t pick = 0;
  while (pick + 1 < st.exit_cumulative.size() && !(target < st.exit_cumulative[pick])) ++pick;
  return Jump{elapsed, st.exit_moves[pick].first, st.exit_moves[pick].second};
}

}  // namespace

SkipOutcome skip_ahead_step(const ModelSpec& spec, ChainState& st) {
  require_positive_delta(spec);
  if (!st.exits_valid) refresh_exits(spec, st);
  if (st.exit_mass <= 0.0) return SkipOutcome{0, true};
  const Jump jump = draw_jump(st);
  st.time += jump.elapsed;
  apply_move(spec, st, jump.i, jump.j);
  return SkipOutcome{jump.elapsed, false};
}

void run_skip_ahead(const ModelSpec& spec, ChainState& st, std::int64_t steps) {
  require_positive_delta(spec);
  const std::int64_t horizon = st.time + steps;
  while (st.time < horizon) {
    if (!st.exits_valid) refresh_exits(spec, st);
    if (st.exit_mass <= 0.0) break;
    const Jump jump = draw_jump(st);
    // Memorylessness: a jump landing past the horizon means the chain still
    // sits in the current configuration at the horizon.
    if (jump.elapsed > horizon - st.time) break;
    st.time += jump.elapsed;
    apply_move(spec, st, jump.i, jump.j);
  }
  st.time = horizon;
}

}  // namespace canon
