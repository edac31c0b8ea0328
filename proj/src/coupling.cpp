#include "canon/coupling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "canon/error.hpp"

namespace canon {

int discrepancy(const Configuration& a, const Configuration& b) {
  int rho = 0;
  for (int i = 0; i < a.m(); ++i) rho += std::max(0, a[i] - b[i]);
  return rho;
}

// ---------------------------------------------------------------- colored

ColoredPair ColoredPair::from_configurations(const Configuration& x1, const Configuration& x2) {
  if (x1.m() != x2.m() || x1.total() != x2.total())
    throw std::invalid_argument("coupled configurations must share k and m");
  ColoredPair p;
  p.k_ = x1.total();
  p.m_ = x1.m();
  for (int i = 0; i < p.m_; ++i) {
    for (int c = 0; c < x1[i]; ++c) p.omega1_.push_back(i);
    for (int c = 0; c < x2[i]; ++c) p.omega2_.push_back(i);
  }
  p.recolor();
  return p;
}

void ColoredPair::move(int side, int x, int j) { (side == 1 ? omega1_ : omega2_)[x] = j; }

void ColoredPair::recolor() {
  std::vector<int> k1(m_, 0), k2(m_, 0);
  for (int l : omega1_) ++k1[l];
  for (int l : omega2_) ++k2[l];
  occ1_ = Configuration(k1);
  occ2_ = Configuration(k2);

  colors1_.assign(k_, Color::red);
  colors2_.assign(k_, Color::red);
  partner_.assign(k_, -1);
  reds2_.clear();
  // Blue slots handed out per level, lowest labels first.
  std::vector<int> blue_left1(m_), blue_left2(m_);
  std::vector<std::vector<int>> blue2_by_level(m_);
  rho_ = 0;
  for (int i = 0; i < m_; ++i) {
    blue_left1[i] = blue_left2[i] = std::min(k1[i], k2[i]);
    rho_ += std::max(0, k1[i] - k2[i]);
  }
  for (int x = 0; x < k_; ++x) {
    const int l = omega2_[x];
    if (blue_left2[l] > 0) {
      --blue_left2[l];
      colors2_[x] = Color::blue;
      blue2_by_level[l].push_back(x);
    } else {
      reds2_.push_back(x);
    }
  }
  std::vector<int> used(m_, 0);
  for (int x = 0; x < k_; ++x) {
    const int l = omega1_[x];
    if (blue_left1[l] > 0) {
      --blue_left1[l];
      colors1_[x] = Color::blue;
      partner_[x] = blue2_by_level[l][used[l]++];
    }
  }
}

void ColoredPair::check_invariants() const {
  std::vector<int> blue1(m_, 0), blue2(m_, 0), red1(m_, 0), red2(m_, 0);
  int reds_1 = 0;
  int reds_2 = 0;
  for (int x = 0; x < k_; ++x) {
    if (colors1_[x] == Color::blue) {
      ++blue1[omega1_[x]];
      const int y = partner_[x];
      if (y < 0 || colors2_[y] != Color::blue || omega2_[y] != omega1_[x])
        throw CorruptedCoupling("blue bijection broken at particle " + std::to_string(x));
    } else {
      ++red1[omega1_[x]];
      ++reds_1;
    }
    if (colors2_[x] == Color::blue)
      ++blue2[omega2_[x]];
    else {
      ++red2[omega2_[x]];
      ++reds_2;
    }
  }
  int half_l1 = 0;
  for (int i = 0; i < m_; ++i) {
    if (blue1[i] != blue2[i]) throw CorruptedCoupling("blue counts differ at level " + std::to_string(i));
    if (red1[i] > 0 && red2[i] > 0)
      throw CorruptedCoupling("level " + std::to_string(i) + " holds red particles on both sides");
    half_l1 += std::abs(occ1_[i] - occ2_[i]);
  }
  if (half_l1 % 2 != 0 || half_l1 / 2 != rho_ || reds_1 != rho_ || reds_2 != rho_)
    throw CorruptedCoupling("rho does not match the red particle counts");
}

ParticleChoice select_particles_colored(const ColoredPair& pair, RandomStream& rng) {
  const int k = static_cast<int>(pair.omega1().size());
  ParticleChoice c;
  c.x1 = static_cast<int>(rng.index(static_cast<std::uint64_t>(k)));
  const double u_red = rng.uniform();
  if (pair.colors1()[c.x1] == Color::blue) {
    c.x2 = pair.partner(c.x1);
  } else {
    c.red = true;
    const auto& reds = pair.reds2();
    c.x2 = reds[static_cast<std::size_t>(u_red * static_cast<double>(reds.size()))];
  }
  return c;
}

namespace {

inline double move_prob(const ModelSpec& spec, const Configuration& eta, int i, int j) {
  if (i < 0 || i == j) return 0.0;
  return acceptance(spec.psi(i, eta[i] - 1) - spec.psi(j, eta[j]));
}

}  // namespace

void coupled_step_colored(const ModelSpec& spec, ColoredPair& pair, RandomStream& rng) {
  if (spec.delta() != 1.0)
    throw UnsupportedKernel("the colored coupling needs an ultra log-concave model (delta = 1)");
  if (pair.omega1().empty()) return;
  const int rho_before = pair.rho();

  const ParticleChoice c = select_particles_colored(pair, rng);
  const int j = static_cast<int>(rng.index(static_cast<std::uint64_t>(spec.m())));
  const double u = rng.uniform();
  const double v2 = rng.uniform();

  const int i1 = pair.omega1()[c.x1];
  const int i2 = pair.omega2()[c.x2];
  const double p1 = move_prob(spec, pair.config1(), i1, j);
  const double p2 = move_prob(spec, pair.config2(), i2, j);
  // Blue: one shared uniform, so the pair moves together whenever the less
  // likely move fires. Red: independent uniforms.
  const bool move1 = u < p1;
  const bool move2 = c.red ? v2 < p2 : u < p2;
  if (move1) pair.move(1, c.x1, j);
  if (move2) pair.move(2, c.x2, j);
  if (move1 || move2) pair.recolor();

  if (pair.rho() > rho_before)
    throw CorruptedCoupling("rho increased from " + std::to_string(rho_before) + " to " +
                            std::to_string(pair.rho()));
#ifndef NDEBUG
  pair.check_invariants();
#endif
}

// ------------------------------------------------------------------ delta

DeltaPair DeltaPair::from_configurations(const Configuration& x1, const Configuration& x2) {
  if (x1.m() != x2.m() || x1.total() != x2.total())
    throw std::invalid_argument("coupled configurations must share k and m");
  return DeltaPair{x1, x2, discrepancy(x1, x2)};
}

DeltaWeights delta_weights(const ModelSpec& spec, const Configuration& x1, const Configuration& x2) {
  DeltaWeights w;
  for (int i = 0; i < spec.m(); ++i) {
    const double a = spec.site_weight(x1[i]);
    const double b = spec.site_weight(x2[i]);
    if (x1[i] > x2[i]) {
      w.w1 += a;
      w.w2p += b;
    } else if (x2[i] > x1[i]) {
      w.w1p += a;
      w.w2 += b;
    } else {
      w.wB += a;
    }
  }
  return w;
}

namespace {

enum class Group { B, R1, R2 };

inline bool in_group(Group g, int a, int b) {
  switch (g) {
    case Group::B: return a == b;
    case Group::R1: return a > b;
    case Group::R2: return b > a;
  }
  return false;
}

// Site of `group` whose cumulative weight interval (weights of `a`) contains s;
// `offset` receives s minus the start of that interval.
int pick_in_group(const ModelSpec& spec, const Configuration& a, const Configuration& b, Group group,
                  double s, double& offset) {
  double acc = 0.0;
  int last = -1;
  for (int i = 0; i < spec.m(); ++i) {
    if (!in_group(group, a[i], b[i])) continue;
    const double w = spec.site_weight(a[i]);
    if (w <= 0.0) continue;
    if (s < acc + w) {
      offset = s - acc;
      return i;
    }
    acc += w;
    last = i;
  }
  // rounding at the right edge
  offset = last >= 0 ? spec.site_weight(a[last]) * (1.0 - 1e-16) : 0.0;
  return last;
}

// Construction for the case w1 + w1' >= w2 + w2', with `a` in the role of
// the first configuration.
SiteChoice select_dominant(const ModelSpec& spec, const Configuration& a, const Configuration& b,
                           const DeltaWeights& w, double u_site, double u_resample) {
  double s = u_site * spec.l_delta();
  double offset = 0.0;
  if (s < w.wB) {
    const int i = pick_in_group(spec, a, b, Group::B, s, offset);
    return SiteChoice{i, i, true};
  }
  s -= w.wB;
  if (s < w.w1p) {
    const int i = pick_in_group(spec, a, b, Group::R2, s, offset);
    return SiteChoice{i, i, true};
  }
  s -= w.w1p;
  if (!(s < w.w1)) return SiteChoice{};  // no site on either side

  const int i = pick_in_group(spec, a, b, Group::R1, s, offset);
  if (offset < spec.site_weight(b[i])) return SiteChoice{i, i, true};

  // Resample the second site uniformly on T: the R2 excess intervals
  // [(a_i')^d, (b_i')^d) followed by the no-site interval [w2 + w2', w1 + w1').
  const double lambda = w.w1 - w.w2p;
  double lengths = (w.w1 + w.w1p) - (w.w2 + w.w2p);
  for (int r = 0; r < spec.m(); ++r)
    if (b[r] > a[r]) lengths += spec.site_weight(b[r]) - spec.site_weight(a[r]);
  if (std::abs(lengths - lambda) > kTol * std::max(1.0, spec.l_delta()))
    throw CorruptedCoupling("resampling set measure " + std::to_string(lengths) +
                            " differs from w1 - w2' = " + std::to_string(lambda));
  double t = u_resample * lambda;
  for (int r = 0; r < spec.m(); ++r) {
    if (!(b[r] > a[r])) continue;
    const double len = spec.site_weight(b[r]) - spec.site_weight(a[r]);
    if (t < len) return SiteChoice{i, r, false};
    t -= len;
  }
  return SiteChoice{i, -1, false};
}

}  // namespace

SiteChoice select_sites_delta(const ModelSpec& spec, const Configuration& x1, const Configuration& x2,
                              double u_site, double u_resample) {
  const DeltaWeights w = delta_weights(spec, x1, x2);
  if (w.w1 + w.w1p >= w.w2 + w.w2p) return select_dominant(spec, x1, x2, w, u_site, u_resample);
  // Mirror image: swap the roles of the two configurations.
  const DeltaWeights mirrored{w.w2, w.w2p, w.w1, w.w1p, w.wB};
  SiteChoice c = select_dominant(spec, x2, x1, mirrored, u_site, u_resample);
  std::swap(c.i1, c.i2);
  return c;
}

void coupled_step_delta(const ModelSpec& spec, DeltaPair& pair, RandomStream& rng) {
  if (!(spec.delta() > 0.0))
    throw UnsupportedKernel("delta = 0: the interval-splitting coupling needs a positive concavity parameter");
  const double u_site = rng.uniform();
  const double u_resample = rng.uniform();
  const int j = static_cast<int>(rng.index(static_cast<std::uint64_t>(spec.m())));
  const double u = rng.uniform();
  const double v2 = rng.uniform();

  const SiteChoice c = select_sites_delta(spec, pair.x1, pair.x2, u_site, u_resample);
  const double p1 = move_prob(spec, pair.x1, c.i1, j);
  const double p2 = move_prob(spec, pair.x2, c.i2, j);
  const bool move1 = u < p1;
  const bool move2 = c.shared ? u < p2 : v2 < p2;
  if (move1) pair.x1 = pair.x1.moved(c.i1, j);
  if (move2) pair.x2 = pair.x2.moved(c.i2, j);

  const int rho = discrepancy(pair.x1, pair.x2);
  if (rho > pair.rho)
    throw CorruptedCoupling("rho increased from " + std::to_string(pair.rho) + " to " + std::to_string(rho));
  pair.rho = rho;
#ifndef NDEBUG
  const DeltaWeights w = delta_weights(spec, pair.x1, pair.x2);
  const double slack = kTol * std::max(1.0, spec.l_delta());
  if (w.wB + w.w1 + w.w1p > spec.l_delta() + slack || w.wB + w.w2 + w.w2p > spec.l_delta() + slack)
    throw CorruptedCoupling("site weights exceed l_delta");
#endif
}

// ---------------------------------------------------------------- drivers

CoupledChain::CoupledChain(const ModelSpec& spec, const Configuration& x1, const Configuration& x2,
                           CouplingVariant variant, std::uint64_t seed)
    : spec_(&spec), variant_(variant), rng_(seed) {
  if (!is_positive(spec, x1) || !is_positive(spec, x2))
    throw std::invalid_argument("coupling starts must have positive weight");
  if (variant == CouplingVariant::colored) {
    if (spec.delta() != 1.0)
      throw UnsupportedKernel("the colored coupling needs an ultra log-concave model (delta = 1)");
    colored_ = ColoredPair::from_configurations(x1, x2);
  } else {
    if (!(spec.delta() > 0.0))
      throw UnsupportedKernel("delta = 0: the interval-splitting coupling needs a positive concavity parameter");
    delta_ = DeltaPair::from_configurations(x1, x2);
  }
}

void CoupledChain::step() {
  if (colored_)
    coupled_step_colored(*spec_, *colored_, rng_);
  else
    coupled_step_delta(*spec_, *delta_, rng_);
  ++time_;
}

int CoupledChain::rho() const noexcept { return colored_ ? colored_->rho() : delta_->rho; }

const Configuration& CoupledChain::config1() const noexcept {
  return colored_ ? colored_->config1() : delta_->x1;
}

const Configuration& CoupledChain::config2() const noexcept {
  return colored_ ? colored_->config2() : delta_->x2;
}

CouplingResult coupling_time(const ModelSpec& spec, const Configuration& eta0, const Configuration& theta0,
                             std::uint64_t seed, std::int64_t max_t, CouplingVariant variant,
                             bool keep_trace) {
  CoupledChain chain(spec, eta0, theta0, variant, seed);
  CouplingResult out;
  for (;;) {
    if (keep_trace) out.rho_trace.push_back(chain.rho());
    if (chain.rho() == 0) {
      out.tau = chain.time();
      break;
    }
    if (chain.time() >= max_t) break;
    chain.step();
  }
  out.final_rho = chain.rho();
  return out;
}

double contraction_alpha(const ModelSpec& spec, CouplingVariant variant) {
  const double km = static_cast<double>(spec.k()) * spec.m();
  if (variant == CouplingVariant::colored) return km;
  const double delta = spec.delta();
  return km * std::pow(std::min(spec.k(), spec.m()), 1.0 - delta) / delta;
}

double decrement_floor(const ModelSpec& spec, CouplingVariant variant, int rho) {
  const double k = spec.k();
  const double m = spec.m();
  if (variant == CouplingVariant::colored) return rho / (k * m);
  const double delta = spec.delta();
  return delta * std::pow(k, delta - 1.0) * rho / (m * spec.l_delta());
}

RateCheck decrement_rate_check(const ModelSpec& spec, const Configuration& x1, const Configuration& x2,
                               CouplingVariant variant, std::int64_t samples, std::uint64_t seed) {
  const int rho = discrepancy(x1, x2);
  if (rho <= 0) throw std::invalid_argument("decrement_rate_check needs rho > 0");
  if (samples <= 0) throw std::invalid_argument("samples must be positive");
  RandomStream rng(seed);
  std::int64_t decrements = 0;
  double rho_sum = 0.0;
  RateCheck out;
  const auto record = [&](int next) {
    if (next == rho - 1) ++decrements;
    if (next > rho) ++out.increases;
    rho_sum += next;
  };
  if (variant == CouplingVariant::colored) {
    const ColoredPair start = ColoredPair::from_configurations(x1, x2);
    for (std::int64_t s = 0; s < samples; ++s) {
      ColoredPair p = start;
      coupled_step_colored(spec, p, rng);
      record(p.rho());
    }
  } else {
    const DeltaPair start = DeltaPair::from_configurations(x1, x2);
    for (std::int64_t s = 0; s < samples; ++s) {
      DeltaPair p = start;
      coupled_step_delta(spec, p, rng);
      record(p.rho);
    }
  }
  const double n = static_cast<double>(samples);
  out.rate = decrements / n;
  out.floor = decrement_floor(spec, variant, rho);
  out.sigma = std::sqrt(out.floor * (1.0 - out.floor) / n);
  out.mean_next_rho = rho_sum / n;
  out.passed = out.increases == 0 && out.rate >= out.floor - 4.0 * out.sigma;
  return out;
}

}  // namespace canon
