#include "canon/exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "canon/error.hpp"

namespace canon {

long double count_states(int k, int m) {
  if (m < 1 || k < 0) return 0.0L;
  // C(k + m - 1, m - 1) as a running product.
  long double c = 1.0L;
  for (int i = 1; i <= m - 1; ++i) c = c * static_cast<long double>(k + i) / static_cast<long double>(i);
  return std::round(c);
}

namespace {

void compose(int remaining, int pos, std::vector<int>& cur, std::vector<Configuration>& out) {
  const int m = static_cast<int>(cur.size());
  if (pos == m - 1) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int x = 0; x <= remaining; ++x) {
    cur[pos] = x;
    compose(remaining - x, pos + 1, cur, out);
  }
}

}  // namespace

std::vector<Configuration> enumerate_states(int k, int m, std::size_t cap) {
  const long double count = count_states(k, m);
  if (count > static_cast<long double>(cap)) throw TooLarge(count, static_cast<long double>(cap));
  std::vector<Configuration> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> cur(m, 0);
  compose(k, 0, cur, out);
  return out;
}

ExactDist exact_nu(const ModelSpec& spec, std::size_t cap) {
  ExactDist dist;
  dist.states = enumerate_states(spec.k(), spec.m(), cap);
  std::vector<double> logw(dist.states.size());
  double top = kNegInf;
  for (std::size_t s = 0; s < dist.states.size(); ++s) {
    double w = 0.0;
    for (int j = 0; j < spec.m() && is_finite(w); ++j) w += spec.potential(j)(dist.states[s][j]);
    logw[s] = w;
    top = std::max(top, w);
    dist.index.emplace(dist.states[s], s);
  }
  if (!is_finite(top)) throw InfeasibleModel("infeasible model: every configuration has zero weight");
  double sum = 0.0;
  for (double w : logw) sum += std::exp(w - top);
  dist.log_Q = top + std::log(sum);
  dist.probs.resize(logw.size());
  for (std::size_t s = 0; s < logw.size(); ++s) dist.probs[s] = std::exp(logw[s] - dist.log_Q);
  return dist;
}

TransitionMatrix::TransitionMatrix(const ModelSpec& spec, const ExactDist& dist)
    : n_(dist.states.size()) {
  const int m = spec.m();
  row_ptr_.reserve(n_ + 1);
  row_ptr_.push_back(0);
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t r = 0; r < n_; ++r) {
    row.clear();
    const Configuration& eta = dist.states[r];
    if (dist.probs[r] > 0.0) {
      double off = 0.0;
      for (int i = 0; i < m; ++i) {
        if (eta[i] == 0) continue;
        for (int j = 0; j < m; ++j) {
          if (j == i) continue;
          const double p = transition_prob(spec, eta, i, j);
          if (p <= 0.0) continue;
          row.emplace_back(dist.index_of(eta.moved(i, j)), p);
          off += p;
        }
      }
      row.emplace_back(r, 1.0 - off);
    } else {
      row.emplace_back(r, 1.0);  // chain undefined from nu-zero states; park it
    }
    std::sort(row.begin(), row.end());
    for (const auto& [c, p] : row) {
      col_.push_back(c);
      val_.push_back(p);
    }
    row_ptr_.push_back(col_.size());
  }

  // Transpose.
  t_ptr_.assign(n_ + 1, 0);
  for (std::size_t c : col_) ++t_ptr_[c + 1];
  for (std::size_t c = 0; c < n_; ++c) t_ptr_[c + 1] += t_ptr_[c];
  t_row_.resize(col_.size());
  t_val_.resize(col_.size());
  std::vector<std::size_t> fill(t_ptr_.begin(), t_ptr_.end() - 1);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
      const std::size_t slot = fill[col_[e]]++;
      t_row_[slot] = r;
      t_val_[slot] = val_[e];
    }
  }
}

double TransitionMatrix::at(std::size_t row, std::size_t col) const {
  for (std::size_t e = row_ptr_[row]; e < row_ptr_[row + 1]; ++e)
    if (col_[e] == col) return val_[e];
  return 0.0;
}

std::vector<double> TransitionMatrix::dense() const {
  std::vector<double> out(n_ * n_, 0.0);
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) out[r * n_ + col_[e]] = val_[e];
  return out;
}

double TransitionMatrix::row_sum(std::size_t row) const {
  double s = 0.0;
  for (std::size_t e = row_ptr_[row]; e < row_ptr_[row + 1]; ++e) s += val_[e];
  return s;
}

void TransitionMatrix::apply_left(std::span<const double> v, std::span<double> out) const {
  for (std::size_t c = 0; c < n_; ++c) {
    double acc = 0.0;
    for (std::size_t e = t_ptr_[c]; e < t_ptr_[c + 1]; ++e) acc += v[t_row_[e]] * t_val_[e];
    out[c] = acc;
  }
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const double y = std::abs(p[s] - q[s]) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return 0.5 * sum;
}

namespace {

struct PowerSetup {
  ExactDist dist;
  TransitionMatrix matrix;
  std::vector<std::size_t> starts;
};

PowerSetup prepare_powers(const ModelSpec& spec, std::size_t cap) {
  ExactDist dist = exact_nu(spec, cap);
  TransitionMatrix matrix(spec, dist);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < dist.probs.size(); ++s)
    if (dist.probs[s] > 0.0) starts.push_back(s);
  return PowerSetup{std::move(dist), std::move(matrix), std::move(starts)};
}

// Evolves the row p^t(start, .) and folds its TV distance into `dmax` for
// t = 0..t_max, stopping early once the distance drops to `stop_below`.
// For a fixed start that distance is non-increasing in t.
void fold_start(const PowerSetup& setup, std::size_t start, std::int64_t t_max, double stop_below,
                std::vector<double>& dmax, std::vector<double>& row, std::vector<double>& next) {
  std::fill(row.begin(), row.end(), 0.0);
  row[start] = 1.0;
  for (std::int64_t t = 0; t <= t_max; ++t) {
    const double tv = tv_distance(row, setup.dist.probs);
    if (static_cast<std::size_t>(t) >= dmax.size()) dmax.resize(t + 1, 0.0);
    dmax[t] = std::max(dmax[t], tv);
    if (tv <= stop_below || t == t_max) break;
    setup.matrix.apply_left(row, next);
    row.swap(next);
  }
}

std::vector<double> folded_d(const PowerSetup& setup, std::int64_t t_max, double stop_below, Exec exec) {
  const std::size_t n = setup.dist.states.size();
  std::vector<double> dmax;
  if (exec == Exec::serial) {
    std::vector<double> row(n), next(n);
    for (std::size_t s : setup.starts) fold_start(setup, s, t_max, stop_below, dmax, row, next);
    return dmax;
  }
#pragma omp parallel
  {
    std::vector<double> local;
    std::vector<double> row(n), next(n);
#pragma omp for schedule(dynamic, 1) nowait
    for (std::size_t idx = 0; idx < setup.starts.size(); ++idx)
      fold_start(setup, setup.starts[idx], t_max, stop_below, local, row, next);
    // max is order independent, so the merge is deterministic
#pragma omp critical(canon_exact_merge)
    {
      if (dmax.size() < local.size()) dmax.resize(local.size(), 0.0);
      for (std::size_t t = 0; t < local.size(); ++t) dmax[t] = std::max(dmax[t], local[t]);
    }
  }
  return dmax;
}

}  // namespace

std::vector<double> exact_d_series(const ModelSpec& spec, int t_max, Exec exec, std::size_t cap) {
  if (t_max < 0) throw std::invalid_argument("t_max must be non-negative");
  const PowerSetup setup = prepare_powers(spec, cap);
  auto d = folded_d(setup, t_max, -1.0, exec);
  d.resize(t_max + 1, 0.0);
  return d;
}

double exact_d(const ModelSpec& spec, int t) { return exact_d_series(spec, t).back(); }

std::vector<std::optional<std::int64_t>> exact_mixing_times(const ModelSpec& spec,
                                                            std::span<const double> epsilons,
                                                            std::int64_t t_cap, Exec exec,
                                                            std::size_t cap) {
  std::vector<std::optional<std::int64_t>> out(epsilons.size());
  if (epsilons.empty()) return out;
  const double eps_min = *std::min_element(epsilons.begin(), epsilons.end());
  const PowerSetup setup = prepare_powers(spec, cap);
  // Rows that stopped early are <= eps_min afterwards, so the partial maximum
  // decides every eps >= eps_min exactly.
  const auto d = folded_d(setup, t_cap, eps_min, exec);
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    for (std::size_t t = 0; t < d.size(); ++t) {
      if (d[t] <= epsilons[e]) {
        out[e] = static_cast<std::int64_t>(t);
        break;
      }
    }
  }
  return out;
}

std::optional<std::int64_t> exact_mixing_time(const ModelSpec& spec, double epsilon, std::int64_t t_cap) {
  const double eps[] = {epsilon};
  return exact_mixing_times(spec, eps, t_cap).front();
}

double mixing_bound(const ModelSpec& spec, double epsilon) {
  const double k = spec.k();
  const double m = spec.m();
  const double delta = spec.delta();
  if (!(delta > 0.0)) return kPosInf;
  const double base = k * m * std::log(k / epsilon);
  if (delta == 1.0) return base;
  return std::pow(std::min(k, m), 1.0 - delta) / delta * base;
}

double check_detailed_balance(const ModelSpec& spec, std::size_t cap) {
  const auto states = enumerate_states(spec.k(), spec.m(), cap);
  double worst = 0.0;
  for (const auto& eta : states) {
    if (!is_positive(spec, eta)) continue;
    for (int i = 0; i < spec.m(); ++i) {
      if (eta[i] == 0) continue;
      for (int j = 0; j < spec.m(); ++j) {
        if (j == i) continue;
        const Configuration to = eta.moved(i, j);
        const double forward = log_transition_prob(spec, eta, i, j);
        if (!is_positive(spec, to)) {
          if (forward != kNegInf) worst = std::max(worst, 1.0);
          continue;
        }
        const double backward = log_transition_prob(spec, to, j, i);
        if (forward == kNegInf && backward == kNegInf) continue;
        if (forward == kNegInf || backward == kNegInf) {
          worst = std::max(worst, 1.0);
          continue;
        }
        // ln nu(eta^{ij}) - ln nu(eta)
        const double log_ratio = spec.potential(j).grad(eta[j]) - spec.potential(i).grad(eta[i] - 1);
        worst = std::max(worst, std::abs(std::expm1(log_ratio + backward - forward)));
      }
    }
  }
  return worst;
}

double stationarity_residual(const ModelSpec& spec, std::size_t cap) {
  const ExactDist dist = exact_nu(spec, cap);
  const TransitionMatrix matrix(spec, dist);
  std::vector<double> out(dist.probs.size());
  matrix.apply_left(dist.probs, out);
  double worst = 0.0;
  for (std::size_t s = 0; s < out.size(); ++s) worst = std::max(worst, std::abs(out[s] - dist.probs[s]));
  return worst;
}

}  // namespace canon
