// Acceptance run. One PASS/FAIL line per criterion, exit status 1 if any fails.
// Optional arguments restrict the run to the named criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "canon/analysis.hpp"
#include "canon/coupling.hpp"
#include "canon/error.hpp"
#include "canon/exact.hpp"
#include "canon/kernel.hpp"
#include "canon/measures.hpp"
#include "canon/rng.hpp"
#include "canon/simulate.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace canon;
using testing_util::all_states;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ------------------------------------------------------------ model pools

struct Pool {
  std::vector<ModelSpec> models;
  int fermi = 0, ulc_custom = 0, lc_custom = 0;
};

const Pool& pool() {
  static const Pool p = [] {
    Pool out;
    std::mt19937_64 g(20240611);
    for (int i = 0; i < 24; ++i) {
      out.models.push_back(build_fermi(testing_util::random_fermi(g, 8, 5)));
      ++out.fermi;
    }
    for (int i = 0; i < 18; ++i) {
      out.models.push_back(testing_util::random_custom(g, 8, 5, 1.0, 2.5));
      ++out.ulc_custom;
    }
    while (out.lc_custom < 18) {
      auto spec = testing_util::random_custom(g, 8, 5, 0.15, 1.2);
      if (!(spec.delta() > 0.0 && spec.delta() < 1.0)) continue;
      out.models.push_back(std::move(spec));
      ++out.lc_custom;
    }
    return out;
  }();
  return p;
}

bool ulc(const ModelSpec& s) { return s.delta() >= 1.0; }

// -------------------------------------------------------------- criteria

Outcome detailed_balance() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_db = 0.0, worst_res = 0.0;
  std::size_t biggest = 0;
  for (const auto& spec : pool().models) {
    worst_db = std::max(worst_db, check_detailed_balance(spec));
    worst_res = std::max(worst_res, stationarity_residual(spec));
    biggest = std::max(biggest, exact_nu(spec).states.size());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& p = pool();
  return {worst_db <= 1e-12 && worst_res <= 1e-12 && secs < 60.0 && p.models.size() >= 50,
          fmt("%zu models (%d Fermi, %d custom delta=1, %d custom delta<1), max |X|=%zu, "
              "db=%.3g residual=%.3g, %.1fs",
              p.models.size(), p.fermi, p.ulc_custom, p.lc_custom, biggest, worst_db, worst_res, secs)};
}

Outcome mixing_bounds(bool want_ulc) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> eps{0.5, 0.1, 0.01};
  int checked = 0, violations = 0;
  double worst_ratio = 0.0;
  for (const auto& spec : pool().models) {
    if (ulc(spec) != want_ulc) continue;
    if (!want_ulc && !(spec.delta() > 0.0)) continue;
    const double top = mixing_bound(spec, 0.01);
    const auto t_cap = static_cast<std::int64_t>(std::ceil(top)) + 1;
    const auto ts = exact_mixing_times(spec, eps, t_cap);
    ++checked;
    for (std::size_t e = 0; e < eps.size(); ++e) {
      const double b = mixing_bound(spec, eps[e]);
      if (!ts[e] || static_cast<double>(*ts[e]) > b) {
        ++violations;
        continue;
      }
      if (b > 0) worst_ratio = std::max(worst_ratio, static_cast<double>(*ts[e]) / b);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = !want_ulc || secs < 300.0;
  return {checked > 0 && violations == 0 && in_time,
          fmt("%d models x 3 eps, %d violations, max t_eps/bound=%.3f, %.1fs", checked, violations,
              worst_ratio, secs)};
}

Outcome disorder() {
  int worst = 0, failures = 0;
  for (double v3 : {1.0, 10.0})
    for (double beta : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
      FermiSpec f{1, 3, beta, {0.0, 0.0, v3}, {1, 1, 1}};
      const auto t = exact_mixing_time(build_fermi(f), 0.1, 100);
      if (!t || *t > 6) ++failures;
      if (t) worst = std::max<int>(worst, static_cast<int>(*t));
    }
  return {failures == 0, fmt("k=1 m=3 n=(1,1,1), 10 (beta, v3) pairs, max t_0.1=%d (limit 6)", worst)};
}

Outcome coupling() {
  const auto t0 = std::chrono::steady_clock::now();
  // (a) long runs across both variants, restarting after coalescence
  std::int64_t steps = 0, increases = 0, corrupted = 0, coalesced = 0;
  {
    std::mt19937_64 g(77);
    const auto& models = pool().models;
    std::size_t idx = 0;
    while (steps < 1000000) {
      const auto& spec = models[idx % models.size()];
      const auto variant =
          (ulc(spec) && (idx / models.size()) % 2 == 0) ? CouplingVariant::colored : CouplingVariant::delta;
      ++idx;
      const auto dist = exact_nu(spec);
      std::vector<Configuration> pos;
      for (std::size_t s = 0; s < dist.states.size(); ++s)
        if (dist.probs[s] > 0) pos.push_back(dist.states[s]);
      std::uniform_int_distribution<std::size_t> pick(0, pos.size() - 1);
      for (int run = 0; run < 20 && steps < 1000000; ++run) {
        CoupledChain chain(spec, pos[pick(g)], pos[pick(g)], variant, g());
        int rho = chain.rho();
        try {
          for (int t = 0; t < 2000 && rho > 0; ++t) {
            chain.step();
            ++steps;
            if (chain.rho() > rho) ++increases;
            rho = chain.rho();
          }
        } catch (const CorruptedCoupling&) {
          ++corrupted;
        }
        if (rho == 0) ++coalesced;
      }
    }
  }

  // (b) one-step decrement frequency from fixed pairs
  int pairs = 0, below = 0;
  double worst_margin = 1e9;
  {
    std::uint64_t seed = 1000;
    for (const auto& spec : pool().models) {
      if (!(spec.delta() > 0.0)) continue;
      const auto starts = eta0_candidates(spec);
      if (starts.size() < 2 || starts.front() == starts.back()) continue;
      std::vector<CouplingVariant> variants{CouplingVariant::delta};
      if (ulc(spec)) variants.push_back(CouplingVariant::colored);
      for (auto variant : variants) {
        const auto rc = decrement_rate_check(spec, starts.front(), starts.back(), variant, 20000, ++seed);
        ++pairs;
        if (!rc.passed) ++below;
        increases += rc.increases;
        if (rc.sigma > 0) worst_margin = std::min(worst_margin, (rc.rate - rc.floor) / rc.sigma);
      }
    }
  }

  // (c) coupling-time tail against k exp(-t/km)
  int tail_points = 0, tail_bad = 0;
  {
    std::mt19937_64 g(91);
    int used = 0;
    for (const auto& spec : pool().models) {
      if (!ulc(spec) || used >= 8) continue;
      const auto starts = eta0_candidates(spec);
      if (starts.front() == starts.back()) continue;
      ++used;
      const int runs = 2000;
      const double km = static_cast<double>(spec.k()) * spec.m();
      const auto t_max = static_cast<std::int64_t>(std::ceil(km * std::log(spec.k() / 0.001))) + 1;
      std::vector<std::int64_t> taus;
      for (int r = 0; r < runs; ++r) {
        const auto res = coupling_time(spec, starts.front(), starts.back(), g(), t_max,
                                       r % 2 ? CouplingVariant::colored : CouplingVariant::delta);
        taus.push_back(res.tau ? *res.tau : t_max + 1);
      }
      for (std::int64_t t = 0; t <= t_max; t += std::max<std::int64_t>(1, t_max / 40)) {
        const double surv = static_cast<double>(std::count_if(taus.begin(), taus.end(),
                                                              [&](auto x) { return x > t; })) / runs;
        const double b = spec.k() * std::exp(-t / km);
        const double bc = std::min(1.0, b);
        const double sigma = std::sqrt(bc * (1 - bc) / runs);
        ++tail_points;
        if (surv > b + 4 * sigma) ++tail_bad;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {increases == 0 && corrupted == 0 && below == 0 && tail_bad == 0 && steps >= 1000000,
          fmt("%lld coupled steps (%lld coalescences), %lld rho increases, %lld corrupted; "
              "%d decrement checks, %d below floor-4sigma, min (rate-floor)/sigma=%.2f; "
              "tail %d/%d points above bound; %.1fs",
              (long long)steps, (long long)coalesced, (long long)increases, (long long)corrupted, pairs, below,
              worst_margin, tail_bad, tail_points, secs)};
}

Outcome beta_zero() {
  FermiSpec f{3, 3, 0.0, {0.0, 0.5, 1.0}, {2, 3, 4}};
  const auto spec = build_fermi(f);
  const auto states = all_states(3, 3);
  // multivariate hypergeometric over 9 slots
  std::vector<double> nu(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    long double c = 1;
    for (int j = 0; j < 3; ++j) c *= testing_util::binom(f.n[j], states[s][j]);
    nu[s] = static_cast<double>(c / testing_util::binom(9, 3));
  }
  const auto T = static_cast<std::int64_t>(std::ceil(9 * std::log(3 / 0.01)));
  const int samples = 100000;
  const Configuration start({0, 0, 3});
  std::vector<std::int64_t> counts(states.size(), 0);
  for (int r = 0; r < samples; ++r) {
    auto st = ChainState::start(spec, start, derive_seed(6, {static_cast<std::uint64_t>(r)}));
    run(spec, st, T);
    ++counts[std::lower_bound(states.begin(), states.end(), st.config) - states.begin()];
  }
  double chi2 = 0.0;
  int cells = 0;
  bool stray = false;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (nu[s] == 0) {
      stray |= counts[s] != 0;
      continue;
    }
    const double e = samples * nu[s];
    chi2 += (counts[s] - e) * (counts[s] - e) / e;
    ++cells;
  }
  const boost::math::chi_squared dist(cells - 1);
  const double p = boost::math::cdf(boost::math::complement(dist, chi2));
  return {p > 1e-3 && !stray, fmt("t=%lld, %d samples, %d cells, chi2=%.3f, p=%.4f", (long long)T, samples,
                                  cells, chi2, p)};
}

Outcome naive() {
  FermiSpec f{2, 2, 1.0, {0.0, 1.0}, {2, 2}};
  const auto law = naive_law(f);
  const auto dist = exact_nu(build_fermi(f));
  const double tv = tv_to_exact(law, dist);
  const Configuration top({2, 0});
  const double naive_p = law.count(top) ? law.at(top) : 0.0;
  const double nu_p = dist.probs[dist.index_of(top)];
  return {tv > 0.03, fmt("TV=%.4f, mass at (2,0): naive %.4f vs nu %.4f", tv, naive_p, nu_p)};
}

Outcome mpc() {
  std::mt19937_64 g(5150);
  int checked = 0, mismatched = 0;
  while (checked < 50) {
    const ModelSpec spec = checked % 2 ? build_fermi(testing_util::random_fermi(g, 8, 5))
                                       : testing_util::random_custom(g, 8, 5, 0.1, 2.0);
    const auto best = most_probable(spec);
    // brute force over every configuration from the phi tables
    double top = -INFINITY;
    for (const auto& eta : all_states(spec.k(), spec.m())) top = std::max(top, testing_util::log_weight(spec, eta));
    const double got = testing_util::log_weight(spec, best.configs.front());
    if (got != top && std::abs(got - top) > 1e-12 * std::max(1.0, std::abs(top))) ++mismatched;
    ++checked;
  }
  return {mismatched == 0, fmt("%d models, %d greedy results below the brute-force maximum", checked, mismatched)};
}

Outcome rejection() {
  bool ok = true;
  std::string detail;
  for (int k = 2; k <= 5; ++k) {
    FermiSpec f{k, k, 0.0, std::vector<double>(k, 0.0), std::vector<std::int64_t>(k, 1)};
    const auto r = rejection_ratio(build_fermi(f));
    const double want = std::pow(k, k) / std::tgamma(k + 1.0);
    ok &= std::abs(r.ratio - want) <= 1e-9 * want;
    detail += fmt("k=%d %.4f ", k, r.ratio);
  }
  double prev = -INFINITY;
  const double limit = std::log(std::exp(1.0) / 2);
  for (int k : {4, 6, 8, 10}) {
    FermiSpec f{k, k, 0.0, std::vector<double>(k, 0.0), std::vector<std::int64_t>(k, 2)};
    const double per = rejection_ratio(build_fermi(f)).log_ratio / k;
    ok &= per > prev && per < limit;
    prev = per;
    detail += fmt("| k=%d log/k=%.4f ", k, per);
  }
  return {ok, detail + fmt("(limit %.4f)", limit)};
}

Outcome coupon() {
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 400;
  for (auto [k, m] : {std::pair{4, 8}, std::pair{8, 16}, std::pair{16, 32}}) {
    FermiSpec f;
    f.k = k;
    f.m = m;
    f.beta = 1000.0;
    for (int j = 1; j <= m; ++j) f.v.push_back(static_cast<double>(j) / m);
    f.n.assign(m, k);
    const auto spec = build_fermi(f);
    std::vector<int> occ(m, 0);
    occ[1] = k;
    double H = 0;
    for (int i = 1; i <= k; ++i) H += 1.0 / i;
    const double scale = static_cast<double>(k) * m * H;
    const auto cap = static_cast<std::int64_t>(100 * scale);
    double total = 0;
    int stuck = 0;
    for (int r = 0; r < 1000; ++r) {
      auto st = ChainState::start(spec, Configuration(occ), derive_seed(++seed, {}));
      while (st.config[0] != k && st.time < cap) step(spec, st);
      if (st.config[0] != k) ++stuck;
      total += static_cast<double>(st.time);
    }
    const double ratio = total / 1000 / scale;
    ok &= stuck == 0 && ratio >= 0.2 && ratio <= 5.0;
    detail += fmt("(%d,%d) mean/kmH_k=%.3f ", k, m, ratio);
  }
  return {ok, detail};
}

Outcome large_scale() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> betas{0, 2, 4, 8, 16, 32, 63, 125, 250, 500, 1000};
  const std::int64_t bound = 6214;
  bool ok = true;
  std::string detail;
  for (const char* name : {"case1", "case2"}) {
    SimPlan plan = preset(name);
    plan.betas = betas;
    plan.N = 1024;
    plan.bins = 32;
    plan.epsilon = 0.1;
    const auto runs = beta_sweep(plan);
    std::vector<std::int64_t> th;
    for (const auto& r : runs) {
      th.push_back(r.estimate.t_hat);
      ok &= r.estimate.mixed && r.estimate.t_hat <= bound;
    }
    detail += std::string(name) + " t_hat=";
    for (auto t : th) detail += std::to_string(t) + ",";
    detail.back() = ' ';
    if (std::string(name) == "case1") {
      bool monotone = std::is_sorted(th.begin(), th.end()) || std::is_sorted(th.rbegin(), th.rend());
      detail += monotone ? "(monotone in beta) " : "(non-monotone in beta) ";
    } else {
      ok &= static_cast<double>(th.back()) > 0.2 * bound;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok &= secs < 1800;
  return {ok, detail + fmt("bound %lld, %.0fs", (long long)bound, secs)};
}

Outcome skip_ahead() {
  bool ok = true;
  std::string detail;
  const int n_traj = 100000;
  struct Case {
    FermiSpec f;
    Configuration start;
    int t;
  };
  const std::vector<Case> cases{{{2, 2, 1.0, {0.0, 1.0}, {2, 2}}, Configuration({0, 2}), 3},
                                {{4, 3, 1.0, {0.0, 0.5, 1.0}, {2, 3, 4}}, Configuration({0, 1, 3}), 10}};
  std::uint64_t seed = 12;
  for (const auto& c : cases) {
    const auto spec = build_fermi(c.f);
    const auto states = all_states(c.f.k, c.f.m);
    const auto P = testing_util::oracle_matrix(spec, states);
    const auto R = testing_util::oracle_power(P, states.size(), c.t);
    const auto s0 = std::lower_bound(states.begin(), states.end(), c.start) - states.begin();
    std::vector<std::int64_t> counts(states.size(), 0);
    for (int r = 0; r < n_traj; ++r) {
      auto st = ChainState::start(spec, c.start, derive_seed(++seed, {}));
      run_skip_ahead(spec, st, c.t);
      ++counts[std::lower_bound(states.begin(), states.end(), st.config) - states.begin()];
    }
    double worst = 0;
    for (std::size_t s = 0; s < states.size(); ++s) {
      const double p = R[s0 * states.size() + s];
      const double f = static_cast<double>(counts[s]) / n_traj;
      const double sigma = std::sqrt(p * (1 - p) / n_traj);
      if (sigma == 0) {
        ok &= counts[s] == 0;
        continue;
      }
      worst = std::max(worst, std::abs(f - p) / sigma);
      ok &= std::abs(f - p) <= 4 * sigma;
    }
    detail += fmt("k=%d m=%d t=%d: max |f-p|/sigma=%.2f ", c.f.k, c.f.m, c.t, worst);
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt("canon_accept_%d", static_cast<int>(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"a", ""}, {"b", ""}, {"t1", " --threads 1"}, {"t8", " --threads 8"}};
  for (const auto& [dir, extra] : runs) {
    const std::string cmd = std::string(CANON_CLI) + " sim --preset desk --seed 7" + extra + " --out " +
                            (root / dir).string() + " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "sim run failed: " + cmd};
  }
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(root / "a"))
    if (e.path().extension() == ".csv") names.insert(e.path().filename().string());
  int differing = 0;
  for (const auto& name : names) {
    const std::string ref = slurp(root / "a" / name);
    for (const auto& [dir, extra] : runs)
      if (slurp(root / dir / name) != ref) ++differing;
  }
  fs::remove_all(root);
  return {!names.empty() && differing == 0,
          fmt("%zu CSV files compared across 4 runs, %d differ", names.size(), differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"detailed-balance", detailed_balance},
      {"ulc-mixing-bound", [] { return mixing_bounds(true); }},
      {"lc-mixing-bound", [] { return mixing_bounds(false); }},
      {"disorder-uniformity", disorder},
      {"coupling-contraction", coupling},
      {"beta-zero-law", beta_zero},
      {"naive-sampler-bias", naive},
      {"most-probable-greedy", mpc},
      {"rejection-ratio", rejection},
      {"coupon-collector", coupon},
      {"large-scale-sweep", large_scale},
      {"skip-ahead-law", skip_ahead},
      {"determinism", determinism},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
