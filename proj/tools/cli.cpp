// canon-sampler: command-line front end.
//
// Exit codes: 0 success, 1 domain error (infeasible model, state space too
// large, unsupported kernel), 2 usage error.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "canon/analysis.hpp"
#include "canon/coupling.hpp"
#include "canon/error.hpp"
#include "canon/exact.hpp"
#include "canon/kernel.hpp"
#include "canon/measures.hpp"
#include "canon/model_io.hpp"
#include "canon/rng.hpp"
#include "canon/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace canon;

namespace {

struct Usage : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

const std::vector<std::string> kSubcommands = {"sample", "exact",  "couple",       "sim",    "sweep",
                                               "mpc",    "delta", "reject-ratio", "dualize"};

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string closest(const std::string& word, const std::vector<std::string>& choices) {
  std::string best;
  std::size_t d = std::string::npos;
  for (const auto& c : choices) {
    const std::size_t e = edit_distance(word, c);
    if (e < d) {
      d = e;
      best = c;
    }
  }
  return d <= std::max<std::size_t>(2, word.size() / 2) ? best : "";
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_reals(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& t : split(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw Usage(std::string("bad number '") + t + "' in " + what);
    }
  }
  return out;
}

std::vector<std::int64_t> parse_ints(const std::string& s, const char* what) {
  std::vector<std::int64_t> out;
  for (const auto& t : split(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw Usage(std::string("bad integer '") + t + "' in " + what);
    }
  }
  return out;
}

std::string join_reals(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_real(xs[i]);
  return s;
}

json config_json(const Configuration& eta) { return eta.occupancy(); }

Configuration parse_config(const std::string& s, int m) {
  std::vector<int> occ;
  for (auto x : parse_ints(s, "configuration")) occ.push_back(static_cast<int>(x));
  if (static_cast<int>(occ.size()) != m) throw Usage("configuration needs " + std::to_string(m) + " entries");
  return Configuration(std::move(occ));
}

// ------------------------------------------------------------------ model

struct ModelArgs {
  std::string file;
  int k = -1;
  int m = -1;
  double beta = 0.0;
  std::string v;
  std::string n;
};

void add_model_options(CLI::App* sub, ModelArgs& a) {
  sub->add_option("model", a.file, "Model file (JSON)");
  sub->add_option("--k", a.k, "Particles (inline Fermi model)");
  sub->add_option("--m", a.m, "Levels (inline Fermi model)");
  sub->add_option("--beta", a.beta, "Inverse temperature (inline Fermi model)");
  sub->add_option("--v", a.v, "Energies v_1..v_m, comma separated (default j/m)");
  sub->add_option("--n", a.n, "Degeneracies n_1..n_m, comma separated");
}

bool has_inline(const ModelArgs& a) { return a.k >= 0 || a.m >= 0 || !a.n.empty() || !a.v.empty(); }

ModelFile resolve_model(const ModelArgs& a) {
  if (!a.file.empty()) {
    if (has_inline(a)) throw Usage("give either a model file or inline --k/--m/--n flags, not both");
    return load_model(a.file);
  }
  if (a.k < 0 || a.m <= 0 || a.n.empty()) throw Usage("a model file or --k, --m and --n are required");
  FermiSpec f;
  f.k = a.k;
  f.m = a.m;
  f.beta = a.beta;
  f.n = parse_ints(a.n, "--n");
  if (a.v.empty())
    for (int j = 1; j <= a.m; ++j) f.v.push_back(static_cast<double>(j) / a.m);
  else
    f.v = parse_reals(a.v, "--v");
  if (static_cast<int>(f.n.size()) != f.m || static_cast<int>(f.v.size()) != f.m)
    throw Usage("--v and --n need m entries");
  ModelFile out;
  out.fermi = std::move(f);
  return out;
}

// ------------------------------------------------------------------ output

struct OutDir {
  fs::path dir;
  std::vector<std::string> files;

  bool enabled() const { return !dir.empty(); }

  void open(const std::string& path) {
    if (path.empty()) return;
    dir = path;
    fs::create_directories(dir);
  }

  std::ofstream create(const std::string& name) {
    files.push_back(name);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  }

  void write_json(const std::string& name, const json& j) { create(name) << j.dump(2) << '\n'; }
};

// The resolved argv reproduces the run when passed back to this binary.
void write_manifest(OutDir& out, const std::string& name, const std::string& subcommand,
                    const std::vector<std::string>& resolved_argv, std::uint64_t seed, const json& hashes,
                    json extra = json::object()) {
  if (!out.enabled()) return;
  json j = std::move(extra);
  j["artifact_version"] = kArtifactVersion;
  j["subcommand"] = subcommand;
  j["resolved_argv"] = resolved_argv;
  j["seed"] = seed;
  j["model_hash"] = hashes;
  std::vector<std::string> listed = out.files;
  listed.push_back(name);
  j["outputs"] = listed;
  out.write_json(name, j);
}

// model.json inside the output directory, referenced by the manifest.
std::string save_model(OutDir& out, const ModelFile& model) {
  out.write_json("model.json", to_json(model));
  return (out.dir / "model.json").string();
}

std::string beta_label(double beta) { return format_real(beta); }

// ------------------------------------------------------------------ commands

struct Common {
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_delta(const ModelArgs& ma) {
  const ModelSpec spec = build_model(resolve_model(ma));
  const DeltaResult& d = spec.delta_info();
  json j{{"delta", spec.delta()},
         {"l_delta", spec.l_delta()},
         {"witness_site", d.witness_site},
         {"witness_index", d.witness_index},
         {"model_hash", model_hash(spec)}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_dualize(const ModelArgs& ma, const Common& c) {
  const ModelFile model = resolve_model(ma);
  if (!model.fermi) throw Usage("dualize needs a Fermi model");
  ModelFile dual;
  dual.fermi = dualize(*model.fermi);
  build_model(dual);  // validates
  const json j = to_json(dual);
  if (!c.out.empty()) {
    OutDir out;
    out.open(c.out);
    out.write_json("dual.json", j);
    write_manifest(out, "manifest.json", "dualize", {"dualize", save_model(out, model), "--out", c.out}, c.seed,
                   model_hash(build_model(dual)));
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_mpc(const ModelArgs& ma, bool all) {
  const ModelSpec spec = build_model(resolve_model(ma));
  const MostProbable mp = most_probable(spec, all);
  json j{{"config", config_json(mp.configs.front())}, {"free_entropy", real_to_json(mp.free_entropy)}};
  if (all) {
    json list = json::array();
    for (const auto& eta : mp.configs) list.push_back(config_json(eta));
    j["maximizers"] = list;
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_reject_ratio(const ModelArgs& ma, const std::string& q_text) {
  const ModelSpec spec = build_model(resolve_model(ma));
  const std::vector<double> q = q_text.empty() ? std::vector<double>{} : parse_reals(q_text, "--q");
  const RejectionRatio r = rejection_ratio(spec, q);
  json j{{"ratio", r.ratio}, {"log_ratio", r.log_ratio}, {"argmax_config", config_json(r.argmax)}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_exact(const ModelArgs& ma, const Common& c, const std::string& eps_text, std::int64_t t_cap,
              std::size_t cap) {
  const ModelFile model = resolve_model(ma);
  const ModelSpec spec = build_model(model);
  const std::vector<double> eps = parse_reals(eps_text, "--eps");
  if (eps.empty()) throw Usage("--eps needs at least one value");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0)) throw Usage("epsilon must lie in (0, 1)");
  const double min_eps = *std::min_element(eps.begin(), eps.end());
  if (t_cap <= 0) {
    const double b = mixing_bound(spec, min_eps);
    t_cap = std::isfinite(b) ? static_cast<std::int64_t>(std::ceil(2.0 * b)) + 10 : 100000;
  }
  const std::vector<double> d = exact_d_series(spec, static_cast<int>(t_cap), Exec::parallel, cap);

  json results = json::array();
  for (double e : eps) {
    const double b = mixing_bound(spec, e);
    json r{{"epsilon", e}, {"bound", real_to_json(b)}};
    if (std::isfinite(b)) r["bound_steps"] = static_cast<std::int64_t>(std::ceil(b));
    std::optional<std::int64_t> t;
    for (std::size_t s = 0; s < d.size(); ++s)
      if (d[s] <= e) {
        t = static_cast<std::int64_t>(s);
        break;
      }
    r["t_eps"] = t ? json(*t) : json(nullptr);
    results.push_back(r);
  }
  json j = results.size() == 1 ? results.front() : json{{"results", results}};
  j["delta"] = spec.delta();
  j["states"] = static_cast<double>(count_states(spec.k(), spec.m()));

  if (!c.out.empty()) {
    OutDir out;
    out.open(c.out);
    {
      std::ofstream f = out.create("exact_d.csv");
      f << "t,d\n";
      for (std::size_t s = 0; s < d.size(); ++s) f << s << ',' << format_real(d[s]) << '\n';
    }
    const std::string mf = save_model(out, model);
    write_manifest(out, "manifest.json", "exact",
                   {"exact", mf, "--eps", join_reals(eps), "--t-cap", std::to_string(t_cap), "--cap",
                    std::to_string(cap), "--out", c.out},
                   c.seed, model_hash(spec));
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_sample(const ModelArgs& ma, const Common& c, std::int64_t steps, double eps, int count,
               const std::string& start_text, bool skip) {
  const ModelFile model = resolve_model(ma);
  const ModelSpec spec = build_model(model);
  if (steps < 0) steps = horizon(spec.k(), spec.m(), eps);
  if (count < 1) throw Usage("--count must be positive");
  const Configuration start = start_text.empty() ? eta0_candidates(spec).front() : parse_config(start_text, spec.m());
  if (!is_positive(spec, start)) throw Usage("start configuration has zero weight or wrong total");

  std::vector<Configuration> samples(count);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < count; ++s) {
    ChainState st = ChainState::start(spec, start, derive_seed(c.seed, {static_cast<std::uint64_t>(s)}));
    if (skip)
      run_skip_ahead(spec, st, steps);
    else
      run(spec, st, steps);
    samples[s] = st.config;
  }

  json list = json::array();
  for (const auto& eta : samples) list.push_back(config_json(eta));
  json j{{"steps", steps}, {"start", config_json(start)}, {"samples", list}};

  if (!c.out.empty()) {
    OutDir out;
    out.open(c.out);
    {
      std::ofstream f = out.create("samples.csv");
      f << "sample";
      for (int i = 1; i <= spec.m(); ++i) f << ",k_" << i;
      f << '\n';
      for (int s = 0; s < count; ++s) {
        f << s;
        for (int i = 0; i < spec.m(); ++i) f << ',' << samples[s][i];
        f << '\n';
      }
    }
    const std::string mf = save_model(out, model);
    std::vector<std::string> argv{"sample", mf, "--steps", std::to_string(steps), "--count", std::to_string(count),
                                  "--start", join_reals(std::vector<double>(start.occupancy().begin(),
                                                                            start.occupancy().end())),
                                  "--seed", std::to_string(c.seed), "--out", c.out};
    if (skip) argv.push_back("--skip-ahead");
    write_manifest(out, "manifest.json", "sample", argv, c.seed, model_hash(spec));
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_couple(const ModelArgs& ma, const Common& c, std::string variant_text, int runs, std::int64_t max_t,
               double eps) {
  const ModelFile model = resolve_model(ma);
  const ModelSpec spec = build_model(model);
  if (variant_text.empty()) variant_text = spec.delta() == 1.0 ? "colored" : "delta";
  CouplingVariant variant;
  if (variant_text == "colored")
    variant = CouplingVariant::colored;
  else if (variant_text == "delta")
    variant = CouplingVariant::delta;
  else
    throw Usage("--variant must be 'colored' or 'delta'");
  if (runs < 1) throw Usage("--runs must be positive");
  const double alpha = contraction_alpha(spec, variant);
  if (max_t <= 0) max_t = static_cast<std::int64_t>(std::ceil(alpha * (std::log(std::max(1, spec.k())) + 20.0)));
  const auto starts = eta0_candidates(spec);

  std::vector<std::optional<std::int64_t>> taus(runs);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < runs; ++r)
    taus[r] = coupling_time(spec, starts[0], starts[1], derive_seed(c.seed, {static_cast<std::uint64_t>(r)}), max_t,
                            variant)
                  .tau;

  std::vector<std::int64_t> done;
  for (const auto& t : taus)
    if (t) done.push_back(*t);
  std::sort(done.begin(), done.end());
  double mean = 0.0;
  for (auto t : done) mean += static_cast<double>(t);
  if (!done.empty()) mean /= static_cast<double>(done.size());
  json j{{"variant", variant_text},
         {"runs", runs},
         {"timeouts", runs - static_cast<int>(done.size())},
         {"max_t", max_t},
         {"alpha", alpha},
         {"bound", real_to_json(mixing_bound(spec, eps))},
         {"start1", config_json(starts[0])},
         {"start2", config_json(starts[1])}};
  if (!done.empty()) {
    j["tau_mean"] = mean;
    j["tau_median"] = done[done.size() / 2];
    j["tau_max"] = done.back();
  }
  if (!c.out.empty()) {
    OutDir out;
    out.open(c.out);
    {
      std::ofstream f = out.create("couple.csv");
      f << "run,tau\n";
      for (int r = 0; r < runs; ++r) {
        f << r << ',';
        if (taus[r]) f << *taus[r];
        f << '\n';
      }
    }
    const std::string mf = save_model(out, model);
    write_manifest(out, "manifest.json", "couple",
                   {"couple", mf, "--variant", variant_text, "--runs", std::to_string(runs), "--max-t",
                    std::to_string(max_t), "--eps", format_real(eps), "--seed", std::to_string(c.seed), "--out",
                    c.out},
                   c.seed, model_hash(spec));
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct SimArgs {
  std::string preset;
  std::string beta_list;
  int N = -1;
  int bins = -1;
  double eps = 0.1;
};

int cmd_sim(const ModelArgs& ma, const Common& c, const SimArgs& sa, bool full_output) {
  SimPlan plan;
  ModelFile model;
  if (!sa.preset.empty()) {
    if (!ma.file.empty() || has_inline(ma)) throw Usage("--preset cannot be combined with a model");
    try {
      plan = preset(sa.preset);
    } catch (const std::invalid_argument&) {
      const std::string hint = closest(sa.preset, preset_names());
      throw Usage("unknown preset '" + sa.preset + "'" + (hint.empty() ? "" : "; did you mean '" + hint + "'?"));
    }
    model.fermi = plan.fermi;
  } else {
    model = resolve_model(ma);
    if (model.fermi) {
      plan.fermi = model.fermi;
      plan.betas = {model.fermi->beta};
    } else {
      plan.custom = build_model(model);
    }
  }
  if (!full_output && sa.beta_list.empty() && plan.fermi) plan.betas = default_beta_grid();
  if (!sa.beta_list.empty()) {
    if (!plan.fermi) throw Usage("--beta-list needs a Fermi model");
    plan.betas = parse_reals(sa.beta_list, "--beta-list");
  }
  if (sa.N > 0) plan.N = sa.N;
  if (sa.bins > 0) plan.bins = sa.bins;
  plan.epsilon = sa.eps;
  plan.seed = c.seed;
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    throw Usage(e.what());
  }
  if (plan.fermi) model.fermi = plan.fermi;

  const std::vector<BetaRun> runs = beta_sweep(plan);

  OutDir out;
  out.open(c.out.empty() ? std::string(full_output ? "sim_out" : "sweep_out") : c.out);
  json hashes = json::object();
  json sweep_rows = json::array();
  for (const auto& r : runs) {
    const std::string label = plan.custom ? "custom" : beta_label(r.beta);
    if (plan.fermi) {
      FermiSpec f = *plan.fermi;
      f.beta = r.beta;
      hashes[label] = model_hash(build_fermi(f));
    } else {
      hashes[label] = model_hash(*plan.custom);
    }
    if (full_output) {
      {
        std::ofstream f = out.create("dbar_" + label + ".csv");
        f << "t,dbar\n";
        for (std::size_t t = 0; t < r.dbar.size(); ++t) f << t << ',' << format_real(r.dbar[t]) << '\n';
      }
      {
        std::ofstream f = out.create("reference_" + label + ".csv");
        f << "bin_lo,bin_hi,mass\n";
        for (int b = 0; b < r.binning.bins; ++b)
          f << format_real(r.binning.cell_lo(b)) << ',' << format_real(r.binning.cell_hi(b)) << ','
            << format_real(r.ref_mass[b]) << '\n';
      }
    }
    sweep_rows.push_back(json{{"beta", r.beta}, {"t_hat", r.estimate.t_hat}, {"mixed", r.estimate.mixed}});
  }
  {
    std::ofstream f = out.create("sweep.csv");
    f << "beta,t_hat,bound,mixed_flag\n";
    for (const auto& r : runs)
      f << format_real(r.beta) << ',' << r.estimate.t_hat << ',' << format_real(r.bound) << ','
        << (r.estimate.mixed ? 1 : 0) << '\n';
  }
  if (full_output && plan.fermi) {
    std::ofstream f = out.create("profile.csv");
    f << "level,v,n\n";
    for (int j = 0; j < plan.fermi->m; ++j)
      f << j + 1 << ',' << format_real(plan.fermi->v[j]) << ',' << plan.fermi->n[j] << '\n';
  }
  const std::string mf = save_model(out, model);

  const ModelSpec first = plan.custom ? *plan.custom : build_fermi(*plan.fermi);
  const std::vector<Configuration> starts = plan.eta0.empty() ? eta0_candidates(first) : plan.eta0;
  json eta0 = json::array();
  for (const auto& e : starts) eta0.push_back(config_json(e));
  const std::int64_t T = horizon(first.k(), first.m(), plan.epsilon);
  json resolved{{"N", plan.N},
                {"bins", plan.bins},
                {"epsilon", plan.epsilon},
                {"T", T},
                {"stability_window", stability_window(T)},
                {"betas", plan.custom ? json::array() : json(plan.betas)},
                {"eta0", eta0},
                {"preset", sa.preset},
                {"model", to_json(model)},
                {"sweep", sweep_rows}};
  std::vector<std::string> argv{full_output ? "sim" : "sweep", mf};
  if (plan.fermi) {
    argv.push_back("--beta-list");
    argv.push_back(join_reals(plan.betas));
  }
  for (const auto& s : std::vector<std::string>{"--N", std::to_string(plan.N), "--bins", std::to_string(plan.bins),
                                                "--eps", format_real(plan.epsilon), "--seed",
                                                std::to_string(c.seed), "--out", out.dir.string()})
    argv.push_back(s);
  write_manifest(out, "meta.json", full_output ? "sim" : "sweep", argv, c.seed, hashes,
                 json{{"plan", resolved}});

  json summary{{"out", out.dir.string()}, {"sweep", sweep_rows}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("CANON_SAMPLER_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw Usage(std::string("CANON_SAMPLER_THREADS is not an integer: ") + env);
      }
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
}

// Unknown flags after a known subcommand: suggest the closest option name.
std::string flag_hint(CLI::App& app, int argc, char** argv) {
  if (argc < 2) return "";
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(argv[1]);
  } catch (const CLI::OptionNotFound&) {
    return "";
  }
  std::vector<std::string> names;
  for (const CLI::Option* o : sub->get_options())
    for (const auto& l : o->get_lnames()) names.push_back("--" + l);
  for (int i = 2; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("--", 0) != 0) continue;
    a = a.substr(0, a.find('='));
    if (std::find(names.begin(), names.end(), a) != names.end()) continue;
    const std::string hint = closest(a, names);
    if (!hint.empty()) return "unknown option '" + a + "'; did you mean '" + hint + "'?";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampler and mixing-time toolkit for conditional products of log-concave measures"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  ModelArgs ma;
  Common c;
  int threads = 0;
  const auto common = [&](CLI::App* sub, bool out) {
    add_model_options(sub, ma);
    sub->add_option("--seed", c.seed, "Base seed");
    sub->add_option("--threads", threads, "Worker threads (default: CANON_SAMPLER_THREADS or all cores)");
    if (out) sub->add_option("--out", c.out, "Output directory");
  };

  CLI::App* s_sample = app.add_subcommand("sample", "Run independent chains and print their final states");
  std::int64_t steps = -1;
  double sample_eps = 0.1;
  int count = 1;
  std::string start_text;
  bool skip = false;
  common(s_sample, true);
  s_sample->add_option("--steps", steps, "Steps per chain (default floor(km ln(k/eps)))");
  s_sample->add_option("--eps", sample_eps, "Epsilon for the default step count");
  s_sample->add_option("--count", count, "Number of independent chains");
  s_sample->add_option("--start", start_text, "Start configuration, comma separated");
  s_sample->add_flag("--skip-ahead", skip, "Jump over holding times");

  CLI::App* s_exact = app.add_subcommand("exact", "Exact d(t) and t_eps by enumeration");
  std::string exact_eps = "0.1";
  std::int64_t t_cap = 0;
  std::size_t cap = kDefaultPowerCap;
  common(s_exact, true);
  s_exact->add_option("--eps", exact_eps, "Epsilon values, comma separated");
  s_exact->add_option("--t-cap", t_cap, "Largest t examined (default 2 x bound + 10)");
  s_exact->add_option("--cap", cap, "State-space cap");

  CLI::App* s_couple = app.add_subcommand("couple", "Coalescence times of the coupled chains");
  std::string variant;
  int runs = 100;
  std::int64_t max_t = 0;
  double couple_eps = 0.1;
  common(s_couple, true);
  s_couple->add_option("--variant", variant, "colored or delta (default: colored when delta = 1)");
  s_couple->add_option("--runs", runs, "Independent coupled runs");
  s_couple->add_option("--max-t", max_t, "Give up after this many steps");
  s_couple->add_option("--eps", couple_eps, "Epsilon for the reported bound");

  SimArgs sa;
  const auto sim_options = [&](CLI::App* sub) {
    common(sub, true);
    sub->add_option("--preset", sa.preset, "desk, case1 or case2");
    sub->add_option("--beta-list", sa.beta_list, "Inverse temperatures, comma separated");
    sub->add_option("--N", sa.N, "Ensemble size");
    sub->add_option("--bins", sa.bins, "Coarse-graining bins M");
    sub->add_option("--eps", sa.eps, "Epsilon");
  };
  CLI::App* s_sim = app.add_subcommand("sim", "Ensemble estimate of dbar(t) and t_hat per beta");
  sim_options(s_sim);
  CLI::App* s_sweep = app.add_subcommand("sweep", "t_hat over a beta grid (sweep.csv only)");
  sim_options(s_sweep);

  CLI::App* s_mpc = app.add_subcommand("mpc", "Most probable configuration");
  bool all = false;
  common(s_mpc, false);
  s_mpc->add_flag("--all", all, "Enumerate every maximizer");

  CLI::App* s_delta = app.add_subcommand("delta", "Concavity parameter delta and l_delta");
  common(s_delta, false);

  CLI::App* s_reject = app.add_subcommand("reject-ratio", "Rejection-sampling cost against a multinomial");
  std::string q_text;
  common(s_reject, false);
  s_reject->add_option("--q", q_text, "Multinomial parameters (default uniform)");

  CLI::App* s_dual = app.add_subcommand("dualize", "Vacancy picture of a Fermi model");
  common(s_dual, true);

  if (argc >= 2 && argv[1][0] != '-' &&
      std::find(kSubcommands.begin(), kSubcommands.end(), argv[1]) == kSubcommands.end()) {
    const std::string hint = closest(argv[1], kSubcommands);
    std::cerr << "error: unknown subcommand '" << argv[1] << "'";
    if (!hint.empty()) std::cerr << "; did you mean '" << hint << "'?";
    std::cerr << "\nRun with --help for the list of subcommands.\n";
    return 2;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    const std::string hint = flag_hint(app, argc, argv);
    if (!hint.empty()) std::cerr << hint << '\n';
    return 2;
  }

  try {
    apply_threads(threads);
    if (s_sample->parsed()) return cmd_sample(ma, c, steps, sample_eps, count, start_text, skip);
    if (s_exact->parsed()) return cmd_exact(ma, c, exact_eps, t_cap, cap);
    if (s_couple->parsed()) return cmd_couple(ma, c, variant, runs, max_t, couple_eps);
    if (s_sim->parsed()) return cmd_sim(ma, c, sa, true);
    if (s_sweep->parsed()) return cmd_sim(ma, c, sa, false);
    if (s_mpc->parsed()) return cmd_mpc(ma, all);
    if (s_delta->parsed()) return cmd_delta(ma);
    if (s_reject->parsed()) return cmd_reject_ratio(ma, q_text);
    if (s_dual->parsed()) return cmd_dualize(ma, c);
  } catch (const Usage& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
