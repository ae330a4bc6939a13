#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "gph/boardgame.hpp"
#include "gph/duhamel.hpp"
#include "gph/errors.hpp"
#include "gph/hierarchy.hpp"
#include "gph/io.hpp"
#include "gph/nbody.hpp"
#include "gph/nls.hpp"
#include "gph/probes.hpp"
#include "gph/random.hpp"
#include "gph/version.hpp"

namespace gph::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kManifestSchemaVersion = 1;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num(int x) { return std::to_string(x); }
std::string num(std::size_t x) { return std::to_string(x); }

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : f_(path, std::ios::binary) {
    if (!f_) throw ConfigError("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) f_ << (i ? "," : "") << cells[i];
    f_ << '\n';
  }

 private:
  std::ofstream f_;
};

struct Run {
  fs::path dir;
  std::string command;
  std::vector<std::string> outputs;
  json summary = json::object();
  std::ostream* out = nullptr;

  fs::path file(const std::string& suffix) {
    outputs.push_back(command + suffix);
    return dir / (command + suffix);
  }
};

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

int parse_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

// Common options -----------------------------------------------------------

struct FieldOpts {
  int M = 4;
  std::uint64_t seed = 1;
  double width = 0.8;
  std::string field;
};

void add_field_opts(CLI::App* s, FieldOpts& f, int default_m) {
  f.M = default_m;
  s->add_option("--M", f.M, "lattice cutoff (modes |n|_inf <= M)");
  s->add_option("--seed", f.seed, "random seed");
  s->add_option("--width", f.width, "Gaussian envelope width of the random initial field");
  s->add_option("--field", f.field, "initial field file (binary or .csv); overrides --M and --seed");
}

TorusField make_field(const FieldOpts& f) {
  if (!f.field.empty()) return normalized(load_field(f.field));
  if (!(f.width > 0.0)) throw ConfigError("width must be > 0");
  return normalized(random_smooth_field(make_lattice(f.M), f.seed, 0, f.width));
}

struct MapOpts {
  int k = 3;
  std::string map;
  bool example = false;
};

void add_map_opts(CLI::App* s, MapOpts& m) {
  s->add_option("--k", m.k, "number of roots k (with --map)");
  s->add_option("--map", m.map, "collision map values sigma(k+1)-...-sigma(k+r)");
  s->add_flag("--example-435", m.example, "use the k=3, r=5 worked example map 1-2-3-4-6");
}

CollisionMap make_map(const MapOpts& m) {
  if (m.example || m.map.empty()) {
    if (!m.map.empty()) throw ConfigError("--map and --example-435 are exclusive");
    return worked_example_map();
  }
  std::vector<int> v;
  for (const auto& p : split(m.map, "-,")) v.push_back(parse_int(p));
  return CollisionMap(m.k, static_cast<int>(v.size()), v);
}

std::vector<double> random_times(std::uint64_t seed, std::uint64_t trial, int r, double t) {
  RngStream rng(seed, 1000 + trial);
  std::vector<double> ts;
  for (int i = 0; i < r; ++i) ts.push_back(t * rng.uniform());
  std::sort(ts.rbegin(), ts.rend());
  return ts;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
  return s;
}

int steps_for(double t_final, double dt) {
  if (!(dt > 0.0) || !(t_final > 0.0)) throw ConfigError("t-final and dt must be > 0");
  const double n = std::round(t_final / dt);
  if (std::abs(n * dt - t_final) > 1e-9 * t_final) throw ConfigError("t-final must be a multiple of dt");
  return static_cast<int>(n);
}

NlsParams nls_params(double lambda, double dt, double t_final) {
  NlsParams p;
  p.lambda = lambda;
  p.dt = dt;
  p.t_final = t_final;
  p.validate();
  return p;
}

struct NBodyOpts {
  FieldOpts field;
  int N = 2;
  double beta = 0.5;
  double coupling = 1.0;
};

void add_nbody_opts(CLI::App* s, NBodyOpts& o) {
  add_field_opts(s, o.field, 1);
  s->add_option("--N", o.N, "particle number");
  s->add_option("--beta", o.beta, "potential scaling exponent in (0, 3/5)");
  s->add_option("--coupling", o.coupling, "interaction strength (1 for H_N, 0 for free particles)");
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return std::nan("");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= double(x.size());
  my /= double(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxx > 0 ? sxy / sxx : std::nan("");
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << j.dump(2) << '\n';
}

void probe_outputs(Run& run, const ProbeReport& rep) {
  Csv c(run.file(".csv"), {"N1", "N2", "N3", "s", "delta", "index", "lhs", "rhs", "ratio"});
  for (const auto& s : rep.samples)
    c.row({num(s.dyadics[0]), num(s.dyadics[1]), num(s.dyadics[2]), num(s.s), num(s.delta), num(s.index),
           num(s.lhs), num(s.rhs), num(s.ratio)});
  if (!rep.sweep.empty()) {
    Csv sw(run.file(".sweep.csv"), {"N1", "N2", "N3", "delta", "max_ratio_half", "max_ratio"});
    for (const auto& p : rep.sweep)
      sw.row({num(p.dyadics[0]), num(p.dyadics[1]), num(p.dyadics[2]), num(p.delta), num(p.max_ratio_half),
              num(p.max_ratio)});
  }
  auto nan_null = [](double x) { return std::isnan(x) ? json(nullptr) : json(x); };
  json s{{"max_ratio", rep.max_ratio},
         {"max_ratio_half", rep.max_ratio_half},
         {"half_vs_all_relative_change", rep.max_ratio > 0 ? 1.0 - rep.max_ratio_half / rep.max_ratio : 0.0},
         {"fitted_delta", nan_null(rep.fitted_delta)},
         {"fitted_constant", rep.fitted_constant},
         {"n_samples", rep.n_samples},
         {"seed", rep.seed},
         {"trend", rep.trend},
         {"quadrature_resolved", rep.quadrature_resolved}};
  json slopes = json::array();
  for (double g : rep.growth_slopes) slopes.push_back(nan_null(g));
  s["growth_slopes"] = slopes;
  write_json(run.file(".summary.json"), s);
  run.summary = s;
  *run.out << "max_ratio=" << num(rep.max_ratio) << " max_ratio_half=" << num(rep.max_ratio_half)
           << " trend=" << rep.trend << '\n';
}

using Handler = std::function<void(Run&)>;

struct Command {
  CLI::App* app;
  Handler handler;
  std::uint64_t* seed;
};

class Registry {
 public:
  explicit Registry(CLI::App& app) : app_(app) {}
  template <class Opts>
  Opts& state() {
    auto p = std::make_shared<Opts>();
    keep_.push_back(p);
    return *p;
  }
  CLI::App* add(const std::string& name, const std::string& description, const std::string& columns) {
    CLI::App* s = app_.add_subcommand(name, description);
    s->footer("CSV columns: " + columns);
    return s;
  }
  void bind(CLI::App* s, std::uint64_t* seed, Handler h) { commands_.push_back({s, std::move(h), seed}); }
  const std::vector<Command>& commands() const { return commands_; }

 private:
  CLI::App& app_;
  std::vector<std::shared_ptr<void>> keep_;
  std::vector<Command> commands_;
};

// Subcommands --------------------------------------------------------------

void register_nls(Registry& reg) {
  struct O {
    FieldOpts f;
    double lambda = 1.0, dt = 1e-3, t_final = 0.5;
    int samples = 50;
    std::string integrator = "strang";
    bool snapshot = false;
  };
  auto& o = reg.state<O>();
  auto* s = reg.add("nls-evolve", "Evolve the truncated cubic NLS from a random smooth field",
                    "t,mass,energy,H1_norm");
  add_field_opts(s, o.f, 8);
  s->add_option("--lambda", o.lambda, "coupling (-1 focusing, 0 free, 1 defocusing)");
  s->add_option("--dt", o.dt, "time step");
  s->add_option("--t-final", o.t_final, "final time");
  s->add_option("--samples", o.samples, "number of output intervals");
  s->add_option("--integrator", o.integrator, "strang | rk4")->check(CLI::IsMember({"strang", "rk4"}));
  s->add_flag("--snapshot", o.snapshot, "also write the final field as a binary record");
  reg.bind(s, &o.f.seed, [&o](Run& run) {
    NlsParams p = nls_params(o.lambda, o.dt, o.t_final);
    p.integrator = o.integrator == "rk4" ? Integrator::integrating_factor_rk4 : Integrator::split_step_strang;
    if (o.samples < 1) throw ConfigError("samples must be >= 1");
    const TorusField phi = make_field(o.f);
    const auto times = uniform_times(o.t_final, o.samples);
    const auto traj = nls_evolve(phi, p, times);
    Csv c(run.file(".csv"), {"t", "mass", "energy", "H1_norm"});
    const Conserved c0 = conserved_quantities(traj.front(), o.lambda);
    double dm = 0, de = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const Conserved q = conserved_quantities(traj[i], o.lambda);
      dm = std::max(dm, std::abs(q.mass - c0.mass));
      de = std::max(de, std::abs(q.energy - c0.energy));
      c.row({num(times[i]), num(q.mass), num(q.energy), num(sobolev_norm(traj[i], 1.0))});
    }
    if (o.snapshot) save_field(run.file(".final.gphf"), traj.back());
    run.summary = {{"max_mass_drift", dm}, {"max_energy_drift", de}};
    *run.out << "mass_drift=" << num(dm) << " energy_drift=" << num(de) << '\n';
  });
}

AtomicDeFinettiMeasure random_measure(const ModeLattice& lat, int atoms, std::uint64_t seed, double width,
                                      double radius) {
  if (atoms < 1) throw ConfigError("atoms must be >= 1");
  if (!(radius > 0.0 && radius <= 1.0)) throw ConfigError("radius must lie in (0, 1]");
  RngStream rng(seed, 999);
  std::vector<double> w;
  double total = 0;
  for (int i = 0; i < atoms; ++i) total += w.emplace_back(atoms == 1 ? 1.0 : rng.uniform());
  AtomicDeFinettiMeasure mu;
  for (int i = 0; i < atoms; ++i)
    mu.atoms.push_back({w[std::size_t(i)] / total,
                        cplx(radius) * normalized(random_smooth_field(lat, seed, std::uint64_t(i), width))});
  // Re-normalize the weights so they sum to one to rounding.
  double sum = 0;
  for (const auto& a : mu.atoms) sum += a.weight;
  mu.atoms.back().weight += 1.0 - sum;
  return mu;
}

void register_hierarchy(Registry& reg) {
  struct O {
    FieldOpts f;
    double lambda = 1.0, dt = 1e-3, t_final = 0.1, alpha = 1.0, radius = 1.0;
    int steps = 20, K = 2, atoms = 1;
  };
  auto& o = reg.state<O>();
  auto* s = reg.add("hierarchy-residual",
                    "GP hierarchy residual, mild defect and growth values along a de Finetti trajectory",
                    "t,k,residual_hs,defect_hs,growth_value_k (residual empty at end points, defect at even "
                    "sample indices only)");
  add_field_opts(s, o.f, 4);
  s->add_option("--lambda", o.lambda, "coupling");
  s->add_option("--dt", o.dt, "NLS time step");
  s->add_option("--t-final", o.t_final, "final time");
  s->add_option("--steps", o.steps, "number of sample intervals");
  s->add_option("--K", o.K, "largest hierarchy order checked");
  s->add_option("--atoms", o.atoms, "number of de Finetti atoms (1 = factorized)");
  s->add_option("--radius", o.radius, "L^2 norm of every atom");
  s->add_option("--alpha", o.alpha, "Sobolev exponent of the growth values");
  reg.bind(s, &o.f.seed, [&o](Run& run) {
    const NlsParams p = nls_params(o.lambda, o.dt, o.t_final);
    if (o.steps < 2 || o.K < 1) throw ConfigError("need steps >= 2 and K >= 1");
    if (o.alpha < 0) throw ConfigError("alpha must be >= 0");
    const auto mu = random_measure(make_lattice(o.f.M), o.atoms, o.f.seed, o.f.width, o.radius);
    const auto times = uniform_times(o.t_final, o.steps);
    const auto tr = definetti_trajectory(mu, p, times, o.K + 1);
    Csv c(run.file(".csv"), {"t", "k", "residual_hs", "defect_hs", "growth_value_k"});
    double worst = 0, worst_defect = 0;
    for (int k = 1; k <= o.K; ++k) {
      const auto res = gp_residual(tr, k);
      for (std::size_t i = 0; i < times.size(); ++i) {
        std::string r, d;
        if (i > 0 && i + 1 < times.size()) {
          r = num(res[i - 1].value);
          worst = std::max(worst, res[i - 1].value);
        }
        if (i % 2 == 0) {
          const double v = duhamel_defect(tr, k, i, i == 0 ? 2 : int(i));
          d = num(v);
          worst_defect = std::max(worst_defect, v);
        }
        const double g = trace_norm(sobolev_weight(tr.states[i][std::size_t(k - 1)], o.alpha));
        c.row({num(times[i]), num(k), r, d, num(g)});
      }
    }
    run.summary = {{"max_residual_hs", worst}, {"max_defect_hs", worst_defect}};
    *run.out << "max_residual=" << num(worst) << " max_defect=" << num(worst_defect) << '\n';
  });
}

void register_duhamel(Registry& reg) {
  struct O {
    FieldOpts f;
    double lambda = 1.0, dt = 1e-3, t_final = 0.2;
    int k = 1;
    std::vector<int> subintervals{2, 4, 8, 200};
    std::string rule = "simpson";
  };
  auto& o = reg.state<O>();
  auto* s = reg.add("duhamel-check", "Mild-solution defect of a factorized trajectory under quadrature refinement",
                    "subintervals,rule,defect_hs,ratio_to_previous");
  add_field_opts(s, o.f, 4);
  s->add_option("--lambda", o.lambda, "coupling");
  s->add_option("--dt", o.dt, "NLS step and sample spacing");
  s->add_option("--t-final", o.t_final, "time at which the defect is evaluated");
  s->add_option("--order", o.k, "density-matrix order k");
  s->add_option("--subintervals", o.subintervals, "quadrature subinterval counts")->delimiter(',');
  s->add_option("--rule", o.rule, "simpson | trapezoid")->check(CLI::IsMember({"simpson", "trapezoid"}));
  reg.bind(s, &o.f.seed, [&o](Run& run) {
    const NlsParams p = nls_params(o.lambda, o.dt, o.t_final);
    const int steps = steps_for(o.t_final, o.dt);
    if (o.k < 1) throw ConfigError("order must be >= 1");
    const Quadrature rule = o.rule == "simpson" ? Quadrature::simpson : Quadrature::trapezoid;
    for (int n : o.subintervals)
      if (n < 1 || steps % n != 0 || (rule == Quadrature::simpson && n % 2))
        throw ConfigError("subinterval count " + std::to_string(n) + " must divide " + std::to_string(steps) +
                          (rule == Quadrature::simpson ? " and be even" : ""));
    const auto times = uniform_times(o.t_final, steps);
    const auto tr = factorized_trajectory(make_field(o.f), p, times, o.k + 1);
    Csv c(run.file(".csv"), {"subintervals", "rule", "defect_hs", "ratio_to_previous"});
    double prev = std::nan("");
    json rows = json::array();
    for (int n : o.subintervals) {
      const double d = duhamel_defect(tr, o.k, std::size_t(steps), n, rule);
      c.row({num(n), o.rule, num(d), std::isnan(prev) ? "" : num(prev / d)});
      rows.push_back({{"subintervals", n}, {"defect_hs", d}});
      *run.out << "n=" << n << " defect=" << num(d) << '\n';
      prev = d;
    }
    run.summary = {{"defects", rows}};
  });
}

void register_definetti(Registry& reg) {
  struct O {
    FieldOpts f;
    double lambda = 1.0, dt = 1e-3, t_final = 0.1, radius = 1.0;
    int steps = 10, K = 3, atoms = 3;
  };
  auto& o = reg.state<O>();
  auto* s = reg.add("definetti", "Evolve an atomic de Finetti mixture of factorized states",
                    "t,k,trace_re,trace_im,trace_norm,hs_norm");
  add_field_opts(s, o.f, 4);
  s->add_option("--lambda", o.lambda, "coupling");
  s->add_option("--dt", o.dt, "NLS time step");
  s->add_option("--t-final", o.t_final, "final time");
  s->add_option("--steps", o.steps, "number of sample intervals");
  s->add_option("--K", o.K, "largest order");
  s->add_option("--atoms", o.atoms, "number of atoms");
  s->add_option("--radius", o.radius, "L^2 norm of every atom");
  reg.bind(s, &o.f.seed, [&o](Run& run) {
    const NlsParams p = nls_params(o.lambda, o.dt, o.t_final);
    if (o.steps < 1 || o.K < 1) throw ConfigError("need steps >= 1 and K >= 1");
    const auto mu = random_measure(make_lattice(o.f.M), o.atoms, o.f.seed, o.f.width, o.radius);
    const auto times = uniform_times(o.t_final, o.steps);
    const auto tr = definetti_trajectory(mu, p, times, o.K);
    Csv c(run.file(".csv"), {"t", "k", "trace_re", "trace_im", "trace_norm", "hs_norm"});
    for (std::size_t i = 0; i < times.size(); ++i)
      for (int k = 1; k <= o.K; ++k) {
        const auto& g = tr.states[i][std::size_t(k - 1)];
        const cplx tc = trace(g);
        c.row({num(times[i]), num(k), num(tc.real()), num(tc.imag()), num(trace_norm(g)), num(hs_norm(g))});
      }
    json w = json::array();
    for (const auto& a : mu.atoms) w.push_back(a.weight);
    run.summary = {{"weights", w}};
  });
}

void register_boardgame(Registry& reg) {
  struct O {
    int k = 2, r = 2;
  };
  auto& o = reg.state<O>();
  auto* s = reg.add("boardgame-enum", "Enumerate collision maps and their upper-echelon classes",
                    "k,r,map,class_id,representative,upper_echelon,moves_to_echelon; class table "
                    "(.classes.csv): k,r,class_id,representative,class_size,monotone_members");
  s->add_option("--k", o.k, "number of roots");
  s->add_option("--r", o.r, "number of collisions");
  reg.bind(s, nullptr, [&o](Run& run) {
    const EchelonPartition part = upper_echelon_classes(o.k, o.r);
    Csv c(run.file(".csv"), {"k", "r", "map", "class_id", "representative", "upper_echelon", "moves_to_echelon"});
    for (std::size_t i = 0; i < part.maps.size(); ++i) {
      const auto& m = part.maps[i];
      const std::size_t id = part.class_of[i];
      c.row({num(o.k), num(o.r), m.encode(), num(id), part.classes[id].representative.encode(),
             m.is_upper_echelon() ? "1" : "0", num(reduce_to_echelon(m).moves)});
    }
    Csv t(run.file(".classes.csv"), {"k", "r", "class_id", "representative", "class_size", "monotone_members"});
    for (std::size_t i = 0; i < part.classes.size(); ++i) {
      const auto& cl = part.classes[i];
      t.row({num(o.k), num(o.r), num(i), cl.representative.encode(), num(cl.members.size()),
             num(cl.monotone_members)});
    }
    const double bound = std::ldexp(1.0, o.k + o.r);
    run.summary = {{"maps", part.maps.size()},
                   {"expected_maps", collision_map_count(o.k, o.r)},
                   {"classes", part.classes.size()},
                   {"class_bound", bound},
                   {"within_bound", double(part.classes.size()) <= bound}};
    *run.out << "maps=" << part.maps.size() << " classes=" << part.classes.size() << " bound=" << num(bound)
             << '\n';
  });
}

void register_tree_build(Registry& reg) {
  auto& o = reg.state<MapOpts>();
  auto* s = reg.add("tree-build", "Build the binary-tree forest of a collision map (CSV and DOT)",
                    "vertex,kind,tree,parent,kept,traced");
  add_map_opts(s, o);
  reg.bind(s, nullptr, [&o](Run& run) {
    const CollisionMap sigma = make_map(o);
    const TreeForest f = build_tree_graph(sigma);
    std::map<std::string, std::string> parent;
    for (const auto& t : f.trees) parent[t.top.name()] = "w" + std::to_string(t.root);
    for (const auto& v : f.internal) {
      const std::string n = "v" + std::to_string(v.label);
      parent[v.kept.name()] = n;
      parent[v.traced.name()] = n;
    }
    Csv c(run.file(".csv"), {"vertex", "kind", "tree", "parent", "kept", "traced"});
    for (const auto& t : f.trees) c.row({"w" + std::to_string(t.root), "root", num(t.root), "", "", ""});
    for (const auto& v : f.internal) {
      const std::string n = "v" + std::to_string(v.label);
      c.row({n, "internal", num(v.tree), parent[n], v.kept.name(), v.traced.name()});
    }
    for (const auto& t : f.trees)
      for (int i : t.leaves) {
        const std::string n = "u" + std::to_string(i);
        c.row({n, "leaf", num(t.root), parent[n], "", ""});
      }
    std::ofstream dot(run.file(".dot"), std::ios::binary);
    dot << f.to_dot();
    run.summary = {{"map", sigma.encode()},
                   {"k", sigma.k()},
                   {"upper_echelon", sigma.is_upper_echelon()},
                   {"distinguished_tree", f.distinguished_tree()}};
    *run.out << f.to_dot();
  });
}

void register_tree_product(Registry& reg) {
  struct O {
    MapOpts m;
    FieldOpts f;
    int time_trials = 5, field_trials = 3;
    double t = 0.1;
  };
  auto& o = reg.state<O>();
  auto* s = reg.add("tree-product-check", "Compare a Duhamel integrand with the product of its tree factors",
                    "field_trial,time_trial,t,times,relative_error");
  add_map_opts(s, o.m);
  add_field_opts(s, o.f, 2);
  s->add_option("--time-trials", o.time_trials, "random time tuples per field");
  s->add_option("--field-trials", o.field_trials, "random fields");
  s->add_option("--t", o.t, "outer time t; t_1..t_r are drawn from [0, t]");
  reg.bind(s, &o.f.seed, [&o](Run& run) {
    const CollisionMap sigma = make_map(o.m);
    if (!sigma.is_upper_echelon()) throw ConfigError("tree factorization needs an upper echelon map");
    if (o.time_trials < 1 || o.field_trials < 1) throw ConfigError("trial counts must be >= 1");
    if (!o.f.field.empty()) throw ConfigError("tree-product-check draws its own fields; drop --field");
    const TreeForest forest = build_tree_graph(sigma);
    const auto lat = make_lattice(o.f.M);
    Csv c(run.file(".csv"), {"field_trial", "time_trial", "t", "times", "relative_error"});
    double worst = 0;
    for (int p = 0; p < o.field_trials; ++p) {
      const TorusField phi = normalized(random_smooth_field(lat, o.f.seed, std::uint64_t(p), o.f.width));
      for (int q = 0; q < o.time_trials; ++q) {
        const DuhamelTimes tm{o.t, random_times(o.f.seed, std::uint64_t(q), sigma.r(), o.t), {}};
        const SeparableDensityMatrix j = evaluate_duhamel_integrand(sigma, phi, tm);
        const TreeFactors tf = evaluate_tree_factors(forest, phi, tm);
        const double e = hs_norm(j - tf.product) / hs_norm(j);
        worst = std::max(worst, e);
        c.row({num(p), num(q), num(o.t), join(tm.times), num(e)});
      }
    }
    run.summary = {{"map", sigma.encode()}, {"max_relative_error", worst}};
    *run.out << "max_relative_error=" << num(worst) << '\n';
  });
}

void register_theta(Registry& reg) {
  struct O {
    MapOpts m;
    FieldOpts f;
    int tree = 0;
    double t = 0.1;
  };
  auto& o = reg.state<O>();
  auto* s = reg.add("theta-expand", "Expand the one-particle tree kernels into (chi, psi) tableaux",
                    "tree,vertex,a,term,c_re,c_im,chi_distinguished,psi_distinguished,bound; check "
                    "(.check.csv): tree,m,top_terms,distinguished,resum_relative_error");
  add_map_opts(s, o.m);
  add_field_opts(s, o.f, 2);
  s->add_option("--tree", o.tree, "tree index (0 = all)");
  s->add_option("--t", o.t, "outer time t; t_1..t_r are drawn from [0, t]");
  reg.bind(s, &o.f.seed, [&o](Run& run) {
    const CollisionMap sigma = make_map(o.m);
    if (!sigma.is_upper_echelon()) throw ConfigError("theta expansion needs an upper echelon map");
    if (o.tree < 0 || o.tree > sigma.k()) throw ConfigError("tree index out of range");
    const TreeForest forest = build_tree_graph(sigma);
    const TorusField phi = make_field(o.f);
    const DuhamelTimes tm{o.t, random_times(o.f.seed, 0, sigma.r(), o.t), {}};
    const TreeFactors tf = evaluate_tree_factors(forest, phi, tm);
    Csv c(run.file(".csv"),
          {"tree", "vertex", "a", "term", "c_re", "c_im", "chi_distinguished", "psi_distinguished", "bound"});
    Csv chk(run.file(".check.csv"), {"tree", "m", "top_terms", "distinguished", "resum_relative_error"});
    double worst = 0;
    for (int j = 1; j <= sigma.k(); ++j) {
      if (o.tree != 0 && j != o.tree) continue;
      const ThetaTableau tab = expand_theta_kernels(forest, j, phi, tm);
      for (const auto& v : tab.vertices)
        for (std::size_t i = 0; i < v.terms.size(); ++i) {
          const auto& term = v.terms[i];
          c.row({num(j), "v" + std::to_string(v.label), num(v.a), num(i), num(term.c.real()), num(term.c.imag()),
                 term.chi_distinguished ? "1" : "0", term.psi_distinguished ? "1" : "0", num(v.bound)});
        }
      const DensityMatrix a = tab.resum(o.t).to_dense();
      const DensityMatrix b = to_dense(tf.factors[std::size_t(j - 1)]);
      const double e = (a.coeffs() - b.coeffs()).norm() / b.coeffs().norm();
      worst = std::max(worst, e);
      const Tree& tr = forest.trees[std::size_t(j - 1)];
      chk.row({num(j), num(tr.labels.size()), num(tab.top.size()), tr.distinguished ? "1" : "0", num(e)});
    }
    run.summary = {{"map", sigma.encode()}, {"max_resum_relative_error", worst}};
    *run.out << "max_resum_relative_error=" << num(worst) << '\n';
  });
}

std::vector<std::array<int, 3>> parse_sweep(const std::string& s) {
  std::vector<std::array<int, 3>> out;
  for (const auto& item : split(s, ";")) {
    const auto p = split(item, ",");
    if (p.size() != 3) throw ConfigError("sweep entries are N1,N2,N3 separated by ';'");
    out.push_back({parse_int(p[0]), parse_int(p[1]), parse_int(p[2])});
  }
  return out;
}

void add_quadrature_opts(CLI::App* s, TimeInterval& i, TimeQuadrature& q) {
  s->add_option("--t-a", i.a, "time interval start");
  s->add_option("--t-b", i.b, "time interval end");
  s->add_option("--nodes", q.nodes, "Gauss-Legendre nodes per panel");
  s->add_option("--panels", q.panels, "time panels");
}

void register_probes(Registry& reg) {
  {
    struct O {
      TrilinearConfig cfg;
      std::string sweep = "1,1,1;2,1,1;4,1,1;8,1,1";
    };
    auto& o = reg.state<O>();
    auto* s = reg.add("trilinear-probe", "Random-data probe of the frequency-localized trilinear estimate",
                      "N1,N2,N3,s,delta,index,lhs,rhs,ratio; sweep (.sweep.csv): N1,N2,N3,delta,max_ratio_half,"
                      "max_ratio");
    s->add_option("--M", o.cfg.cutoff, "lattice cutoff");
    s->add_option("--samples", o.cfg.samples, "samples per sweep point");
    s->add_option("--sweep", o.sweep, "dyadic triples N1,N2,N3 separated by ';'");
    s->add_option("--deltas", o.cfg.delta_grid, "surrogate delta grid")->delimiter(',');
    s->add_option("--growth-tolerance", o.cfg.growth_tolerance, "log-log slope counted as growth");
    s->add_option("--seed", o.cfg.seed, "random seed");
    add_quadrature_opts(s, o.cfg.interval, o.cfg.quadrature);
    reg.bind(s, &o.cfg.seed, [&o](Run& run) {
      o.cfg.sweep = parse_sweep(o.sweep);
      probe_outputs(run, trilinear_probe(o.cfg));
    });
  }
  {
    auto& o = reg.state<MultilinearConfig>();
    auto* s = reg.add("multilinear-probe", "Random-data probe of the multilinear space-time estimate",
                      "N1,N2,N3,s,delta,index,lhs,rhs,ratio");
    s->add_option("--M", o.cutoff, "lattice cutoff");
    s->add_option("--s", o.s, "derivative order in [0, 1]");
    s->add_option("--samples", o.samples, "samples");
    s->add_option("--seed", o.seed, "random seed");
    add_quadrature_opts(s, o.interval, o.quadrature);
    reg.bind(s, &o.seed, [&o](Run& run) { probe_outputs(run, multilinear_probe(o)); });
  }
  {
    auto& o = reg.state<SobolevConfig>();
    auto* s = reg.add("sobolev-probe", "Random-data probe of the H^1 -> L^6 embedding constant",
                      "N1,N2,N3,s,delta,index,lhs,rhs,ratio (lhs = L^6 norm, rhs = H^1 norm)");
    s->add_option("--M", o.cutoff, "lattice cutoff");
    s->add_option("--samples", o.samples, "samples");
    s->add_option("--seed", o.seed, "random seed");
    reg.bind(s, &o.seed, [&o](Run& run) {
      const ProbeReport rep = sobolev_probe(o);
      probe_outputs(run, rep);
      const double constant = sobolev_ratio(TorusField::constant(make_lattice(o.cutoff), 1.0));
      run.summary["constant_field_ratio"] = constant;
    });
  }
}

std::vector<double> uniform_or_fail(double t_final, int steps) {
  if (steps < 1 || !(t_final > 0.0)) throw ConfigError("need steps >= 1 and t-final > 0");
  return uniform_times(t_final, steps);
}

EvolveMethod method_of(const std::string& m) { return m == "dense" ? EvolveMethod::dense : EvolveMethod::krylov; }

void register_nbody(Registry& reg) {
  {
    struct O {
      NBodyOpts n;
      double t_final = 0.2;
      int steps = 20;
      std::string method = "krylov";
      KrylovOptions kry;
    };
    auto& o = reg.state<O>();
    auto* s = reg.add("nbody-evolve", "Evolve the product state phi^N under the N-body Hamiltonian",
                      "t,norm,energy,energy_drift,symmetry_defect,marginal_trace");
    add_nbody_opts(s, o.n);
    s->add_option("--t-final", o.t_final, "final time");
    s->add_option("--steps", o.steps, "number of sample intervals");
    s->add_option("--method", o.method, "dense | krylov")->check(CLI::IsMember({"dense", "krylov"}));
    s->add_option("--krylov-dim", o.kry.subspace, "Krylov subspace dimension");
    s->add_option("--krylov-tol", o.kry.tolerance, "Krylov local error tolerance");
    reg.bind(s, &o.n.field.seed, [&o](Run& run) {
      const auto times = uniform_or_fail(o.t_final, o.steps);
      const TorusField phi = make_field(o.n.field);
      const ScaledPotential v(phi.lattice(), o.n.N, o.n.beta);
      const Hamiltonian h(v, phi.lattice(), o.n.coupling);
      const NBodyState psi = product_state(phi, o.n.N);
      const auto traj = nbody_trajectory(psi, h, times, method_of(o.method), o.kry);
      const double e0 = h.energy(psi);
      Csv c(run.file(".csv"), {"t", "norm", "energy", "energy_drift", "symmetry_defect", "marginal_trace"});
      double dn = 0, de = 0;
      for (std::size_t i = 0; i < traj.size(); ++i) {
        const double e = h.energy(traj[i]);
        dn = std::max(dn, std::abs(traj[i].norm() - 1.0));
        de = std::max(de, std::abs(e - e0));
        c.row({num(times[i]), num(traj[i].norm()), num(e), num(e - e0), num(traj[i].symmetry_defect()),
               num(trace(marginal(traj[i], 1)).real())});
      }
      run.summary = {{"dim", h.dim()}, {"max_norm_drift", dn}, {"max_energy_drift", de}, {"wraps", v.wraps()}};
      *run.out << "dim=" << h.dim() << " norm_drift=" << num(dn) << " energy_drift=" << num(de) << '\n';
    });
  }
  {
    struct O {
      NBodyOpts n;
      double t_final = 0.02, dt = 1e-3;
      int k_max = 0;
      std::string method = "dense";
    };
    auto& o = reg.state<O>();
    auto* s = reg.add("bbgky-residual", "BBGKY residual of the exact N-body marginals", "t,k,residual_hs");
    add_nbody_opts(s, o.n);
    s->add_option("--t-final", o.t_final, "final time");
    s->add_option("--dt", o.dt, "sample spacing (central differences)");
    s->add_option("--k-max", o.k_max, "largest marginal order (0 = N)");
    s->add_option("--method", o.method, "dense | krylov")->check(CLI::IsMember({"dense", "krylov"}));
    reg.bind(s, &o.n.field.seed, [&o](Run& run) {
      const int steps = steps_for(o.t_final, o.dt);
      if (steps < 2) throw ConfigError("need at least two sample intervals");
      const int kmax = o.k_max == 0 ? o.n.N : o.k_max;
      if (kmax < 1 || kmax > o.n.N) throw ConfigError("k-max must lie in [1, N]");
      const auto times = uniform_times(o.t_final, steps);
      const TorusField phi = make_field(o.n.field);
      const ScaledPotential v(phi.lattice(), o.n.N, o.n.beta);
      const Hamiltonian h(v, phi.lattice(), o.n.coupling);
      for (int k = 1; k <= std::min(kmax + 1, o.n.N); ++k) checked_dim(phi.lattice(), k);
      const auto traj = nbody_trajectory(product_state(phi, o.n.N), h, times, method_of(o.method));
      std::vector<std::vector<DensityMatrix>> g(std::size_t(std::min(kmax + 1, o.n.N)));
      for (const auto& st : traj)
        for (std::size_t k = 0; k < g.size(); ++k) g[k].push_back(marginal(st, int(k) + 1));
      Csv c(run.file(".csv"), {"t", "k", "residual_hs"});
      double worst = 0;
      for (int k = 1; k <= kmax; ++k) {
        const std::span<const DensityMatrix> next =
            k < o.n.N ? std::span<const DensityMatrix>(g[std::size_t(k)]) : std::span<const DensityMatrix>();
        const auto r = bbgky_residual(g[std::size_t(k - 1)], next, times, h, k);
        for (std::size_t i = 0; i < r.size(); ++i) {
          worst = std::max(worst, r[i]);
          c.row({num(times[i + 1]), num(k), num(r[i])});
        }
      }
      run.summary = {{"max_residual_hs", worst}};
      *run.out << "max_residual=" << num(worst) << '\n';
    });
  }
  {
    struct O {
      NBodyOpts n;
      std::vector<double> kappas{0.1, 0.2, 0.4, 0.8};
    };
    auto& o = reg.state<O>();
    auto* s = reg.add("cutoff-data", "Spectral energy cutoff of phi^N and its moment bounds",
                      "kappa,distance,moment_1..moment_4,bound_1..bound_4,property_holds");
    add_nbody_opts(s, o.n);
    s->add_option("--kappas", o.kappas, "cutoff parameters")->delimiter(',');
    reg.bind(s, &o.n.field.seed, [&o](Run& run) {
      if (o.kappas.empty()) throw ConfigError("need at least one kappa");
      for (double k : o.kappas)
        if (!(k > 0.0)) throw ConfigError("kappa must be > 0");
      const TorusField phi = make_field(o.n.field);
      const ScaledPotential v(phi.lattice(), o.n.N, o.n.beta);
      const Hamiltonian h(v, phi.lattice(), o.n.coupling);
      const Spectrum sp(h);
      const NBodyState psi = product_state(phi, o.n.N);
      Csv c(run.file(".csv"), {"kappa", "distance", "moment_1", "moment_2", "moment_3", "moment_4", "bound_1",
                               "bound_2", "bound_3", "bound_4", "property_holds"});
      std::vector<double> lx, ly;
      bool all = true;
      for (double kappa : o.kappas) {
        const CutoffResult r = cutoff_initial_data(psi, sp, kappa);
        std::vector<std::string> row{num(kappa), num(r.distance)};
        for (double m : r.moments) row.push_back(num(m));
        for (double b : r.moment_bounds) row.push_back(num(b));
        row.push_back(r.property_holds ? "1" : "0");
        c.row(row);
        all = all && r.property_holds;
        // Distances at round-off level mean the cutoff did not act.
        if (r.distance > 1e-12) {
          lx.push_back(std::log(kappa));
          ly.push_back(std::log(r.distance));
        }
      }
      const double slope = lsq_slope(lx, ly);
      run.summary = {{"property_holds", all}, {"distance_slope", std::isnan(slope) ? json(nullptr) : json(slope)}};
      *run.out << "property_holds=" << (all ? "yes" : "no") << " distance_slope=" << num(slope) << '\n';
    });
  }
  {
    struct O {
      FieldOpts f;
      ChaosConfig cfg;
      bool no_second = false;
    };
    auto& o = reg.state<O>();
    auto* s = reg.add("chaos-diagnostic", "Compare N-body marginals with tensor powers of the NLS solution",
                      "N,t,trace_dist_k1,trace_dist_k2,energy_per_particle,asympt_fact_dist,kappa,beta,M,dt "
                      "(trace_dist_k2 empty when not computed)");
    add_field_opts(s, o.f, 1);
    s->add_option("--particles", o.cfg.particles, "particle numbers")->delimiter(',');
    s->add_option("--times", o.cfg.times, "sample times")->delimiter(',');
    s->add_option("--beta", o.cfg.beta, "potential scaling exponent");
    s->add_option("--coupling", o.cfg.coupling, "1: interacting vs NLS lambda=1; 0: both free");
    s->add_option("--kappa", o.cfg.kappa, "energy cutoff parameter (0 = none)");
    s->add_option("--dt", o.cfg.dt, "NLS time step");
    s->add_flag("--no-second-marginal", o.no_second, "skip the k=2 distance");
    reg.bind(s, &o.f.seed, [&o](Run& run) {
      o.cfg.second_marginal = !o.no_second;
      const TorusField phi = make_field(o.f);
      const auto rows = chaos_diagnostic(phi, o.cfg);
      Csv c(run.file(".csv"), {"N", "t", "trace_dist_k1", "trace_dist_k2", "energy_per_particle",
                               "asympt_fact_dist", "kappa", "beta", "M", "dt"});
      for (const auto& r : rows)
        c.row({num(r.particles), num(r.t), num(r.trace_dist_k1), r.trace_dist_k2 < 0 ? "" : num(r.trace_dist_k2),
               num(r.energy_per_particle), num(r.asympt_fact_dist), num(r.kappa), num(r.beta), num(r.cutoff),
               num(r.dt)});
      // Trend in N at each time: is the k=1 distance nonincreasing?
      json trend = json::array();
      for (double t : o.cfg.times) {
        std::vector<std::pair<int, double>> byn;
        for (const auto& r : rows)
          if (r.t == t) byn.emplace_back(r.particles, r.trace_dist_k1);
        std::sort(byn.begin(), byn.end());
        bool mono = true;
        for (std::size_t i = 1; i < byn.size(); ++i) mono = mono && byn[i].second <= byn[i - 1].second;
        trend.push_back({{"t", t}, {"nonincreasing_in_N", mono}});
        *run.out << "t=" << num(t) << " distance " << (mono ? "nonincreasing" : "not monotone") << " in N\n";
      }
      run.summary = {{"trend", trend}};
    });
  }
}

// Config file handling -------------------------------------------------------

struct Expanded {
  std::vector<std::string> args;
  std::string config_file;
  json config_entries = json::object();
};

Expanded expand_config(const std::vector<std::string>& in, const std::vector<std::string>& commands) {
  Expanded ex;
  std::vector<std::string> args;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == "--config") {
      if (i + 1 >= in.size()) throw CLI::ArgumentMismatch("--config needs a file name");
      ex.config_file = in[++i];
    } else if (in[i].rfind("--config=", 0) == 0) {
      ex.config_file = in[i].substr(9);
    } else {
      args.push_back(in[i]);
    }
  }
  if (ex.config_file.empty()) {
    ex.args = std::move(args);
    return ex;
  }
  std::ifstream f(ex.config_file);
  if (!f) throw ConfigError("cannot read config file " + ex.config_file);
  std::string line, command;
  std::vector<std::string> extra;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
    auto trim = [](std::string s) {
      const auto i = s.find_first_not_of(" \t\r");
      const auto j = s.find_last_not_of(" \t\r");
      return i == std::string::npos ? std::string() : s.substr(i, j - i + 1);
    };
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    ex.config_entries[key] = value;
    if (key == "command") {
      command = value;
      continue;
    }
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) extra.push_back(flag + "=" + value);
  }
  const bool has_sub = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return std::find(commands.begin(), commands.end(), a) != commands.end();
  });
  if (!command.empty() && !has_sub) args.insert(args.begin(), command);
  args.insert(args.end(), extra.begin(), extra.end());
  ex.args = std::move(args);
  return ex;
}

json option_values(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
    const std::string name = opt->get_single_name();
    if (opt->count() > 0) {
      const auto& res = opt->results();
      std::string v;
      for (std::size_t i = 0; i < res.size(); ++i) v += (i ? "," : "") + res[i];
      j[name] = v;
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments for the cubic Gross-Pitaevskii hierarchy on the 3-torus", "gph"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir = ".";
  int threads = 1;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")->envname("GPH_THREADS");
  app.footer("Options may also come from --config FILE with one key=value per line; flags override the file.");

  Registry reg(app);
  register_nls(reg);
  register_hierarchy(reg);
  register_duhamel(reg);
  register_definetti(reg);
  register_boardgame(reg);
  register_tree_build(reg);
  register_tree_product(reg);
  register_theta(reg);
  register_probes(reg);
  register_nbody(reg);

  const Command* chosen = nullptr;
  try {
    std::vector<std::string> names;
    for (const auto& c : reg.commands()) names.push_back(c.app->get_name());
    Expanded ex = expand_config(args, names);
    std::vector<std::string> rev(ex.args.rbegin(), ex.args.rend());
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      const CLI::App* sub = nullptr;
      for (const auto& c : reg.commands())
        if (c.app->parsed()) sub = c.app;
      out << (sub ? sub->help() : app.help());
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      const CLI::App* sub = nullptr;
      for (const auto& c : reg.commands())
        if (c.app->parsed()) sub = c.app;
      err << "error: " << e.what() << "\n" << (sub ? sub->help() : app.help());
      return kExitInvalid;
    }
    if (threads < 1) throw ConfigError("threads must be >= 1");
    for (const auto& c : reg.commands())
      if (c.app->parsed()) chosen = &c;
    if (!chosen) throw ConfigError("no subcommand");

    Run run;
    run.dir = out_dir;
    run.command = chosen->app->get_name();
    run.out = &out;
    fs::create_directories(run.dir);
    const auto start = std::chrono::steady_clock::now();
    chosen->handler(run);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json manifest;
    manifest["schema"] = "gph-run-manifest";
    manifest["schema_version"] = kManifestSchemaVersion;
    manifest["command"] = run.command;
    manifest["arguments"] = args;
    manifest["config_file"] = ex.config_file;
    manifest["config_file_entries"] = ex.config_entries;
    json config = option_values(chosen->app);
    config["out"] = out_dir;
    config["threads"] = std::to_string(threads);
    manifest["config"] = config;
    manifest["seed"] = chosen->seed ? json(*chosen->seed) : json(nullptr);
    manifest["threads"] = threads;
    json versions = json::object();
    for (const auto& [k, v] : library_versions()) versions[k] = v;
    manifest["versions"] = versions;
    manifest["outputs"] = run.outputs;
    manifest["summary"] = run.summary;
    manifest["wall_time_s"] = wall;
    write_json(run.dir / (run.command + ".manifest.json"), manifest);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitInvalid;
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ShapeError& e) {
    err << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const BudgetError& e) {
    err << "over budget: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const GuardError& e) {
    err << "numerical guard: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "file error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace gph::cli
