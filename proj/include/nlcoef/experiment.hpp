#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlcoef/config.hpp"
#include "nlcoef/data_pipeline.hpp"
#include "nlcoef/final_time.hpp"
#include "nlcoef/iteration.hpp"
#include "nlcoef/time_trace.hpp"

#ifndef NLCOEF_GIT_DESCRIBE
#define NLCOEF_GIT_DESCRIBE "unknown"
#endif

namespace nlcoef {

// ---------------------------------------------------------------------------
// Config to model objects

inline ScalarFn coefficient_from_expression(const Expression& e) {
  return [e](double u) { return e({u, u}); };
}

inline ScalarFn truth_function(const TruthSpec& t) {
  if (t.expression) return coefficient_from_expression(*t.expression);
  const MonotoneCubic mc(t.knot_tau, t.knot_a);
  const double lo = t.knot_tau.front(), hi = t.knot_tau.back();
  const ScalarFn le = t.a_le ? coefficient_from_expression(*t.a_le) : constant_fn(t.knot_a.front());
  const ScalarFn ri = t.a_ri ? coefficient_from_expression(*t.a_ri) : constant_fn(t.knot_a.back());
  return [mc, lo, hi, le, ri](double u) { return u < lo ? le(u) : u > hi ? ri(u) : mc(u); };
}

inline ScalarFn truth_exterior(const TruthSpec& t, Side side) {
  const auto& e = side == Side::Left ? t.a_le : t.a_ri;
  return e ? coefficient_from_expression(*e) : truth_function(t);
}

inline ProblemSpec make_spec(const ExperimentConfig& c, std::size_t cells, std::size_t steps, ScalarFn coefficient) {
  ProblemSpec p;
  p.grid = SpatialGrid(c.x_lo, c.x_hi, cells);
  p.times = TimeGrid(c.t_final, steps);
  p.coefficient = std::move(coefficient);
  p.source = [r = c.r](double x, double t, double u) { return r({x, t, u}); };
  auto bc = [](const BoundarySpec& b) {
    TimeFn f = [e = b.data](double t) { return e({t}); };
    return b.kind == BoundaryKind::Impedance ? BoundaryCondition::impedance(b.gamma, std::move(f))
                                             : BoundaryCondition::dirichlet(std::move(f));
  };
  p.left = bc(c.left);
  p.right = bc(c.right);
  p.u0.resize(p.grid.n_nodes());
  for (std::size_t i = 0; i < p.u0.size(); ++i) p.u0[i] = c.u0({p.grid.node(i)});
  return p;
}

inline ProblemSpec working_spec(const ExperimentConfig& c) {
  return make_spec(c, c.cells, c.steps, coefficient_from_expression(c.a0));
}

inline CoefficientLayout make_layout(const ExperimentConfig& c) {
  CoefficientLayout l;
  l.n_knots = c.n_knots;
  l.blend_width = c.blend_width;
  l.a_floor = c.a_floor;
  if (c.exterior == ExteriorMode::Truth) {
    l.a_le = truth_exterior(*c.truth, Side::Left);
    l.a_ri = truth_exterior(*c.truth, Side::Right);
  }
  return l;
}

// ---------------------------------------------------------------------------
// Data

struct ExperimentData {
  ObservationRecord record;
  bool synthetic = true;
  std::size_t fine_cells = 0;
  std::size_t fine_steps = 0;
  std::optional<RangeInterval> solution_range;  // range of the synthesizing solve
};

/// Synthesizes (or reads) the observation and builds the smoothed record on
/// the working grid.
inline ExperimentData prepare_data(const ExperimentConfig& c) {
  ExperimentData d;
  const auto work = working_spec(c);
  const std::vector<double> coords = c.kind == ObservationKind::FinalTime ? work.grid.nodes() : work.times.times();
  std::vector<Sample> raw, noisy;
  if (c.data_file) {
    d.synthetic = false;
    raw = read_observation_csv(*c.data_file);
    noisy = raw;
  } else {
    d.fine_cells = c.cells * c.fine_factor;
    d.fine_steps = c.steps * c.fine_factor;
    const auto sol = solve_forward(make_spec(c, d.fine_cells, d.fine_steps, truth_function(*c.truth)), c.solver);
    d.solution_range = RangeInterval{sol.field.min(), sol.field.max()};
    raw = sample_observation(sol, c.kind, c.samples, c.x0);
    noisy = add_noise(raw, c.noise, c.seed, c.noise_model);
  }
  FilterSettings fs;
  fs.weight = c.filter_weight;
  fs.noise_model = c.noise_model;
  d.record = build_record(c.kind, std::move(raw), std::move(noisy), coords, c.noise, fs, c.x0);
  return d;
}

// ---------------------------------------------------------------------------
// Runs

/// One reconstruction: final-time, or one time-trace scheme.
struct RunOutcome {
  std::string label;  // "final_time", "A", "B", "C"
  RangeInterval J;
  std::optional<Anchor> anchor;
  std::optional<IterationTrace> trace;
  std::optional<ErrorCode> error;
  std::string message;

  bool ok() const { return trace.has_value(); }
};

struct ExperimentOutcome {
  ExperimentConfig config;
  ExperimentData data;
  std::vector<RunOutcome> runs;
  double seconds = 0.0;

  const RunOutcome& run(const std::string& label) const {
    for (const auto& r : runs)
      if (r.label == label) return r;
    throw Error(ErrorCode::InvalidArgument, "no run labelled " + label);
  }
};

inline IterationSettings iteration_settings(const ExperimentConfig& c) {
  IterationSettings s;
  s.n_iters = c.n_iters;
  s.stop_tol = c.stop_tol;
  s.stop_on_convergence = c.stop_on_convergence;
  s.n_eval = c.n_eval;
  if (c.truth && c.errors) s.truth = truth_function(*c.truth);
  return s;
}

inline FinalTimeProblem final_time_problem(const ExperimentConfig& c, const ExperimentData& d) {
  auto p = FinalTimeProblem::make(working_spec(c), d.record, make_layout(c), c.anchor);
  p.kappa = c.kappa;
  p.range_tol = c.range_tol;
  p.solution_range = d.solution_range;
  return p;
}

inline TimeTraceProblem time_trace_problem(const ExperimentConfig& c, const ExperimentData& d) {
  auto p = TimeTraceProblem::make(working_spec(c), d.record, make_layout(c), c.anchor, c.flux_floor);
  p.kappa_u = c.kappa;
  p.range_tol = c.range_tol;
  p.solution_range = d.solution_range;
  return p;
}

inline RunOutcome run_final_time(const ExperimentConfig& c, const ExperimentData& d) {
  const auto p = final_time_problem(c, d);
  RunOutcome r;
  r.label = "final_time";
  r.J = p.J;
  r.anchor = p.anchor;
  r.trace = iterate_final_time(p, p.layout.sample(coefficient_from_expression(c.a0), p.J), iteration_settings(c),
                               c.solver);
  return r;
}

inline RunOutcome run_time_trace(const ExperimentConfig& c, const ExperimentData& d, TraceScheme s) {
  const auto p = time_trace_problem(c, d);
  RunOutcome r;
  r.label = to_string(s);
  r.J = p.J;
  r.anchor = p.anchor;
  r.trace = iterate_time_trace(p, s, p.layout.sample(coefficient_from_expression(c.a0), p.J), iteration_settings(c),
                               c.solver);
  return r;
}

/// Runs schemes A, B and C concurrently on the same data. A failing scheme
/// is reported with its error code; the others still complete.
inline std::vector<RunOutcome> compare_schemes(const ExperimentConfig& c, const ExperimentData& d) {
  require(c.kind == ObservationKind::TimeTrace, ErrorCode::ConfigError,
          "data.kind: scheme comparison needs time_trace data");
  std::vector<std::future<RunOutcome>> jobs;
  for (auto s : {TraceScheme::A, TraceScheme::B, TraceScheme::C})
    jobs.push_back(std::async(std::launch::async, [&c, &d, s] {
      try {
        return run_time_trace(c, d, s);
      } catch (const Error& e) {
        RunOutcome r;
        r.label = to_string(s);
        r.error = e.code();
        r.message = e.what();
        return r;
      }
    }));
  std::vector<RunOutcome> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

/// Full experiment without touching the file system. Errors of a single
/// run propagate; in a comparison they are recorded per scheme.
inline ExperimentOutcome run_experiment(const ExperimentConfig& c, bool compare = false) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutcome o;
  o.config = c;
  if (compare || c.scheme == SchemeChoice::All)
    require(c.kind == ObservationKind::TimeTrace, ErrorCode::ConfigError,
            "data.kind: scheme comparison needs time_trace data");
  o.data = prepare_data(c);
  if (c.kind == ObservationKind::FinalTime) {
    o.runs.push_back(run_final_time(c, o.data));
  } else if (compare || c.scheme == SchemeChoice::All) {
    o.runs = compare_schemes(c, o.data);
  } else {
    const TraceScheme s = c.scheme == SchemeChoice::A ? TraceScheme::A
                          : c.scheme == SchemeChoice::B ? TraceScheme::B
                                                        : TraceScheme::C;
    o.runs.push_back(run_time_trace(c, o.data, s));
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return o;
}

/// Builds every model object the config describes without solving. Returns
/// a one-line summary.
inline std::string validate_experiment(const ExperimentConfig& c) {
  working_spec(c).validate();
  std::size_t n_samples = c.samples;
  if (c.data_file) {
    n_samples = read_observation_csv(*c.data_file).size();
  } else {
    make_spec(c, c.cells * c.fine_factor, c.steps * c.fine_factor, truth_function(*c.truth)).validate();
  }
  (void)make_layout(c);
  std::string s = std::string(to_string(c.kind)) + " data, " + std::to_string(n_samples) + " samples, grid " +
                  std::to_string(c.cells) + "x" + std::to_string(c.steps);
  if (c.kind == ObservationKind::TimeTrace) s += ", scheme " + std::string(to_string(c.scheme));
  return s;
}

/// Process exit status for an error: 3 for numerical failure, 2 for input
/// and configuration problems.
inline int exit_code(const Error& e) { return e.numerical() ? 3 : 2; }

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace detail

/// tau at the knots of J, then a_act (if known) and the iterates.
inline std::string coefficients_csv(const RunOutcome& r, const std::optional<ScalarFn>& truth, bool all_iterates) {
  const auto& tr = *r.trace;
  std::vector<std::size_t> ks;
  if (all_iterates) {
    for (std::size_t k = 0; k < tr.iterates.size(); ++k) ks.push_back(k);
  } else {
    ks = {0, tr.iterates.size() - 1};
    if (ks[1] == 0) ks.pop_back();
  }
  std::string s = "tau";
  if (truth) s += ",a_act";
  for (std::size_t k : ks) s += ",a_" + std::to_string(k);
  s += "\n";
  const auto& knots = tr.iterates.front().knots();
  for (double t : knots) {
    s += detail::fmt(t);
    if (truth) s += "," + detail::fmt((*truth)(t));
    for (std::size_t k : ks) s += "," + detail::fmt(tr.iterates[k](t));
    s += "\n";
  }
  return s;
}

inline std::string errors_csv(const IterationTrace& tr) {
  std::string s = "k,l2,linf\n";
  for (std::size_t k = 0; k < tr.errors.size(); ++k)
    s += std::to_string(k) + "," + detail::fmt(tr.errors[k].l2) + "," + detail::fmt(tr.errors[k].linf) + "\n";
  return s;
}

inline std::string observation_csv(const ObservationRecord& rec) {
  std::string s = "series,coordinate,value\n";
  for (const auto& x : rec.raw_samples) s += "raw," + detail::fmt(x.coordinate) + "," + detail::fmt(x.value) + "\n";
  for (const auto& x : rec.noisy_samples) s += "noisy," + detail::fmt(x.coordinate) + "," + detail::fmt(x.value) + "\n";
  for (std::size_t i = 0; i < rec.smoothed.size(); ++i)
    s += "smoothed," + detail::fmt(rec.coordinates[i]) + "," + detail::fmt(rec.smoothed[i]) + "\n";
  return s;
}

inline std::string comparison_csv(const std::vector<RunOutcome>& runs) {
  std::string s = "scheme,status,iterations,final_l2,final_linf,error\n";
  for (const auto& r : runs) {
    s += r.label + ",";
    if (r.ok()) {
      const auto& tr = *r.trace;
      s += "OK," + std::to_string(tr.n_updates()) + ",";
      if (tr.has_errors()) s += detail::fmt(tr.errors.back().l2) + "," + detail::fmt(tr.errors.back().linf);
      else s += ",";
      s += ",\n";
    } else {
      s += "FAILED,,,," + std::string(to_string(*r.error)) + "\n";
    }
  }
  return s;
}

inline nlohmann::ordered_json manifest_json(const ExperimentOutcome& o, const std::string& command) {
  using nlohmann::ordered_json;
  const auto& c = o.config;
  auto bc = [](const BoundarySpec& b) {
    ordered_json j;
    j["type"] = b.kind == BoundaryKind::Impedance ? "impedance" : "dirichlet";
    if (b.kind == BoundaryKind::Impedance) j["gamma"] = b.gamma;
    j["data"] = b.data.source();
    return j;
  };
  ordered_json m;
  m["command"] = command;
  m["config"] = c.source;
  m["git_describe"] = NLCOEF_GIT_DESCRIBE;
  m["seed"] = c.seed;

  ordered_json p;
  p["domain"] = {c.x_lo, c.x_hi};
  p["T"] = c.t_final;
  p["cells"] = c.cells;
  p["steps"] = c.steps;
  p["fine_factor"] = c.fine_factor;
  p["fine_cells"] = o.data.fine_cells;
  p["fine_steps"] = o.data.fine_steps;
  p["u0"] = c.u0.source();
  p["r"] = c.r.source();
  p["left"] = bc(c.left);
  p["right"] = bc(c.right);
  m["problem"] = p;

  if (c.truth) {
    ordered_json t;
    if (c.truth->expression) t["a"] = c.truth->expression->source();
    else {
      t["tau"] = c.truth->knot_tau;
      t["values"] = c.truth->knot_a;
    }
    t["a_le"] = c.truth->a_le ? c.truth->a_le->source() : "continuation";
    t["a_ri"] = c.truth->a_ri ? c.truth->a_ri->source() : "continuation";
    m["truth"] = t;
  } else {
    m["truth"] = nullptr;
  }

  ordered_json d;
  d["kind"] = to_string(c.kind);
  d["x0"] = c.x0 ? ordered_json(*c.x0) : ordered_json(nullptr);
  d["source"] = o.data.synthetic ? "synthetic" : *c.data_file;
  d["samples"] = o.data.record.noisy_samples.size();
  d["noise_percent"] = c.noise;
  d["noise_model"] = to_string(c.noise_model);
  d["filter_weight_mode"] = c.filter_weight ? "fixed" : "auto";
  d["filter_weight"] = o.data.record.filter_weight;
  d["filter_order"] = c.kind == ObservationKind::FinalTime ? 2 : 1;
  if (o.data.solution_range) d["solution_range"] = {o.data.solution_range->u_lo, o.data.solution_range->u_hi};
  else d["solution_range"] = "initial data";
  m["data"] = d;

  ordered_json r;
  r["scheme"] = c.kind == ObservationKind::FinalTime ? "final_time" : to_string(c.scheme);
  r["a0"] = c.a0.source();
  r["n_iters"] = c.n_iters;
  r["stop_tol_mode"] = c.stop_tol ? "fixed" : "auto";
  r["stop_on_convergence"] = c.stop_on_convergence;
  r["anchor_mode"] = c.anchor ? "fixed" : "auto";
  r["n_knots"] = c.n_knots;
  r["exterior"] = to_string(c.exterior);
  r["blend_width"] = c.blend_width;
  r["a_floor"] = c.a_floor;
  r["kappa"] = c.kappa;
  r["flux_floor"] = c.flux_floor;
  r["range_tol"] = c.range_tol;
  r["n_eval"] = c.n_eval;
  m["recon"] = r;

  ordered_json s;
  s["theta"] = c.solver.theta;
  s["picard_tol"] = c.solver.picard_tol;
  s["picard_max_iter"] = c.solver.picard_max_iter;
  s["newton_fallback"] = c.solver.newton_fallback;
  s["newton_max_iter"] = c.solver.newton_max_iter;
  s["startup_steps"] = c.solver.startup_steps;
  m["solver"] = s;

  ordered_json out;
  out["dir"] = c.out_dir;
  out["emit_iterates"] = c.emit_iterates;
  out["errors"] = c.errors;
  m["output"] = out;

  ordered_json runs = ordered_json::array();
  for (const auto& run : o.runs) {
    ordered_json j;
    j["label"] = run.label;
    j["status"] = run.ok() ? "OK" : "FAILED";
    if (!run.ok()) {
      j["error"] = std::string(to_string(*run.error));
      j["message"] = run.message;
      runs.push_back(j);
      continue;
    }
    const auto& tr = *run.trace;
    j["J"] = {run.J.u_lo, run.J.u_hi};
    if (run.anchor) {
      j["anchor"] = {{"value", run.anchor->value}, {"tau", run.anchor->tau}, {"source", to_string(run.anchor->source)}};
    } else {
      j["anchor"] = nullptr;
    }
    j["stop_tol"] = tr.stop_tol;
    j["termination"] = to_string(tr.termination);
    j["iterations"] = tr.n_updates();
    j["increments"] = tr.increments;
    j["seconds_per_iteration"] = tr.seconds;
    if (tr.has_errors()) {
      j["final_l2"] = tr.errors.back().l2;
      j["final_linf"] = tr.errors.back().linf;
    }
    runs.push_back(j);
  }
  m["runs"] = runs;
  m["wall_clock_seconds"] = o.seconds;
  return m;
}

/// Writes CSV artifacts and manifest.json below `dir`. Comparisons get one
/// subdirectory per scheme plus comparison.csv.
inline void write_outputs(const ExperimentOutcome& o, const std::filesystem::path& dir, const std::string& command) {
  std::filesystem::create_directories(dir);
  const auto& c = o.config;
  std::optional<ScalarFn> truth;
  if (c.truth) truth = truth_function(*c.truth);
  detail::write_text(dir / "observation.csv", observation_csv(o.data.record));
  const bool many = o.runs.size() > 1;
  for (const auto& r : o.runs) {
    if (!r.ok()) continue;
    const auto sub = many ? dir / r.label : dir;
    std::filesystem::create_directories(sub);
    detail::write_text(sub / "coefficients.csv", coefficients_csv(r, truth, c.emit_iterates));
    if (r.trace->has_errors()) detail::write_text(sub / "errors.csv", errors_csv(*r.trace));
  }
  if (many) detail::write_text(dir / "comparison.csv", comparison_csv(o.runs));
  detail::write_text(dir / "manifest.json", manifest_json(o, command).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Reading results back

struct CoefficientTable {
  std::vector<std::string> columns;  // without "tau"
  std::vector<double> tau;
  std::vector<std::vector<double>> values;  // values[column][row]

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return values[i];
    throw Error(ErrorCode::InvalidArgument, "no column " + name);
  }
};

inline CoefficientTable read_coefficient_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    return out;
  };
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::IoError, path + ": missing header row");
  auto head = split(line);
  require(!head.empty() && head.front() == "tau", ErrorCode::IoError, path + ": first column must be tau");
  CoefficientTable t;
  t.columns.assign(head.begin() + 1, head.end());
  t.values.resize(t.columns.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    require(f.size() == head.size(), ErrorCode::IoError, path + ":" + std::to_string(lineno) + ": wrong column count");
    auto num = [&](const std::string& s) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      require(ec == std::errc() && ptr == s.data() + s.size(), ErrorCode::IoError,
              path + ":" + std::to_string(lineno) + ": not a number: '" + s + "'");
      return v;
    };
    t.tau.push_back(num(f[0]));
    for (std::size_t i = 1; i < f.size(); ++i) t.values[i - 1].push_back(num(f[i]));
  }
  return t;
}

}  // namespace nlcoef
