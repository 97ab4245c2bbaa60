#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "nlcoef/data_pipeline.hpp"
#include "nlcoef/error.hpp"
#include "nlcoef/expression.hpp"
#include "nlcoef/forward_solver.hpp"
#include "nlcoef/time_trace.hpp"

namespace nlcoef {

struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::Impedance;
  double gamma = 0.0;
  Expression data;  // b(t) or d(t)
};

/// Reference coefficient: an expression in u (alias tau), or a knot table
/// joined by a monotone cubic with optional exterior expressions.
struct TruthSpec {
  std::optional<Expression> expression;
  std::vector<double> knot_tau;
  std::vector<double> knot_a;
  std::optional<Expression> a_le;
  std::optional<Expression> a_ri;
};

enum class SchemeChoice { A, B, C, All };

enum class ExteriorMode { Constant, Truth };

struct ExperimentConfig {
  std::string source;  // config path, for messages

  // [problem]
  double x_lo = 0.0;
  double x_hi = 1.0;
  double t_final = 1.0;
  std::size_t cells = 400;
  std::size_t steps = 400;
  std::size_t fine_factor = 2;
  Expression u0;  // x
  Expression r;   // x, t, u
  BoundarySpec left;
  BoundarySpec right;

  // [truth]
  std::optional<TruthSpec> truth;

  // [data]
  ObservationKind kind = ObservationKind::FinalTime;
  std::optional<double> x0;
  std::size_t samples = 40;
  double noise = 0.0;  // percent
  NoiseModel noise_model = NoiseModel::UniformRelative;
  std::uint64_t seed = 42;
  std::optional<double> filter_weight;  // nullopt: discrepancy principle
  std::optional<std::string> data_file;

  // [recon]
  SchemeChoice scheme = SchemeChoice::C;
  Expression a0;  // u, tau
  std::size_t n_iters = 10;
  std::optional<double> stop_tol;
  bool stop_on_convergence = true;
  std::optional<double> anchor;
  std::size_t n_knots = 101;
  ExteriorMode exterior = ExteriorMode::Constant;
  double blend_width = 0.0;
  double a_floor = CoefficientFn::kDefaultFloor;
  double kappa = 1e-8;
  double flux_floor = 1e-8;
  double range_tol = 0.02;
  std::size_t n_eval = 1001;

  // [solver]
  SolverConfig solver;

  // [output]
  std::string out_dir = "out";
  bool emit_iterates = true;
  bool errors = true;
};

inline const char* to_string(ObservationKind k) { return k == ObservationKind::FinalTime ? "final_time" : "time_trace"; }
inline const char* to_string(SchemeChoice s) {
  switch (s) {
    case SchemeChoice::A: return "A";
    case SchemeChoice::B: return "B";
    case SchemeChoice::C: return "C";
    case SchemeChoice::All: return "all";
  }
  return "?";
}
inline const char* to_string(NoiseModel m) { return m == NoiseModel::UniformRelative ? "uniform" : "gaussian"; }
inline const char* to_string(ExteriorMode m) { return m == ExteriorMode::Constant ? "constant" : "truth"; }

namespace detail {

// Typed access to one TOML table that remembers which keys were read, so
// leftovers can be reported as unknown.
class TableReader {
public:
  TableReader(const toml::table* t, std::string path) : t_(t), path_(std::move(path)) {}

  bool present() const { return t_ != nullptr; }
  bool has(const std::string& key) const { return t_ && t_->contains(key); }
  std::string field(const std::string& key) const {
    if (key.empty()) return path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw Error(ErrorCode::ConfigError, field(key) + ": " + msg);
  }

  template <class T>
  std::optional<T> get(const std::string& key) {
    if (!has(key)) return std::nullopt;
    seen_.insert(key);
    const toml::node& n = *t_->get(key);
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = n.value_exact<double>()) return *v;
      if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
      fail(key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
      if (auto v = n.value_exact<std::int64_t>()) return *v;
      fail(key, "expected an integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto v = n.value_exact<bool>()) return *v;
      fail(key, "expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = n.value_exact<std::string>()) return *v;
      fail(key, "expected a string");
    }
  }

  double number(const std::string& key, double def) { return get<double>(key).value_or(def); }
  bool flag(const std::string& key, bool def) { return get<bool>(key).value_or(def); }
  std::string text(const std::string& key, const std::string& def) { return get<std::string>(key).value_or(def); }

  std::size_t count(const std::string& key, std::size_t def, std::size_t min_value) {
    const auto v = get<std::int64_t>(key);
    if (!v) return def;
    if (*v < static_cast<std::int64_t>(min_value)) fail(key, "must be at least " + std::to_string(min_value));
    return static_cast<std::size_t>(*v);
  }

  double positive(const std::string& key, double def) {
    const double v = number(key, def);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  /// A number, or the string "auto" (nullopt).
  std::optional<double> number_or_auto(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const toml::node& n = *t_->get(key);
    if (auto s = n.value_exact<std::string>()) {
      seen_.insert(key);
      if (*s != "auto") fail(key, "expected a number or \"auto\"");
      return std::nullopt;
    }
    return get<double>(key);
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    seen_.insert(key);
    const toml::array* arr = t_->get(key)->as_array();
    if (!arr) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) {
      if (auto v = e.value_exact<double>()) out.push_back(*v);
      else if (auto i = e.value_exact<std::int64_t>()) out.push_back(static_cast<double>(*i));
      else fail(key, "expected an array of numbers");
    }
    return out;
  }

  /// Expression given as a string or a bare number.
  std::optional<Expression> expression(const std::string& key, const std::vector<std::string>& vars) {
    if (!has(key)) return std::nullopt;
    const toml::node& n = *t_->get(key);
    std::string src;
    if (auto s = n.value_exact<std::string>()) {
      src = *s;
    } else if (auto d = get<double>(key)) {
      std::ostringstream os;
      os.precision(17);
      os << *d;
      src = os.str();
    }
    seen_.insert(key);
    try {
      return Expression::parse(src, vars);
    } catch (const Error& e) {
      fail(key, e.what());
    }
  }

  Expression required_expression(const std::string& key, const std::vector<std::string>& vars) {
    auto e = expression(key, vars);
    if (!e) fail(key, "required");
    return *e;
  }

  TableReader sub(const std::string& key) {
    if (!has(key)) return {nullptr, field(key)};
    seen_.insert(key);
    const toml::table* s = t_->get(key)->as_table();
    if (!s) fail(key, "expected a table");
    return {s, field(key)};
  }

  void reject_unknown() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_) {
      const std::string key(k.str());
      if (!seen_.count(key)) fail(key, "unknown key");
    }
  }

private:
  const toml::table* t_;
  std::string path_;
  std::set<std::string> seen_;
};

inline BoundarySpec read_boundary(TableReader t) {
  if (!t.present()) t.fail("", "boundary table required");
  BoundarySpec b;
  const std::string type = t.text("type", "impedance");
  if (type == "impedance") {
    b.kind = BoundaryKind::Impedance;
    b.gamma = t.number("gamma", 0.0);
    if (b.gamma < 0.0) t.fail("gamma", "must be >= 0");
  } else if (type == "dirichlet") {
    b.kind = BoundaryKind::Dirichlet;
  } else {
    t.fail("type", "expected \"impedance\" or \"dirichlet\"");
  }
  b.data = t.required_expression("data", {"t"});
  t.reject_unknown();
  return b;
}

}  // namespace detail

/// Parses a TOML experiment description. All failures are ConfigError with
/// the dotted field path.
inline ExperimentConfig parse_config(std::string_view text, const std::string& source = "<string>") {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(e.source().begin.line) + ":" +
                                            std::to_string(e.source().begin.column) + ": " +
                                            std::string(e.description()));
  }
  using detail::TableReader;
  ExperimentConfig c;
  c.source = source;
  TableReader top(&root, "");

  {
    TableReader p = top.sub("problem");
    if (!p.present()) top.fail("problem", "required");
    const auto domain = p.numbers("domain");
    if (!domain.empty()) {
      if (domain.size() != 2 || !(domain[0] < domain[1])) p.fail("domain", "expected [x_lo, x_hi] with x_lo < x_hi");
      c.x_lo = domain[0];
      c.x_hi = domain[1];
    }
    c.t_final = p.positive("T", c.t_final);
    c.cells = p.count("cells", c.cells, 4);
    c.steps = p.count("steps", c.steps, 2);
    c.fine_factor = p.count("fine_factor", c.fine_factor, 1);
    c.u0 = p.required_expression("u0", {"x"});
    c.r = p.expression("r", {"x", "t", "u"}).value_or(Expression::parse("0", {"x", "t", "u"}));
    c.left = detail::read_boundary(p.sub("left"));
    c.right = detail::read_boundary(p.sub("right"));
    p.reject_unknown();
  }

  {
    TableReader t = top.sub("truth");
    if (t.present()) {
      TruthSpec ts;
      ts.expression = t.expression("a", {"u", "tau"});
      ts.knot_tau = t.numbers("tau");
      ts.knot_a = t.numbers("values");
      if (ts.expression && !ts.knot_tau.empty()) t.fail("a", "give either an expression or a knot table, not both");
      if (!ts.expression) {
        if (ts.knot_tau.empty()) t.fail("a", "required (expression, or tau/values knot table)");
        if (ts.knot_tau.size() != ts.knot_a.size() || ts.knot_tau.size() < 2)
          t.fail("values", "knot table needs matching tau/values arrays with at least 2 entries");
        for (std::size_t i = 1; i < ts.knot_tau.size(); ++i)
          if (!(ts.knot_tau[i] > ts.knot_tau[i - 1])) t.fail("tau", "must be strictly increasing");
      }
      ts.a_le = t.expression("a_le", {"u", "tau"});
      ts.a_ri = t.expression("a_ri", {"u", "tau"});
      t.reject_unknown();
      c.truth = std::move(ts);
    }
  }

  {
    TableReader d = top.sub("data");
    if (!d.present()) top.fail("data", "required");
    const auto kind = d.get<std::string>("kind");
    if (!kind) d.fail("kind", "required (\"final_time\" or \"time_trace\")");
    if (*kind == "final_time") c.kind = ObservationKind::FinalTime;
    else if (*kind == "time_trace") c.kind = ObservationKind::TimeTrace;
    else d.fail("kind", "expected \"final_time\" or \"time_trace\"");
    c.x0 = d.get<double>("x0");
    if (c.kind == ObservationKind::TimeTrace && !c.x0) d.fail("x0", "required for time_trace data");
    if (c.kind == ObservationKind::FinalTime && c.x0) d.fail("x0", "only meaningful for time_trace data");
    c.samples = d.count("samples", c.samples, 4);
    c.noise = d.number("noise", c.noise);
    if (c.noise < 0.0) d.fail("noise", "must be >= 0 (percent)");
    const std::string model = d.text("noise_model", "uniform");
    if (model == "uniform") c.noise_model = NoiseModel::UniformRelative;
    else if (model == "gaussian") c.noise_model = NoiseModel::GaussianAdditive;
    else d.fail("noise_model", "expected \"uniform\" or \"gaussian\"");
    if (const auto s = d.get<std::int64_t>("seed")) {
      if (*s < 0) d.fail("seed", "must be >= 0");
      c.seed = static_cast<std::uint64_t>(*s);
    }
    c.filter_weight = d.number_or_auto("filter_weight");
    if (c.filter_weight && *c.filter_weight < 0.0) d.fail("filter_weight", "must be >= 0");
    c.data_file = d.get<std::string>("file");
    d.reject_unknown();
  }

  {
    TableReader r = top.sub("recon");
    const std::string scheme = r.text("scheme", "C");
    if (scheme == "A") c.scheme = SchemeChoice::A;
    else if (scheme == "B") c.scheme = SchemeChoice::B;
    else if (scheme == "C") c.scheme = SchemeChoice::C;
    else if (scheme == "all") c.scheme = SchemeChoice::All;
    else r.fail("scheme", "expected \"A\", \"B\", \"C\" or \"all\"");
    c.a0 = r.expression("a0", {"u", "tau"}).value_or(Expression::parse("1", {"u", "tau"}));
    c.n_iters = r.count("n_iters", c.n_iters, 1);
    c.stop_tol = r.number_or_auto("stop_tol");
    if (c.stop_tol && *c.stop_tol < 0.0) r.fail("stop_tol", "must be >= 0");
    c.stop_on_convergence = r.flag("stop_on_convergence", c.stop_on_convergence);
    c.anchor = r.number_or_auto("anchor");
    c.n_knots = r.count("n_knots", c.n_knots, 4);
    const std::string ext = r.text("exterior", "constant");
    if (ext == "constant") c.exterior = ExteriorMode::Constant;
    else if (ext == "truth") c.exterior = ExteriorMode::Truth;
    else r.fail("exterior", "expected \"constant\" or \"truth\"");
    c.blend_width = r.number("blend_width", c.blend_width);
    if (c.blend_width < 0.0) r.fail("blend_width", "must be >= 0");
    c.a_floor = r.positive("a_floor", c.a_floor);
    c.kappa = r.positive("kappa", c.kappa);
    c.flux_floor = r.positive("flux_floor", c.flux_floor);
    c.range_tol = r.number("range_tol", c.range_tol);
    if (c.range_tol < 0.0) r.fail("range_tol", "must be >= 0");
    c.n_eval = r.count("n_eval", c.n_eval, 2);
    r.reject_unknown();
  }

  {
    TableReader s = top.sub("solver");
    c.solver.theta = s.number("theta", c.solver.theta);
    if (c.solver.theta < 0.5 || c.solver.theta > 1.0) s.fail("theta", "must lie in [0.5, 1]");
    c.solver.picard_tol = s.positive("picard_tol", c.solver.picard_tol);
    c.solver.picard_max_iter = static_cast<int>(s.count("picard_max_iter", c.solver.picard_max_iter, 1));
    c.solver.newton_fallback = s.flag("newton_fallback", c.solver.newton_fallback);
    c.solver.newton_max_iter = static_cast<int>(s.count("newton_max_iter", c.solver.newton_max_iter, 1));
    c.solver.startup_steps = s.count("startup_steps", c.solver.startup_steps, 0);
    s.reject_unknown();
  }

  {
    TableReader o = top.sub("output");
    c.out_dir = o.text("dir", c.out_dir);
    c.emit_iterates = o.flag("emit_iterates", c.emit_iterates);
    c.errors = o.flag("errors", c.errors);
    o.reject_unknown();
  }
  top.reject_unknown();

  // cross-field checks
  if (!c.truth && !c.data_file) top.fail("truth", "required to synthesize data (or set data.file)");
  if (!c.truth && c.errors) top.fail("truth", "required when output.errors = true");
  if (!c.truth && c.exterior == ExteriorMode::Truth) top.fail("recon.exterior", "\"truth\" needs a [truth] block");
  if (c.scheme == SchemeChoice::All && c.kind != ObservationKind::TimeTrace)
    top.fail("recon.scheme", "\"all\" compares time-trace schemes; data.kind is final_time");
  if (c.kind == ObservationKind::TimeTrace) {
    const double tol = 1e-9 * (c.x_hi - c.x_lo);
    if (std::abs(*c.x0 - c.x_lo) > tol && std::abs(*c.x0 - c.x_hi) > tol)
      top.fail("data.x0", "must be an end of problem.domain");
    const BoundarySpec& b = std::abs(*c.x0 - c.x_lo) <= tol ? c.left : c.right;
    if (b.kind != BoundaryKind::Impedance) top.fail("data.x0", "sensor end must carry an impedance condition");
  } else if (c.left.kind == BoundaryKind::Dirichlet && c.right.kind == BoundaryKind::Dirichlet) {
    top.fail("problem", "final-time reconstruction needs an impedance end");
  }
  const std::size_t limit = c.kind == ObservationKind::FinalTime ? c.cells * c.fine_factor + 1 : c.steps * c.fine_factor + 1;
  if (!c.data_file && c.samples > limit)
    top.fail("data.samples", "exceeds the " + std::to_string(limit) + " nodes of the synthesis grid");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse_config(ss.str(), path);
  if (c.data_file && std::filesystem::path(*c.data_file).is_relative())
    c.data_file = (std::filesystem::path(path).parent_path() / *c.data_file).string();
  return c;
}

}  // namespace nlcoef
