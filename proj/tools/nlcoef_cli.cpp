// nlcoef: run, compare or validate a coefficient reconstruction experiment.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlcoef/nlcoef.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
};

void print_run(const nlcoef::RunOutcome& r) {
  if (!r.ok()) {
    std::printf("%-10s FAILED  %s\n", r.label.c_str(), r.message.c_str());
    return;
  }
  const auto& tr = *r.trace;
  std::printf("%-10s J = [%.6g, %.6g]", r.label.c_str(), r.J.u_lo, r.J.u_hi);
  if (r.anchor) std::printf("  anchor a(%.6g) = %.6g", r.anchor->tau, r.anchor->value);
  std::printf("\n");
  std::printf("  %3s  %12s  %12s  %12s\n", "k", "l2", "linf", "|a_k-a_k-1|");
  for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
    std::printf("  %3zu", k);
    if (tr.has_errors()) std::printf("  %12.4e  %12.4e", tr.errors[k].l2, tr.errors[k].linf);
    else std::printf("  %12s  %12s", "-", "-");
    if (k > 0) std::printf("  %12.4e", tr.increments[k - 1]);
    std::printf("\n");
  }
  std::printf("  %s after %zu update(s)\n", to_string(tr.termination), tr.n_updates());
}

int execute(const std::string& command, const Options& opt) {
  auto c = nlcoef::load_config(opt.config);
  if (opt.seed) c.seed = *opt.seed;
  if (opt.out) c.out_dir = *opt.out;
  if (command == "validate") {
    const auto summary = nlcoef::validate_experiment(c);
    if (!opt.quiet) std::printf("%s: ok (%s)\n", opt.config.c_str(), summary.c_str());
    return 0;
  }
  const bool compare = command == "compare";
  const auto outcome = nlcoef::run_experiment(c, compare);
  nlcoef::write_outputs(outcome, c.out_dir, command);
  bool any_ok = false;
  for (const auto& r : outcome.runs) {
    any_ok = any_ok || r.ok();
    if (!opt.quiet) print_run(r);
  }
  if (!opt.quiet) std::printf("wrote %s\n", c.out_dir.c_str());
  if (!any_ok) {
    std::fprintf(stderr, "error: every scheme failed\n");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruct a(u) in u_t - (a(u) u_x)_x = r from final-time or time-trace data"};
  app.require_subcommand(1);
  Options opt;
  std::string command;
  for (const char* name : {"run", "compare", "validate"}) {
    const char* help = std::string(name) == "run"       ? "run the experiment described by a config file"
                       : std::string(name) == "compare" ? "run schemes A, B and C on the same time-trace data"
                                                        : "check a config file without solving";
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", opt.config, "TOML experiment config")->required();
    sub->add_option("--seed", opt.seed, "override data.seed");
    sub->add_option("--out", opt.out, "override output.dir");
    sub->add_flag("--quiet", opt.quiet, "print nothing on success");
    sub->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    return execute(command, opt);
  } catch (const nlcoef::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return nlcoef::exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
