#include "rum/commands.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include "rum/autodiff.hpp"
#include "rum/bench.hpp"
#include "rum/inference.hpp"
#include "rum/projection.hpp"
#include "rum/svg.hpp"
#include "rum/vector_file.hpp"

namespace rum {

namespace {

struct Settings {
  int n = 0;
  std::string input, mask, output, plot;
  std::uint64_t seed = 0;
  bool large = false;
  bool hex = false;

  double ipm_tau = IpmOptions{}.tau;
  double mu_tol = IpmOptions{}.mu_tol;
  double rebuild_log10 = IpmOptions{}.rebuild_log10_threshold;
  std::size_t rebuild_cg_iters = IpmOptions{}.rebuild_cg_iter_threshold;

  double alpha = TestConfig{}.alpha;
  std::size_t replications = TestConfig{}.replications;
  std::size_t sample_size = TestConfig{}.sample_size;
  double tighten_c = TestConfig{}.tighten_c;
  double tighten_a = TestConfig{}.tighten_a;

  double tolerance = GradCheckOptions{}.tolerance;
  double margin_guard = GradCheckOptions{}.margin_guard;
  std::size_t max_iter = 500;

  IpmOptions ipm() const {
    IpmOptions o;
    o.tau = ipm_tau;
    o.mu_tol = mu_tol;
    o.rebuild_log10_threshold = rebuild_log10;
    o.rebuild_cg_iter_threshold = rebuild_cg_iters;
    return o;
  }

  void check_size(int alternatives) const {
    if (alternatives > kDefaultMaxAlternatives && !large) {
      throw ConfigError("n = " + std::to_string(alternatives) + " exceeds " +
                        std::to_string(kDefaultMaxAlternatives) + "; pass --large to allow it");
    }
  }
};

CLI::Option* env(CLI::Option* opt, const char* name) { return opt->envname(std::string("RUMPROJ_") + name); }

void add_ipm_flags(CLI::App& cmd, Settings& s) {
  env(cmd.add_option("--tau", s.ipm_tau, "IPM fraction to the boundary")->capture_default_str(), "TAU");
  env(cmd.add_option("--mu-tol", s.mu_tol, "IPM duality-measure tolerance")->capture_default_str(), "MU_TOL");
  env(cmd.add_option("--rebuild-log10", s.rebuild_log10, "rebuild the tree when log10(d) drifts this far")
          ->capture_default_str(),
      "REBUILD_LOG10");
  env(cmd.add_option("--rebuild-cg-iters", s.rebuild_cg_iters, "rebuild the tree after a CG solve this long")
          ->capture_default_str(),
      "REBUILD_CG_ITERS");
}

void add_data_flags(CLI::App& cmd, Settings& s) {
  env(cmd.add_option("--input", s.input, "input vector file")->required(), "INPUT");
  env(cmd.add_option("--mask", s.mask, "mask file overriding the input's mask"), "MASK");
  env(cmd.add_flag("--large", s.large, "allow n > 12"), "LARGE");
}

// Writes to the --output path when given, else to `fallback`.
void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot write " + path);
  body(file);
}

void write_plot(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) return;
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot write " + path);
  body(file);
}

std::string g17(double v) { return format_value(v); }

VectorFile load_input(const Settings& s) {
  VectorFile file = read_vector_file_path(s.input);
  s.check_size(file.n);
  if (!s.mask.empty()) {
    ObservationMask mask = read_mask_file_path(s.mask);
    if (mask.alternatives() != file.n) throw ValidationError(s.mask + ": mask n disagrees with the input file");
    const Lattice lat(file.n);
    for (Subset d : mask.sets()) {
      if (!file.values.segment(static_cast<Eigen::Index>(lat.offset(d)), d.size()).allFinite()) {
        throw ValidationError(s.input + ": observed set " + to_hex(d) + " of the mask has no records");
      }
    }
    file.mask = std::move(mask);
  }
  return file;
}

int cmd_project(const Settings& s, std::ostream& out) {
  const VectorFile in = load_input(s);
  const Lattice lat(in.n);
  const ProjectionResult r = project(lat, in.values, in.mask, s.ipm());
  out << "record=projection n=" << in.n << " status=" << to_string(r.status) << " converged=" << r.converged
      << " distance_sq=" << g17(r.distance_sq) << " min_bm=" << g17(r.min_bm)
      << " max_row_sum_error=" << g17(r.max_row_sum_error) << " stationarity=" << g17(r.kkt.stationarity)
      << " primal=" << g17(r.kkt.primal) << " complementarity=" << g17(r.kkt.complementarity)
      << " ipm_iterations=" << r.ipm_iterations << " cg_iterations=" << r.total_cg_iterations
      << " tree_builds=" << r.tree_builds << '\n';
  if (!r.converged) {
    out << "message=" << r.message << '\n';
    return kExitNonConvergence;
  }
  with_output(s.output, out, [&](std::ostream& o) {
    write_vector_file(o, lat, ObservationMask::full(in.n), r.rho_star, s.hex ? FloatFormat::kHex : FloatFormat::kDecimal);
  });
  return kExitOk;
}

int cmd_gradcheck(const Settings& s, std::ostream& out) {
  const int n = s.n == 0 ? 4 : s.n;
  if (n < 1 || n > 6) throw ConfigError("gradcheck supports 1 <= n <= 6");
  GradCheckOptions opts;
  opts.tolerance = s.tolerance;
  opts.margin_guard = s.margin_guard;
  opts.ipm = s.ipm();
  const SeededGradCheck check = seeded_gradient_check(n, s.seed, opts);
  const GradCheckReport& r = check.report;
  with_output(s.output, out, [&](std::ostream& o) {
    o << "record=gradcheck n=" << n << " seed=" << s.seed << " rejected=" << check.rejected
      << " degenerate=" << r.degenerate << " margin=" << g17(r.margin) << " active_pairs=" << r.active_pairs
      << " max_rel_error=" << g17(r.max_rel_error) << " worst_coordinate=" << r.worst_coordinate
      << " tolerance=" << g17(opts.tolerance) << " passed=" << r.passed << '\n';
  });
  if (r.degenerate) return kExitDegenerate;
  return r.passed ? kExitOk : kExitNonConvergence;
}

int cmd_hypo_test(const Settings& s, std::ostream& out) {
  const VectorFile in = load_input(s);
  const Lattice lat(in.n);
  TestConfig cfg;
  cfg.alpha = s.alpha;
  cfg.replications = s.replications;
  cfg.sample_size = s.sample_size;
  cfg.tighten_c = s.tighten_c;
  cfg.tighten_a = s.tighten_a;
  cfg.seed = s.seed;
  cfg.ipm = s.ipm();
  const TestReport r = bootstrap_test(lat, in.values, in.mask, cfg);
  with_output(s.output, out, [&](std::ostream& o) {
    o << "record=bootstrap n=" << in.n << " seed=" << s.seed << " sample_size=" << cfg.sample_size
      << " replications=" << cfg.replications << " excluded=" << r.excluded << " alpha=" << g17(cfg.alpha)
      << " statistic=" << g17(r.statistic) << " p_value=" << g17(r.p_value) << " reject=" << r.reject
      << " tightening=" << g17(r.tightening) << " centering_margin=" << g17(r.centering_margin) << '\n';
  });
  out << (r.reject ? "reject" : "do not reject") << ": RUM consistency at alpha=" << cfg.alpha
      << " (J_N=" << r.statistic << ", p=" << r.p_value << ")\n";
  write_plot(s.plot, [&](std::ostream& o) { write_bootstrap_svg(o, r); });
  return kExitOk;
}

int cmd_bench_frozen(const Settings& s, std::ostream& out) {
  const int n = s.n == 0 ? 8 : s.n;
  s.check_size(n);
  const FrozenReport r = frozen_barrier_run(n, default_sparsity_points(), s.seed, 0);
  with_output(s.output, out, [&](std::ostream& o) { write_records(o, r); });
  char line[128];
  out << "#   eta   rank  iterations  converged\n";
  for (const auto& p : r.points) {
    std::snprintf(line, sizeof line, "# %5.2f %6zu %11zu %10s\n", p.eta, p.rank, p.iterations, p.converged ? "yes" : "no");
    out << line;
  }
  std::snprintf(line, sizeof line, "# slope %.4g  intercept %.4g  correlation %.4f\n", r.slope, r.intercept,
                r.correlation);
  out << line;
  write_plot(s.plot, [&](std::ostream& o) { write_frozen_svg(o, r); });
  bool converged = true;
  for (const auto& p : r.points) converged = converged && p.converged;
  return converged ? kExitOk : kExitNonConvergence;
}

int cmd_bench_stress(const Settings& s, std::ostream& out) {
  const int n = s.n == 0 ? 8 : s.n;
  s.check_size(n);
  const StressReport r = stress_test_run(n, s.seed, s.max_iter);
  with_output(s.output, out, [&](std::ostream& o) { write_records(o, r); });
  char line[128];
  out << "# method    iterations  orders@25  orders@end\n";
  for (const auto& c : r.curves) {
    std::snprintf(line, sizeof line, "# %-9s %10zu %10.2f %11.2f\n", c.method.c_str(), c.iterations, c.orders_at(25),
                  c.orders_at(c.iterations));
    out << line;
  }
  write_plot(s.plot, [&](std::ostream& o) { write_stress_svg(o, r); });
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projection onto the random utility model polytope"};
  app.name("rumproj");
  app.require_subcommand(1);
  Settings s;

  auto* project = app.add_subcommand("project", "project a choice vector onto the RUM polytope");
  add_data_flags(*project, s);
  add_ipm_flags(*project, s);
  env(project->add_option("--output", s.output, "write rho* here instead of standard output"), "OUTPUT");
  env(project->add_flag("--hex-float", s.hex, "write values as hex floats"), "HEX_FLOAT");

  auto* gradcheck = app.add_subcommand("gradcheck", "compare adjoint gradients with finite differences");
  env(gradcheck->add_option("--n", s.n, "alternatives (default 4)"), "N");
  env(gradcheck->add_option("--seed", s.seed, "instance seed")->capture_default_str(), "SEED");
  env(gradcheck->add_option("--tolerance", s.tolerance, "maximum relative error")->capture_default_str(), "TOLERANCE");
  env(gradcheck->add_option("--margin-guard", s.margin_guard, "strict-complementarity guard")->capture_default_str(),
      "MARGIN_GUARD");
  env(gradcheck->add_option("--output", s.output, "record file"), "OUTPUT");
  add_ipm_flags(*gradcheck, s);

  auto* hypo = app.add_subcommand("hypo-test", "bootstrap test of RUM consistency");
  add_data_flags(*hypo, s);
  add_ipm_flags(*hypo, s);
  env(hypo->add_option("--seed", s.seed, "bootstrap seed")->capture_default_str(), "SEED");
  env(hypo->add_option("--alpha", s.alpha, "test level")->capture_default_str(), "ALPHA");
  env(hypo->add_option("--replications", s.replications, "bootstrap replications")->capture_default_str(),
      "REPLICATIONS");
  env(hypo->add_option("--sample-size", s.sample_size, "observations per choice set")->capture_default_str(),
      "SAMPLE_SIZE");
  env(hypo->add_option("--tighten-c", s.tighten_c, "tightening constant c")->capture_default_str(), "TIGHTEN_C");
  env(hypo->add_option("--tighten-a", s.tighten_a, "tightening exponent a")->capture_default_str(), "TIGHTEN_A");
  env(hypo->add_option("--output", s.output, "record file"), "OUTPUT");
  env(hypo->add_option("--plot", s.plot, "SVG histogram of the bootstrap statistics"), "PLOT");

  auto* frozen = app.add_subcommand("bench-frozen", "frozen-barrier rank sweep");
  auto* stress = app.add_subcommand("bench-stress", "preconditioner stress test");
  for (auto* cmd : {frozen, stress}) {
    env(cmd->add_option("--n", s.n, "alternatives (default 8)"), "N");
    env(cmd->add_option("--seed", s.seed, "benchmark seed")->capture_default_str(), "SEED");
    env(cmd->add_option("--output", s.output, "record file"), "OUTPUT");
    env(cmd->add_option("--plot", s.plot, "SVG chart"), "PLOT");
    env(cmd->add_flag("--large", s.large, "allow n > 12"), "LARGE");
  }
  env(stress->add_option("--max-iter", s.max_iter, "CG iteration budget per method")->capture_default_str(),
      "MAX_ITER");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "rumproj: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*project) return cmd_project(s, out);
    if (*gradcheck) return cmd_gradcheck(s, out);
    if (*hypo) return cmd_hypo_test(s, out);
    if (*frozen) return cmd_bench_frozen(s, out);
    return cmd_bench_stress(s, out);
  } catch (const DegenerateError& e) {
    err << "rumproj: degenerate: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const NonConvergenceError& e) {
    err << "rumproj: not converged: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const NumericalBreakdown& e) {
    err << "rumproj: numerical breakdown: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const OperatorContractError& e) {
    err << "rumproj: numerical breakdown: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const Error& e) {
    err << "rumproj: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace rum
