#include "projgnep/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <optional>
#include <ostream>
#include <sstream>

namespace projgnep {

namespace {

constexpr const char* kUsage =
    "usage: projgnep <command> <problem.gnep> [flags]\n"
    "commands:\n"
    "  solve-fp    damped fixed-point iteration on the graph-distance best response\n"
    "  solve-qvi   grid scan of the QVI residual\n"
    "  oracle      brute-force enumeration of certified pairs\n"
    "  verify      check a candidate pair given by --x and --y\n"
    "flags: --h --eps --lambda --budget --seed --max-iter --multistart --grid-h --x --y\n"
    "exit codes: 0 certificate found or verify pass, 1 none found or verify fail, 2 input error\n";

void line(std::string& out, const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; }

std::string box_text(const Box<double>& b) { return format_vec(b.lower) + ";" + format_vec(b.upper); }

}  // namespace

std::string format_report(const std::string& command, const std::string& solver, const Problem& problem,
                          const SolverConfig& cfg, double eps, const std::vector<Certificate>& certs,
                          const std::string& advisory, const std::string& status) {
  const GameInstance& G = problem.game;
  std::string out;
  line(out, "report.format", "projgnep-report 1");
  line(out, "command", command);
  line(out, "solver", solver);
  line(out, "instance.digest", digest(problem));
  line(out, "instance.players", std::to_string(G.players()));
  std::string dims;
  for (int d : G.dims()) dims += (dims.empty() ? "" : ",") + std::to_string(d);
  line(out, "instance.dims", dims);
  line(out, "instance.utility_reducible", G.utility_reducible() ? "true" : "false");
  line(out, "instance.Q", box_text(G.Q()));
  line(out, "config.h", format_real(cfg.h));
  line(out, "config.eps", format_real(eps));
  line(out, "config.lambda", format_real(cfg.lambda));
  line(out, "config.budget", std::to_string(cfg.random_budget));
  line(out, "config.seed", std::to_string(cfg.seed));
  line(out, "config.max_iter", std::to_string(cfg.max_iter));
  line(out, "config.multistart", std::to_string(cfg.multistart));
  line(out, "config.delta", format_real(cfg.delta));
  line(out, "config.grid_h", format_real(cfg.distance_h()));
  const HypothesisSummary& hs = G.hypotheses();
  line(out, "hypotheses.nonempty_k",
       hs.nonempty_by_intervals ? "interval-arithmetic" : "probes(" + std::to_string(hs.nonempty_probes) + ")");
  line(out, "hypotheses.self_exclusion_probes", std::to_string(hs.self_exclusion_probes));
  line(out, "hypotheses.self_exclusion_budget", std::to_string(hs.self_exclusion_budget));
  line(out, "resolution.emptiness",
       "lattice h=" + format_real(cfg.h) + " plus " + std::to_string(cfg.random_budget) +
           " seeded samples per player; half-space preferences exact");
  line(out, "certificates", std::to_string(certs.size()));
  for (std::size_t k = 0; k < certs.size(); ++k) {
    const Certificate& c = certs[k];
    const std::string p = "certificate[" + std::to_string(k) + "]";
    line(out, p + ".x", format_vec(c.x));
    line(out, p + ".y", format_vec(c.y));
    std::string mem;
    for (const auto& r : c.players) mem += (mem.empty() ? "" : ",") + format_real(r.membership_residual);
    line(out, p + ".residuals", "projection=" + format_real(c.projection_residual) + ";membership=" + mem);
    line(out, p + ".verdict", c.verdict());
    for (std::size_t i = 0; i < c.players.size(); ++i)
      line(out, p + ".witness[" + std::to_string(i + 1) + "]",
           c.players[i].witness ? format_vec(*c.players[i].witness) : "none");
    if (c.cluster_x) {
      line(out, p + ".cluster_size", std::to_string(c.cluster_size));
      line(out, p + ".cluster_x", box_text(*c.cluster_x));
      line(out, p + ".cluster_y", box_text(*c.cluster_y));
    }
  }
  if (!advisory.empty()) line(out, "advisory", advisory);
  line(out, "status", status);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"projected solutions of generalized Nash games"};
  app.set_help_flag();
  app.allow_extras(false);
  std::string path;
  std::optional<double> h, eps, lambda, grid_h;
  std::optional<int> budget, max_iter, multistart;
  std::optional<std::uint64_t> seed;
  std::string xs, ys;

  std::vector<CLI::App*> subs;
  for (const char* name : {"solve-fp", "solve-qvi", "oracle", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("problem", path)->required();
    sub->add_option("--h", h);
    sub->add_option("--eps", eps);
    sub->add_option("--lambda", lambda);
    sub->add_option("--budget", budget);
    sub->add_option("--seed", seed);
    sub->add_option("--max-iter", max_iter);
    sub->add_option("--multistart", multistart);
    sub->add_option("--grid-h", grid_h);
    if (std::string(name) == "verify") {
      sub->add_option("--x", xs)->required();
      sub->add_option("--y", ys)->required();
    }
    subs.push_back(sub);
  }
  app.require_subcommand(1);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << kUsage;
    return kExitInputError;
  }
  std::string command;
  for (auto* s : subs)
    if (s->parsed()) command = s->get_name();

  try {
    const auto t0 = std::chrono::steady_clock::now();
    Problem problem = load_problem(path);
    SolverConfig cfg = problem.config;
    if (h) cfg.h = *h;
    if (eps) cfg.eps = *eps;
    if (lambda) cfg.lambda = *lambda;
    if (budget) cfg.random_budget = *budget;
    if (seed) cfg.seed = *seed;
    if (max_iter) cfg.max_iter = *max_iter;
    if (multistart) cfg.multistart = *multistart;
    if (grid_h) cfg.grid_h = *grid_h;
    cfg.validate();

    std::vector<Certificate> certs;
    std::string solver, advisory, status;
    double used_eps = cfg.solver_eps();
    int code = kExitNoCertificate;
    if (command == "verify") {
      used_eps = cfg.eps_or(1e-6);
      const Vec x = parse_real_list(xs), y = parse_real_list(ys);
      require_dim(problem.game.joint_dim(), x.size(), "--x");
      require_dim(problem.game.joint_dim(), y.size(), "--y");
      certs.push_back(check_projected_solution(problem.game, x, y, cfg, used_eps));
      solver = "check_projected_solution";
      status = certs.front().pass ? "verify-pass" : "verify-fail";
      code = certs.front().pass ? kExitCertified : kExitNoCertificate;
    } else {
      if (command == "solve-fp") {
        solver = "solve_fixed_point";
        auto r = solve_fixed_point(problem.game, cfg);
        certs = std::move(r.certificates);
        advisory = r.advisory;
      } else if (command == "solve-qvi") {
        solver = "solve_qvi";
        certs = solve_qvi(problem.game, cfg).certificates;
      } else {
        solver = "brute_force_oracle";
        certs = brute_force_oracle(problem.game, cfg);
      }
      if (certs.empty() && advisory.empty()) advisory = "no certified pair at this resolution";
      status = certs.empty() ? "no-certificate" : "certified";
      code = certs.empty() ? kExitNoCertificate : kExitCertified;
    }
    out << format_report(command, solver, problem, cfg, used_eps, certs, advisory, status);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    err << "timing.seconds = " << format_real(secs) << "\n";
    return code;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const NonConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace projgnep
