#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "mmda/cli/run.hpp"

using mmda::cli::RunConfig;

namespace {

void instance_opts(CLI::App* s, RunConfig& c) {
  s->add_option("--instance", c.instance_file, "instance JSON written by build");
  s->add_option("--family", c.family, "mmda, config_lp_gap or subtree_counterexample")
      ->check(CLI::IsMember({"mmda", "config_lp_gap", "subtree_counterexample"}));
  s->add_option("--m", c.m, "ground set size");
  s->add_option("--rho", c.rho, "rho as p/q");
  s->add_option("--ell", c.ell, "depth");
  s->add_option("--k", c.k, "k for the appendix families");
  s->add_flag("--integral", c.integral_requirements, "round requirements up to integers");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"mmda_lab: exact checks for layered max-min degree instances"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--out", c.output, "report path (stdout if absent)");
  app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--precision-cap", c.precision_cap, "MPFR precision cap in bits");
  app.add_option("--seed", c.seed, "seed");

  auto* build = app.add_subcommand("build", "emit instance JSON");
  instance_opts(build, c);

  auto* lp = app.add_subcommand("verify-lp", "check the assignment LP solution");
  instance_opts(lp, c);
  lp->add_option("--allowance", c.allowance, "packing allowance");
  lp->add_flag("--subtrees", c.subtrees, "also check every subtree solution");

  auto* vp = app.add_subcommand("verify-paths", "check the path-hierarchy solution");
  instance_opts(vp, c);
  vp->add_option("--rounds", c.rounds, "hierarchy level t");
  vp->add_flag("--explicit", c.explicit_route, "enumerate paths instead of classes");
  vp->add_option("--max-paths", c.max_paths, "cap for --explicit");

  auto* cp = app.add_subcommand("count-paths", "DP counts against the closed forms");
  instance_opts(cp, c);
  cp->add_option("--from", c.from, "source vertex");
  cp->add_option("--to", c.to, "target vertex");
  cp->add_option("--sample", c.sample_sources, "check this many seeded source vertices");
  cp->add_option("--xi", c.xi, "layer distance fraction for the count bound");

  auto* sa = app.add_subcommand("sa1-report", "shadow marginals, controls and the SA(1) certificate");
  instance_opts(sa, c);
  sa->add_option("--model", c.model, "subtree or independent");
  sa->add_option("--floor", c.floor, "covering floor");
  sa->add_option("--ceiling", c.ceiling, "packing ceiling");
  sa->add_option("--truncation", c.truncation, "truncation factor (default 1/m^4)");
  sa->add_option("--event", c.events, "condition on these edges only");
  sa->add_flag("--no-certificate", c.no_certificate, "marginals and controls only");

  auto* ss = app.add_subcommand("shadow-sample", "sample the shadow distribution");
  instance_opts(ss, c);
  ss->add_option("--model", c.model, "subtree or independent");
  ss->add_option("--samples", c.samples, "number of samples");
  ss->add_option("--rounds", c.rounds, "iterated shadow rounds")->default_val(1);
  auto* ex = ss->add_flag("--exact", c.exact, "exact moments instead of samples");
  auto* mc = ss->add_flag("--mc", "seeded Monte Carlo (default)");
  ex->excludes(mc);
  ss->add_flag("--compare", c.compare, "compare Monte Carlo with the exact engine");
  ss->add_option("--event", c.events, "condition on this edge");
  ss->add_flag("--negative", c.negative, "condition on the edge being absent");
  ss->add_option("--tolerance", c.tolerance, "standard errors allowed");

  auto* bf = app.add_subcommand("bruteforce", "best integral solution");
  instance_opts(bf, c);
  bf->add_option("--budget", c.budget, "search node budget");

  auto* ce = app.add_subcommand("certificate", "counting certificate");
  instance_opts(ce, c);
  ce->add_option("--threshold", c.threshold, "fixed threshold index");
  ce->add_option("--vertex", c.vertex, "vertex in layer 1/eps");

  auto* lg = app.add_subcommand("locally-good", "rounding sampler over seeds");
  instance_opts(lg, c);
  lg->add_option("--seeds", c.seeds, "number of seeds, starting at --seed");
  lg->add_option("--radius", c.radius, "congestion radius");
  lg->add_option("--tolerance", c.tolerance, "standard errors allowed");

  auto* ra = app.add_subcommand("ra", "restricted assignment lower bound");
  ra->add_option("--k", c.k, "k");
  ra->add_option("--eps", c.eps, "epsilon");
  ra->add_option("--alpha", c.alpha, "canonical big threshold");
  ra->add_option("--bruteforce", c.ra_bruteforce, "run the exhaustive optimum (default k <= 6)");
  ra->add_option("--instance", c.ra_instance, "RA instance JSON");

  auto* ab = app.add_subcommand("appendixb", "configuration LP gap instance");
  ab->add_option("--k", c.k, "k");
  ab->add_option("--control-m", c.control_m, "m of the depth-3 control");

  auto* ac = app.add_subcommand("appendixc", "subtree counterexample");
  ac->add_option("--k", c.k, "k");
  ac->add_option("--budget", c.budget, "search node budget");

  auto* sc = app.add_subcommand("scan", "proof-function sign scan");
  sc->add_option("--fn", c.fn, "function name")->required();
  sc->add_option("--lo", c.lo, "domain start")->required();
  sc->add_option("--hi", c.hi, "domain end")->required();
  sc->add_option("--resolution", c.resolution, "grid points");
  sc->add_option("--rho", c.scan_rho, "rho for functions of one other variable");
  sc->add_option("--eps", c.scan_eps, "epsilon for the degree bounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mmda::cli::kUsage;
  }
  c.command = app.get_subcommands().front()->get_name();

  mmda::cli::RunResult r = mmda::cli::run(c);
  if (r.exit_code == mmda::cli::kUsage && r.report.contains("error"))
    std::cerr << "error: " << r.report["error"].get<std::string>() << "\n";
  std::string text = mmda::cli::render(r.report, c.format);
  if (c.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(c.output, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << c.output << "\n";
      return mmda::cli::kUsage;
    }
    out << text;
  }
  return r.exit_code;
}
