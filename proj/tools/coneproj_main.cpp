// coneproj: command-line front end for projections, polars and the
// property suites. Every command writes one JSON document.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "coneproj/io.hpp"

namespace {

using namespace coneproj;

enum Exit : int {
  exit_ok = 0,
  exit_input = 1,
  exit_solver = 2,
  exit_witness = 3,
  exit_budget = 4,
};

constexpr const char *exit_codes_help = R"(Exit codes:
  0  success / pass
  1  input error (bad arguments, malformed or inconsistent input, unsupported request)
  2  solver failure (projection not certified, oracle disagreement)
  3  suite failure; the JSON carries a witness
  4  search budget exhausted without a decision)";

struct RunConfig {
  std::string command;
  std::optional<double> p;
  int n = 3;
  std::uint64_t seed = 0;
  std::string cone, subspace, hyperplane;
  std::string out;
  Tolerances tol;
};

void emit(const RunConfig &cfg, const Json &doc) {
  const std::string text = doc.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f)
    fail(ErrorKind::invalid_input, "out: cannot write " + cfg.out);
  f << text;
}

void check_n(int n) {
  if (n < 1 || n > 32)
    fail(ErrorKind::invalid_input, "n: must be in [1, 32]");
}

SpaceConfig space_of(const RunConfig &cfg) {
  if (!cfg.p)
    fail(ErrorKind::invalid_input, "p: --p is required");
  check_n(cfg.n);
  return SpaceConfig::make(cfg.n, *cfg.p);
}

void summarize(const PropertyReport &r) {
  std::cerr << "suite " << r.suite << "  p=" << r.space.p << " n=" << r.space.n << " seed=" << r.seed << "\n"
            << "  trials " << r.trials << "  violations " << r.violations << "  max residual " << r.max_residual
            << "  verdict " << to_string(r.verdict) << "\n";
}

int cmd_project(const RunConfig &cfg, const std::string &point_text) {
  const int given = !cfg.cone.empty() + !cfg.subspace.empty() + !cfg.hyperplane.empty();
  if (given != 1)
    fail(ErrorKind::invalid_input, "project: exactly one of --cone, --subspace, --hyperplane is required");
  std::optional<int> n;
  ProjectionResult res;
  Json doc;
  auto finish = [&](const io::Document &d) {
    const Vector x = io::parse_point(point_text, n);
    const auto space = io::resolve_space(io::read_header(d), cfg.p, x.size());
    return std::pair{space, x};
  };
  if (!cfg.cone.empty()) {
    const auto d = io::read_file(cfg.cone);
    const ConeSpec k = io::parse_cone(d, n);
    const auto [space, x] = finish(d);
    res = project_cone(space, x, k, cfg.tol);
    doc = io::to_json(res);
    doc["space"] = io::to_json(space);
  } else if (!cfg.subspace.empty()) {
    const auto d = io::read_file(cfg.subspace);
    const SubspaceSpec v = io::parse_subspace(d, n);
    const auto [space, x] = finish(d);
    res = project_subspace(space, x, v, cfg.tol);
    doc = io::to_json(res);
    doc["space"] = io::to_json(space);
  } else {
    const auto d = io::read_file(cfg.hyperplane);
    const auto h = io::parse_hyperplane(d, n);
    const auto [space, x] = finish(d);
    res = h.side ? project_halfspace(space, x, HalfspaceCone(space, h.normal, *h.side))
                 : project_hyperplane(space, x, Hyperplane(space, h.normal));
    doc = io::to_json(res);
    doc["space"] = io::to_json(space);
  }
  emit(cfg, doc);
  return res.converged ? exit_ok : exit_solver;
}

int cmd_polar(const RunConfig &cfg, int samples, int trials, bool random_cone, const std::string &csv) {
  if (samples < 1)
    fail(ErrorKind::invalid_input, "samples: must be >= 1");
  if (trials < 1)
    fail(ErrorKind::invalid_input, "trials: must be >= 1");
  if (random_cone == !cfg.cone.empty())
    fail(ErrorKind::invalid_input, "polar: exactly one of --cone, --random-cone is required");
  SpaceConfig space;
  ConeSpec k;
  CounterRng rng(cfg.seed);
  if (random_cone) {
    space = space_of(cfg);
    CounterRng r = rng.split(0);
    k = random_simplicial_cone(space, r);
  } else {
    const auto d = io::read_file(cfg.cone);
    std::optional<int> n;
    k = io::parse_cone(d, n);
    space = io::resolve_space(io::read_header(d), cfg.p, n);
  }
  const auto pts = polar_sample(space, k, samples, rng.split(1).next_u64(), cfg.tol);
  const auto conv = convexity_check(space, k, trials, rng.split(2).next_u64(), cfg.tol);
  Json arr = Json::array();
  for (const auto &s : pts)
    arr.push_back(io::to_json(s));
  emit(cfg, Json{{"space", io::to_json(space)},
                 {"seed", cfg.seed},
                 {"cone_generators", to_json(k)},
                 {"samples", std::move(arr)},
                 {"convexity", io::to_json(conv, k)}});
  if (!csv.empty()) {
    std::ofstream f(csv, std::ios::binary);
    if (!f)
      fail(ErrorKind::invalid_input, "csv: cannot write " + csv);
    f << io::samples_csv(pts);
  }
  return exit_ok;
}

int cmd_verify(const RunConfig &cfg, const std::string &suite, bool allow_low_dim, const SuiteOptions &opt) {
  const auto space = space_of(cfg);
  if (suite == "eloz") {
    EquivalenceOptions eo;
    eo.allow_low_dim = allow_low_dim;
    const auto rep = equivalence_report(space, cfg.seed, eo, cfg.tol);
    emit(cfg, io::to_json(rep));
    for (const auto &a : rep.assertions) {
      std::cerr << "(" << a.id << ") ";
      summarize(a.report);
    }
    std::cerr << "consistent: " << (rep.consistent ? "yes" : "no")
              << (rep.consistency_checked ? "" : " (not asserted for n <= 2)") << "\n";
    return (!rep.consistency_checked || rep.consistent) ? exit_ok : exit_witness;
  }
  const auto rep = run_suite(suite, space, cfg.seed, opt, cfg.tol);
  emit(cfg, io::to_json(rep));
  summarize(rep);
  switch (rep.verdict) {
  case Verdict::pass:
    return exit_ok;
  case Verdict::fail_with_witness:
    return exit_witness;
  case Verdict::inconclusive:
    return exit_budget;
  }
  return exit_budget;
}

int cmd_counterexample(const RunConfig &cfg, const std::string &target, std::optional<int> budget) {
  const auto space = space_of(cfg);
  PropertyReport rep;
  if (budget && *budget < 0)
    fail(ErrorKind::invalid_input, "budget: must be >= 0");
  if (target == "nonlinear-subspace")
    rep = search_nonlinear_subspace(space, cfg.seed, budget.value_or(100), cfg.tol);
  else if (target == "nonconvex-polar")
    rep = search_nonconvex_polar(space, cfg.seed, budget.value_or(200), cfg.tol);
  else
    fail(ErrorKind::invalid_input, "target: expected nonlinear-subspace or nonconvex-polar");
  emit(cfg, io::to_json(rep));
  summarize(rep);
  return rep.witness ? exit_ok : exit_budget;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"coneproj: metric projections, duality maps and polar cones in l_p^n"};
  app.footer(exit_codes_help);
  app.require_subcommand(1);

  RunConfig cfg;
  std::string point, suite, target, csv;
  int samples = 0, trials = 400;
  bool random_cone = false, allow_low_dim = false;
  std::optional<int> budget;
  SuiteOptions suite_opt;

  auto common = [&](CLI::App *sub, bool needs_n) {
    sub->add_option("--p", cfg.p, "Exponent p in [1.05, 20]");
    if (needs_n)
      sub->add_option("--n", cfg.n, "Dimension n in [1, 32]")->capture_default_str();
    sub->add_option("--out", cfg.out, "Write JSON here instead of stdout");
    sub->footer(exit_codes_help);
  };

  auto *project = app.add_subcommand("project", "Metric projection of a point onto a cone, subspace or hyperplane");
  common(project, false);
  project->add_option("--cone", cfg.cone, "ConeSpec JSON file");
  project->add_option("--subspace", cfg.subspace, "SubspaceSpec JSON file");
  project->add_option("--hyperplane", cfg.hyperplane, "Hyperplane JSON file (with \"sign\": half-space)");
  project->add_option("--point", point, "Point as a JSON array")->required();

  auto *polar = app.add_subcommand("polar", "Sample the polar cone and test its convexity");
  common(polar, true);
  polar->add_option("--cone", cfg.cone, "ConeSpec JSON file");
  polar->add_flag("--random-cone", random_cone, "Use a random simplicial cone drawn from the seed");
  polar->add_option("--samples", samples, "Number of sample draws (>= 1)")->required();
  polar->add_option("--seed", cfg.seed, "64-bit seed")->required();
  polar->add_option("--trials", trials, "Pair trials for the convexity check")->capture_default_str();
  polar->add_option("--csv", csv, "Also export the samples as CSV");

  auto *verify = app.add_subcommand("verify", "Run a property suite");
  common(verify, true);
  verify->add_option("--suite", suite, "kov | footet | felt | projhyp | metsz | moreau | lpt | eloz")->required();
  verify->add_option("--seed", cfg.seed, "64-bit seed")->capture_default_str();
  verify->add_flag("--allow-low-dim", allow_low_dim, "eloz: run for n <= 2 without asserting consistency");
  verify->add_option("--cones", suite_opt.cones, "Random objects per suite")->capture_default_str();
  verify->add_option("--points", suite_opt.points, "Sample points per object")->capture_default_str();

  auto *counter = app.add_subcommand("counterexample", "Search for a certified counterexample (p != 2, n >= 3)");
  common(counter, true);
  counter->add_option("--target", target, "nonlinear-subspace | nonconvex-polar")->required();
  counter->add_option("--seed", cfg.seed, "64-bit seed")->capture_default_str();
  counter->add_option("--budget", budget, "Candidates to examine (default 100 subspaces / 200 cones)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_input;
  }

  try {
    cfg.tol = io::tolerances_from_env();
    if (*project)
      return cmd_project(cfg, point);
    if (*polar)
      return cmd_polar(cfg, samples, trials, random_cone, csv);
    if (*verify) {
      if (suite_opt.cones < 1 || suite_opt.points < 1)
        fail(ErrorKind::invalid_input, "cones/points: must be >= 1");
      return cmd_verify(cfg, suite, allow_low_dim, suite_opt);
    }
    return cmd_counterexample(cfg, target, budget);
  } catch (const Error &e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    switch (e.kind()) {
    case ErrorKind::invalid_input:
    case ErrorKind::unsupported:
      return exit_input;
    case ErrorKind::solver_failure:
    case ErrorKind::oracle_disagreement:
      return exit_solver;
    }
    return exit_input;
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "error (invalid_input): " << e.what() << "\n";
    return exit_input;
  }
}
