// Batch front end: reads JSON inputs, runs one computation or property
// suite and prints a canonical JSON run report.
//
// Exit codes: 0 every check passed, 1 some check failed, 2 input error.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eqot/core_spaces.hpp"
#include "eqot/discrete_flow.hpp"
#include "eqot/equivariant.hpp"
#include "eqot/error.hpp"
#include "eqot/graph_calculus.hpp"
#include "eqot/io.hpp"
#include "eqot/ollivier.hpp"
#include "eqot/report.hpp"
#include "eqot/sampling.hpp"
#include "eqot/transport.hpp"

namespace {

using namespace eqot;
using io::Json;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Options {
  std::string space, group, graph, chain, mu0, mu1, rho0, rho1, out;
  std::string what = "space";
  std::string suite = "all";
  std::string vertices = "all";
  std::string n_text = "inf";
  double p = 2.0;
  double K = 0.0;
  double t = 0.5;
  std::size_t grid = 16;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  std::size_t trials = 10;
  bool timing = false;
};

double parse_extended(const std::string& text) {
  if (text == "inf" || text == "+inf") return kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::Validation, "cannot read \"" + text + "\" as a number");
}

// Loads a file, recording its digest in the report.
Json load(const std::string& path, const std::string& role, RunReport& report) {
  if (path.empty()) throw Error(ErrorCode::Validation, "--" + role + " is required");
  const std::string bytes = io::read_file(path);
  report.input_digests.emplace_back(role, io::fnv1a_digest(bytes));
  return io::parse_json(bytes, path);
}

// Artifacts go to --out when given; otherwise to stdout, and the report
// moves to stderr.
struct Sink {
  const Options& opt;
  void write(const std::string& text) const {
    if (opt.out.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::Validation, "cannot write " + opt.out);
    f << text;
  }
};

QuotientSpace load_quotient(const Options& opt, RunReport& report) {
  const auto space = io::space_from_json(load(opt.space, "space", report));
  const auto gens = io::generators_from_json(load(opt.group, "group", report), space.size());
  return QuotientSpace(build_group(space, gens));
}

PermutationGroup load_group(const Options& opt, Index degree, RunReport& report) {
  const auto gens = io::generators_from_json(load(opt.group, "group", report), degree);
  return PermutationGroup::generate(degree, gens);
}

// ---------------------------------------------------------------------------
// Suites

void lift_suite(const Options& opt, Rng& rng, RunReport& report) {
  const QuotientSpace q = load_quotient(opt, report);
  const double N = parse_extended(opt.n_text);
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    const std::string tag = "[" + std::to_string(trial) + "]";
    const Measure mu0 = random_measure(rng, q.size(), 0.2);
    const Measure mu1 = random_measure(rng, q.size(), 0.2);
    const auto quot = wasserstein(q.qspace(), mu0, mu1, opt.p);
    const auto base =
        wasserstein(q.base(), lift_measure(q, mu0), lift_measure(q, mu1), opt.p);
    report.add(CheckResult::equal("lift.w_isometry" + tag, base.value, quot.value, 1e-8));
    for (auto c : verify_lift_coupling(q, quot.coupling)) {
      c.name += tag;
      report.add(std::move(c));
    }
    const Vector psi = random_vector(rng, q.size(), -1.0, 1.0);
    const Vector lhs = cp_transform(q.base(), lift_function(q, psi), opt.p);
    const Vector rhs = lift_function(q, cp_transform(q.qspace(), psi, opt.p));
    report.add(CheckResult::holds("lift.cp_transform" + tag, lhs == rhs));

    const Vector rho0 = mu0.density(q.qspace());
    const Vector rho1 = mu1.density(q.qspace());
    if (N >= 1.0 && (mu0.weights().array() > 0.0).all() &&
        (mu1.weights().array() > 0.0).all()) {
      const Coupling w2 = opt.p == 2.0 ? quot.coupling
                                       : wasserstein(q.qspace(), mu0, mu1, 2.0).coupling;
      auto c = verify_cd_rhs_equality(q, rho0, rho1, w2, opt.K, N, opt.t).check();
      c.name += tag;
      report.add(std::move(c));
    }
  }
}

void ollivier_suite(const Options& opt, Rng& rng, RunReport& report) {
  const QuotientSpace q = load_quotient(opt, report);
  std::optional<MarkovChain> given;
  if (!opt.chain.empty())
    given = io::markov_chain_from_json(load(opt.chain, "chain", report), q.base());
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    const std::string tag = "[" + std::to_string(trial) + "]";
    const MarkovChain chain =
        (trial == 0 && given) ? *given : random_invariant_chain(rng, q);
    auto res = verify_ollivier_preservation(chain, q);
    res.check.name += tag;
    report.add(res.check);
    report.add(CheckResult::equal("ollivier.quotient_row_spread" + tag,
                                  quotient_row_spread(chain, q), 0.0, 1e-12));
  }
}

void cd_suite(const Options& opt, Rng& rng, RunReport& report) {
  const WeightedGraph g = io::graph_from_json(load(opt.graph, "graph", report));
  const PermutationGroup group = load_group(opt, g.size(), report);
  const double N = parse_extended(opt.n_text);
  if (opt.trials == 0) return;
  const QuotientGraph qg = quotient_graph(g, group);
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    const std::string tag = "[" + std::to_string(trial) + "]";
    const Vector f = random_vector(rng, qg.graph.size(), -1.0, 1.0);
    const Vector h = random_vector(rng, qg.graph.size(), -1.0, 1.0);
    for (auto c : verify_lift_commutation(g, group, f, h, opt.p)) {
      c.name += tag;
      report.add(std::move(c));
    }
  }
  report.add(verify_cd_quotient(g, group, N).check);
}

void flow_suite(const Options& opt, Rng& rng, RunReport& report) {
  const ReversibleChain chain = io::reversible_chain_from_json(load(opt.chain, "chain", report));
  const PermutationGroup group = load_group(opt, chain.size(), report);
  const FlowOptions fo{opt.grid, opt.tol};
  if (opt.trials == 0) return;
  const QuotientChainMM q = quotient_chain_mm(chain, group);
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    const std::string tag = "[" + std::to_string(trial) + "]";
    const Vector rho0 = random_density(rng, q.chain.stationary(), 2.0);
    const Vector rho1 = random_density(rng, q.chain.stationary(), 2.0);
    for (auto c : verify_w_isometry(chain, group, rho0, rho1, fo).checks) {
      c.name += tag;
      report.add(std::move(c));
    }
  }
}

// ---------------------------------------------------------------------------
// Commands

int finish(RunReport& report, const Options& opt, bool report_on_stderr,
           std::chrono::steady_clock::time_point start) {
  if (opt.timing)
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string text = io::canonical_dump(io::to_json(report)) + "\n";
  (report_on_stderr ? std::cerr : std::cout) << text;
  return report.all_passed() ? 0 : 1;
}

void cmd_quotient(const Options& opt, RunReport& report) {
  const Sink sink{opt};
  Json artifact;
  if (opt.what == "space") {
    const QuotientSpace q = load_quotient(opt, report);
    artifact = io::to_json(q.qspace());
  } else if (opt.what == "graph") {
    const WeightedGraph g = io::graph_from_json(load(opt.graph, "graph", report));
    const PermutationGroup group = load_group(opt, g.size(), report);
    artifact = io::to_json(quotient_graph(g, group).graph);
  } else if (opt.what == "chain") {
    const QuotientSpace q = load_quotient(opt, report);
    const MarkovChain chain =
        io::markov_chain_from_json(load(opt.chain, "chain", report), q.base());
    const MarkovChain qc = quotient_chain(chain, q);
    artifact = Json{{"space", io::to_json(qc.space())},
                    {"chain", io::kernel_to_json(qc.kernel())}};
    report.add(CheckResult::equal("quotient.row_spread", quotient_row_spread(chain, q),
                                  0.0, 1e-12));
  } else {
    throw Error(ErrorCode::Validation, "--what must be space, graph or chain");
  }
  sink.write(io::canonical_dump(artifact) + "\n");
}

void cmd_verify(const Options& opt, RunReport& report) {
  Rng rng(opt.seed);
  const bool all = opt.suite == "all";
  if (!all && opt.suite != "lift" && opt.suite != "ollivier" && opt.suite != "cd" &&
      opt.suite != "flow")
    throw Error(ErrorCode::Validation, "--suite must be lift, ollivier, cd, flow or all");
  bool ran = false;
  if ((all && !opt.space.empty()) || opt.suite == "lift") {
    lift_suite(opt, rng, report);
    ran = true;
  }
  if ((all && !opt.space.empty()) || opt.suite == "ollivier") {
    ollivier_suite(opt, rng, report);
    ran = true;
  }
  if ((all && !opt.graph.empty()) || opt.suite == "cd") {
    cd_suite(opt, rng, report);
    ran = true;
  }
  if ((all && !opt.chain.empty() && opt.space.empty()) || opt.suite == "flow") {
    flow_suite(opt, rng, report);
    ran = true;
  }
  if (!ran) throw Error(ErrorCode::Validation, "no inputs for any suite");
}

std::vector<Index> parse_vertices(const std::string& text, Index n) {
  std::vector<Index> out;
  if (text == "all") {
    for (Index x = 0; x < n; ++x) out.push_back(x);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
    }
    if (used != item.size() || v < 0 || static_cast<Index>(v) >= n)
      throw Error(ErrorCode::Validation, "bad vertex \"" + item + "\" in --vertices");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

void cmd_curvature(const Options& opt, RunReport& report) {
  const WeightedGraph g = io::graph_from_json(load(opt.graph, "graph", report));
  const double N = parse_extended(opt.n_text);
  std::vector<std::pair<Index, double>> rows;
  for (Index x : parse_vertices(opt.vertices, g.size())) {
    const double k = cd_curvature(g, x, N);
    rows.emplace_back(x, k);
    // Larger N relaxes the dimension term, so K can only grow.
    report.add(CheckResult::at_least("curvature.monotone_in_N[" + g.labels()[x] + "]",
                                     cd_curvature(g, x, kInf), k, 1e-9));
  }
  Sink{opt}.write(io::cd_curvature_csv(rows, g.labels(), N));
}

void cmd_wasserstein(const Options& opt, RunReport& report) {
  const auto space = io::space_from_json(load(opt.space, "space", report));
  const Measure mu0 = io::measure_from_json(load(opt.mu0, "mu0", report), space.size());
  const Measure mu1 = io::measure_from_json(load(opt.mu1, "mu1", report), space.size());
  const WassersteinResult w = wasserstein(space, mu0, mu1, opt.p);
  report.add(CheckResult::equal("wasserstein.duality_gap", w.duality_gap, 0.0,
                                kSolverTolerance));
  report.add(CheckResult::equal("wasserstein.marginal_residual",
                                w.coupling.marginal_residual(mu0, mu1), 0.0, 1e-10));
  report.add(CheckResult::at_least(
      "wasserstein.dual_feasible", 0.0,
      w.potentials.max_violation(cost_table(space, opt.p)), kSolverTolerance));
  Json artifact{{"value", w.value},
                {"cost", w.cost},
                {"coupling", io::coupling_to_json(w.coupling, mu0, mu1)},
                {"phi", io::to_json(w.potentials.phi)},
                {"psi", io::to_json(w.potentials.psi)}};
  Sink{opt}.write(io::canonical_dump(artifact) + "\n");
}

void cmd_ollivier(const Options& opt, RunReport& report) {
  const auto space = io::space_from_json(load(opt.space, "space", report));
  const MarkovChain chain = io::markov_chain_from_json(load(opt.chain, "chain", report), space);
  const auto table = curvature_table(chain);
  if (!opt.group.empty()) {
    const auto gens =
        io::generators_from_json(load(opt.group, "group", report), space.size());
    const QuotientSpace q(build_group(space, gens));
    report.add(verify_ollivier_preservation(chain, q).check);
  }
  Sink{opt}.write(io::curvature_csv(table));
}

void cmd_flow(const Options& opt, RunReport& report) {
  const ReversibleChain chain = io::reversible_chain_from_json(load(opt.chain, "chain", report));
  const Vector rho0 = io::vector_from_json(load(opt.rho0, "rho0", report), "");
  const Vector rho1 = io::vector_from_json(load(opt.rho1, "rho1", report), "");
  const FlowResult r = w_distance(chain, rho0, rho1, FlowOptions{opt.grid, opt.tol});
  report.add(CheckResult::holds("flow.converged", r.converged));
  report.add(CheckResult::equal("flow.continuity_residual", r.residual, 0.0, opt.tol));
  if (!opt.group.empty()) {
    const PermutationGroup group = load_group(opt, chain.size(), report);
    require_kernel_preserving(chain, group);
  }
  Json rho = Json::array();
  for (const Vector& v : r.path.rho) rho.push_back(io::to_json(v));
  Json artifact{{"value", r.value},
                {"action", r.action},
                {"grid", opt.grid},
                {"mollified", r.mollified},
                {"iterations", r.iterations},
                {"times", r.path.times},
                {"rho", std::move(rho)}};
  Sink{opt}.write(io::canonical_dump(artifact) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant optimal transport and discrete curvature toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Artifact output path (default: stdout)");
    sub->add_flag("--timing", opt.timing, "Record wall time in the report");
  };
  auto* quotient = app.add_subcommand("quotient", "Write the quotient of a space, graph or chain");
  quotient->add_option("--what", opt.what, "space | graph | chain")
      ->check(CLI::IsMember({"space", "graph", "chain"}));
  auto* verify = app.add_subcommand("verify", "Run randomized property suites");
  verify->add_option("--suite", opt.suite, "lift | ollivier | cd | flow | all")
      ->check(CLI::IsMember({"lift", "ollivier", "cd", "flow", "all"}));
  auto* curvature = app.add_subcommand("curvature", "CD(K,N) curvature per vertex as CSV");
  curvature->add_option("--vertices", opt.vertices, "all or a comma-separated index list");
  auto* wass = app.add_subcommand("wasserstein", "Exact W_p with coupling and potentials");
  auto* olli = app.add_subcommand("ollivier", "Pairwise coarse Ricci curvature as CSV");
  auto* flow = app.add_subcommand("flow", "Discrete transport distance between densities");

  for (CLI::App* sub : {quotient, verify, curvature, wass, olli, flow}) add_common(sub);
  for (CLI::App* sub : {quotient, verify, wass, olli})
    sub->add_option("--space", opt.space, "Space file");
  for (CLI::App* sub : {quotient, verify, olli, flow})
    sub->add_option("--group", opt.group, "Group file");
  for (CLI::App* sub : {quotient, verify, curvature})
    sub->add_option("--graph", opt.graph, "Graph file");
  for (CLI::App* sub : {quotient, verify, olli, flow})
    sub->add_option("--chain", opt.chain, "Chain file");
  for (CLI::App* sub : {verify, wass}) sub->add_option("--p", opt.p, "Cost exponent");
  for (CLI::App* sub : {verify, curvature})
    sub->add_option("--N", opt.n_text, "Dimension parameter (number or inf)");
  verify->add_option("--K", opt.K, "Curvature parameter of the CD right-hand side");
  verify->add_option("--t", opt.t, "Interpolation time of the CD right-hand side");
  for (CLI::App* sub : {verify, flow}) {
    sub->add_option("--grid", opt.grid, "Time grid size")->check(CLI::PositiveNumber);
    sub->add_option("--tol", opt.tol, "Solver tolerance");
  }
  verify->add_option("--seed", opt.seed, "Random seed");
  verify->add_option("--trials", opt.trials, "Randomized trials per suite");
  wass->add_option("--mu0", opt.mu0, "Source measure file");
  wass->add_option("--mu1", opt.mu1, "Target measure file");
  flow->add_option("--rho0", opt.rho0, "Source density file");
  flow->add_option("--rho1", opt.rho1, "Target density file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  try {
    CLI::App* chosen = app.get_subcommands().front();
    report.command = chosen->get_name();
    if (chosen == quotient) cmd_quotient(opt, report);
    else if (chosen == verify) cmd_verify(opt, report);
    else if (chosen == curvature) cmd_curvature(opt, report);
    else if (chosen == wass) cmd_wasserstein(opt, report);
    else if (chosen == olli) cmd_ollivier(opt, report);
    else cmd_flow(opt, report);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const bool artifact_command = report.command != "verify";
  return finish(report, opt, artifact_command && opt.out.empty(), start);
}
