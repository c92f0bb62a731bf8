#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <optional>

#include <CLI11.hpp>

#include "mcv/bsde.hpp"
#include "mcv/config.hpp"
#include "mcv/duality.hpp"
#include "mcv/dynamic.hpp"
#include "mcv/error.hpp"
#include "mcv/harness.hpp"
#include "mcv/twostep.hpp"

namespace mcv {

namespace {

struct Options {
  std::string tree;
  std::string principle;
  std::string payoff;
  std::string model;
  std::string out;
  std::string config;
  std::string driver;
  std::string table;
  std::string alpha = "1";
  std::string gamma = "1";
  std::string horizon;
  bool two_step = false;
  bool emit_path = false;
  bool static_family = false;
  bool check = false;
  bool emit_solution = false;
  std::optional<int> numeraire;
  std::optional<std::uint64_t> seed;
  long trials = 10000;
  std::uint64_t budget = 200000;
  long samples = 10000;
};

Real parse_real(const std::string& text, const std::string& flag) {
  try {
    return Real::parse(text);
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::InvalidConfig, flag + ": '" + text + "' is not a number");
  }
}

std::uint64_t seed_of(const Options& o) { return o.seed ? *o.seed : default_seed(); }

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write '" + o.out + "'");
  f << text;
}

ScenarioTree load_tree(const Options& o) { return build_tree(load_tree_config(o.tree)); }

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream&) {
  const ScenarioTree tree = load_tree(o);
  const PrincipleSpec spec = parse_principle(o.principle);
  const Payoff h = load_payoff(o.payoff, tree);
  ConditionalValue v;
  if (o.numeraire) {
    if (!o.two_step) throw Error(ErrorCode::InvalidConfig, "--numeraire requires --two-step");
    v = numeraire_transform(*o.numeraire, h, tree, spec).rescaled;
  } else if (o.two_step) {
    v = two_step(spec, h, tree);
  } else {
    v = evaluate(spec, h, tree.g_partition(), tree);
  }
  emit(o, conditional_value_csv(v, tree), out);
  return kExitOk;
}

int cmd_dynamic(const Options& o, std::ostream& out, std::ostream& err) {
  const ScenarioTree tree = load_tree(o);
  const PrincipleSpec spec = parse_principle(o.principle);
  const Payoff h = load_payoff(o.payoff, tree);
  const FamilyOracle family = o.static_family ? static_family(spec, tree) : backward_family(spec, tree);
  std::string text = "time,block_id,member_leaves,value\n";
  const int last = o.emit_path ? tree.horizon() : 0;
  for (int t = 0; t <= last; ++t) {
    const std::string csv = conditional_value_csv(family(t, h), tree);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) text += std::to_string(t) + "," + line + "\n";
  }
  emit(o, text, out);
  if (!o.check) return kExitOk;
  const SearchConfig cfg{seed_of(o), o.trials, o.budget};
  bool ok = true;
  for (const DynamicReport& rep : {time_consistency_check(family, tree, all_time_pairs(tree), cfg), reveal_structure_check(family, tree, cfg)}) {
    if (rep.passed) {
      err << "check passed (" << (rep.exhaustive ? "exhaustive" : "sampled") << ", " << rep.trials << " trials, seed " << rep.seed << ")\n";
    } else {
      ok = false;
      err << "check failed: " << rep.check << " witness " << rep.witness << " seed " << rep.seed << "\n";
    }
  }
  return ok ? kExitOk : kExitCheckFailed;
}

std::string join(const std::vector<Real>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i].str();
  return s;
}

std::string solution_csv(const BsdeSolution& sol, const GridTree& grid) {
  std::string text = "node,time,y,zf,z,ztilde,q_drift,p_drift,lvar\n";
  for (const BsdeStep& s : sol.steps) {
    text += grid.tree.node(s.node).label + "," + std::to_string(s.time) + "," + s.y.str() + "," + s.zf.str() + "," + join(s.z) + "," +
            join(s.ztilde) + "," + s.q_drift.str() + "," + s.p_drift.str() + "," + s.lvar.str() + "\n";
  }
  return text;
}

bool report_check(const std::string& name, const BsdeCheckReport& rep, std::ostream& err) {
  if (rep.passed) {
    err << name << ": pass (" << rep.nodes << " nodes)\n";
  } else {
    err << name << ": fail witness " << rep.witness << "\n";
  }
  return rep.passed;
}

bool report_driver(const DriverCheckReport& rep, std::ostream& err) {
  if (rep.passed) {
    err << "driver-criterion: pass (" << rep.samples << " samples, seed " << rep.seed << ")\n";
  } else {
    err << "driver-criterion: fail witness " << rep.witness << " seed " << rep.seed << "\n";
  }
  return rep.passed;
}

int cmd_bsde(const Options& o, std::ostream& out, std::ostream& err) {
  const GridModel model = load_grid_model(o.model);
  if (o.driver == "custom-table") {
    if (o.table.empty()) throw Error(ErrorCode::InvalidConfig, "--driver custom-table requires --table");
    return report_driver(driver_table_check(parse_driver_table(read_text_file(o.table), model), model), err) ? kExitOk : kExitCheckFailed;
  }
  if (o.payoff.empty()) throw Error(ErrorCode::InvalidConfig, "--payoff is required for --driver " + o.driver);
  const GridTree grid = build_grid_tree(model);
  const Payoff h = load_payoff(o.payoff, grid.tree);
  bool ok = true;
  BsdeSolution sol;
  if (o.driver == "mv") {
    const Real alpha = parse_real(o.alpha, "--alpha");
    sol = solve_discrete(PrincipleSpec::mean_variance(alpha), h, grid);
    ok = report_check("reconstruction", reconstruction_check(sol, grid, alpha), err) && ok;
    ok = report_check("drift-identity", drift_identity_check(sol, grid, alpha), err) && ok;
    ok = report_driver(driver_mc_check(driver_mv(alpha, model), model, o.samples, seed_of(o)), err) && ok;
  } else {
    const Real gamma = parse_real(o.gamma, "--gamma");
    sol = solve_discrete(PrincipleSpec::exponential(gamma), h, grid);
    ok = report_driver(driver_mc_check(driver_exp(gamma, model), model, o.samples, seed_of(o)), err) && ok;
    try {
      const ExpTowerReport tower = exp_tower_check(gamma, h, grid);
      err << "exp-tower: " << (tower.passed ? "pass" : "fail") << " recursive " << tower.recursive.str() << " one-shot " << tower.one_shot.str()
          << "\n";
      ok = ok && tower.passed;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotPureInsurance) throw;
      err << "exp-tower: skipped (payoff depends on the stock)\n";
    }
  }
  ok = report_check("orthogonality", orthogonality_check(sol, grid), err) && ok;
  ok = report_check("law", law_check(sol, grid), err) && ok;
  if (o.emit_solution) {
    emit(o, solution_csv(sol, grid), out);
  } else {
    emit(o, "y0\n" + sol.y.front().values.front().str() + "\n", out);
  }
  return ok ? kExitOk : kExitCheckFailed;
}

CheckConfig check_config(const Options& o, bool two_step_op) {
  CheckConfig cfg;
  cfg.search = {seed_of(o), o.trials, o.budget};
  cfg.market_required = two_step_op;
  if (!o.config.empty()) cfg = parse_check_config(read_text_file(o.config), cfg);
  return cfg;
}

int cmd_check_axioms(const Options& o, std::ostream& out, std::ostream& err) {
  const ScenarioTree tree = load_tree(o);
  const PrincipleSpec spec = parse_principle(o.principle);
  const EvaluationOracle op = o.two_step ? TwoStepEvaluator(tree, spec).oracle() : principle_oracle(spec, tree, tree.g_partition());
  const AxiomReport rep = check_axioms(op, tree, tree.g_partition(), check_config(o, o.two_step));
  emit(o, rep.csv(), out);
  err << "mode " << rep.mode << ", seed " << rep.seed << "\n";
  for (const auto& r : rep.results) {
    if (r.status == AxiomStatus::Fail) err << (r.required ? "FAIL " : "note ") << r.axiom << ": " << r.witness << "\n";
  }
  return rep.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_counterexample(const Options& o, std::ostream& out, std::ostream&) {
  const CounterexampleTemplate tmpl = canonical_counterexample_template();
  const CounterexampleReport cx = counterexample(tmpl, {seed_of(o), o.trials, o.budget});
  const bool ok = cx.violation && cx.consistency_certified && cx.consistency_search.passed;
  std::string text;
  text += "market_consistent," + std::string(cx.consistency_certified && cx.consistency_search.passed ? "yes" : "no") + "\n";
  text += "consistency_search," + std::string(cx.consistency_search.exhaustive ? "exhaustive" : "sampled") + " " +
          std::to_string(cx.consistency_search.trials) + "\n";
  text += "certificate," + cx.certificate + "\n";
  text += "H," + cx.h.str() + "\n";
  text += "Pi(H)," + cx.pi_h.values[0].str() + "\n";
  text += "Pi(I_A H)," + cx.pi_h_a.values[0].str() + "\n";
  text += "Pi(I_Ac H)," + cx.pi_h_ac.values[0].str() + "\n";
  text += "gap," + cx.gap.str() + "\n";
  text += "strict," + std::string(cx.violation ? "yes" : "no") + "\n";
  emit(o, text, out);
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_superrep(const Options& o, std::ostream& out, std::ostream&) {
  const ScenarioTree tree = load_tree(o);
  const Payoff h = load_payoff(o.payoff, tree);
  const ConditionalValue sub = sub_replication(h, tree);
  const ConditionalValue super = super_replication(h, tree);
  std::string text = "block_id,member_leaves,sub,super\n";
  const std::string csv = conditional_value_csv(super, tree);
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  for (int b = 0; std::getline(ss, line); ++b) {
    const auto cut = line.rfind(',');
    text += line.substr(0, cut) + "," + sub.values.at(static_cast<size_t>(b)).str() + "," + super.values[static_cast<size_t>(b)].str() + "\n";
  }
  emit(o, text, out);
  return kExitOk;
}

ScenarioTree default_report_tree() {
  ProductTreeSpec spec;
  spec.steps.push_back({{{{Real(2)}, Real::fraction(1, 2)}, {{Real::fraction(1, 2)}, Real::fraction(1, 2)}},
                        {{Real(0), Real::fraction(1, 2)}, {Real(1), Real::fraction(1, 2)}}});
  return build_tree(product_tree_config(spec));
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  const ScenarioTree tree = o.tree.empty() ? default_report_tree() : load_tree(o);
  const std::vector<PrincipleSpec> specs{PrincipleSpec::expectation(),      PrincipleSpec::mean_variance(Real(1)),
                                         PrincipleSpec::std_dev(Real::fraction(1, 2)), PrincipleSpec::semi_deviation(Real::fraction(1, 2), Real(1)),
                                         PrincipleSpec::avar(Real::fraction(1, 2), Real::fraction(1, 2)), PrincipleSpec::exponential(Real(2))};
  std::string text = "operator,axiom,status,trials,witness,seed\n";
  bool ok = true;
  for (const auto& spec : specs) {
    for (bool ts : {false, true}) {
      const EvaluationOracle op = ts ? TwoStepEvaluator(tree, spec).oracle() : principle_oracle(spec, tree, tree.g_partition());
      const AxiomReport rep = check_axioms(op, tree, tree.g_partition(), check_config(o, ts));
      ok = ok && rep.passed();
      const std::string name = (ts ? "two-step " : "") + spec.str();
      std::stringstream ss(rep.csv());
      std::string line;
      std::getline(ss, line);
      while (std::getline(ss, line)) text += "\"" + name + "\"," + line + "\n";
      err << name << ": " << (rep.passed() ? "pass" : "FAIL") << " (" << rep.mode << ")\n";
    }
  }
  if (!o.model.empty()) {
    const GridModel model = load_grid_model(o.model);
    const Real horizon = o.horizon.empty() ? Real(model.steps) * model.h : parse_real(o.horizon, "--horizon");
    const Real alpha = parse_real(o.alpha, "--alpha");
    // Keep the finest grid small: each step multiplies the leaf count.
    std::vector<Real> sizes;
    Real step = model.h;
    for (int i = 0; i < 3; ++i, step = step / Real(2)) {
      const Real count = horizon / step;
      const long branching = 2L * (1L << model.insurance_brownians) * static_cast<long>(std::pow(3, model.marks.size()));
      if (!count.is_exact() || count.rational().get_den() != 1) break;
      const long n = count.rational().get_num().get_si();
      if (n * std::log(static_cast<double>(branching)) > std::log(50000.0)) break;
      sizes.push_back(step);
    }
    text += "\nh,steps,leaves,y0\n";
    for (const TrendRow& row : trend_report(model, horizon, sizes, alpha, [](const Real&, const Real& y) { return y; })) {
      text += row.h.str() + "," + std::to_string(row.steps) + "," + std::to_string(row.leaves) + "," + row.y0.str() + "\n";
    }
  }
  emit(o, text, out);
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Market-consistent actuarial valuation toolkit", "mcv"};
  app.require_subcommand(1);
  Options o;

  auto seeded = [&o](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "generator seed (default: MCV_SEED or a fixed value)");
    sub->add_option("--trials", o.trials, "sampled trials when the search space exceeds the budget")->check(CLI::PositiveNumber);
    sub->add_option("--budget", o.budget, "largest search space enumerated exhaustively");
  };

  CLI::App* ev = app.add_subcommand("evaluate", "evaluate a payoff on the initial information");
  ev->add_option("--tree", o.tree, "tree configuration (JSON)")->required();
  ev->add_option("--principle", o.principle, "principle, e.g. mv:alpha=1")->required();
  ev->add_option("--payoff", o.payoff, "payoff file (CSV or JSON)")->required();
  ev->add_flag("--two-step", o.two_step, "use the two-step market evaluation");
  ev->add_option("--numeraire", o.numeraire, "evaluate in units of this stock and rescale");
  ev->add_option("--out", o.out, "output file");

  CLI::App* dy = app.add_subcommand("dynamic", "backward dynamic evaluation");
  dy->add_option("--tree", o.tree, "tree configuration (JSON)")->required();
  dy->add_option("--principle", o.principle, "per-step principle")->required();
  dy->add_option("--payoff", o.payoff, "payoff file (CSV or JSON)")->required();
  dy->add_flag("--emit-path", o.emit_path, "emit the value at every time");
  dy->add_flag("--static", o.static_family, "use the non-recursive family");
  dy->add_flag("--check", o.check, "run the time-consistency and reveal-structure checks");
  dy->add_option("--out", o.out, "output file");
  seeded(dy);

  CLI::App* bs = app.add_subcommand("bsde-solve", "discrete BSDE on a grid model");
  bs->add_option("--model", o.model, "grid model (JSON)")->required();
  bs->add_option("--driver", o.driver, "mv, exp or custom-table")->required()->check(CLI::IsMember({"mv", "exp", "custom-table"}));
  bs->add_option("--alpha", o.alpha, "mean-variance loading");
  bs->add_option("--gamma", o.gamma, "exponential risk aversion");
  bs->add_option("--payoff", o.payoff, "payoff file on the grid tree");
  bs->add_option("--table", o.table, "driver table (CSV) for custom-table");
  bs->add_flag("--emit-solution", o.emit_solution, "emit Y and the integrands at every node");
  bs->add_option("--samples", o.samples, "driver criterion samples")->check(CLI::PositiveNumber);
  bs->add_option("--seed", o.seed, "generator seed");
  bs->add_option("--out", o.out, "output file");

  CLI::App* ca = app.add_subcommand("check-axioms", "run the axiom suite on a principle");
  ca->add_option("--tree", o.tree, "tree configuration (JSON)")->required();
  ca->add_option("--principle", o.principle, "principle, e.g. mv:alpha=1")->required();
  ca->add_flag("--two-step", o.two_step, "check the two-step market evaluation");
  ca->add_option("--config", o.config, "check configuration (JSON)");
  ca->add_option("--out", o.out, "report file (CSV)");
  seeded(ca);

  CLI::App* cx = app.add_subcommand("counterexample", "certify the market local property counterexample");
  cx->add_option("--out", o.out, "output file");
  seeded(cx);

  CLI::App* sr = app.add_subcommand("superrep", "sub- and super-replication prices");
  sr->add_option("--tree", o.tree, "tree configuration (JSON)")->required();
  sr->add_option("--payoff", o.payoff, "payoff file (CSV or JSON)")->required();
  sr->add_option("--out", o.out, "output file");

  CLI::App* rp = app.add_subcommand("report", "axiom suite over all principles, optional grid trend");
  rp->add_option("--tree", o.tree, "tree configuration (JSON); a 4-leaf tree by default");
  rp->add_option("--model", o.model, "grid model for the step-size trend");
  rp->add_option("--alpha", o.alpha, "mean-variance loading for the trend");
  rp->add_option("--horizon", o.horizon, "trend horizon (default steps * h)");
  rp->add_option("--config", o.config, "check configuration (JSON)");
  rp->add_option("--out", o.out, "output file");
  seeded(rp);

  std::vector<std::string> argv_store{"mcv"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (ev->parsed()) return cmd_evaluate(o, out, err);
    if (dy->parsed()) return cmd_dynamic(o, out, err);
    if (bs->parsed()) return cmd_bsde(o, out, err);
    if (ca->parsed()) return cmd_check_axioms(o, out, err);
    if (cx->parsed()) return cmd_counterexample(o, out, err);
    if (sr->parsed()) return cmd_superrep(o, out, err);
    if (rp->parsed()) return cmd_report(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace mcv
