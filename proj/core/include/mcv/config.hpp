#pragma once

#include <string>
#include <vector>

#include "mcv/bsde.hpp"
#include "mcv/harness.hpp"
#include "mcv/principles.hpp"
#include "mcv/scenario_tree.hpp"

namespace mcv {

// Configuration ingestion. Every reader throws Error(InvalidConfig) with the
// offending field named in the message. Numbers may be given as JSON numbers
// or as strings ("1/3", "0.25"); strings keep decimals exact.

/// Tree configuration in JSON. Two shapes are accepted:
///   node table: {"bond_rate", "reveal_times", "horizon"?, "nodes": [{"id",
///     "parent"?, "stock": [...], "insurance"?, "prob"?}], "leaf_prob"?: {id: p},
///     "g_partition"?: [[leaf ids]]}
///   product form: {"product": {"s0": [...], "y0", "bond_rate", "steps": [
///     {"financial": [{"factor": [...], "prob"}], "insurance": [{"increment", "prob"}]}]},
///     "g_partition"?: [[leaf ids]]}
TreeConfig parse_tree_config(const std::string& json_text);
TreeConfig load_tree_config(const std::string& path);

/// Either the text form accepted by PrincipleSpec::parse or a JSON object
/// {"kind": "mv", "params": {"alpha": 1}}.
PrincipleSpec parse_principle(const std::string& text);

/// Payoff on the leaves of `tree`. Accepted formats:
///   CSV with header "leaf,value" (leaf label or index, every leaf exactly once);
///   JSON {"values": [...]}, {"by_leaf": {label: value}} or {"formula": {...}}
///   with formula kinds
///     linear:        {"kind": "linear", "stock": [c_i], "insurance": c, "constant": c}
///     call:          {"kind": "call", "stock_index": i, "strike": K}     (S^i_T - K)^+
///     equity-linked: {"kind": "equity-linked", "stock_index": i, "strike": K}  max(S^i_T, K) Y_T
Payoff parse_payoff(const std::string& text, const ScenarioTree& tree);
Payoff load_payoff(const std::string& path, const ScenarioTree& tree);

/// {"steps", "h", "s0", "mu", "sigma", "r", "insurance_brownians", "marks": [{"x", "nu"}], "y0"}.
GridModel parse_grid_model(const std::string& json_text);
GridModel load_grid_model(const std::string& path);

/// CSV driver table with header t,zf,z1..zK,zt1..ztM,g (K insurance
/// Brownians and M marks of `model`).
std::vector<DriverSample> parse_driver_table(const std::string& csv_text, const GridModel& model);

/// Optional check settings: {"seed", "trials", "budget", "market",
/// "market_required", "pnorm": {"p", "lambda": [..] or scalar, "measure"?: [..]}}.
/// Fields not present keep the values already in `base`.
CheckConfig parse_check_config(const std::string& json_text, CheckConfig base);

/// CSV with columns block_id,member_leaves,value; member leaves are leaf
/// labels separated by spaces.
std::string conditional_value_csv(const ConditionalValue& v, const ScenarioTree& tree);

/// Reads a whole file; throws Error(InvalidConfig) when it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace mcv
