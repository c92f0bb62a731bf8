#include "mcv/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mcv/error.hpp"

namespace mcv {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(what + ": malformed JSON (" + e.what() + ")");
  }
}

Real to_real(const json& v, const std::string& field) {
  try {
    if (v.is_string()) return Real::parse(v.get<std::string>());
    if (v.is_number_integer()) return Real(v.get<long>());
    if (v.is_number_float()) {
      // Round-trip through the shortest decimal form so 0.1 stays exact.
      return Real::parse(v.dump());
    }
  } catch (const std::invalid_argument&) {
  }
  invalid("field '" + field + "' is not a number");
}

std::vector<Real> to_reals(const json& v, const std::string& field) {
  if (!v.is_array()) return {to_real(v, field)};
  std::vector<Real> out;
  for (const auto& x : v) out.push_back(to_real(x, field));
  return out;
}

int to_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) invalid("field '" + field + "' must be an integer");
  return v.get<int>();
}

std::string to_str(const json& v, const std::string& field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long>());
  invalid("field '" + field + "' must be a string");
}

const json& require(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key)) invalid(ctx + ": missing field '" + key + "'");
  return obj.at(key);
}

void read_g_blocks(const json& doc, TreeConfig& cfg) {
  if (!doc.contains("g_partition")) return;
  for (const auto& blk : doc.at("g_partition")) {
    std::vector<std::string> ids;
    for (const auto& id : blk) ids.push_back(to_str(id, "g_partition"));
    cfg.g_blocks.push_back(std::move(ids));
  }
}

TreeConfig product_config(const json& p) {
  ProductTreeSpec spec;
  if (p.contains("s0")) spec.s0 = to_reals(p.at("s0"), "s0");
  if (p.contains("y0")) spec.y0 = to_real(p.at("y0"), "y0");
  if (p.contains("bond_rate")) spec.bond_rate = to_real(p.at("bond_rate"), "bond_rate");
  for (const auto& st : require(p, "steps", "product")) {
    ProductStep step;
    if (st.contains("financial")) {
      for (const auto& f : st.at("financial")) {
        step.financial.push_back({to_reals(require(f, "factor", "financial move"), "factor"), to_real(require(f, "prob", "financial move"), "prob")});
      }
    }
    if (st.contains("insurance")) {
      for (const auto& y : st.at("insurance")) {
        step.insurance.push_back(
            {to_real(require(y, "increment", "insurance move"), "increment"), to_real(require(y, "prob", "insurance move"), "prob")});
      }
    }
    spec.steps.push_back(std::move(step));
  }
  return product_tree_config(spec);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t\r");
    const auto e = item.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

Real parse_cell(const std::string& cell, const std::string& what) {
  try {
    return Real::parse(cell);
  } catch (const std::invalid_argument&) {
    invalid(what + ": '" + cell + "' is not a number");
  }
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    rows.push_back(split(line, ','));
  }
  return rows;
}

int leaf_of(const std::string& key, const ScenarioTree& tree) {
  if (auto idx = tree.leaf_index(key)) return *idx;
  if (!key.empty() && key.find_first_not_of("0123456789") == std::string::npos) {
    const int i = std::stoi(key);
    if (i < tree.num_leaves()) return i;
  }
  invalid("payoff: unknown leaf '" + key + "'");
}

Payoff formula_payoff(const json& f, const ScenarioTree& tree) {
  const std::string kind = to_str(require(f, "kind", "formula"), "kind");
  const int t = tree.horizon();
  const int n = tree.num_leaves();
  std::vector<Real> v(static_cast<size_t>(n));
  auto stock_index = [&]() {
    const int i = f.contains("stock_index") ? to_int(f.at("stock_index"), "stock_index") : 0;
    if (i < 0 || i >= tree.num_stocks()) invalid("formula: stock_index out of range");
    return i;
  };
  if (kind == "linear") {
    const std::vector<Real> cs = f.contains("stock") ? to_reals(f.at("stock"), "stock") : std::vector<Real>{};
    if (cs.size() > static_cast<size_t>(tree.num_stocks())) invalid("formula: too many stock coefficients");
    const Real ci = f.contains("insurance") ? to_real(f.at("insurance"), "insurance") : Real(0);
    const Real c0 = f.contains("constant") ? to_real(f.at("constant"), "constant") : Real(0);
    for (int leaf = 0; leaf < n; ++leaf) {
      Real x = c0 + ci * tree.insurance(leaf, t);
      for (size_t i = 0; i < cs.size(); ++i) x += cs[i] * tree.stock(leaf, t)[i];
      v[static_cast<size_t>(leaf)] = x;
    }
  } else if (kind == "call" || kind == "equity-linked") {
    const int i = stock_index();
    const Real k = to_real(require(f, "strike", "formula"), "strike");
    for (int leaf = 0; leaf < n; ++leaf) {
      const Real& s = tree.stock(leaf, t)[static_cast<size_t>(i)];
      v[static_cast<size_t>(leaf)] = kind == "call" ? max(s - k, Real(0)) : max(s, k) * tree.insurance(leaf, t);
    }
  } else {
    invalid("formula: unknown kind '" + kind + "'");
  }
  return Payoff(std::move(v));
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TreeConfig parse_tree_config(const std::string& json_text) {
  const json doc = parse_json(json_text, "tree");
  if (!doc.is_object()) invalid("tree: expected a JSON object");
  TreeConfig cfg;
  try {
    if (doc.contains("product")) {
      cfg = product_config(doc.at("product"));
    } else {
      if (doc.contains("horizon")) cfg.horizon = to_int(doc.at("horizon"), "horizon");
      if (doc.contains("bond_rate")) cfg.bond_rate = to_real(doc.at("bond_rate"), "bond_rate");
      if (doc.contains("reveal_times")) {
        for (const auto& t : doc.at("reveal_times")) cfg.reveal_times.push_back(to_int(t, "reveal_times"));
      }
      for (const auto& nd : require(doc, "nodes", "tree")) {
        NodeConfig nc;
        nc.id = to_str(require(nd, "id", "node"), "id");
        if (nd.contains("parent") && !nd.at("parent").is_null()) nc.parent = to_str(nd.at("parent"), "parent");
        if (nd.contains("stock")) nc.stock = to_reals(nd.at("stock"), "stock");
        if (nd.contains("insurance")) nc.insurance = to_real(nd.at("insurance"), "insurance");
        if (nd.contains("prob")) nc.prob = to_real(nd.at("prob"), "prob");
        cfg.nodes.push_back(std::move(nc));
      }
      if (doc.contains("leaf_prob")) {
        for (const auto& [id, p] : doc.at("leaf_prob").items()) cfg.leaf_prob[id] = to_real(p, "leaf_prob");
      }
    }
  } catch (const json::exception& e) {
    invalid(std::string("tree: ") + e.what());
  }
  read_g_blocks(doc, cfg);
  return cfg;
}

TreeConfig load_tree_config(const std::string& path) { return parse_tree_config(read_text_file(path)); }

PrincipleSpec parse_principle(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') return PrincipleSpec::parse(text);
  const json doc = parse_json(text, "principle");
  std::string spec = to_str(require(doc, "kind", "principle"), "kind");
  if (doc.contains("params")) {
    std::string params;
    for (const auto& [k, v] : doc.at("params").items()) {
      params += (params.empty() ? "" : ",") + k + "=" + to_real(v, k).str();
    }
    if (!params.empty()) spec += ":" + params;
  }
  return PrincipleSpec::parse(spec);
}

Payoff parse_payoff(const std::string& text, const ScenarioTree& tree) {
  const int n = tree.num_leaves();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const json doc = parse_json(text, "payoff");
    try {
      if (doc.contains("formula")) return formula_payoff(doc.at("formula"), tree);
      if (doc.contains("values")) {
        std::vector<Real> v = to_reals(doc.at("values"), "values");
        if (static_cast<int>(v.size()) != n) invalid("payoff: expected " + std::to_string(n) + " values");
        return Payoff(std::move(v));
      }
      if (doc.contains("by_leaf")) {
        std::vector<std::optional<Real>> v(static_cast<size_t>(n));
        for (const auto& [id, x] : doc.at("by_leaf").items()) v[static_cast<size_t>(leaf_of(id, tree))] = to_real(x, id);
        std::vector<Real> out;
        for (int i = 0; i < n; ++i) {
          if (!v[static_cast<size_t>(i)]) invalid("payoff: no value for leaf " + std::to_string(i));
          out.push_back(*v[static_cast<size_t>(i)]);
        }
        return Payoff(std::move(out));
      }
    } catch (const json::exception& e) {
      invalid(std::string("payoff: ") + e.what());
    }
    invalid("payoff: expected 'values', 'by_leaf' or 'formula'");
  }
  const auto rows = csv_rows(text);
  if (rows.empty() || rows.front().size() != 2 || rows.front()[0] != "leaf" || rows.front()[1] != "value") {
    invalid("payoff: CSV must start with the header leaf,value");
  }
  std::vector<std::optional<Real>> v(static_cast<size_t>(n));
  for (size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) invalid("payoff: row " + std::to_string(r) + " needs two columns");
    auto& slot = v[static_cast<size_t>(leaf_of(rows[r][0], tree))];
    if (slot) invalid("payoff: leaf '" + rows[r][0] + "' given twice");
    slot = parse_cell(rows[r][1], "payoff");
  }
  std::vector<Real> out;
  for (int i = 0; i < n; ++i) {
    if (!v[static_cast<size_t>(i)]) invalid("payoff: no value for leaf " + std::to_string(i));
    out.push_back(*v[static_cast<size_t>(i)]);
  }
  return Payoff(std::move(out));
}

Payoff load_payoff(const std::string& path, const ScenarioTree& tree) { return parse_payoff(read_text_file(path), tree); }

GridModel parse_grid_model(const std::string& json_text) {
  const json doc = parse_json(json_text, "grid model");
  if (!doc.is_object()) invalid("grid model: expected a JSON object");
  GridModel m;
  try {
    if (doc.contains("steps")) m.steps = to_int(doc.at("steps"), "steps");
    if (doc.contains("h")) m.h = to_real(doc.at("h"), "h");
    if (doc.contains("s0")) m.s0 = to_real(doc.at("s0"), "s0");
    if (doc.contains("mu")) m.mu = to_real(doc.at("mu"), "mu");
    if (doc.contains("sigma")) m.sigma = to_real(doc.at("sigma"), "sigma");
    if (doc.contains("r")) m.r = to_real(doc.at("r"), "r");
    if (doc.contains("y0")) m.y0 = to_real(doc.at("y0"), "y0");
    if (doc.contains("insurance_brownians")) m.insurance_brownians = to_int(doc.at("insurance_brownians"), "insurance_brownians");
    if (doc.contains("marks")) {
      for (const auto& mk : doc.at("marks")) {
        m.marks.push_back({to_real(require(mk, "x", "mark"), "x"), to_real(require(mk, "nu", "mark"), "nu")});
      }
    }
  } catch (const json::exception& e) {
    invalid(std::string("grid model: ") + e.what());
  }
  try {
    m.validate();
  } catch (const Error& e) {
    invalid(std::string("grid model: ") + e.what());
  }
  return m;
}

GridModel load_grid_model(const std::string& path) { return parse_grid_model(read_text_file(path)); }

std::vector<DriverSample> parse_driver_table(const std::string& csv_text, const GridModel& model) {
  const auto rows = csv_rows(csv_text);
  const size_t k = static_cast<size_t>(model.insurance_brownians);
  const size_t mk = model.marks.size();
  std::vector<std::string> header{"t", "zf"};
  for (size_t i = 1; i <= k; ++i) header.push_back("z" + std::to_string(i));
  for (size_t i = 1; i <= mk; ++i) header.push_back("zt" + std::to_string(i));
  header.emplace_back("g");
  if (rows.empty() || rows.front() != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    invalid("driver table: header must be " + want);
  }
  std::vector<DriverSample> out;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) invalid("driver table: row " + std::to_string(r) + " has the wrong number of columns");
    DriverSample s;
    const Real t = parse_cell(row[0], "driver table");
    if (!t.is_exact() || t.rational().get_den() != 1) invalid("driver table: t must be an integer step");
    s.t = static_cast<int>(t.rational().get_num().get_si());
    s.zf = parse_cell(row[1], "driver table");
    for (size_t i = 0; i < k; ++i) s.z.push_back(parse_cell(row[2 + i], "driver table"));
    for (size_t i = 0; i < mk; ++i) s.ztilde.push_back(parse_cell(row[2 + k + i], "driver table"));
    s.g = parse_cell(row.back(), "driver table");
    out.push_back(std::move(s));
  }
  return out;
}

CheckConfig parse_check_config(const std::string& json_text, CheckConfig base) {
  const json doc = parse_json(json_text, "check config");
  if (!doc.is_object()) invalid("check config: expected a JSON object");
  try {
    if (doc.contains("seed")) base.search.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("trials")) base.search.trials = doc.at("trials").get<long>();
    if (doc.contains("budget")) base.search.budget = doc.at("budget").get<std::uint64_t>();
    if (doc.contains("market")) base.market = doc.at("market").get<bool>();
    if (doc.contains("market_required")) base.market_required = doc.at("market_required").get<bool>();
    if (doc.contains("pnorm")) {
      const json& p = doc.at("pnorm");
      PNormBound b;
      if (p.contains("p")) b.p = to_real(p.at("p"), "p");
      b.lambda = to_reals(require(p, "lambda", "pnorm"), "lambda");
      if (p.contains("measure")) b.measure = to_reals(p.at("measure"), "measure");
      base.pnorm = b;
    }
  } catch (const json::exception& e) {
    invalid(std::string("check config: ") + e.what());
  }
  if (base.search.trials < 1) invalid("check config: trials must be positive");
  return base;
}

std::string conditional_value_csv(const ConditionalValue& v, const ScenarioTree& tree) {
  std::string out = "block_id,member_leaves,value\n";
  for (int b = 0; b < v.partition.num_blocks(); ++b) {
    std::string members;
    for (int leaf : v.partition.block(b)) members += (members.empty() ? "" : " ") + tree.node(tree.leaf_node(leaf)).label;
    out += std::to_string(b) + "," + members + "," + v.values[static_cast<size_t>(b)].str() + "\n";
  }
  return out;
}

}  // namespace mcv
