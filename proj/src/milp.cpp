#include "boundlab/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "boundlab/rng.hpp"
#include "json.hpp"

namespace boundlab {

using nlohmann::json;

void MilpInstance::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("instance: " + what); };
  if (num_vars < 0 || num_cons < 0) fail("negative dimensions");
  if (static_cast<int>(obj.size()) != num_vars) fail("obj size != num_vars");
  if (static_cast<int>(var_lb.size()) != num_vars) fail("var_lb size != num_vars");
  if (static_cast<int>(var_ub.size()) != num_vars) fail("var_ub size != num_vars");
  if (static_cast<int>(is_integer.size()) != num_vars) fail("is_integer size != num_vars");
  if (static_cast<int>(cons.size()) != num_cons) fail("cons size != num_cons");
  for (int j = 0; j < num_vars; ++j)
    if (var_lb[j] > var_ub[j]) fail("var_lb > var_ub at column " + std::to_string(j));
  for (int i = 0; i < num_cons; ++i)
    for (const auto& [j, a] : cons[i].entries) {
      if (j < 0 || j >= num_vars) fail("coefficient index out of range in row " + std::to_string(i));
      if (!std::isfinite(a)) fail("non-finite coefficient in row " + std::to_string(i));
    }
}

MilpInstance generate_set_covering(int rows, int cols, double density, uint64_t seed,
                                   int cost_range) {
  if (rows < 2 || cols < 2 || density <= 0.0 || density > 1.0 || cost_range < 1 ||
      cost_range > 100)
    throw std::invalid_argument(
        "set_covering: need rows >= 2, cols >= 2, 0 < density <= 1, cost_range in [1,100]");

  Rng rng(Rng::mix(seed, 0x5e7c01ULL));
  std::vector<std::set<int>> row_cols(rows);
  std::vector<int> col_rows(cols, 0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (rng.next_unit() < density) {
        row_cols[i].insert(j);
        ++col_rows[j];
      }
  // repair rows with < 2 covering columns
  for (int i = 0; i < rows; ++i)
    while (static_cast<int>(row_cols[i].size()) < 2) {
      int j = static_cast<int>(rng.uniform_int(0, cols - 1));
      if (row_cols[i].insert(j).second) ++col_rows[j];
    }
  // repair columns covering no row
  for (int j = 0; j < cols; ++j)
    if (col_rows[j] == 0) {
      int i = static_cast<int>(rng.uniform_int(0, rows - 1));
      row_cols[i].insert(j);
      ++col_rows[j];
    }

  MilpInstance inst;
  inst.name = "setcover_r" + std::to_string(rows) + "_c" + std::to_string(cols) + "_s" +
              std::to_string(seed);
  inst.sense = Sense::minimize;
  inst.num_vars = cols;
  inst.num_cons = rows;
  inst.obj.resize(cols);
  for (int j = 0; j < cols; ++j)
    inst.obj[j] = static_cast<double>(rng.uniform_int(1, cost_range));
  inst.var_lb.assign(cols, 0.0);
  inst.var_ub.assign(cols, 1.0);
  inst.is_integer.assign(cols, 1);
  inst.cons.resize(rows);
  for (int i = 0; i < rows; ++i) {
    ConsRow& r = inst.cons[i];
    for (int j : row_cols[i]) r.entries.emplace_back(j, 1.0);
    r.rel = Rel::ge;
    r.rhs = 1.0;
  }
  inst.seed = seed;
  return inst;
}

MilpInstance generate_combinatorial_auction(int items, int bids, uint64_t seed) {
  if (items < 1 || bids < 1)
    throw std::invalid_argument("combinatorial_auction: need items >= 1, bids >= 1");

  Rng rng(Rng::mix(seed, 0xa0c710ULL));
  std::vector<double> base_value(items);
  for (int i = 0; i < items; ++i) base_value[i] = rng.uniform(1.0, 100.0);

  MilpInstance inst;
  inst.name = "auction_i" + std::to_string(items) + "_b" + std::to_string(bids) + "_s" +
              std::to_string(seed);
  inst.sense = Sense::maximize;
  inst.num_vars = bids;
  inst.num_cons = items;
  inst.obj.resize(bids);
  inst.var_lb.assign(bids, 0.0);
  inst.var_ub.assign(bids, 1.0);
  inst.is_integer.assign(bids, 1);
  inst.cons.resize(items);
  for (int i = 0; i < items; ++i) {
    inst.cons[i].rel = Rel::le;
    inst.cons[i].rhs = 1.0;
  }
  // bundle size geometric with mean 3; price correlated with bundle value
  for (int b = 0; b < bids; ++b) {
    int size = std::min(items, rng.geometric(1.0 / 3.0));
    std::vector<int> bundle = rng.sample_without_replacement(items, size);
    std::sort(bundle.begin(), bundle.end());
    double value = 0.0;
    for (int i : bundle) {
      inst.cons[i].entries.emplace_back(b, 1.0);
      value += base_value[i];
    }
    double price = value * rng.uniform(0.9, 1.1);
    inst.obj[b] = -price;  // canonical minimization of the negated price
  }
  // keep row entries ordered by column for stable serialization
  for (auto& row : inst.cons)
    std::sort(row.entries.begin(), row.entries.end());
  inst.seed = seed;
  return inst;
}

MilpInstance generate_cap_facility_location(int customers, int facilities,
                                            double capacity_ratio, uint64_t seed) {
  if (customers < 1 || facilities < 1 || capacity_ratio <= 1.0)
    throw std::invalid_argument(
        "cap_facility_location: need customers >= 1, facilities >= 1, capacity_ratio > 1");

  Rng rng(Rng::mix(seed, 0xcf1ULL));
  std::vector<double> cx(customers), cy(customers), fx(facilities), fy(facilities);
  for (int j = 0; j < customers; ++j) {
    cx[j] = rng.next_unit();
    cy[j] = rng.next_unit();
  }
  for (int k = 0; k < facilities; ++k) {
    fx[k] = rng.next_unit();
    fy[k] = rng.next_unit();
  }
  std::vector<double> demand(customers);
  double total_demand = 0.0;
  for (int j = 0; j < customers; ++j) {
    demand[j] = static_cast<double>(rng.uniform_int(5, 35));
    total_demand += demand[j];
  }
  std::vector<double> cap_raw(facilities);
  double total_raw = 0.0;
  for (int k = 0; k < facilities; ++k) {
    cap_raw[k] = rng.uniform(10.0, 160.0);
    total_raw += cap_raw[k];
  }
  std::vector<double> capacity(facilities), open_cost(facilities);
  for (int k = 0; k < facilities; ++k) {
    capacity[k] = cap_raw[k] * capacity_ratio * total_demand / total_raw;
    open_cost[k] = static_cast<double>(rng.uniform_int(100, 200));
  }

  // variables: y_k (binary open) first, then x_{jk} (assignment fractions)
  int n = facilities + customers * facilities;
  auto xvar = [&](int j, int k) { return facilities + j * facilities + k; };

  MilpInstance inst;
  inst.name = "cfl_c" + std::to_string(customers) + "_f" + std::to_string(facilities) + "_s" +
              std::to_string(seed);
  inst.sense = Sense::minimize;
  inst.num_vars = n;
  inst.num_cons = customers + facilities;
  inst.obj.assign(n, 0.0);
  inst.var_lb.assign(n, 0.0);
  inst.var_ub.assign(n, 1.0);
  inst.is_integer.assign(n, 0);
  for (int k = 0; k < facilities; ++k) {
    inst.obj[k] = open_cost[k];
    inst.is_integer[k] = 1;
  }
  for (int j = 0; j < customers; ++j)
    for (int k = 0; k < facilities; ++k) {
      double dx = cx[j] - fx[k], dy = cy[j] - fy[k];
      inst.obj[xvar(j, k)] = 5.0 * demand[j] * std::sqrt(dx * dx + dy * dy);
    }
  inst.cons.resize(inst.num_cons);
  for (int j = 0; j < customers; ++j) {
    ConsRow& r = inst.cons[j];
    for (int k = 0; k < facilities; ++k) r.entries.emplace_back(xvar(j, k), 1.0);
    r.rel = Rel::eq;
    r.rhs = 1.0;
  }
  for (int k = 0; k < facilities; ++k) {
    ConsRow& r = inst.cons[customers + k];
    for (int j = 0; j < customers; ++j) r.entries.emplace_back(xvar(j, k), demand[j]);
    r.entries.emplace_back(k, -capacity[k]);
    std::sort(r.entries.begin(), r.entries.end());
    r.rel = Rel::le;
    r.rhs = 0.0;
  }
  inst.seed = seed;
  return inst;
}

namespace {

json number_or_tag(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double number_from(const json& j, const std::string& field) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw parse_error("field '" + field + "': unknown number tag '" + s + "'");
  }
  if (!j.is_number()) throw parse_error("field '" + field + "': expected a number");
  return j.get<double>();
}

const char* rel_name(Rel r) {
  switch (r) {
    case Rel::le: return "<=";
    case Rel::ge: return ">=";
    case Rel::eq: return "=";
  }
  return "<=";
}

Rel rel_from(const std::string& s) {
  if (s == "<=") return Rel::le;
  if (s == ">=") return Rel::ge;
  if (s == "=") return Rel::eq;
  throw parse_error("field 'rel': unknown relation '" + s + "'");
}

const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw parse_error(std::string("missing field '") + field + "'");
  return *it;
}

}  // namespace

std::string instance_to_string(const MilpInstance& inst) {
  json j;
  j["schema_version"] = 1;
  j["name"] = inst.name;
  j["sense"] = inst.sense == Sense::minimize ? "minimize" : "maximize";
  j["num_vars"] = inst.num_vars;
  j["num_cons"] = inst.num_cons;
  j["obj"] = inst.obj;
  j["var_lb"] = json::array();
  j["var_ub"] = json::array();
  for (double v : inst.var_lb) j["var_lb"].push_back(number_or_tag(v));
  for (double v : inst.var_ub) j["var_ub"].push_back(number_or_tag(v));
  j["is_integer"] = json::array();
  for (uint8_t f : inst.is_integer) j["is_integer"].push_back(f ? 1 : 0);
  j["cons"] = json::array();
  for (const ConsRow& row : inst.cons) {
    json r;
    r["entries"] = json::array();
    for (const auto& [col, a] : row.entries) r["entries"].push_back(json::array({col, a}));
    r["rel"] = rel_name(row.rel);
    r["rhs"] = row.rhs;
    j["cons"].push_back(std::move(r));
  }
  j["seed"] = inst.seed;
  return j.dump(1) + "\n";
}

MilpInstance instance_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw parse_error(std::string("instance parse failure: ") + e.what());
  }
  int version = require(j, "schema_version").get<int>();
  if (version != 1)
    throw schema_version_error("instance schema_version " + std::to_string(version) +
                               " unsupported (expected 1)");
  MilpInstance inst;
  inst.name = require(j, "name").get<std::string>();
  std::string sense = require(j, "sense").get<std::string>();
  if (sense == "minimize")
    inst.sense = Sense::minimize;
  else if (sense == "maximize")
    inst.sense = Sense::maximize;
  else
    throw parse_error("field 'sense': unknown value '" + sense + "'");
  inst.num_vars = require(j, "num_vars").get<int>();
  inst.num_cons = require(j, "num_cons").get<int>();
  for (const auto& v : require(j, "obj")) inst.obj.push_back(number_from(v, "obj"));
  for (const auto& v : require(j, "var_lb")) inst.var_lb.push_back(number_from(v, "var_lb"));
  for (const auto& v : require(j, "var_ub")) inst.var_ub.push_back(number_from(v, "var_ub"));
  for (const auto& v : require(j, "is_integer"))
    inst.is_integer.push_back(v.get<int>() ? 1 : 0);
  int line = 0;
  for (const auto& r : require(j, "cons")) {
    ConsRow row;
    for (const auto& e : require(r, "entries")) {
      if (!e.is_array() || e.size() != 2)
        throw parse_error("row " + std::to_string(line) + ": malformed entry");
      row.entries.emplace_back(e[0].get<int>(), number_from(e[1], "entries"));
    }
    row.rel = rel_from(require(r, "rel").get<std::string>());
    row.rhs = number_from(require(r, "rhs"), "rhs");
    inst.cons.push_back(std::move(row));
    ++line;
  }
  inst.seed = require(j, "seed").get<uint64_t>();
  try {
    inst.validate();
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
  return inst;
}

void write_instance(const MilpInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << instance_to_string(inst);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MilpInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return instance_from_string(buf.str());
  } catch (parse_error& e) {
    throw parse_error(path.string() + ": " + e.what());
  }
}

}  // namespace boundlab
