#include <deflab/error.hpp>
#include <deflab/tree_io.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace deflab {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ParseError(field + ": " + what);
}

Rational rational_field(const Json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a rational string \"p/q\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const ParseError& e) {
    fail(field, e.what());
  }
}

int integer_field(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

NodeId node_key(const std::string& key, const std::string& field, const EventTree& tree) {
  if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      (key.size() > 1 && key[0] == '0') || key.size() > 9) {
    fail(field, "key \"" + key + "\" is not a node id");
  }
  const int id = std::stoi(key);
  if (static_cast<std::size_t>(id) >= tree.size()) fail(field, "node id " + key + " does not exist");
  return id;
}

RationalVector rational_array(const Json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of rational strings");
  RationalVector out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(rational_field(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Json rational_array_json(const RationalVector& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(format_rational(x));
  return a;
}

std::vector<RationalVector> node_table(const Json& j, const std::string& field, const EventTree& tree,
                                       std::size_t expected, int& dim) {
  if (!j.is_object()) fail(field, "expected an object keyed by node id");
  std::vector<std::optional<RationalVector>> slots(expected);
  dim = -1;
  for (const auto& [key, value] : j.items()) {
    const std::string sub = field + "[\"" + key + "\"]";
    const NodeId v = node_key(key, sub, tree);
    if (static_cast<std::size_t>(v) >= expected) fail(sub, "node is not part of this table's domain");
    RationalVector row = rational_array(value, sub);
    if (row.empty()) fail(sub, "empty value");
    if (dim < 0) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim) fail(sub, "inconsistent dimension");
    slots[static_cast<std::size_t>(v)] = std::move(row);
  }
  std::vector<RationalVector> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    if (!slots[i]) fail(field, "missing node " + std::to_string(i));
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

Json node_table_json(const std::vector<RationalVector>& rows) {
  Json o = Json::object();
  for (std::size_t i = 0; i < rows.size(); ++i) o[std::to_string(i)] = rational_array_json(rows[i]);
  return o;
}

}  // namespace

const AdaptedProcess& TreeFile::process(const std::string& name) const {
  for (const auto& [n, p] : processes) {
    if (n == name) return p;
  }
  throw ValidationError("tree file has no process named \"" + name + "\"");
}

const Strategy& TreeFile::strategy(const std::string& name) const {
  for (const auto& [n, s] : strategies) {
    if (n == name) return s;
  }
  throw ValidationError("tree file has no strategy named \"" + name + "\"");
}

const ProbMeasure& TreeFile::measure() const {
  if (!P) throw ValidationError("tree file has no measure P");
  return *P;
}

void TreeFile::set_process(const std::string& name, AdaptedProcess value) {
  for (auto& [n, p] : processes) {
    if (n == name) {
      p = std::move(value);
      return;
    }
  }
  processes.emplace_back(name, std::move(value));
}

void TreeFile::set_strategy(const std::string& name, Strategy value) {
  for (auto& [n, s] : strategies) {
    if (n == name) {
      s = std::move(value);
      return;
    }
  }
  strategies.emplace_back(name, std::move(value));
}

TreeFile parse_tree_file(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("tree file: top level must be an object");
  static const std::set<std::string> known{"horizon", "asset_dim", "nodes", "P", "processes", "strategies"};
  for (const auto& [key, value] : root.items()) {
    if (!known.count(key)) fail(key, "unknown field");
  }
  for (const char* required : {"horizon", "asset_dim", "nodes"}) {
    if (!root.contains(required)) fail(required, "missing required field");
  }

  const int horizon = integer_field(root["horizon"], "horizon");
  const int asset_dim = integer_field(root["asset_dim"], "asset_dim");
  const Json& nodes = root["nodes"];
  if (!nodes.is_array()) fail("nodes", "expected an array");
  std::vector<NodeRecord> records;
  records.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string field = "nodes[" + std::to_string(i) + "]";
    const Json& n = nodes[i];
    if (!n.is_object()) fail(field, "expected an object");
    for (const auto& [key, value] : n.items()) {
      if (key != "id" && key != "time" && key != "parent" && key != "children") fail(field + "." + key, "unknown field");
    }
    if (!n.contains("id")) fail(field + ".id", "missing");
    if (!n.contains("time")) fail(field + ".time", "missing");
    if (!n.contains("parent")) fail(field + ".parent", "missing (use null for the root)");
    NodeRecord r;
    r.id = integer_field(n["id"], field + ".id");
    r.time = integer_field(n["time"], field + ".time");
    if (!n["parent"].is_null()) r.parent = integer_field(n["parent"], field + ".parent");
    records.push_back(r);
  }

  TreeFile file{[&] {
    try {
      return EventTree(asset_dim, records);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(std::string("nodes: ") + e.what());
    }
  }(), std::nullopt, {}, {}};
  const EventTree& tree = file.tree;
  if (tree.horizon() != horizon) fail("horizon", "does not match the deepest node time");

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].contains("children")) continue;
    const std::string field = "nodes[" + std::to_string(i) + "].children";
    const Json& c = nodes[i]["children"];
    if (!c.is_array()) fail(field, "expected an array");
    const auto expected = tree.children(static_cast<NodeId>(i));
    if (c.size() != expected.size()) fail(field, "does not match the parent links");
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (integer_field(c[k], field) != expected[k]) fail(field, "does not match the parent links");
    }
  }

  if (root.contains("P")) {
    const Json& pj = root["P"];
    if (!pj.is_object()) fail("P", "expected an object keyed by leaf id");
    std::vector<std::optional<Rational>> masses(tree.leaf_count());
    for (const auto& [key, value] : pj.items()) {
      const std::string field = "P[\"" + key + "\"]";
      const NodeId v = node_key(key, field, tree);
      if (!tree.is_leaf(v)) fail(field, "node " + key + " is not a leaf");
      masses[tree.leaf_index(v)] = rational_field(value, field);
    }
    RationalVector leaf_mass;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      if (!masses[i]) fail("P", "missing leaf " + std::to_string(tree.first_leaf() + static_cast<NodeId>(i)));
      leaf_mass.push_back(*masses[i]);
    }
    try {
      file.P.emplace(tree, std::move(leaf_mass));
    } catch (const ValidationError& e) {
      throw ParseError(std::string("P: ") + e.what());
    }
  }

  if (root.contains("processes")) {
    const Json& pj = root["processes"];
    if (!pj.is_object()) fail("processes", "expected an object");
    for (const auto& [name, table] : pj.items()) {
      int dim = 0;
      auto values = node_table(table, "processes[\"" + name + "\"]", tree, tree.size(), dim);
      file.processes.emplace_back(name, AdaptedProcess(tree, dim, std::move(values)));
    }
  }
  if (root.contains("strategies")) {
    const Json& sj = root["strategies"];
    if (!sj.is_object()) fail("strategies", "expected an object");
    for (const auto& [name, table] : sj.items()) {
      int dim = 0;
      auto values = node_table(table, "strategies[\"" + name + "\"]", tree, tree.decision_count(), dim);
      file.strategies.emplace_back(name, Strategy(tree, dim, std::move(values)));
    }
  }
  return file;
}

std::string serialize_tree_file(const TreeFile& file) {
  const EventTree& tree = file.tree;
  Json root = Json::object();
  root["horizon"] = tree.horizon();
  root["asset_dim"] = tree.asset_dim();
  Json nodes = Json::array();
  for (const auto& r : tree.records()) {
    Json n = Json::object();
    n["id"] = r.id;
    n["time"] = r.time;
    n["parent"] = r.parent ? Json(*r.parent) : Json(nullptr);
    nodes.push_back(std::move(n));
  }
  root["nodes"] = std::move(nodes);
  if (file.P) {
    Json pj = Json::object();
    for (NodeId v : tree.leaves()) pj[std::to_string(v)] = format_rational(file.P->atom_mass(v));
    root["P"] = std::move(pj);
  }
  Json procs = Json::object();
  for (const auto& [name, p] : file.processes) procs[name] = node_table_json(p.values());
  root["processes"] = std::move(procs);
  Json strats = Json::object();
  for (const auto& [name, s] : file.strategies) strats[name] = node_table_json(s.steps());
  root["strategies"] = std::move(strats);
  return root.dump(2) + "\n";
}

std::vector<std::string> parse_label_map(std::string_view text, const EventTree& tree) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("label map: expected an object {leaf_id: \"label\"}");
  std::vector<std::optional<std::string>> slots(tree.leaf_count());
  for (const auto& [key, value] : root.items()) {
    const std::string field = "labels[\"" + key + "\"]";
    const NodeId v = node_key(key, field, tree);
    if (!tree.is_leaf(v)) fail(field, "node " + key + " is not a leaf");
    if (!value.is_string()) fail(field, "expected a string label");
    slots[tree.leaf_index(v)] = value.get<std::string>();
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) fail("labels", "missing leaf " + std::to_string(tree.first_leaf() + static_cast<NodeId>(i)));
    labels.push_back(*slots[i]);
  }
  return labels;
}

std::string serialize_label_map(const EventTree& tree, const std::vector<std::string>& labels) {
  if (labels.size() != tree.leaf_count()) throw ValidationError("label map needs one label per leaf");
  Json root = Json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    root[std::to_string(tree.first_leaf() + static_cast<NodeId>(i))] = labels[i];
  }
  return root.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path);
  return ss.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw IoError("error writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move " + tmp + " to " + path);
  }
}

}  // namespace deflab
