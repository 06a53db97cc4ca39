#include "fedasm/serialization.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

namespace fedasm {

using Json = nlohmann::ordered_json;

ParseError::ParseError(std::string location, const std::string& message)
    : std::runtime_error(location + ": " + message), location_(std::move(location)) {}

namespace {

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  }
}

std::string child(const std::string& ptr, const std::string& key) {
  std::string escaped;
  for (char ch : key) {
    if (ch == '~') escaped += "~0";
    else if (ch == '/') escaped += "~1";
    else escaped += ch;
  }
  return ptr + "/" + escaped;
}

std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const Json& object(const Json& j, const std::string& ptr, std::initializer_list<const char*> allowed,
                   std::initializer_list<const char*> required) {
  if (!j.is_object()) throw ParseError(ptr.empty() ? "/" : ptr, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ParseError(child(ptr, key), "unknown field '" + key + "'");
  }
  for (const char* r : required) {
    if (!j.contains(r)) throw ParseError(child(ptr, r), std::string("missing field '") + r + "'");
  }
  return j;
}

const Json& array(const Json& j, const std::string& ptr) {
  if (!j.is_array()) throw ParseError(ptr, "expected an array");
  return j;
}

std::string string_value(const Json& j, const std::string& ptr) {
  if (!j.is_string()) throw ParseError(ptr, "expected a string");
  return j.get<std::string>();
}

std::int64_t integer_value(const Json& j, const std::string& ptr) {
  if (j.is_number_unsigned()) {
    const auto v = j.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw ParseError(ptr, "integer out of range");
    }
    return static_cast<std::int64_t>(v);
  }
  if (!j.is_number_integer()) throw ParseError(ptr, "expected an integer");
  return j.get<std::int64_t>();
}

NodeId node_key(const std::string& key, const std::string& ptr, const Instance& inst) {
  auto v = inst.find(key);
  if (!v) throw ParseError(ptr, "unknown node '" + key + "'");
  return *v;
}

ClassId class_value(const Json& j, const std::string& ptr, const Instance& inst) {
  const std::int64_t c = integer_value(j, ptr);
  if (c < 0 || static_cast<std::size_t>(c) >= inst.num_classes()) {
    throw ParseError(ptr, "class index out of range");
  }
  return class_id(static_cast<std::size_t>(c));
}

std::int64_t assembly_size(const Json& root, const std::string& ptr) {
  const std::int64_t n = integer_value(root.at("n"), child(ptr, "n"));
  if (n < 1) throw ParseError(child(ptr, "n"), "assembly size must be positive");
  return n;
}

std::string format_weight(double w) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, w);
  return std::string(buf, res.ptr);
}

double parse_weight(const Json& j, const std::string& ptr) {
  const std::string s = string_value(j, ptr);
  double w = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), w);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(ptr, "malformed decimal weight '" + s + "'");
  }
  if (!(w >= 0)) throw ParseError(ptr, "weight must be nonnegative");
  return w;
}

}  // namespace

InstanceSpec parse_instance_spec(std::string_view text) {
  const Json root = parse_json(text);
  object(root, "", {"nodes", "edges", "classes"}, {"nodes", "edges", "classes"});
  InstanceSpec spec;
  const auto& nodes = array(root["nodes"], "/nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string ptr = child("/nodes", i);
    object(nodes[i], ptr, {"id"}, {"id"});
    spec.nodes.push_back(string_value(nodes[i]["id"], child(ptr, "id")));
  }
  const auto& edges = array(root["edges"], "/edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string ptr = child("/edges", i);
    const auto& e = array(edges[i], ptr);
    if (e.size() != 2) throw ParseError(ptr, "edge must be a [parent, child] pair");
    spec.edges.emplace_back(string_value(e[0], child(ptr, 0)), string_value(e[1], child(ptr, 1)));
  }
  const auto& classes = array(root["classes"], "/classes");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string ptr = child("/classes", i);
    object(classes[i], ptr, {"leaves", "size"}, {"leaves", "size"});
    InstanceSpec::ClassSpec cls;
    const auto& leaves = array(classes[i]["leaves"], child(ptr, "leaves"));
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      cls.leaves.push_back(string_value(leaves[k], child(child(ptr, "leaves"), k)));
    }
    cls.size = integer_value(classes[i]["size"], child(ptr, "size"));
    spec.classes.push_back(std::move(cls));
  }
  return spec;
}

Instance parse_instance(std::string_view text) { return Instance::build(parse_instance_spec(text)); }

std::string serialize_instance(const InstanceSpec& spec) {
  Json root;
  root["nodes"] = Json::array();
  for (const auto& v : spec.nodes) root["nodes"].push_back({{"id", v}});
  root["edges"] = Json::array();
  for (const auto& [p, c] : spec.edges) root["edges"].push_back({p, c});
  root["classes"] = Json::array();
  for (const auto& cls : spec.classes) {
    root["classes"].push_back({{"leaves", cls.leaves}, {"size", cls.size}});
  }
  return root.dump(2) + "\n";
}

std::string serialize_instance(const Instance& instance) { return serialize_instance(instance.spec()); }

AssemblyAssignment parse_assignment(std::string_view text, const Instance& inst) {
  const Json root = parse_json(text);
  object(root, "", {"n", "assemblies"}, {"n", "assemblies"});
  AssemblyAssignment a;
  a.n = assembly_size(root, "");
  a.assemblies.assign(inst.num_nodes(), {});
  const auto& assemblies = root["assemblies"];
  if (!assemblies.is_object()) throw ParseError("/assemblies", "expected an object");
  for (const auto& [key, members] : assemblies.items()) {
    const std::string ptr = child("/assemblies", key);
    const NodeId v = node_key(key, ptr, inst);
    array(members, ptr);
    for (std::size_t i = 0; i < members.size(); ++i) {
      const std::string mptr = child(ptr, i);
      const auto& m = array(members[i], mptr);
      if (m.size() != 2) throw ParseError(mptr, "member must be a [classIndex, memberIndex] pair");
      const ClassId c = class_value(m[0], child(mptr, 0), inst);
      const std::int64_t index = integer_value(m[1], child(mptr, 1));
      if (index < 0 || index >= inst.class_size(c)) {
        throw ParseError(child(mptr, 1), "member index out of range for its class");
      }
      a.assemblies[idx(v)].push_back({c, index});
    }
  }
  return a;
}

std::string serialize_assignment(const Instance& inst, const AssemblyAssignment& a) {
  Json root;
  root["n"] = a.n;
  root["assemblies"] = Json::object();
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    Json members = Json::array();
    if (v < a.assemblies.size()) {
      for (const Member& m : a.assemblies[v]) members.push_back({idx(m.cls), m.index});
    }
    root["assemblies"][inst.name(node_id(v))] = std::move(members);
  }
  return root.dump() + "\n";
}

RandomizedAssignment parse_randomized(std::string_view text, const Instance& inst) {
  const Json root = parse_json(text);
  object(root, "", {"n", "support"}, {"n", "support"});
  RandomizedAssignment r;
  r.n = assembly_size(root, "");
  const auto& support = array(root["support"], "/support");
  for (std::size_t s = 0; s < support.size(); ++s) {
    const std::string ptr = child("/support", s);
    object(support[s], ptr, {"weight", "counts"}, {"weight", "counts"});
    r.weights.push_back(parse_weight(support[s]["weight"], child(ptr, "weight")));
    CanonicalAssignment a;
    a.n = r.n;
    a.counts.assign(inst.num_nodes(), std::vector<std::int64_t>(inst.num_classes(), 0));
    const auto& counts = support[s]["counts"];
    const std::string cptr = child(ptr, "counts");
    if (!counts.is_object()) throw ParseError(cptr, "expected an object");
    for (const auto& [key, rows] : counts.items()) {
      const std::string nptr = child(cptr, key);
      const NodeId v = node_key(key, nptr, inst);
      array(rows, nptr);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string rptr = child(nptr, i);
        const auto& row = array(rows[i], rptr);
        if (row.size() != 2) throw ParseError(rptr, "row must be a [classIndex, count] pair");
        const ClassId c = class_value(row[0], child(rptr, 0), inst);
        const std::int64_t count = integer_value(row[1], child(rptr, 1));
        if (count < 0) throw ParseError(child(rptr, 1), "count must be nonnegative");
        a.counts[idx(v)][idx(c)] = count;
      }
    }
    r.support.push_back(std::move(a));
  }
  return r;
}

std::string serialize_randomized(const Instance& inst, const RandomizedAssignment& r) {
  Json root;
  root["n"] = r.n;
  root["support"] = Json::array();
  for (std::size_t s = 0; s < r.support.size(); ++s) {
    Json counts = Json::object();
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      Json rows = Json::array();
      for (std::size_t c = 0; c < inst.num_classes(); ++c) {
        if (r.support[s].counts[v][c] != 0) rows.push_back({c, r.support[s].counts[v][c]});
      }
      counts[inst.name(node_id(v))] = std::move(rows);
    }
    root["support"].push_back({{"weight", format_weight(r.weights[s])}, {"counts", std::move(counts)}});
  }
  return root.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace fedasm
