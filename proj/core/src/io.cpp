#include "ringcirc/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ringcirc {

using nlohmann::json;

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("parse_error", e.what());
  }
}

template <class T>
T field(const json& j, const char* name, const char* what) {
  if (!j.is_object() || !j.contains(name)) throw Error("invalid_json", std::string(what) + " lacks \"" + name + "\"");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error("invalid_json", std::string(what) + " field \"" + name + "\": " + e.what());
  }
}

Value value_of(const Domain& d, const json& j) {
  if (j.is_string()) return parse_value(d, j.get<std::string>());
  if (j.is_number_integer()) return parse_value(d, std::to_string(j.get<long long>()));
  throw Error("invalid_json", "values are strings or integers");
}

}  // namespace

// ---------------------------------------------------------------------------
// Circuits

std::string circuit_to_json(const Circuit& c) {
  json gates = json::array();
  for (const auto& g : c.gates()) {
    json jg = {{"id", g.id}, {"label", g.label}, {"kind", to_string(g.kind)}};
    if (g.kind == GateKind::input) jg["position"] = g.position;
    if (g.value) jg["value"] = to_string(*g.value);
    jg["preds"] = g.preds;
    gates.push_back(std::move(jg));
  }
  json j = {{"domain", c.domain().name()},
            {"fanin", c.fanin() == FanIn::bounded ? "bounded" : "unbounded"},
            {"label_base", c.label_base()},
            {"gates", std::move(gates)},
            {"inputs", c.inputs()},
            {"outputs", c.outputs()}};
  return j.dump(2) + "\n";
}

Circuit circuit_from_json(std::string_view text) {
  json j = parse_json(text);
  Domain d = Domain::parse(field<std::string>(j, "domain", "circuit"));
  std::string fanin_text = j.value("fanin", std::string("unbounded"));
  if (fanin_text != "bounded" && fanin_text != "unbounded")
    throw Error("invalid_json", "fanin must be \"bounded\" or \"unbounded\"");
  FanIn fanin = fanin_text == "bounded" ? FanIn::bounded : FanIn::unbounded;
  std::size_t label_base = j.value("label_base", std::size_t{0});
  const json& jgates = j.contains("gates") ? j.at("gates") : throw Error("invalid_json", "circuit lacks \"gates\"");
  if (!jgates.is_array()) throw Error("invalid_json", "\"gates\" must be an array");
  std::vector<Gate> gates;
  for (const auto& jg : jgates) {
    Gate g;
    g.id = field<GateId>(jg, "id", "gate");
    g.kind = parse_gate_kind(field<std::string>(jg, "kind", "gate"));
    if (jg.contains("label")) g.label = field<Label>(jg, "label", "gate");
    if (jg.contains("preds")) g.preds = field<std::vector<GateId>>(jg, "preds", "gate");
    if (g.kind == GateKind::input) g.position = field<std::size_t>(jg, "position", "input gate");
    if (g.kind == GateKind::constant) {
      if (!jg.contains("value")) throw Error("invalid_json", "constant gate " + std::to_string(g.id) + " lacks \"value\"");
      g.value = value_of(d, jg.at("value"));
    }
    gates.push_back(std::move(g));
  }
  Circuit c(d, fanin, std::move(gates), label_base);
  if (j.contains("inputs") && field<std::vector<GateId>>(j, "inputs", "circuit") != c.inputs())
    throw Error("invalid_circuit", "\"inputs\" disagrees with the input gates' positions");
  if (j.contains("outputs") && field<std::vector<GateId>>(j, "outputs", "circuit") != c.outputs())
    throw Error("invalid_circuit", "\"outputs\" disagrees with the output gates");
  return c;
}

// ---------------------------------------------------------------------------
// Structures

std::string structure_to_json(const Structure& s) {
  json functions = json::object();
  for (const auto& [name, r] : s.relations()) {
    json tuples = json::array();
    for (auto key : r.keys) tuples.push_back(s.unkey(key, r.arity));
    functions[name] = {{"kind", "relation"}, {"arity", r.arity}, {"tuples", std::move(tuples)}};
  }
  for (const auto& [name, f] : s.number_functions()) {
    json entries = json::array();
    for (const auto& [key, v] : f.entries) entries.push_back({{"args", s.unkey(key, f.arity)}, {"value", to_string(v)}});
    functions[name] = {
        {"kind", "number"}, {"arity", f.arity}, {"default", to_string(f.fallback)}, {"entries", std::move(entries)}};
  }
  for (const auto& [name, f] : s.skeleton_functions()) {
    json entries = json::array();
    for (const auto& [key, v] : f.entries) entries.push_back({{"args", s.unkey(key, f.arity)}, {"value", v}});
    functions[name] = {{"kind", "skeleton"}, {"arity", f.arity}, {"default", f.fallback}, {"entries", std::move(entries)}};
  }
  json j = {{"domain", s.domain().name()}, {"universe", s.universe()}, {"functions", std::move(functions)}};
  return j.dump(2) + "\n";
}

Structure structure_from_json(std::string_view text) {
  json j = parse_json(text);
  Domain d = Domain::parse(field<std::string>(j, "domain", "structure"));
  Structure s(d, field<std::size_t>(j, "universe", "structure"));
  if (!j.contains("functions")) return s;
  const json& fs = j.at("functions");
  if (!fs.is_object()) throw Error("invalid_json", "\"functions\" must be an object");
  for (const auto& [name, f] : fs.items()) {
    std::string what = "function " + name;
    auto kind = field<std::string>(f, "kind", what.c_str());
    auto arity = field<std::size_t>(f, "arity", what.c_str());
    if (kind == "relation") {
      std::vector<std::vector<std::size_t>> tuples;
      if (f.contains("tuples")) tuples = field<std::vector<std::vector<std::size_t>>>(f, "tuples", what.c_str());
      s.add_relation(name, arity, tuples);
    } else if (kind == "number") {
      std::optional<Value> fallback;
      if (f.contains("default")) fallback = value_of(d, f.at("default"));
      s.add_number_function(name, arity, fallback);
      if (f.contains("values")) {
        const json& vs = f.at("values");
        std::uint64_t count = 1;
        for (std::size_t k = 0; k < arity; ++k) count *= s.universe();
        if (!vs.is_array() || vs.size() != count)
          throw Error("invalid_json", what + ": \"values\" must list " + std::to_string(count) + " entries");
        for (std::uint64_t key = 0; key < count; ++key) s.set_number(name, s.unkey(key, arity), value_of(d, vs[key]));
      }
      if (f.contains("entries"))
        for (const auto& e : f.at("entries"))
          s.set_number(name, field<std::vector<std::size_t>>(e, "args", what.c_str()), value_of(d, e.at("value")));
    } else if (kind == "skeleton") {
      s.add_skeleton_function(name, arity, f.value("default", std::size_t{0}));
      if (f.contains("entries"))
        for (const auto& e : f.at("entries"))
          s.set_skeleton(name, field<std::vector<std::size_t>>(e, "args", what.c_str()),
                         field<std::size_t>(e, "value", what.c_str()));
    } else {
      throw Error("invalid_json", what + ": unknown kind \"" + kind + "\"");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// DOT

namespace {

const char* shape(GateKind k) {
  switch (k) {
    case GateKind::input: return "invtriangle";
    case GateKind::constant: return "box";
    case GateKind::add: return "circle";
    case GateKind::mul: return "doublecircle";
    case GateKind::less: return "diamond";
    case GateKind::output: return "triangle";
  }
  return "ellipse";
}

std::string symbol(const Gate& g) {
  switch (g.kind) {
    case GateKind::input: return "x" + std::to_string(g.position);
    case GateKind::constant: return to_string(*g.value);
    case GateKind::add: return "+";
    case GateKind::mul: return "*";
    case GateKind::less: return "<";
    case GateKind::output: return "out";
  }
  return "?";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

}  // namespace

std::string circuit_to_dot(const Circuit& c) {
  std::ostringstream os;
  os << "digraph circuit {\n  rankdir=BT;\n  label=\"" << escape(c.domain().name()) << "\";\n";
  for (const auto& g : c.gates()) {
    std::string text = symbol(g);
    if (!g.label.empty()) {
      text += "\\n";
      for (std::size_t k = 0; k < g.label.size(); ++k) text += (k ? "." : "") + std::to_string(g.label[k]);
    }
    os << "  g" << g.id << " [shape=" << shape(g.kind) << ", label=\"" << escape(text) << "\"];\n";
  }
  for (const auto& g : c.gates())
    for (std::size_t k = 0; k < g.preds.size(); ++k) {
      os << "  g" << g.preds[k] << " -> g" << g.id;
      if (g.kind == GateKind::less) os << " [label=\"" << (k == 0 ? "L" : "R") << "\"]";
      os << ";\n";
    }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path);
  out << content;
  if (!out) throw Error("io", "write failed for " + path);
}

}  // namespace ringcirc
