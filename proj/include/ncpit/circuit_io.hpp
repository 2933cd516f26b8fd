#pragma once

#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "ncpit/circuit.hpp"

namespace ncpit {

using json = nlohmann::json;

inline const char* kind_name(GateKind k) {
  switch (k) {
    case GateKind::Input: return "input";
    case GateKind::Const: return "const";
    case GateKind::Plus: return "plus";
    case GateKind::Times: return "times";
  }
  return "?";
}

// One gate per line so parse errors can point at a line.
inline std::string circuit_to_json(const Circuit& c) {
  std::ostringstream os;
  os << "{\"vars\":" << json(c.vars.names()).dump() << ",\n\"gates\":[\n";
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    json j;
    j["id"] = g.id;
    j["kind"] = kind_name(g.kind);
    if (g.kind == GateKind::Input) j["var"] = c.vars.name(g.var);
    if (g.kind == GateKind::Const) j["value"] = g.value;
    if (g.kind == GateKind::Plus || g.kind == GateKind::Times) {
      json args = json::array();
      for (const auto& a : g.args) {
        json x;
        x["gate"] = c.gates[static_cast<std::size_t>(a.gate)].id;
        if (g.kind == GateKind::Plus && a.scale != 1) x["scale"] = a.scale;
        args.push_back(x);
      }
      j["args"] = args;
    }
    os << j.dump() << (i + 1 < c.gates.size() ? ",\n" : "\n");
  }
  os << "],\n\"output\":" << c.gates[static_cast<std::size_t>(c.output)].id;
  if (!c.layer.empty()) {
    json l = json::object();
    for (const auto& [g, v] : c.layer) l[std::to_string(c.gates[static_cast<std::size_t>(g)].id)] = v;
    os << ",\n\"layers\":" << l.dump();
  }
  if (!c.degrees.empty()) os << ",\n\"degrees\":" << json(c.degrees).dump();
  if (c.declared_size > 0) os << ",\n\"size\":" << c.declared_size;
  os << "}\n";
  return os.str();
}

inline Circuit circuit_from_json(const std::string& text, Field f = Field()) {
  auto line_of_offset = [&](std::size_t off) {
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(std::min(off, text.size())), '\n'));
  };
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, "line " + std::to_string(line_of_offset(e.byte)) + ": malformed JSON");
  }
  std::vector<int> gate_line;
  {
    std::regex re("\"id\"\\s*:");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it)
      gate_line.push_back(line_of_offset(static_cast<std::size_t>(it->position())));
  }
  auto fail = [&](std::size_t gate_pos, const std::string& m) -> Error {
    int line = gate_pos < gate_line.size() ? gate_line[gate_pos] : 0;
    return Error(Errc::ParseError, "line " + std::to_string(line) + ": " + m);
  };

  if (!doc.is_object() || !doc.contains("vars") || !doc.contains("gates") || !doc.contains("output"))
    throw Error(Errc::ParseError, "line 1: expected object with vars, gates, output");
  std::vector<std::string> names;
  for (const auto& v : doc["vars"]) {
    if (!v.is_string()) throw Error(Errc::ParseError, "line 1: variable names must be strings");
    names.push_back(v.get<std::string>());
  }
  VarSet vars(names);
  const json& gates = doc["gates"];
  if (!gates.is_array()) throw Error(Errc::ParseError, "line 1: gates must be an array");

  auto field_value = [&](const json& v, std::size_t pos) -> u64 {
    if (v.is_number_unsigned()) return f.reduce(v.get<u64>());
    if (v.is_number_integer()) return f.from_int(v.get<long long>());
    throw fail(pos, "scalar must be an integer");
  };

  struct Raw {
    Gate g;
    std::vector<int> arg_ids;
  };
  std::vector<Raw> raw;
  std::map<int, std::size_t> by_id;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const json& j = gates[i];
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) throw fail(i, "gate without integer id");
    Raw r;
    r.g.id = j["id"].get<int>();
    if (!by_id.emplace(r.g.id, i).second) throw fail(i, "duplicate gate id " + std::to_string(r.g.id));
    std::string kind = j.value("kind", "");
    if (kind == "input") {
      r.g.kind = GateKind::Input;
      std::string v = j.value("var", "");
      r.g.var = vars.index(v);
      if (r.g.var < 0) throw fail(i, "unknown variable '" + v + "'");
    } else if (kind == "const") {
      r.g.kind = GateKind::Const;
      if (!j.contains("value")) throw fail(i, "const gate without value");
      r.g.value = field_value(j["value"], i);
    } else if (kind == "plus" || kind == "times") {
      r.g.kind = kind == "plus" ? GateKind::Plus : GateKind::Times;
      if (!j.contains("args") || !j["args"].is_array()) throw fail(i, kind + " gate without args");
      for (const auto& a : j["args"]) {
        if (!a.is_object() || !a.contains("gate") || !a["gate"].is_number_integer()) throw fail(i, "argument without gate id");
        r.arg_ids.push_back(a["gate"].get<int>());
        r.g.args.push_back({-1, a.contains("scale") ? field_value(a["scale"], i) : 1});
      }
      if (r.g.kind == GateKind::Times && r.g.args.size() != 2) throw fail(i, "times gate needs exactly 2 args");
      if (r.g.kind == GateKind::Plus && r.g.args.empty()) throw fail(i, "plus gate needs at least 1 arg");
    } else {
      throw fail(i, "unknown gate kind '" + kind + "'");
    }
    raw.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (int a : raw[i].arg_ids)
      if (!by_id.count(a)) throw fail(i, "reference to unknown gate " + std::to_string(a));

  // Kahn topological sort, smallest file position first so sorted input keeps its order
  std::vector<int> indeg(raw.size(), 0);
  std::vector<std::vector<std::size_t>> users(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (int a : raw[i].arg_ids) {
      ++indeg[i];
      users[by_id[a]].push_back(i);
    }
  std::vector<std::size_t> order;
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (indeg[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    std::size_t k = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(k);
    for (std::size_t u : users[k])
      if (--indeg[u] == 0) ready.insert(u);
  }
  if (order.size() != raw.size()) {
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (indeg[i] > 0) throw fail(i, "cycle through gate " + std::to_string(raw[i].g.id));
  }

  Circuit c(f, vars);
  std::map<int, int> pos_of_id;
  for (std::size_t i : order) {
    Gate g = raw[i].g;
    for (std::size_t k = 0; k < g.args.size(); ++k) g.args[k].gate = pos_of_id.at(raw[i].arg_ids[k]);
    pos_of_id[g.id] = static_cast<int>(c.gates.size());
    c.gates.push_back(std::move(g));
  }
  if (!doc["output"].is_number_integer() || !pos_of_id.count(doc["output"].get<int>()))
    throw Error(Errc::ParseError, "output refers to an unknown gate");
  c.output = pos_of_id[doc["output"].get<int>()];
  if (doc.contains("layers")) {
    for (const auto& [k, v] : doc["layers"].items()) {
      int id = std::stoi(k);
      if (!pos_of_id.count(id) || !v.is_number_integer()) throw Error(Errc::ParseError, "bad layer entry for gate " + k);
      c.layer[pos_of_id[id]] = v.get<int>();
    }
  }
  if (doc.contains("degrees"))
    for (const auto& d : doc["degrees"]) c.degrees.push_back(d.get<int>());
  if (doc.contains("size")) c.declared_size = doc["size"].get<int>();
  return c;
}

inline Circuit load_circuit(const std::string& path, Field f = Field()) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return circuit_from_json(ss.str(), f);
}

}  // namespace ncpit
