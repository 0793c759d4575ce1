#include "frameopt/problem_io.hpp"

#include "frameopt/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace frameopt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing field '" + key + "'");
  return *it;
}

double number(const json& obj, const std::string& key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where + "." + key, "expected a finite number");
  return d;
}

double number_or(const json& obj, const std::string& key, const std::string& where, double fallback) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

int integer(const json& obj, const std::string& key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

bool flag(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) return false;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(where + "." + key, "expected true or false");
  return v.get<bool>();
}

const json& array(const json& obj, const std::string& key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_array()) fail(where + "." + key, "expected an array");
  return v;
}

void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) fail(where, "unknown field '" + it.key() + "'");
  }
}

LineLoadModel lumping(const json& obj, const std::string& where) {
  if (!obj.contains("lumping")) return LineLoadModel::kConsistent;
  const json& v = obj.at("lumping");
  if (v == "consistent") return LineLoadModel::kConsistent;
  if (v == "lumped") return LineLoadModel::kLumped;
  fail(where + ".lumping", "expected \"consistent\" or \"lumped\"");
}

const char* lumping_name(LineLoadModel m) {
  return m == LineLoadModel::kLumped ? "lumped" : "consistent";
}

CrossSectionLaw section(const json& obj, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const bool has_type = obj.contains("type");
  const bool has_ci = obj.contains("c_I");
  if (has_type == has_ci) fail(where, "give exactly one of 'type' and 'c_I'");
  if (has_ci) {
    const double c = number(obj, "c_I", where);
    if (!(c > 0.0)) fail(where + ".c_I", "must be positive");
    return {c};
  }
  const json& t = obj.at("type");
  if (t == "square") return CrossSectionLaw::square();
  if (t == "circle") return CrossSectionLaw::circle();
  if (t == "i_girder") return CrossSectionLaw::i_girder();
  fail(where + ".type", "expected \"square\", \"circle\" or \"i_girder\"");
}

ordered_json section_to_json(const CrossSectionLaw& s) {
  for (const auto& [name, law] : {std::pair{"square", CrossSectionLaw::square()},
                                  std::pair{"circle", CrossSectionLaw::circle()},
                                  std::pair{"i_girder", CrossSectionLaw::i_girder()}})
    if (law.inertia_coefficient == s.inertia_coefficient) return {{"type", name}};
  return {{"c_I", s.inertia_coefficient}};
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("invalid JSON at " + line_column(text, e.byte));
  }
  if (!doc.is_object()) fail("document", "expected an object");
  only_keys(doc, {"name", "notes", "nodes", "elements", "supports", "loads", "volume_bound"}, "document");

  std::vector<Node> nodes;
  std::set<int> node_ids;
  const json& jn = array(doc, "nodes", "document");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string at = "nodes[" + std::to_string(i) + "]";
    only_keys(jn[i], {"id", "x", "y"}, at);
    Node n{integer(jn[i], "id", at), number(jn[i], "x", at), number(jn[i], "y", at)};
    if (!node_ids.insert(n.id).second) fail(at + ".id", "duplicate node id " + std::to_string(n.id));
    nodes.push_back(n);
  }

  std::vector<Element> elements;
  std::set<int> element_ids;
  const json& je = array(doc, "elements", "document");
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string at = "elements[" + std::to_string(i) + "]";
    only_keys(je[i], {"id", "nodes", "E", "section"}, at);
    Element e;
    e.id = integer(je[i], "id", at);
    if (!element_ids.insert(e.id).second) fail(at + ".id", "duplicate element id " + std::to_string(e.id));
    const json& pair = array(je[i], "nodes", at);
    if (pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number_integer())
      fail(at + ".nodes", "expected two node ids");
    e.node_a = pair[0].get<int>();
    e.node_b = pair[1].get<int>();
    for (int id : {e.node_a, e.node_b})
      if (!node_ids.count(id)) fail(at + ".nodes", "unknown node " + std::to_string(id));
    e.young_modulus = number(je[i], "E", at);
    if (!(e.young_modulus > 0.0)) fail(at + ".E", "must be positive");
    e.section = section(member(je[i], "section", at), at + ".section");
    elements.push_back(e);
  }

  std::vector<Support> supports;
  const json& js = array(doc, "supports", "document");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string at = "supports[" + std::to_string(i) + "]";
    only_keys(js[i], {"node", "ux", "uy", "rz"}, at);
    Support s{integer(js[i], "node", at), flag(js[i], "ux", at), flag(js[i], "uy", at), flag(js[i], "rz", at)};
    if (!node_ids.count(s.node)) fail(at + ".node", "unknown node " + std::to_string(s.node));
    supports.push_back(s);
  }

  std::vector<Load> loads;
  const json& jl = array(doc, "loads", "document");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string at = "loads[" + std::to_string(i) + "]";
    const json& type = member(jl[i], "type", at);
    if (type == "force") {
      only_keys(jl[i], {"type", "node", "fx", "fy"}, at);
      NodalForce f{integer(jl[i], "node", at), number_or(jl[i], "fx", at, 0.0), number_or(jl[i], "fy", at, 0.0)};
      if (!node_ids.count(f.node)) fail(at + ".node", "unknown node " + std::to_string(f.node));
      loads.emplace_back(f);
    } else if (type == "moment") {
      only_keys(jl[i], {"type", "node", "m"}, at);
      NodalMoment m{integer(jl[i], "node", at), number(jl[i], "m", at)};
      if (!node_ids.count(m.node)) fail(at + ".node", "unknown node " + std::to_string(m.node));
      loads.emplace_back(m);
    } else if (type == "distributed") {
      only_keys(jl[i], {"type", "elements", "q", "lumping"}, at);
      DistributedTransverse d;
      for (const json& id : array(jl[i], "elements", at)) {
        if (!id.is_number_integer()) fail(at + ".elements", "expected element ids");
        if (!element_ids.count(id.get<int>())) fail(at + ".elements", "unknown element " + id.dump());
        d.elements.push_back(id.get<int>());
      }
      d.intensity = number(jl[i], "q", at);
      d.model = lumping(jl[i], at);
      loads.emplace_back(d);
    } else if (type == "self_weight") {
      only_keys(jl[i], {"type", "rho", "g", "lumping"}, at);
      SelfWeight w{number(jl[i], "rho", at), number_or(jl[i], "g", at, 1.0), lumping(jl[i], at)};
      if (w.density < 0.0) fail(at + ".rho", "must be non-negative");
      loads.emplace_back(w);
    } else {
      fail(at + ".type", "expected \"force\", \"moment\", \"distributed\" or \"self_weight\"");
    }
  }

  const double vbar = number(doc, "volume_bound", "document");
  std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "";
  std::string notes = doc.contains("notes") && doc["notes"].is_string() ? doc["notes"].get<std::string>() : "";
  try {
    return {name, notes, GroundStructure(std::move(nodes), std::move(elements), std::move(supports), std::move(loads), vbar)};
  } catch (const InvalidInput& e) {
    throw SchemaError(std::string("document: ") + e.what());
  }
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open problem file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ProblemFile p = parse_problem(buf.str());
  validate(p.structure);
  return p;
}

ordered_json problem_to_json(const GroundStructure& gs, const std::string& name, const std::string& notes) {
  ordered_json doc;
  if (!name.empty()) doc["name"] = name;
  if (!notes.empty()) doc["notes"] = notes;
  doc["nodes"] = ordered_json::array();
  for (const Node& n : gs.nodes()) doc["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  doc["elements"] = ordered_json::array();
  for (const Element& e : gs.elements())
    doc["elements"].push_back({{"id", e.id},
                               {"nodes", {e.node_a, e.node_b}},
                               {"E", e.young_modulus},
                               {"section", section_to_json(e.section)}});
  doc["supports"] = ordered_json::array();
  for (const Support& s : gs.supports())
    doc["supports"].push_back({{"node", s.node}, {"ux", s.fix_ux}, {"uy", s.fix_uy}, {"rz", s.fix_rz}});
  doc["loads"] = ordered_json::array();
  for (const Load& load : gs.loads()) {
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, NodalForce>) {
            doc["loads"].push_back({{"type", "force"}, {"node", l.node}, {"fx", l.fx}, {"fy", l.fy}});
          } else if constexpr (std::is_same_v<T, NodalMoment>) {
            doc["loads"].push_back({{"type", "moment"}, {"node", l.node}, {"m", l.moment}});
          } else if constexpr (std::is_same_v<T, DistributedTransverse>) {
            doc["loads"].push_back({{"type", "distributed"},
                                    {"elements", l.elements},
                                    {"q", l.intensity},
                                    {"lumping", lumping_name(l.model)}});
          } else {
            doc["loads"].push_back({{"type", "self_weight"},
                                    {"rho", l.density},
                                    {"g", l.gravity},
                                    {"lumping", lumping_name(l.model)}});
          }
        },
        load);
  }
  doc["volume_bound"] = gs.volume_bound();
  return doc;
}

void save_problem(const std::string& path, const GroundStructure& gs, const std::string& name,
                  const std::string& notes) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write problem file '" + path + "'");
  out << problem_to_json(gs, name, notes).dump(2) << "\n";
}

}  // namespace frameopt
