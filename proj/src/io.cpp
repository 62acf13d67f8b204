#include "causalabs/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace causalabs::io {

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& where,
                       const std::string& what) {
  throw ParseError(origin + ": " + where + ": " + what);
}

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

const json* find_key(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& require_key(const json& j, const char* key, const std::string& origin,
                        const std::string& where) {
  if (!j.is_object()) fail(origin, where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(origin, where, std::string("missing key '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const std::string& origin, const std::string& where) {
  if (!j.is_string()) fail(origin, where, "expected a string");
  return j.get<std::string>();
}

double require_number(const json& j, const std::string& origin, const std::string& where) {
  if (!j.is_number()) fail(origin, where, "expected a number");
  return j.get<double>();
}

std::vector<std::vector<double>> require_matrix(const json& j, const std::string& origin,
                                                const std::string& where) {
  if (!j.is_array() || j.empty()) fail(origin, where, "expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.empty()) fail(origin, rw, "expected a non-empty row");
    if (r == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      fail(origin, rw,
           "row has " + std::to_string(row.size()) + " entries, expected " +
               std::to_string(cols));
    }
    std::vector<double> vals;
    vals.reserve(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      vals.push_back(require_number(row[c], origin, rw + "[" + std::to_string(c) + "]"));
    }
    rows.push_back(std::move(vals));
  }
  return rows;
}

Dag dag_from_json(const json& j, const std::string& origin, const std::string& where) {
  const json& jverts = require_key(j, "vertices", origin, where);
  if (!jverts.is_array()) fail(origin, where + ".vertices", "expected an array");
  std::vector<std::string> vertices;
  for (std::size_t i = 0; i < jverts.size(); ++i) {
    vertices.push_back(
        require_string(jverts[i], origin, where + ".vertices[" + std::to_string(i) + "]"));
  }
  std::vector<std::pair<std::string, std::string>> edges;
  if (const json* jedges = find_key(j, "edges")) {
    if (!jedges->is_array()) fail(origin, where + ".edges", "expected an array");
    for (std::size_t i = 0; i < jedges->size(); ++i) {
      const json& e = (*jedges)[i];
      const std::string ew = where + ".edges[" + std::to_string(i) + "]";
      if (!e.is_array() || e.size() != 2) fail(origin, ew, "expected a [parent, child] pair");
      edges.emplace_back(require_string(e[0], origin, ew + "[0]"),
                         require_string(e[1], origin, ew + "[1]"));
    }
  }
  try {
    return Dag::from_edges(std::move(vertices), edges);
  } catch (const ModelError& e) {
    fail(origin, where, e.what());
  }
}

}  // namespace

CausalModel model_from_json(const json& j, const std::string& origin) {
  const json& jvars = require_key(j, "variables", origin, "$");
  if (!jvars.is_array() || jvars.empty()) fail(origin, "variables", "expected a non-empty array");

  CausalModel model;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < jvars.size(); ++i) {
    const std::string where = "variables[" + std::to_string(i) + "]";
    const json& v = jvars[i];
    VariableSpec spec;
    spec.name = require_string(require_key(v, "name", origin, where), origin, where + ".name");
    const json& jvals = require_key(v, "values", origin, where);
    if (!jvals.is_array() || jvals.empty()) {
      fail(origin, where + ".values", "expected a non-empty array");
    }
    for (std::size_t k = 0; k < jvals.size(); ++k) {
      spec.values.push_back(
          require_string(jvals[k], origin, where + ".values[" + std::to_string(k) + "]"));
    }
    names.push_back(spec.name);
    model.variables.push_back(std::move(spec));
  }

  std::vector<std::pair<std::string, std::string>> edges;
  if (const json* jedges = find_key(j, "edges")) {
    if (!jedges->is_array()) fail(origin, "edges", "expected an array");
    for (std::size_t i = 0; i < jedges->size(); ++i) {
      const json& e = (*jedges)[i];
      const std::string where = "edges[" + std::to_string(i) + "]";
      if (!e.is_array() || e.size() != 2) fail(origin, where, "expected a [parent, child] pair");
      edges.emplace_back(require_string(e[0], origin, where + "[0]"),
                         require_string(e[1], origin, where + "[1]"));
    }
  }

  const json& jmechs = require_key(j, "mechanisms", origin, "$");
  if (!jmechs.is_object()) fail(origin, "mechanisms", "expected an object");
  std::map<std::string, std::vector<std::string>> parent_order;
  for (const auto& [vertex, entry] : jmechs.items()) {
    if (const json* jparents = find_key(entry, "parents")) {
      const std::string where = "mechanisms." + vertex + ".parents";
      if (!jparents->is_array()) fail(origin, where, "expected an array");
      std::vector<std::string> order;
      for (std::size_t k = 0; k < jparents->size(); ++k) {
        order.push_back(
            require_string((*jparents)[k], origin, where + "[" + std::to_string(k) + "]"));
      }
      parent_order[vertex] = std::move(order);
    }
  }
  try {
    model.dag = Dag::from_edges(names, edges, parent_order);
  } catch (const ModelError& e) {
    fail(origin, "edges", e.what());
  }

  model.mechanisms.resize(model.vertex_count(), StochasticChannel::scalar());
  for (std::size_t v = 0; v < model.vertex_count(); ++v) {
    const std::string& name = names[v];
    const json* entry = find_key(jmechs, name.c_str());
    if (entry == nullptr) fail(origin, "mechanisms", "missing mechanism for '" + name + "'");
    const std::string where = "mechanisms." + name + ".matrix";
    const auto rows = require_matrix(require_key(*entry, "matrix", origin, where), origin, where);
    try {
      model.mechanisms[v] = StochasticChannel::from_rows(rows);
    } catch (const ModelError& e) {
      fail(origin, where, e.what());
    }
    model.mechanisms[v].clamp_small_negatives();
  }
  for (const auto& [vertex, entry] : jmechs.items()) {
    (void)entry;
    if (std::find(names.begin(), names.end(), vertex) == names.end()) {
      fail(origin, "mechanisms", "mechanism for unknown vertex '" + vertex + "'");
    }
  }

  if (const json* jpresets = find_key(j, "presets")) {
    if (!jpresets->is_object()) fail(origin, "presets", "expected an object");
    for (const auto& [vertex, named] : jpresets->items()) {
      const std::string where = "presets." + vertex;
      if (!named.is_object()) fail(origin, where, "expected an object");
      for (const auto& [pname, jweights] : named.items()) {
        if (!jweights.is_array() || jweights.empty()) {
          fail(origin, where + "." + pname, "expected a non-empty array");
        }
        Distribution d;
        for (std::size_t k = 0; k < jweights.size(); ++k) {
          d.weights.push_back(require_number(
              jweights[k], origin, where + "." + pname + "[" + std::to_string(k) + "]"));
        }
        model.presets[vertex][pname] = std::move(d);
      }
    }
  }
  return model;
}

json model_to_json(const CausalModel& model) {
  json j;
  j["variables"] = json::array();
  for (const VariableSpec& v : model.variables) {
    j["variables"].push_back({{"name", v.name}, {"values", v.values}});
  }
  j["edges"] = json::array();
  for (const auto& [from, to] : model.dag.edges()) {
    j["edges"].push_back({model.dag.vertex_name(from), model.dag.vertex_name(to)});
  }
  j["mechanisms"] = json::object();
  for (std::size_t v = 0; v < model.vertex_count(); ++v) {
    json entry;
    if (!model.dag.parents(v).empty()) {
      json parents = json::array();
      for (std::size_t p : model.dag.parents(v)) parents.push_back(model.dag.vertex_name(p));
      entry["parents"] = std::move(parents);
    }
    entry["matrix"] = model.mechanisms[v].rows();
    j["mechanisms"][model.dag.vertex_name(v)] = std::move(entry);
  }
  if (!model.presets.empty()) {
    json presets = json::object();
    for (const auto& [vertex, named] : model.presets) {
      json per = json::object();
      for (const auto& [pname, dist] : named) per[pname] = dist.weights;
      presets[vertex] = std::move(per);
    }
    j["presets"] = std::move(presets);
  }
  return j;
}

CausalModel load_model(const std::filesystem::path& path) {
  return model_from_json(parse_file(path), path.string());
}

void save_model(const CausalModel& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model).dump(2) + "\n");
}

LoadedHom read_hom_file(const std::filesystem::path& path) {
  const json j = parse_file(path);
  const std::string origin = path.string();
  LoadedHom loaded;
  loaded.origin = path;
  if (const json* s = find_key(j, "source")) {
    loaded.source_ref = require_string(*s, origin, "source");
  }
  if (const json* t = find_key(j, "target")) {
    loaded.target_ref = require_string(*t, origin, "target");
  }
  const json& jmap = require_key(j, "map", origin, "$");
  if (!jmap.is_object()) fail(origin, "map", "expected an object");
  for (const auto& [from, to] : jmap.items()) {
    loaded.vertex_map[from] = require_string(to, origin, "map." + from);
  }
  if (const json* g = find_key(j, "target_graph")) {
    loaded.target_graph = dag_from_json(*g, origin, "target_graph");
  }
  return loaded;
}

GraphHom resolve_hom(const LoadedHom& loaded, Dag source, Dag target) {
  try {
    return GraphHom::from_names(std::move(source), std::move(target), loaded.vertex_map);
  } catch (const ModelError& e) {
    fail(loaded.origin.string(), "map", e.what());
  }
}

std::filesystem::path resolve_ref(const std::filesystem::path& origin, const std::string& ref) {
  const std::filesystem::path p(ref);
  if (p.is_absolute()) return p;
  return origin.parent_path() / p;
}

json hom_to_json(const GraphHom& hom, const std::string& source_ref,
                 const std::string& target_ref, bool inline_target_graph) {
  json j;
  if (!source_ref.empty()) j["source"] = source_ref;
  if (!target_ref.empty()) j["target"] = target_ref;
  json map = json::object();
  for (std::size_t v = 0; v < hom.source.vertex_count(); ++v) {
    map[hom.source.vertex_name(v)] = hom.target.vertex_name(hom.map[v]);
  }
  j["map"] = std::move(map);
  if (inline_target_graph) {
    json g;
    g["vertices"] = hom.target.vertices();
    g["edges"] = json::array();
    for (const auto& [from, to] : hom.target.edges()) {
      g["edges"].push_back({hom.target.vertex_name(from), hom.target.vertex_name(to)});
    }
    j["target_graph"] = std::move(g);
  }
  return j;
}

void save_hom(const GraphHom& hom, const std::filesystem::path& path,
              const std::string& source_ref, const std::string& target_ref,
              bool inline_target_graph) {
  write_text_file(path, hom_to_json(hom, source_ref, target_ref, inline_target_graph).dump(2) +
                            "\n");
}

LoadedCandidate read_candidate_file(const std::filesystem::path& path) {
  const json j = parse_file(path);
  const std::string origin = path.string();
  LoadedCandidate loaded;
  loaded.origin = path;
  if (const json* h = find_key(j, "hom")) {
    loaded.hom_ref = require_string(*h, origin, "hom");
  }
  if (const json* c = find_key(j, "components")) {
    if (!c->is_object()) fail(origin, "components", "expected an object");
    for (const auto& [vertex, jm] : c->items()) {
      loaded.components[vertex] = require_matrix(jm, origin, "components." + vertex);
    }
  }
  if (const json* t = find_key(j, "taus")) {
    if (!t->is_object()) fail(origin, "taus", "expected an object");
    for (const auto& [vertex, jm] : t->items()) {
      if (!jm.is_object()) fail(origin, "taus." + vertex, "expected an object");
      for (const auto& [tuple, label] : jm.items()) {
        loaded.taus[vertex][tuple] =
            require_string(label, origin, "taus." + vertex + "." + tuple);
      }
    }
  }
  if (const json* m = find_key(j, "micro_components")) {
    if (!m->is_object()) fail(origin, "micro_components", "expected an object");
    for (const auto& [vertex, jm] : m->items()) {
      loaded.micro_components[vertex] = require_matrix(jm, origin, "micro_components." + vertex);
    }
  }
  if (loaded.components.empty() && loaded.taus.empty() && loaded.micro_components.empty()) {
    fail(origin, "$", "expected one of 'components', 'taus' or 'micro_components'");
  }
  if (!loaded.components.empty() && !loaded.taus.empty()) {
    fail(origin, "$", "file has both 'components' and 'taus'; keep one");
  }
  return loaded;
}

namespace {

std::vector<std::string> split_tuple(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

StochasticChannel channel_from_rows_checked(const std::vector<std::vector<double>>& rows,
                                            const std::string& origin,
                                            const std::string& where) {
  StochasticChannel ch = StochasticChannel::scalar();
  try {
    ch = StochasticChannel::from_rows(rows);
  } catch (const ModelError& e) {
    fail(origin, where, e.what());
  }
  ch.clamp_small_negatives();
  if (!ch.is_column_stochastic(1e-6)) {
    fail(origin, where, "matrix is not column-stochastic");
  }
  return ch;
}

}  // namespace

std::vector<DeterministicMap> resolve_maps(const LoadedCandidate& loaded, const CausalModel& micro,
                                           const CausalModel* macro, const GraphHom& hom) {
  const std::string origin = loaded.origin.string();
  if (loaded.taus.empty()) fail(origin, "taus", "file declares no value merges");
  const auto pre = hom.preimages();
  std::vector<DeterministicMap> maps(hom.target.vertex_count());
  for (std::size_t t = 0; t < hom.target.vertex_count(); ++t) {
    const std::string& name = hom.target.vertex_name(t);
    const std::string where = "taus." + name;
    auto it = loaded.taus.find(name);
    if (it == loaded.taus.end()) fail(origin, "taus", "missing merge for macro vertex '" + name + "'");

    DeterministicMap& m = maps[t];
    for (std::size_t u : pre[t]) m.domain_arities.push_back(micro.arity(u));
    const IndexScheme dom(m.domain_arities);
    m.assignment.assign(dom.size(), static_cast<std::size_t>(-1));

    // Resolve the codomain label order first: declared macro order when the
    // macro model is known, otherwise first appearance over the canonical
    // domain order.
    std::map<std::string, std::size_t> label_index;
    if (macro != nullptr) {
      m.codomain_values = macro->variables[t].values;
      for (std::size_t i = 0; i < m.codomain_values.size(); ++i) {
        label_index[m.codomain_values[i]] = i;
      }
    }

    std::vector<std::pair<std::size_t, std::string>> entries;  // (flat domain index, label)
    for (const auto& [tuple, label] : it->second) {
      const auto parts = split_tuple(tuple);
      if (parts.size() != pre[t].size()) {
        fail(origin, where + "." + tuple,
             "tuple has " + std::to_string(parts.size()) + " labels, expected " +
                 std::to_string(pre[t].size()));
      }
      std::vector<std::size_t> digits(parts.size());
      for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto idx = micro.variables[pre[t][k]].value_index(parts[k]);
        if (!idx) {
          fail(origin, where + "." + tuple,
               "'" + parts[k] + "' is not a value of " + micro.dag.vertex_name(pre[t][k]));
        }
        digits[k] = *idx;
      }
      entries.emplace_back(dom.encode(digits), label);
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [flat, label] : entries) {
      if (m.assignment[flat] != static_cast<std::size_t>(-1)) {
        fail(origin, where, "two tuples resolve to the same micro state");
      }
      auto li = label_index.find(label);
      if (li == label_index.end()) {
        if (macro != nullptr) {
          fail(origin, where, "'" + label + "' is not a value of macro vertex '" + name + "'");
        }
        li = label_index.emplace(label, m.codomain_values.size()).first;
        m.codomain_values.push_back(label);
      }
      m.assignment[flat] = li->second;
    }
    for (std::size_t x = 0; x < m.assignment.size(); ++x) {
      if (m.assignment[x] == static_cast<std::size_t>(-1)) {
        std::vector<std::size_t> digits(pre[t].size());
        dom.decode(x, digits);
        std::string tuple;
        for (std::size_t k = 0; k < digits.size(); ++k) {
          if (k > 0) tuple += ",";
          tuple += micro.variables[pre[t][k]].values[digits[k]];
        }
        fail(origin, where, "no merge target for tuple '" + tuple + "'");
      }
    }
    if (!m.is_surjective()) {
      fail(origin, where, "merge for macro vertex '" + name + "' is not surjective");
    }
  }
  return maps;
}

AbstractionCandidate resolve_candidate(const LoadedCandidate& loaded, const CausalModel& micro,
                                       const CausalModel* macro, const GraphHom& hom) {
  const std::string origin = loaded.origin.string();
  if (!loaded.taus.empty()) {
    const auto maps = resolve_maps(loaded, micro, macro, hom);
    try {
      return candidate_from_maps(hom, micro, maps);
    } catch (const ModelError& e) {
      fail(origin, "taus", e.what());
    }
  }
  if (loaded.components.empty()) {
    fail(origin, "$", "file declares neither 'components' nor 'taus'");
  }
  AbstractionCandidate cand;
  cand.hom = hom;
  const auto pre = hom.preimages();
  for (std::size_t t = 0; t < hom.target.vertex_count(); ++t) {
    const std::string& name = hom.target.vertex_name(t);
    auto it = loaded.components.find(name);
    if (it == loaded.components.end()) {
      fail(origin, "components", "missing component for macro vertex '" + name + "'");
    }
    StochasticChannel ch = channel_from_rows_checked(it->second, origin, "components." + name);
    std::size_t dom = 1;
    for (std::size_t u : pre[t]) dom *= micro.arity(u);
    if (ch.domain_arity() != dom) {
      fail(origin, "components." + name,
           "matrix has " + std::to_string(ch.domain_arity()) + " columns, expected " +
               std::to_string(dom));
    }
    if (macro != nullptr && ch.codomain_arity() != macro->arity(t)) {
      fail(origin, "components." + name,
           "matrix has " + std::to_string(ch.codomain_arity()) + " rows, expected " +
               std::to_string(macro->arity(t)));
    }
    cand.components.push_back(std::move(ch));
  }
  return cand;
}

EdgewiseComponents resolve_edgewise(const LoadedCandidate& loaded, const CausalModel& micro,
                                    const CausalModel* macro, const GraphHom& hom) {
  const std::string origin = loaded.origin.string();
  EdgewiseComponents comps;
  if (!loaded.micro_components.empty()) {
    for (std::size_t v = 0; v < micro.vertex_count(); ++v) {
      const std::string& name = micro.dag.vertex_name(v);
      auto it = loaded.micro_components.find(name);
      if (it == loaded.micro_components.end()) {
        fail(origin, "micro_components", "missing channel for micro vertex '" + name + "'");
      }
      comps.per_micro.push_back(
          channel_from_rows_checked(it->second, origin, "micro_components." + name));
    }
    return comps;
  }
  // Fall back to grouped components when every preimage is a singleton.
  const AbstractionCandidate cand = resolve_candidate(loaded, micro, macro, hom);
  const auto pre = hom.preimages();
  for (std::size_t v = 0; v < micro.vertex_count(); ++v) {
    const std::size_t t = hom.map[v];
    if (pre[t].size() != 1) {
      fail(origin, "$",
           "edgewise check needs 'micro_components': macro vertex '" +
               hom.target.vertex_name(t) + "' merges several variables");
    }
    comps.per_micro.push_back(cand.components[t]);
  }
  return comps;
}

json candidate_to_json(const AbstractionCandidate& cand, const std::string& hom_ref) {
  json j;
  if (!hom_ref.empty()) j["hom"] = hom_ref;
  json components = json::object();
  for (std::size_t t = 0; t < cand.components.size(); ++t) {
    components[cand.hom.target.vertex_name(t)] = cand.components[t].rows();
  }
  j["components"] = std::move(components);
  return j;
}

void save_candidate(const AbstractionCandidate& cand, const std::filesystem::path& path,
                    const std::string& hom_ref) {
  write_text_file(path, candidate_to_json(cand, hom_ref).dump(2) + "\n");
}

json maps_to_json(const std::vector<DeterministicMap>& maps, const CausalModel& micro,
                  const GraphHom& hom, const std::string& hom_ref) {
  json j;
  if (!hom_ref.empty()) j["hom"] = hom_ref;
  json taus = json::object();
  const auto pre = hom.preimages();
  for (std::size_t t = 0; t < maps.size(); ++t) {
    const DeterministicMap& m = maps[t];
    const IndexScheme dom(m.domain_arities);
    json entry = json::object();
    std::vector<std::size_t> digits(m.domain_arities.size());
    for (std::size_t x = 0; x < m.assignment.size(); ++x) {
      dom.decode(x, digits);
      std::string tuple;
      for (std::size_t k = 0; k < digits.size(); ++k) {
        if (k > 0) tuple += ",";
        tuple += micro.variables[pre[t][k]].values[digits[k]];
      }
      entry[tuple] = m.codomain_values[m.assignment[x]];
    }
    taus[hom.target.vertex_name(t)] = std::move(entry);
  }
  j["taus"] = std::move(taus);
  return j;
}

Distribution parse_distribution_arg(const CausalModel& model, std::size_t vertex,
                                    const std::string& rhs) {
  const std::string& name = model.dag.vertex_name(vertex);
  if (!rhs.empty() && rhs.front() == '@') {
    const std::string pname = rhs.substr(1);
    auto vit = model.presets.find(name);
    if (vit != model.presets.end()) {
      auto pit = vit->second.find(pname);
      if (pit != vit->second.end()) return pit->second;
    }
    throw ModelError("no preset '" + pname + "' for vertex " + name);
  }

  const auto parts = split_tuple(rhs);
  std::vector<double> weights;
  bool all_numeric = !parts.empty();
  for (const std::string& p : parts) {
    char* end = nullptr;
    const double v = std::strtod(p.c_str(), &end);
    if (end == nullptr || *end != '\0' || p.empty()) {
      all_numeric = false;
      break;
    }
    weights.push_back(v);
  }
  if (all_numeric && weights.size() == model.arity(vertex)) {
    Distribution d(std::move(weights));
    for (double w : d.weights) {
      if (w < 0.0) throw ModelError("distribution for " + name + " has a negative weight");
    }
    if (std::abs(d.total() - 1.0) > 1e-9) {
      throw ModelError("distribution for " + name + " sums to " + fmt_num(d.total()));
    }
    return d;
  }
  if (auto idx = model.variables[vertex].value_index(rhs)) {
    return Distribution::point_mass(model.arity(vertex), *idx);
  }
  throw ModelError("cannot parse '" + rhs + "' as a distribution for " + name +
                   " (use p1,p2,..., @preset, or a value label)");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ParseError(path.string() + ": cannot open for writing");
  out << content;
  if (!out) throw ParseError(path.string() + ": write failed");
}

}  // namespace causalabs::io
