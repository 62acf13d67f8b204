#include "causalabs/dag.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace causalabs {

Dag::Dag(std::vector<std::string> vertices, std::vector<std::vector<std::size_t>> parents)
    : vertices_(std::move(vertices)), parents_(std::move(parents)) {
  if (parents_.size() != vertices_.size()) {
    throw ModelError("dag: parent list count does not match vertex count");
  }
  finish_init();
}

Dag Dag::from_edges(std::vector<std::string> vertices,
                    const std::vector<std::pair<std::string, std::string>>& edges,
                    const std::map<std::string, std::vector<std::string>>& parent_order) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!index.emplace(vertices[i], i).second) {
      throw ModelError("dag: duplicate vertex '" + vertices[i] + "'");
    }
  }
  std::vector<std::set<std::size_t>> in(vertices.size());
  for (const auto& [from, to] : edges) {
    auto fi = index.find(from);
    auto ti = index.find(to);
    if (fi == index.end()) throw ModelError("dag: edge endpoint '" + from + "' is not a vertex");
    if (ti == index.end()) throw ModelError("dag: edge endpoint '" + to + "' is not a vertex");
    if (fi->second == ti->second) throw ModelError("dag: self-loop on '" + from + "'");
    if (!in[ti->second].insert(fi->second).second) {
      throw ModelError("dag: duplicate edge " + from + " -> " + to);
    }
  }
  std::vector<std::vector<std::size_t>> parents(vertices.size());
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    auto it = parent_order.find(vertices[v]);
    if (it == parent_order.end()) {
      parents[v].assign(in[v].begin(), in[v].end());  // ascending vertex index
      continue;
    }
    std::set<std::size_t> seen;
    for (const std::string& name : it->second) {
      auto pi = index.find(name);
      if (pi == index.end() || !in[v].count(pi->second)) {
        throw ModelError("dag: parent list of '" + vertices[v] + "' names '" + name +
                         "' which is not an incoming edge");
      }
      if (!seen.insert(pi->second).second) {
        throw ModelError("dag: parent list of '" + vertices[v] + "' repeats '" + name + "'");
      }
      parents[v].push_back(pi->second);
    }
    if (seen.size() != in[v].size()) {
      throw ModelError("dag: parent list of '" + vertices[v] + "' misses " +
                       std::to_string(in[v].size() - seen.size()) + " incoming edge(s)");
    }
  }
  return Dag(std::move(vertices), std::move(parents));
}

void Dag::finish_init() {
  const std::size_t n = vertices_.size();
  {
    std::set<std::string> names(vertices_.begin(), vertices_.end());
    if (names.size() != n) throw ModelError("dag: duplicate vertex names");
  }
  adj_.assign(n, std::vector<bool>(n, false));
  for (std::size_t v = 0; v < n; ++v) {
    std::set<std::size_t> seen;
    for (std::size_t p : parents_[v]) {
      if (p >= n) throw ModelError("dag: parent index out of range");
      if (p == v) throw ModelError("dag: self-loop on '" + vertices_[v] + "'");
      if (!seen.insert(p).second) {
        throw ModelError("dag: repeated parent of '" + vertices_[v] + "'");
      }
      adj_[p][v] = true;
    }
  }
  // Kahn's algorithm; ties broken by vertex index so the order is stable.
  std::vector<std::size_t> indeg(n, 0);
  for (std::size_t v = 0; v < n; ++v) indeg[v] = parents_[v].size();
  topo_.clear();
  std::vector<bool> done(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!done[v] && indeg[v] == 0) {
        pick = v;
        break;
      }
    }
    if (pick == n) throw ModelError("dag: cycle detected");
    done[pick] = true;
    topo_.push_back(pick);
    for (std::size_t v = 0; v < n; ++v) {
      if (adj_[pick][v]) --indeg[v];
    }
  }
}

std::optional<std::size_t> Dag::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Dag::require_index(std::string_view name) const {
  auto i = index_of(name);
  if (!i) throw ModelError("unknown vertex '" + std::string(name) + "'");
  return *i;
}

bool Dag::has_edge(std::size_t from, std::size_t to) const { return adj_[from][to]; }

std::size_t Dag::edge_count() const {
  std::size_t n = 0;
  for (const auto& p : parents_) n += p.size();
  return n;
}

std::vector<std::pair<std::size_t, std::size_t>> Dag::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    for (std::size_t p : parents_[v]) out.emplace_back(p, v);
  }
  return out;
}

}  // namespace causalabs
