#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causalabs/types.hpp"

namespace causalabs {

/// Directed acyclic graph with an explicit, stable vertex order and an
/// explicit, stable parent order per vertex. Both orders are meaningful:
/// vertex order fixes joint-state indexing, parent order fixes mechanism
/// column indexing.
class Dag {
 public:
  Dag() = default;
  Dag(std::vector<std::string> vertices, std::vector<std::vector<std::size_t>> parents);

  /// Builds from an edge list. Parent order defaults to vertex-declaration
  /// order; `parent_order` overrides it per vertex (must list exactly the
  /// incoming edges).
  static Dag from_edges(std::vector<std::string> vertices,
                        const std::vector<std::pair<std::string, std::string>>& edges,
                        const std::map<std::string, std::vector<std::string>>& parent_order = {});

  std::size_t vertex_count() const { return vertices_.size(); }
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::string& vertex_name(std::size_t v) const { return vertices_[v]; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t require_index(std::string_view name) const;  // throws ModelError

  const std::vector<std::size_t>& parents(std::size_t v) const { return parents_[v]; }
  bool has_edge(std::size_t from, std::size_t to) const;
  std::size_t edge_count() const;
  /// Edges as (parent, child) pairs, children in vertex order, parents in
  /// parent order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  const std::vector<std::size_t>& topological_order() const { return topo_; }

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.vertices_ == b.vertices_ && a.parents_ == b.parents_;
  }

 private:
  std::vector<std::string> vertices_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<bool>> adj_;  // adj_[from][to]
  std::vector<std::size_t> topo_;

  void finish_init();  // builds adj_, topo_; validates acyclicity
};

}  // namespace causalabs
