#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "causalabs/dag.hpp"
#include "causalabs/types.hpp"

namespace causalabs {

/// A cut surgery was asked to map through a vertex merge that only part of
/// the merged class was cut; the image diagram would not be well formed.
class UnrepresentableImage : public ModelError {
 public:
  using ModelError::ModelError;
};

/// One generator box: an output variable and its ordered input variables.
/// A cut box has no inputs.
struct BoxSignature {
  std::string output;
  std::vector<std::string> inputs;

  friend bool operator==(const BoxSignature&, const BoxSignature&) = default;
};

/// A subset of a graph's vertices, tagged with the vertex list of the graph
/// it belongs to. Cut sets from different graphs never compose.
class CutSet {
 public:
  CutSet() = default;
  static CutSet none(const Dag& g);
  static CutSet of(const Dag& g, std::span<const std::string> names);
  static CutSet of_indices(const Dag& g, std::span<const std::size_t> indices);

  bool empty() const;
  bool contains(std::size_t v) const { return member_[v]; }
  std::size_t graph_size() const { return member_.size(); }
  const std::vector<std::string>& graph_vertices() const { return graph_vertices_; }
  std::vector<std::size_t> target_indices() const;  // ascending
  std::vector<std::string> target_names() const;
  bool same_graph(const CutSet& other) const { return graph_vertices_ == other.graph_vertices_; }

  friend bool operator==(const CutSet&, const CutSet&) = default;
  friend CutSet compose_cuts(const CutSet& a, const CutSet& b);

 private:
  std::vector<std::string> graph_vertices_;
  std::vector<bool> member_;
};

/// Union of targets; the identity element is the empty cut set. Throws
/// ModelError when the two cut sets belong to different graphs.
CutSet compose_cuts(const CutSet& a, const CutSet& b);

/// A graph in cut normal form: the base graph, the set of cut vertices, and
/// the boxes derived from them (one per vertex, inputs emptied for cut
/// vertices). Equality is structural equality of all three.
struct SurgeredDiagram {
  Dag graph;
  CutSet cuts;
  std::vector<BoxSignature> boxes;

  static SurgeredDiagram base(const Dag& g);

  friend bool operator==(const SurgeredDiagram&, const SurgeredDiagram&) = default;
};

/// Adds targets to the cut set and rederives the boxes. Cutting nothing is
/// the identity; cutting twice is the same as cutting once.
SurgeredDiagram apply_cut(const SurgeredDiagram& d, const CutSet& cut);

/// A vertex map between two DAGs intended to preserve edges. Merged classes
/// are necessarily independent sets when the target is a DAG.
struct GraphHom {
  Dag source;
  Dag target;
  std::vector<std::size_t> map;  // source vertex index -> target vertex index

  static GraphHom from_names(Dag source, Dag target,
                             const std::map<std::string, std::string>& vertex_map);

  std::size_t image(std::size_t v) const { return map[v]; }
  /// Per target vertex, its source preimage in ascending source order.
  std::vector<std::vector<std::size_t>> preimages() const;
  bool is_surjective() const;
};

/// Lists every source edge whose image is missing from the target (a merged
/// edge would need a self-loop and is reported as such).
ValidationReport validate_hom(const GraphHom& hom);

/// Pulls a cut on the target back to the cut of its full preimage.
CutSet preimage_cut(const GraphHom& hom, const CutSet& target_cut);

/// Pushes a cut on the source forward to the cut of its image.
CutSet image_cut(const GraphHom& hom, const CutSet& source_cut);

/// Maps a surgered diagram over the source to one over the target: the cut
/// set maps to its image, distinct boxes with the same image collapse to the
/// single target box. Throws UnrepresentableImage when a merged class is
/// only partially cut.
SurgeredDiagram map_diagram(const GraphHom& hom, const SurgeredDiagram& d);

/// Structural commutation of surgery with diagram mapping: cutting the
/// mapped base diagram at `target_cut` must equal mapping the base diagram
/// cut at the preimage.
bool surgery_map_commutes(const GraphHom& hom, const CutSet& target_cut);

/// All edge-preserving vertex maps source -> target, found by backtracking
/// search; optionally restricted to surjective ones. Intended for testing
/// and instance generation at small sizes.
std::vector<GraphHom> enumerate_homomorphisms(const Dag& source, const Dag& target,
                                              bool surjective_only);

}  // namespace causalabs
