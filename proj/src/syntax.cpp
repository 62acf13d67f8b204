#include "causalabs/syntax.hpp"

#include <algorithm>

namespace causalabs {

CutSet CutSet::none(const Dag& g) {
  CutSet c;
  c.graph_vertices_ = g.vertices();
  c.member_.assign(g.vertex_count(), false);
  return c;
}

CutSet CutSet::of(const Dag& g, std::span<const std::string> names) {
  CutSet c = none(g);
  for (const std::string& name : names) {
    c.member_[g.require_index(name)] = true;
  }
  return c;
}

CutSet CutSet::of_indices(const Dag& g, std::span<const std::size_t> indices) {
  CutSet c = none(g);
  for (std::size_t v : indices) {
    if (v >= g.vertex_count()) throw ModelError("cut set: vertex index out of range");
    c.member_[v] = true;
  }
  return c;
}

bool CutSet::empty() const {
  return std::none_of(member_.begin(), member_.end(), [](bool b) { return b; });
}

std::vector<std::size_t> CutSet::target_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < member_.size(); ++v) {
    if (member_[v]) out.push_back(v);
  }
  return out;
}

std::vector<std::string> CutSet::target_names() const {
  std::vector<std::string> out;
  for (std::size_t v : target_indices()) out.push_back(graph_vertices_[v]);
  return out;
}

CutSet compose_cuts(const CutSet& a, const CutSet& b) {
  if (!a.same_graph(b)) {
    throw ModelError("cut sets belong to different graphs and cannot compose");
  }
  CutSet out = a;
  for (std::size_t v = 0; v < out.member_.size(); ++v) {
    if (b.member_[v]) out.member_[v] = true;
  }
  return out;
}

SurgeredDiagram SurgeredDiagram::base(const Dag& g) {
  SurgeredDiagram d;
  d.graph = g;
  d.cuts = CutSet::none(g);
  d.boxes.resize(g.vertex_count());
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    d.boxes[v].output = g.vertex_name(v);
    for (std::size_t p : g.parents(v)) d.boxes[v].inputs.push_back(g.vertex_name(p));
  }
  return d;
}

SurgeredDiagram apply_cut(const SurgeredDiagram& d, const CutSet& cut) {
  SurgeredDiagram out;
  out.graph = d.graph;
  out.cuts = compose_cuts(d.cuts, cut);
  out.boxes.resize(d.graph.vertex_count());
  for (std::size_t v = 0; v < d.graph.vertex_count(); ++v) {
    out.boxes[v].output = d.graph.vertex_name(v);
    if (!out.cuts.contains(v)) {
      for (std::size_t p : d.graph.parents(v)) {
        out.boxes[v].inputs.push_back(d.graph.vertex_name(p));
      }
    }
  }
  return out;
}

GraphHom GraphHom::from_names(Dag source, Dag target,
                              const std::map<std::string, std::string>& vertex_map) {
  GraphHom hom;
  hom.map.resize(source.vertex_count());
  for (std::size_t v = 0; v < source.vertex_count(); ++v) {
    auto it = vertex_map.find(source.vertex_name(v));
    if (it == vertex_map.end()) {
      throw ModelError("vertex map misses source vertex '" + source.vertex_name(v) + "'");
    }
    hom.map[v] = target.require_index(it->second);
  }
  for (const auto& [from, to] : vertex_map) {
    if (!source.index_of(from)) {
      throw ModelError("vertex map names unknown source vertex '" + from + "'");
    }
    (void)to;
  }
  hom.source = std::move(source);
  hom.target = std::move(target);
  return hom;
}

std::vector<std::vector<std::size_t>> GraphHom::preimages() const {
  std::vector<std::vector<std::size_t>> pre(target.vertex_count());
  for (std::size_t v = 0; v < source.vertex_count(); ++v) pre[map[v]].push_back(v);
  return pre;
}

bool GraphHom::is_surjective() const {
  std::vector<bool> hit(target.vertex_count(), false);
  for (std::size_t t : map) hit[t] = true;
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

ValidationReport validate_hom(const GraphHom& hom) {
  ValidationReport report;
  if (hom.map.size() != hom.source.vertex_count()) {
    report.add("vertex map size does not match the source graph");
    return report;
  }
  for (std::size_t t : hom.map) {
    if (t >= hom.target.vertex_count()) {
      report.add("vertex map image out of range");
      return report;
    }
  }
  for (const auto& [from, to] : hom.source.edges()) {
    const std::size_t f = hom.map[from];
    const std::size_t t = hom.map[to];
    const std::string desc = "edge " + hom.source.vertex_name(from) + " -> " +
                             hom.source.vertex_name(to) + " maps to " +
                             hom.target.vertex_name(f) + " -> " + hom.target.vertex_name(t);
    if (f == t) {
      report.add(desc + " which would need a self-loop");
    } else if (!hom.target.has_edge(f, t)) {
      report.add(desc + " which is not an edge of the target");
    }
  }
  return report;
}

CutSet preimage_cut(const GraphHom& hom, const CutSet& target_cut) {
  if (target_cut.graph_vertices() != hom.target.vertices()) {
    throw ModelError("cut set does not belong to the homomorphism target");
  }
  std::vector<std::size_t> micro;
  for (std::size_t v = 0; v < hom.source.vertex_count(); ++v) {
    if (target_cut.contains(hom.map[v])) micro.push_back(v);
  }
  return CutSet::of_indices(hom.source, micro);
}

CutSet image_cut(const GraphHom& hom, const CutSet& source_cut) {
  if (source_cut.graph_vertices() != hom.source.vertices()) {
    throw ModelError("cut set does not belong to the homomorphism source");
  }
  std::vector<std::size_t> macro;
  for (std::size_t v : source_cut.target_indices()) macro.push_back(hom.map[v]);
  return CutSet::of_indices(hom.target, macro);
}

SurgeredDiagram map_diagram(const GraphHom& hom, const SurgeredDiagram& d) {
  if (d.graph != hom.source) {
    throw ModelError("diagram is not over the homomorphism source");
  }
  const auto pre = hom.preimages();
  for (std::size_t t = 0; t < pre.size(); ++t) {
    std::size_t ncut = 0;
    for (std::size_t v : pre[t]) {
      if (d.cuts.contains(v)) ++ncut;
    }
    if (ncut != 0 && ncut != pre[t].size()) {
      throw UnrepresentableImage("preimage of '" + hom.target.vertex_name(t) +
                                 "' is only partially cut; the image diagram is not well formed");
    }
  }
  return apply_cut(SurgeredDiagram::base(hom.target), image_cut(hom, d.cuts));
}

bool surgery_map_commutes(const GraphHom& hom, const CutSet& target_cut) {
  const SurgeredDiagram base = SurgeredDiagram::base(hom.source);
  const SurgeredDiagram lhs = apply_cut(map_diagram(hom, base), target_cut);
  const SurgeredDiagram rhs = map_diagram(hom, apply_cut(base, preimage_cut(hom, target_cut)));
  return lhs == rhs;
}

namespace {

void extend_hom(const Dag& source, const Dag& target, bool surjective_only,
                std::vector<std::size_t>& partial, std::vector<std::size_t>& image_count,
                std::size_t next, std::vector<GraphHom>& out) {
  const std::size_t n = source.vertex_count();
  const std::size_t m = target.vertex_count();
  if (next == n) {
    if (surjective_only) {
      for (std::size_t t = 0; t < m; ++t) {
        if (image_count[t] == 0) return;
      }
    }
    GraphHom hom;
    hom.source = source;
    hom.target = target;
    hom.map = partial;
    out.push_back(std::move(hom));
    return;
  }
  if (surjective_only) {
    std::size_t missing = 0;
    for (std::size_t t = 0; t < m; ++t) {
      if (image_count[t] == 0) ++missing;
    }
    if (missing > n - next) return;
  }
  for (std::size_t t = 0; t < m; ++t) {
    bool ok = true;
    for (std::size_t u = 0; u < next && ok; ++u) {
      if (source.has_edge(u, next) && !target.has_edge(partial[u], t)) ok = false;
      if (source.has_edge(next, u) && !target.has_edge(t, partial[u])) ok = false;
    }
    if (!ok) continue;
    partial[next] = t;
    ++image_count[t];
    extend_hom(source, target, surjective_only, partial, image_count, next + 1, out);
    --image_count[t];
  }
}

}  // namespace

std::vector<GraphHom> enumerate_homomorphisms(const Dag& source, const Dag& target,
                                              bool surjective_only) {
  std::vector<GraphHom> out;
  std::vector<std::size_t> partial(source.vertex_count(), 0);
  std::vector<std::size_t> image_count(target.vertex_count(), 0);
  extend_hom(source, target, surjective_only, partial, image_count, 0, out);
  return out;
}

}  // namespace causalabs
