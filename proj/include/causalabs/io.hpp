#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "causalabs/abstraction.hpp"
#include "causalabs/model.hpp"
#include "causalabs/syntax.hpp"

namespace causalabs::io {

using json = nlohmann::ordered_json;

/// A file could not be read, parsed or does not match the schema. Messages
/// carry the file name and the offending location.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- model files ----------------------------------------------------------
// { "variables": [{"name": ..., "values": [...]}, ...],
//   "edges": [["parent", "child"], ...],
//   "mechanisms": {"vertex": {"parents": [...], "matrix": [[...], ...]}, ...},
//   "presets": {"vertex": {"preset name": [...], ...}, ...} }
// Vertex order in "variables" is the canonical joint-index order; "parents"
// fixes mechanism column order (defaults to vertex order) and "matrix" is
// row-major, codomain x domain.

CausalModel model_from_json(const json& j, const std::string& origin);
json model_to_json(const CausalModel& model);
CausalModel load_model(const std::filesystem::path& path);
void save_model(const CausalModel& model, const std::filesystem::path& path);

// ---- homomorphism files ----------------------------------------------------
// { "source": "micro model path", "target": "macro model path",
//   "map": {"micro vertex": "macro vertex", ...},
//   "target_graph": {"vertices": [...], "edges": [["a","b"], ...]} }
// "source"/"target" are optional refs resolved relative to the file; they are
// ignored when the caller supplies the graphs. "target_graph" is the inline
// alternative used when the macro model does not exist yet (synthesis).

struct LoadedHom {
  std::optional<std::string> source_ref;
  std::optional<std::string> target_ref;
  std::map<std::string, std::string> vertex_map;
  std::optional<Dag> target_graph;
  std::filesystem::path origin;
};

LoadedHom read_hom_file(const std::filesystem::path& path);
GraphHom resolve_hom(const LoadedHom& loaded, Dag source, Dag target);
/// Resolves a ref path relative to the file it appeared in.
std::filesystem::path resolve_ref(const std::filesystem::path& origin, const std::string& ref);

json hom_to_json(const GraphHom& hom, const std::string& source_ref,
                 const std::string& target_ref, bool inline_target_graph);
void save_hom(const GraphHom& hom, const std::filesystem::path& path,
              const std::string& source_ref, const std::string& target_ref,
              bool inline_target_graph);

// ---- abstraction files ------------------------------------------------------
// { "hom": "hom file path",
//   "components": {"macro vertex": [[...], ...], ...} }        (stochastic)
// or "taus": {"macro vertex": {"v1,v2": "w", ...}, ...}         (deterministic)
// or "micro_components": {"micro vertex": [[...], ...], ...}    (edgewise)
// Component rows index macro values; columns run over the preimage product in
// micro vertex order. Tau keys are comma-joined micro value labels in the
// same order.

struct LoadedCandidate {
  std::optional<std::string> hom_ref;
  std::map<std::string, std::vector<std::vector<double>>> components;
  std::map<std::string, std::map<std::string, std::string>> taus;
  std::map<std::string, std::vector<std::vector<double>>> micro_components;
  std::filesystem::path origin;
};

LoadedCandidate read_candidate_file(const std::filesystem::path& path);

/// Builds the per-macro-vertex channels from "components" or "taus". When the
/// macro model is given, tau outputs resolve against its declared value
/// order.
AbstractionCandidate resolve_candidate(const LoadedCandidate& loaded, const CausalModel& micro,
                                       const CausalModel* macro, const GraphHom& hom);

/// Builds the per-macro-vertex value merges from "taus". Without a macro
/// model, codomain value order is first appearance over the canonical domain
/// order.
std::vector<DeterministicMap> resolve_maps(const LoadedCandidate& loaded, const CausalModel& micro,
                                           const CausalModel* macro, const GraphHom& hom);

/// Edgewise channels from "micro_components", or reinterpreted from grouped
/// components when every preimage is a singleton.
EdgewiseComponents resolve_edgewise(const LoadedCandidate& loaded, const CausalModel& micro,
                                    const CausalModel* macro, const GraphHom& hom);

json candidate_to_json(const AbstractionCandidate& cand, const std::string& hom_ref);
void save_candidate(const AbstractionCandidate& cand, const std::filesystem::path& path,
                    const std::string& hom_ref);
json maps_to_json(const std::vector<DeterministicMap>& maps, const CausalModel& micro,
                  const GraphHom& hom, const std::string& hom_ref);

// ---- command-line distributions ---------------------------------------------
// VAR=p1,p2,...  explicit weights
// VAR=@name      preset lookup in the model file
// VAR=label      point mass on a value label

Distribution parse_distribution_arg(const CausalModel& model, std::size_t vertex,
                                    const std::string& rhs);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace causalabs::io
