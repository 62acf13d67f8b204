#pragma once

#include <map>
#include <string>
#include <vector>

#include "causalabs/channel.hpp"
#include "causalabs/dag.hpp"
#include "causalabs/types.hpp"

namespace causalabs {

/// A finite discrete causal model: a DAG, one finite variable per vertex and
/// one column-stochastic mechanism per vertex. A mechanism's codomain is its
/// own variable; its domain is the product of its ordered parents (arity 1
/// when exogenous). Optional named preset distributions describe how a
/// variable may be set by an intervention.
struct CausalModel {
  Dag dag;
  std::vector<VariableSpec> variables;        // by vertex index, aligned with dag
  std::vector<StochasticChannel> mechanisms;  // by vertex index
  std::map<std::string, std::map<std::string, Distribution>> presets;

  std::size_t vertex_count() const { return dag.vertex_count(); }
  std::size_t arity(std::size_t v) const { return variables[v].arity(); }
  std::size_t parent_domain_size(std::size_t v) const;
  IndexScheme joint_scheme() const;             // all vertices, declared order
  IndexScheme parent_scheme(std::size_t v) const;
};

/// Everything in one report: arity rules, column sums, negative entries,
/// preset shapes. An empty report means the model is well formed.
ValidationReport validate_model(const CausalModel& model, double tol = kDefaultTol);

/// Knobs for the enumeration kernels.
struct EvalOptions {
  std::size_t state_cap = kDefaultStateCap;
  bool force_serial = false;
  std::size_t parallel_threshold = 1u << 12;  // below this, stay serial
};

/// Exact joint distribution over all variables in declared vertex order.
/// Throws StateCapExceeded when the product state space exceeds the cap.
Distribution joint_distribution(const CausalModel& model, const EvalOptions& opts = {});

/// Sums out every factor not listed in `keep` (positions into the scheme,
/// ascending). Keeping everything is the identity; keeping nothing yields
/// the scalar total.
Distribution marginal(const Distribution& joint, const IndexScheme& scheme,
                      std::span<const std::size_t> keep, const EvalOptions& opts = {});

/// Graph surgery on the semantics: each targeted vertex loses its incoming
/// edges and its mechanism becomes the given distribution. Untouched
/// mechanisms are shared as-is. Throws ModelError on unknown vertices or
/// arity mismatches.
CausalModel apply_intervention(const CausalModel& model,
                               const std::map<std::string, Distribution>& targets);

}  // namespace causalabs
