#pragma once

#include <optional>
#include <string>
#include <vector>

#include "causalabs/channel.hpp"
#include "causalabs/model.hpp"
#include "causalabs/syntax.hpp"
#include "causalabs/types.hpp"

namespace causalabs {

/// A proposed translation from a micro model to a macro model over a graph
/// homomorphism: one channel per macro vertex, from the product of its
/// preimage variables (micro vertex order) to the macro variable. A macro
/// vertex with empty preimage gets a one-column prior.
struct AbstractionCandidate {
  GraphHom hom;
  std::vector<StochasticChannel> components;  // by target vertex index
};

/// Per-micro-vertex translation channels, the shape used by the edgewise
/// naturality check (each maps a micro variable to its image variable).
struct EdgewiseComponents {
  std::vector<StochasticChannel> per_micro;  // by source vertex index
};

/// A total surjective map from a product of micro values onto macro values,
/// i.e. a value-level merge. Induces a 0/1 channel with one 1 per column.
struct DeterministicMap {
  std::vector<std::size_t> domain_arities;   // ordered factors
  std::vector<std::string> codomain_values;  // ordered macro value labels
  std::vector<std::size_t> assignment;       // flat domain index -> codomain index

  std::size_t domain_size() const;
  std::size_t codomain_arity() const { return codomain_values.size(); }
  bool is_surjective() const;
  /// Preimage classes per codomain value, ascending domain indices.
  std::vector<std::vector<std::size_t>> cells() const;
  StochasticChannel to_channel() const;
};

/// Tensor of maps: concatenated domains, product codomain, first factor most
/// significant. Codomain labels are the comma-joined factor labels.
DeterministicMap tensor_maps(std::span<const DeterministicMap> maps);

/// A channel's rows and columns regrouped so that the cells of two value
/// merges are contiguous, together with the permutations used.
struct BlockPartition {
  StochasticChannel permuted;               // rows/cols reordered cell-by-cell
  std::vector<std::size_t> col_perm;        // permuted position -> original column
  std::vector<std::size_t> row_perm;        // permuted position -> original row
  std::vector<std::size_t> col_offsets;     // size m+1, cell boundaries
  std::vector<std::size_t> row_offsets;     // size s+1

  std::size_t domain_cells() const { return col_offsets.size() - 1; }
  std::size_t codomain_cells() const { return row_offsets.size() - 1; }
};

/// Verdict of the block column-sum test: per block (domain cell i, codomain
/// cell j) the constant the column sums should equal, plus every column that
/// deviates from it.
struct HomogeneityReport {
  bool pass = true;
  std::size_t domain_cells = 0;
  std::size_t codomain_cells = 0;
  std::vector<double> constants;  // (j, i) -> constants[j * domain_cells + i]
  double worst_deviation = 0.0;

  struct Failure {
    std::size_t cell_i;
    std::size_t cell_j;
    std::size_t column;  // original (unpermuted) column index
    double column_sum;
    double constant;
  };
  std::vector<Failure> failures;
  BlockPartition partition;

  double constant(std::size_t i, std::size_t j) const { return constants[j * domain_cells + i]; }
};

/// Synthesis was asked for a mechanism that admits no exact coarse
/// counterpart; carries the failing report and, when known, the macro vertex.
class NotHomogeneous : public ModelError {
 public:
  NotHomogeneous(std::string msg, HomogeneityReport rep)
      : ModelError(std::move(msg)), report(std::move(rep)) {}
  HomogeneityReport report;
  std::string vertex;  // macro vertex, when synthesis ran model-wide
};

/// A naturality mode's precondition does not hold for the given data.
class ModePrecondition : public ModelError {
 public:
  using ModelError::ModelError;
};

enum class NaturalityMode { Grouped, Edgewise };

struct NaturalityCheck {
  std::string label;  // vertex the square belongs to
  StochasticChannel lhs;
  StochasticChannel rhs;
  double max_deviation = 0.0;
};

struct NaturalityReport {
  NaturalityMode mode = NaturalityMode::Grouped;
  double tolerance = kDefaultTol;
  std::vector<NaturalityCheck> checks;
  double max_deviation = 0.0;
  bool pass = true;
};

struct EquivalenceReport {
  NaturalityReport naturality;
  std::vector<std::string> non_permutation_components;  // macro vertex names
  bool equivalent = false;
};

struct SweepEntry {
  std::vector<std::string> targets;  // macro vertex names, ascending
  double max_deviation = 0.0;
};

struct InterventionSweepReport {
  double tolerance = 0.0;
  std::vector<SweepEntry> entries;  // lexicographic target order
  double worst_deviation = 0.0;
  bool pass = true;
};

struct SweepOptions {
  double tol = 1e-7;
  bool singletons_only = false;  // restrict to the empty set and singletons
  /// When non-empty, evaluate exactly these cut sets (macro vertex indices),
  /// in the given order, instead of enumerating.
  std::vector<std::vector<std::size_t>> only_cuts;
  std::size_t state_cap = kDefaultStateCap;
  bool parallel = true;
};

/// Builds the 0/1 candidate induced by one value merge per macro vertex.
/// Throws ModelError on shape mismatch or non-surjective maps.
AbstractionCandidate candidate_from_maps(const GraphHom& hom, const CausalModel& micro,
                                         std::span<const DeterministicMap> maps);

/// The micro semantics of one merged group: a channel from the product of
/// the preimages of the macro parents (macro parent order, members in micro
/// vertex order) to the product of the group (micro vertex order). Each
/// member contributes its mechanism applied to its own parents' coordinates;
/// parentless members contribute their priors.
StochasticChannel group_channel(const CausalModel& micro, const GraphHom& hom,
                                std::size_t macro_vertex);

/// Checks the commuting squares between the two models under the candidate.
/// Grouped mode compares, per macro vertex, translating after the group
/// semantics against the macro mechanism after translating the parents.
NaturalityReport check_naturality(const CausalModel& micro, const CausalModel& macro,
                                  const AbstractionCandidate& cand, NaturalityMode mode,
                                  double tol = kDefaultTol);

/// Edgewise squares with explicit per-micro-vertex channels. Requires that
/// the vertex map is injective on each parent set and introduces no extra
/// macro parents.
NaturalityReport check_naturality_edgewise(const CausalModel& micro, const CausalModel& macro,
                                           const GraphHom& hom, const EdgewiseComponents& comps,
                                           double tol = kDefaultTol);

/// Grouped naturality plus the requirement that every component is a
/// permutation (the invertible stochastic matrices).
EquivalenceReport check_equivalence(const CausalModel& micro, const CausalModel& macro,
                                    const AbstractionCandidate& cand, double tol = kDefaultTol);

/// Pushes a micro joint distribution to a macro one by translating each
/// merged group through its component channel.
Distribution pushforward(const CausalModel& micro, const AbstractionCandidate& cand,
                         const Distribution& micro_joint, const EvalOptions& opts = {});

/// For every macro cut set: intervene the micro model on the preimage with
/// the given per-vertex distributions and push its joint forward; intervene
/// the macro model on the cut set with the translated distributions; compare
/// the two macro joints entrywise. `micro_interventions` has one entry per
/// micro vertex.
InterventionSweepReport check_intervention_consistency(
    const CausalModel& micro, const CausalModel& macro, const AbstractionCandidate& cand,
    std::span<const Distribution> micro_interventions, const SweepOptions& opts = {});

/// Regroups a channel so both value merges have contiguous cells; throws
/// ModelError on arity mismatch or non-surjective maps.
BlockPartition partition_blocks(const StochasticChannel& f, const DeterministicMap& tau_domain,
                                const DeterministicMap& tau_codomain);

/// Block column-sum test: per block the constant is the mean of its column
/// sums; a column failing |sum - constant| <= tol is reported.
HomogeneityReport check_homogeneity(const StochasticChannel& f, const DeterministicMap& tau_domain,
                                    const DeterministicMap& tau_codomain, double tol = kDefaultTol);

/// The coarse mechanism whose (j, i) entry is the block constant. Throws
/// NotHomogeneous when the test fails.
StochasticChannel synthesize_macro_mechanism(const StochasticChannel& f,
                                             const DeterministicMap& tau_domain,
                                             const DeterministicMap& tau_codomain,
                                             double tol = kDefaultTol);

struct SynthesisResult {
  CausalModel macro;
  AbstractionCandidate candidate;
};

/// Synthesizes the whole macro model: per macro vertex, the group channel is
/// tested against the tensor of the parent merges and the vertex merge, and
/// the block constants become the macro mechanism. Requires that the vertex
/// map introduces no extra macro parents. Throws NotHomogeneous (naming the
/// vertex) or ModelError on precondition violations.
SynthesisResult synthesize_abstraction(const CausalModel& micro, const GraphHom& hom,
                                       std::span<const DeterministicMap> maps,
                                       double tol = kDefaultTol);

}  // namespace causalabs
