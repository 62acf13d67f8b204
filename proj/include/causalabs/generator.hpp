#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "causalabs/abstraction.hpp"
#include "causalabs/model.hpp"
#include "causalabs/syntax.hpp"

namespace causalabs {

/// Deterministic random source. All draws go through our own uniform
/// mappings so the byte stream of generated files depends only on the seed,
/// not on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next();
  double unit();                                        // [0, 1)
  double uniform(double lo, double hi);                 // [lo, hi)
  std::size_t below(std::size_t n);                     // [0, n)
  std::size_t range(std::size_t lo, std::size_t hi);    // [lo, hi] inclusive
  bool chance(double p);

 private:
  std::uint64_t state_;
};

struct GeneratorConfig {
  enum class Kind { Arbitrary, HomogeneousPair, EquivalencePair };

  Kind kind = Kind::Arbitrary;
  std::uint64_t seed = 0;
  std::size_t min_vertices = 2;
  std::size_t max_vertices = 5;
  std::size_t min_arity = 2;
  std::size_t max_arity = 3;
  double edge_prob = 0.5;
  std::size_t max_group_size = 2;   // micro vertices merged per macro vertex
  std::size_t max_macro_vertices = 4;
  /// HomogeneousPair only: move this much probability mass across codomain
  /// cells of one mechanism, breaking homogeneity by at least perturb/2.
  double perturb = 0.0;
};

/// Everything one seeded draw produces. Arbitrary: micro only.
/// HomogeneousPair: micro + hom + per-macro merges (synthesis succeeds unless
/// perturbed). EquivalencePair: micro + macro + hom + permutation candidate.
struct GeneratedInstance {
  CausalModel micro;
  std::optional<CausalModel> macro;
  std::optional<GraphHom> hom;
  std::vector<DeterministicMap> maps;
  std::optional<AbstractionCandidate> candidate;
};

GeneratedInstance generate_instance(const GeneratorConfig& config);

// Building blocks, also used directly by the test suites.

/// Entries drawn from [0.01, 1) and normalized per column.
StochasticChannel random_channel(Rng& rng, std::size_t codomain, std::size_t domain);
Distribution random_distribution(Rng& rng, std::size_t arity);
/// Surjective assignment of `domain_size` values onto `codomain` labels
/// ("w0", "w1", ...).
DeterministicMap random_map(Rng& rng, std::vector<std::size_t> domain_arities,
                            std::size_t codomain);
/// Channel built block by block so the column-sum test passes exactly: block
/// (i, j) is constants(j, i) times a random column-stochastic block.
StochasticChannel random_homogeneous_channel(Rng& rng, const DeterministicMap& tau_domain,
                                             const DeterministicMap& tau_codomain);
/// Moves `amount` mass between two codomain cells inside one column of f.
/// Requires at least two codomain cells; picks a donor entry >= amount.
void perturb_across_cells(Rng& rng, StochasticChannel& f, const DeterministicMap& tau_domain,
                          const DeterministicMap& tau_codomain, double amount);
/// Random DAG on `n` vertices named with `prefix`; edges follow index order.
Dag random_dag(Rng& rng, std::size_t n, double edge_prob, const std::string& prefix);
/// Random model on the given DAG with arities drawn from [min_arity,
/// max_arity]; every vertex also gets a "do" preset.
CausalModel random_model_on(Rng& rng, const Dag& dag, std::size_t min_arity,
                            std::size_t max_arity);

}  // namespace causalabs
