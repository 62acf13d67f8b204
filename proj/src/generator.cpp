#include "causalabs/generator.hpp"

#include <algorithm>
#include <cmath>

namespace causalabs {

std::uint64_t Rng::next() {
  // splitmix64; stable across platforms and standard libraries.
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw ModelError("rng: empty range");
  return static_cast<std::size_t>(static_cast<unsigned __int128>(next()) * n >> 64);
}

std::size_t Rng::range(std::size_t lo, std::size_t hi) {
  if (lo > hi) throw ModelError("rng: inverted range");
  return lo + below(hi - lo + 1);
}

bool Rng::chance(double p) { return unit() < p; }

StochasticChannel random_channel(Rng& rng, std::size_t codomain, std::size_t domain) {
  StochasticChannel ch(codomain, domain);
  for (std::size_t c = 0; c < domain; ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < codomain; ++r) {
      ch(r, c) = rng.uniform(0.01, 1.0);
      total += ch(r, c);
    }
    for (std::size_t r = 0; r < codomain; ++r) ch(r, c) /= total;
  }
  return ch;
}

Distribution random_distribution(Rng& rng, std::size_t arity) {
  Distribution d;
  d.weights.resize(arity);
  double total = 0.0;
  for (double& w : d.weights) {
    w = rng.uniform(0.01, 1.0);
    total += w;
  }
  for (double& w : d.weights) w /= total;
  return d;
}

DeterministicMap random_map(Rng& rng, std::vector<std::size_t> domain_arities,
                            std::size_t codomain) {
  DeterministicMap m;
  m.domain_arities = std::move(domain_arities);
  const std::size_t ds = m.domain_size();
  if (codomain == 0 || codomain > ds) {
    throw ModelError("random map: codomain must be in [1, domain size]");
  }
  for (std::size_t i = 0; i < codomain; ++i) m.codomain_values.push_back("w" + std::to_string(i));
  m.assignment.resize(ds);
  for (std::size_t x = 0; x < ds; ++x) m.assignment[x] = rng.below(codomain);
  // Anchor one distinct slot per codomain value so the map is surjective.
  std::vector<std::size_t> slots(ds);
  for (std::size_t i = 0; i < ds; ++i) slots[i] = i;
  for (std::size_t i = 0; i < codomain; ++i) {
    const std::size_t j = i + rng.below(ds - i);
    std::swap(slots[i], slots[j]);
    m.assignment[slots[i]] = i;
  }
  return m;
}

StochasticChannel random_homogeneous_channel(Rng& rng, const DeterministicMap& tau_domain,
                                             const DeterministicMap& tau_codomain) {
  const std::size_t cols = tau_domain.domain_size();
  const std::size_t rows = tau_codomain.domain_size();
  StochasticChannel f(rows, cols);
  const auto col_cells = tau_domain.cells();
  const auto row_cells = tau_codomain.cells();
  for (const auto& cell : col_cells) {
    const Distribution cell_mass = random_distribution(rng, row_cells.size());
    for (std::size_t c : cell) {
      for (std::size_t j = 0; j < row_cells.size(); ++j) {
        std::vector<double> w(row_cells[j].size());
        double total = 0.0;
        for (double& x : w) {
          x = rng.uniform(0.01, 1.0);
          total += x;
        }
        for (std::size_t k = 0; k < row_cells[j].size(); ++k) {
          f(row_cells[j][k], c) = cell_mass.weights[j] * (w[k] / total);
        }
      }
    }
  }
  return f;
}

void perturb_across_cells(Rng& rng, StochasticChannel& f, const DeterministicMap& tau_domain,
                          const DeterministicMap& tau_codomain, double amount) {
  if (tau_codomain.codomain_arity() < 2) {
    throw ModelError("perturbation needs at least two codomain cells");
  }
  std::vector<std::size_t> eligible;
  for (const auto& cell : tau_domain.cells()) {
    if (cell.size() >= 2) eligible.insert(eligible.end(), cell.begin(), cell.end());
  }
  if (eligible.empty()) {
    throw ModelError("perturbation needs a merged domain cell (two or more columns)");
  }
  const std::size_t c = eligible[rng.below(eligible.size())];
  std::size_t donor = f.codomain_arity();
  for (std::size_t r = 0; r < f.codomain_arity(); ++r) {
    if (f(r, c) >= amount && (donor == f.codomain_arity() || f(r, c) > f(donor, c))) donor = r;
  }
  if (donor == f.codomain_arity()) {
    throw ModelError("perturbation amount exceeds every entry of the chosen column");
  }
  const std::size_t donor_cell = tau_codomain.assignment[donor];
  std::vector<std::size_t> receivers;
  for (std::size_t r = 0; r < f.codomain_arity(); ++r) {
    if (tau_codomain.assignment[r] != donor_cell) receivers.push_back(r);
  }
  const std::size_t receiver = receivers[rng.below(receivers.size())];
  f(donor, c) -= amount;
  f(receiver, c) += amount;
}

Dag random_dag(Rng& rng, std::size_t n, double edge_prob, const std::string& prefix) {
  std::vector<std::string> vertices;
  for (std::size_t i = 0; i < n; ++i) vertices.push_back(prefix + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.chance(edge_prob)) edges.emplace_back(vertices[i], vertices[j]);
    }
  }
  return Dag::from_edges(std::move(vertices), edges);
}

CausalModel random_model_on(Rng& rng, const Dag& dag, std::size_t min_arity,
                            std::size_t max_arity) {
  CausalModel model;
  model.dag = dag;
  for (std::size_t v = 0; v < dag.vertex_count(); ++v) {
    VariableSpec spec;
    spec.name = dag.vertex_name(v);
    const std::size_t arity = rng.range(min_arity, max_arity);
    for (std::size_t k = 0; k < arity; ++k) spec.values.push_back("v" + std::to_string(k));
    model.variables.push_back(std::move(spec));
  }
  for (std::size_t v = 0; v < dag.vertex_count(); ++v) {
    std::size_t dom = 1;
    for (std::size_t p : dag.parents(v)) dom *= model.arity(p);
    model.mechanisms.push_back(random_channel(rng, model.arity(v), dom));
    model.presets[dag.vertex_name(v)]["do"] = random_distribution(rng, model.arity(v));
  }
  return model;
}

namespace {

GeneratedInstance generate_arbitrary(Rng& rng, const GeneratorConfig& cfg) {
  GeneratedInstance out;
  const std::size_t n = rng.range(cfg.min_vertices, cfg.max_vertices);
  out.micro = random_model_on(rng, random_dag(rng, n, cfg.edge_prob, "x"), cfg.min_arity,
                              cfg.max_arity);
  return out;
}

GeneratedInstance generate_equivalence_pair(Rng& rng, const GeneratorConfig& cfg) {
  const std::size_t min_arity = std::max<std::size_t>(cfg.min_arity, 2);
  const std::size_t max_arity = std::max(min_arity, cfg.max_arity);
  const std::size_t n = rng.range(std::max<std::size_t>(cfg.min_vertices, 1), cfg.max_vertices);

  GeneratedInstance out;
  const Dag micro_dag = random_dag(rng, n, cfg.edge_prob, "x");
  out.micro = random_model_on(rng, micro_dag, min_arity, max_arity);

  std::vector<std::string> macro_names;
  std::vector<std::vector<std::size_t>> parents;
  for (std::size_t v = 0; v < n; ++v) {
    macro_names.push_back("y" + std::to_string(v));
    parents.push_back(micro_dag.parents(v));
  }
  Dag macro_dag(macro_names, parents);

  GraphHom hom;
  hom.source = micro_dag;
  hom.target = macro_dag;
  hom.map.resize(n);
  for (std::size_t v = 0; v < n; ++v) hom.map[v] = v;

  // Per-vertex value permutation; the macro model is the relabelled micro
  // model, so the permutations form an exact translation.
  std::vector<StochasticChannel> perms;
  CausalModel macro;
  macro.dag = macro_dag;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t a = out.micro.arity(v);
    std::vector<std::size_t> pi(a);
    for (std::size_t k = 0; k < a; ++k) pi[k] = k;
    for (std::size_t k = 0; k + 1 < a; ++k) std::swap(pi[k], pi[k + rng.below(a - k)]);
    StochasticChannel perm(a, a);
    for (std::size_t k = 0; k < a; ++k) perm(pi[k], k) = 1.0;
    perms.push_back(std::move(perm));

    VariableSpec spec;
    spec.name = macro_names[v];
    for (std::size_t k = 0; k < a; ++k) spec.values.push_back("w" + std::to_string(k));
    macro.variables.push_back(std::move(spec));
  }
  for (std::size_t v = 0; v < n; ++v) {
    StochasticChannel parent_perm = StochasticChannel::scalar();
    for (std::size_t p : macro_dag.parents(v)) {
      // Inverse of a permutation channel is its transpose.
      const StochasticChannel& pp = perms[p];
      StochasticChannel inv(pp.domain_arity(), pp.codomain_arity());
      for (std::size_t r = 0; r < pp.codomain_arity(); ++r) {
        for (std::size_t c = 0; c < pp.domain_arity(); ++c) inv(c, r) = pp(r, c);
      }
      parent_perm = tensor(parent_perm, inv);
    }
    macro.mechanisms.push_back(compose(compose(perms[v], out.micro.mechanisms[v]), parent_perm));
  }

  AbstractionCandidate cand;
  cand.hom = hom;
  cand.components = perms;
  out.macro = std::move(macro);
  out.hom = std::move(hom);
  out.candidate = std::move(cand);
  return out;
}

GeneratedInstance generate_homogeneous_pair(Rng& rng, const GeneratorConfig& cfg) {
  const bool perturbed = cfg.perturb > 0.0;
  const std::size_t min_arity =
      perturbed ? std::max<std::size_t>(cfg.min_arity, 2) : std::max<std::size_t>(cfg.min_arity, 1);
  const std::size_t max_arity = std::max(min_arity, cfg.max_arity);
  const std::size_t group_cap = perturbed ? 1 : std::max<std::size_t>(cfg.max_group_size, 1);

  std::size_t n = rng.range(std::max<std::size_t>(cfg.min_vertices, 1), cfg.max_vertices);
  n = std::min(n, cfg.max_macro_vertices * group_cap);

  // Group sizes: every macro vertex gets at least one micro vertex, the rest
  // join groups below the cap.
  const std::size_t lo = (n + group_cap - 1) / group_cap;
  const std::size_t hi = std::min(n, cfg.max_macro_vertices);
  const std::size_t m = rng.range(std::min(lo, hi), hi);
  std::vector<std::size_t> sizes(m, 1);
  for (std::size_t extra = 0; extra < n - m; ++extra) {
    std::vector<std::size_t> open;
    for (std::size_t g = 0; g < m; ++g) {
      if (sizes[g] < group_cap) open.push_back(g);
    }
    ++sizes[open[rng.below(open.size())]];
  }

  Dag macro_dag = random_dag(rng, m, cfg.edge_prob, "a");
  if (perturbed && macro_dag.edge_count() == 0) {
    if (m < 2) throw ModelError("perturbation needs at least two macro vertices");
    std::vector<std::pair<std::string, std::string>> edges{{"a0", "a1"}};
    macro_dag = Dag::from_edges(macro_dag.vertices(), edges);
  }

  // Micro vertices group-major; members of merged groups see every member of
  // every parent group, so parent coordinates line up with the macro side.
  std::vector<std::vector<std::size_t>> members(m);
  std::vector<std::string> micro_names;
  std::vector<std::size_t> vertex_group;
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t k = 0; k < sizes[g]; ++k) {
      members[g].push_back(micro_names.size());
      micro_names.push_back("x" + std::to_string(micro_names.size()));
      vertex_group.push_back(g);
    }
  }
  std::vector<std::pair<std::string, std::string>> micro_edges;
  for (std::size_t g = 0; g < m; ++g) {
    for (std::size_t pg : macro_dag.parents(g)) {
      for (std::size_t u : members[pg]) {
        for (std::size_t v : members[g]) {
          micro_edges.emplace_back(micro_names[u], micro_names[v]);
        }
      }
    }
  }
  const Dag micro_dag = Dag::from_edges(micro_names, micro_edges);

  GraphHom hom;
  hom.source = micro_dag;
  hom.target = macro_dag;
  hom.map = vertex_group;

  CausalModel micro;
  micro.dag = micro_dag;
  std::vector<std::size_t> arities;
  for (std::size_t v = 0; v < micro_names.size(); ++v) {
    VariableSpec spec;
    spec.name = micro_names[v];
    const std::size_t a = rng.range(min_arity, max_arity);
    for (std::size_t k = 0; k < a; ++k) spec.values.push_back("v" + std::to_string(k));
    arities.push_back(a);
    micro.variables.push_back(std::move(spec));
  }

  // When a perturbation is requested, fix up a target: the last vertex with
  // parents, a merged cell in its first parent's values, and at least two
  // cells of its own.
  std::size_t perturb_vertex = micro_names.size();
  if (perturbed) {
    for (std::size_t v = micro_names.size(); v-- > 0;) {
      if (!micro_dag.parents(v).empty()) {
        perturb_vertex = v;
        break;
      }
    }
    if (perturb_vertex == micro_names.size()) throw ModelError("perturbation found no mechanism");
  }

  std::vector<DeterministicMap> maps(m);
  for (std::size_t g = 0; g < m; ++g) {
    std::vector<std::size_t> dom;
    for (std::size_t u : members[g]) dom.push_back(arities[u]);
    std::size_t ds = 1;
    for (std::size_t a : dom) ds *= a;
    std::size_t lo_cells = 1;
    std::size_t hi_cells = std::min<std::size_t>(ds, 4);
    if (perturbed) {
      const std::size_t pv = perturb_vertex;
      const std::size_t first_parent_group = vertex_group[micro_dag.parents(pv).front()];
      if (g == first_parent_group) hi_cells = std::min(hi_cells, ds - 1);  // force a merge
      if (g == vertex_group[pv]) lo_cells = 2;                             // force two cells
    }
    maps[g] = random_map(rng, dom, rng.range(std::min(lo_cells, hi_cells), hi_cells));
  }

  micro.mechanisms.resize(micro_names.size(), StochasticChannel::scalar());
  for (std::size_t g = 0; g < m; ++g) {
    std::vector<DeterministicMap> parent_maps;
    for (std::size_t pg : macro_dag.parents(g)) parent_maps.push_back(maps[pg]);
    const DeterministicMap tau_parents = tensor_maps(parent_maps);
    if (macro_dag.parents(g).empty()) {
      for (std::size_t u : members[g]) {
        micro.mechanisms[u] = StochasticChannel::from_column(random_distribution(rng, arities[u]));
      }
    } else if (members[g].size() == 1) {
      // Free block-by-block construction; columns vary inside each block.
      micro.mechanisms[members[g].front()] =
          random_homogeneous_channel(rng, tau_parents, maps[g]);
    } else {
      // Members depend on their parents only through the merged parent
      // cells, so the group channel repeats columns within every block.
      for (std::size_t u : members[g]) {
        const StochasticChannel table =
            random_channel(rng, arities[u], tau_parents.codomain_arity());
        StochasticChannel mech(arities[u], tau_parents.domain_size());
        for (std::size_t c = 0; c < mech.domain_arity(); ++c) {
          for (std::size_t r = 0; r < mech.codomain_arity(); ++r) {
            mech(r, c) = table(r, tau_parents.assignment[c]);
          }
        }
        micro.mechanisms[u] = std::move(mech);
      }
    }
  }
  for (std::size_t v = 0; v < micro_names.size(); ++v) {
    micro.presets[micro_names[v]]["do"] = random_distribution(rng, arities[v]);
  }

  GeneratedInstance out;
  out.micro = std::move(micro);
  out.hom = hom;
  out.maps = maps;
  if (perturbed) {
    std::vector<DeterministicMap> parent_maps;
    for (std::size_t pg : macro_dag.parents(perturb_vertex)) parent_maps.push_back(maps[pg]);
    perturb_across_cells(rng, out.micro.mechanisms[perturb_vertex], tensor_maps(parent_maps),
                         maps[vertex_group[perturb_vertex]], cfg.perturb);
  } else {
    SynthesisResult synth = synthesize_abstraction(out.micro, hom, maps);
    out.macro = std::move(synth.macro);
    out.candidate = std::move(synth.candidate);
  }
  return out;
}

}  // namespace

GeneratedInstance generate_instance(const GeneratorConfig& config) {
  if (config.min_vertices == 0 || config.min_vertices > config.max_vertices) {
    throw ModelError("generator: bad vertex range");
  }
  if (config.min_arity == 0 || config.min_arity > config.max_arity) {
    throw ModelError("generator: bad arity range");
  }
  Rng rng(config.seed);
  switch (config.kind) {
    case GeneratorConfig::Kind::Arbitrary:
      return generate_arbitrary(rng, config);
    case GeneratorConfig::Kind::HomogeneousPair:
      return generate_homogeneous_pair(rng, config);
    case GeneratorConfig::Kind::EquivalencePair:
      return generate_equivalence_pair(rng, config);
  }
  throw ModelError("generator: unknown kind");
}

}  // namespace causalabs
