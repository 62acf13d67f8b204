#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "causalabs/abstraction.hpp"
#include "causalabs/generator.hpp"
#include "causalabs/model.hpp"
#include "oracles.hpp"

using namespace causalabs;

namespace {

DeterministicMap make_map(std::vector<std::size_t> domain_arities,
                          std::vector<std::string> labels, std::vector<std::size_t> assignment) {
  DeterministicMap m;
  m.domain_arities = std::move(domain_arities);
  m.codomain_values = std::move(labels);
  m.assignment = std::move(assignment);
  return m;
}

// Micro chain X(3) -> Y(2) whose mechanism has constant column sums on the
// cells {x1, x2}, {x3}; the matching coarse chain has mechanism g.
struct ChainPair {
  CausalModel micro;
  CausalModel macro;
  GraphHom hom;
  std::vector<DeterministicMap> maps;
  AbstractionCandidate candidate;

  ChainPair() {
    micro.dag = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
    micro.variables = {{"X", {"x1", "x2", "x3"}}, {"Y", {"y1", "y2"}}};
    micro.mechanisms = {StochasticChannel::from_rows({{0.2}, {0.3}, {0.5}}),
                        StochasticChannel::from_rows({{0.3, 0.3, 0.6}, {0.7, 0.7, 0.4}})};

    macro.dag = Dag::from_edges({"X'", "Y'"}, {{"X'", "Y'"}});
    macro.variables = {{"X'", {"lo", "hi"}}, {"Y'", {"y1", "y2"}}};
    macro.mechanisms = {StochasticChannel::from_rows({{0.5}, {0.5}}),
                        StochasticChannel::from_rows({{0.3, 0.6}, {0.7, 0.4}})};

    hom = GraphHom::from_names(micro.dag, macro.dag, {{"X", "X'"}, {"Y", "Y'"}});
    maps = {make_map({3}, {"lo", "hi"}, {0, 0, 1}), make_map({2}, {"y1", "y2"}, {0, 1})};
    candidate = candidate_from_maps(hom, micro, maps);
  }
};

// Fork diet -> {ldl, hdl} -> hd with the two cholesterol variables merged.
struct HeartPair {
  CausalModel micro;
  GraphHom hom;
  std::vector<DeterministicMap> maps;

  explicit HeartPair(bool homogeneous) {
    micro.dag = Dag::from_edges(
        {"diet", "ldl", "hdl", "hd"},
        {{"diet", "ldl"}, {"diet", "hdl"}, {"ldl", "hd"}, {"hdl", "hd"}});
    micro.variables = {{"diet", {"poor", "good"}},
                       {"ldl", {"high", "low"}},
                       {"hdl", {"high", "low"}},
                       {"hd", {"disease", "healthy"}}};
    const double last = homogeneous ? 0.7 : 0.55;
    micro.mechanisms = {
        StochasticChannel::from_rows({{0.4}, {0.6}}),
        StochasticChannel::from_rows({{0.8, 0.3}, {0.2, 0.7}}),
        StochasticChannel::from_rows({{0.3, 0.6}, {0.7, 0.4}}),
        // Columns over (ldl, hdl): the first three parent states are the
        // merged ones and must act identically for an exact coarse model.
        StochasticChannel::from_rows({{0.7, 0.7, last, 0.1}, {0.3, 0.3, 1.0 - last, 0.9}})};

    const Dag macro_dag =
        Dag::from_edges({"diet", "tc", "hd"}, {{"diet", "tc"}, {"tc", "hd"}});
    hom = GraphHom::from_names(micro.dag, macro_dag,
                               {{"diet", "diet"}, {"ldl", "tc"}, {"hdl", "tc"}, {"hd", "hd"}});
    maps = {make_map({2}, {"poor", "good"}, {0, 1}),
            make_map({2, 2}, {"high", "low"}, {0, 0, 0, 1}),
            make_map({2}, {"disease", "healthy"}, {0, 1})};
  }
};

std::vector<Distribution> preset_interventions(const CausalModel& m) {
  std::vector<Distribution> out;
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    out.push_back(m.presets.at(m.dag.vertex_name(v)).at("do"));
  }
  return out;
}

}  // namespace

TEST_CASE("a value merge induces a 0/1 channel with one hit per column") {
  const DeterministicMap tc = make_map({2, 2}, {"t1", "t2"}, {0, 0, 0, 1});
  const StochasticChannel ch = tc.to_channel();
  CHECK(ch.rows() == std::vector<std::vector<double>>{{1, 1, 1, 0}, {0, 0, 0, 1}});
  for (std::size_t x = 0; x < 4; ++x) {
    const Distribution pushed = ch.apply(Distribution::point_mass(4, x));
    CHECK(pushed == Distribution::point_mass(2, tc.assignment[x]));
  }
}

TEST_CASE("a bijective merge yields a permutation component") {
  const DeterministicMap swap = make_map({2}, {"a", "b"}, {1, 0});
  CHECK(swap.to_channel().is_permutation());
}

TEST_CASE("a constant merge onto one value is the all-ones row") {
  const DeterministicMap squash = make_map({3}, {"only"}, {0, 0, 0});
  CHECK(squash.to_channel().rows() == std::vector<std::vector<double>>{{1, 1, 1}});
}

TEST_CASE("non-surjective merges are rejected") {
  const ChainPair cp;
  std::vector<DeterministicMap> maps = cp.maps;
  maps[0] = make_map({3}, {"lo", "hi"}, {0, 0, 0});
  CHECK_THROWS_AS((void)candidate_from_maps(cp.hom, cp.micro, maps), ModelError);
}

TEST_CASE("tensoring merges concatenates domains and pairs values") {
  const DeterministicMap a = make_map({2}, {"p", "q"}, {0, 1});
  const DeterministicMap b = make_map({2}, {"s", "t"}, {1, 0});
  const std::vector<DeterministicMap> maps{a, b};
  const DeterministicMap t = tensor_maps(maps);
  CHECK(t.domain_arities == std::vector<std::size_t>{2, 2});
  CHECK(t.codomain_values == std::vector<std::string>{"p,s", "p,t", "q,s", "q,t"});
  // (x=1, y=0) maps to (q, t) = index 3.
  CHECK(t.assignment == std::vector<std::size_t>{1, 0, 3, 2});
  CHECK(tensor_maps(std::vector<DeterministicMap>{}).domain_size() == 1);
}

TEST_CASE("a singleton group's channel is its own mechanism") {
  const ChainPair cp;
  const StochasticChannel g = group_channel(cp.micro, cp.hom, 1);
  CHECK(max_abs_diff(g, cp.micro.mechanisms[1]) == 0.0);
  const StochasticChannel prior = group_channel(cp.micro, cp.hom, 0);
  CHECK(max_abs_diff(prior, cp.micro.mechanisms[0]) == 0.0);
}

TEST_CASE("a merged group's channel tensors the members per parent state") {
  const HeartPair hp(true);
  const StochasticChannel g = group_channel(hp.micro, hp.hom, 1);  // tc = {ldl, hdl}
  REQUIRE(g.codomain_arity() == 4);
  REQUIRE(g.domain_arity() == 2);
  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t l = 0; l < 2; ++l) {
      for (std::size_t h = 0; h < 2; ++h) {
        const double expected = hp.micro.mechanisms[1](l, d) * hp.micro.mechanisms[2](h, d);
        CHECK(g(l * 2 + h, d) == doctest::Approx(expected).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("coordinates no member reads do not affect the group channel") {
  // A and B merge into one macro cause, but Y only reads A.
  CausalModel micro;
  micro.dag = Dag::from_edges({"A", "B", "Y"}, {{"A", "Y"}});
  micro.variables = {{"A", {"a1", "a2"}}, {"B", {"b1", "b2"}}, {"Y", {"y1", "y2"}}};
  micro.mechanisms = {StochasticChannel::from_rows({{0.5}, {0.5}}),
                      StochasticChannel::from_rows({{0.2}, {0.8}}),
                      StochasticChannel::from_rows({{0.9, 0.4}, {0.1, 0.6}})};
  const Dag macro_dag = Dag::from_edges({"AB", "Y'"}, {{"AB", "Y'"}});
  const GraphHom hom =
      GraphHom::from_names(micro.dag, macro_dag, {{"A", "AB"}, {"B", "AB"}, {"Y", "Y'"}});
  const StochasticChannel g = group_channel(micro, hom, 1);
  REQUIRE(g.domain_arity() == 4);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(g(0, a * 2 + 0) == g(0, a * 2 + 1));  // b coordinate ignored
    CHECK(g(0, a * 2 + 0) == doctest::Approx(micro.mechanisms[2](0, a)));
  }
}

TEST_CASE("identical models under the identity candidate are natural with zero deviation") {
  const ChainPair cp;
  const GraphHom ident = GraphHom::from_names(cp.micro.dag, cp.micro.dag,
                                              {{"X", "X"}, {"Y", "Y"}});
  AbstractionCandidate cand;
  cand.hom = ident;
  cand.components = {StochasticChannel::identity(3), StochasticChannel::identity(2)};
  const NaturalityReport report =
      check_naturality(cp.micro, cp.micro, cand, NaturalityMode::Grouped);
  CHECK(report.pass);
  CHECK(report.max_deviation == 0.0);
}

TEST_CASE("the constant-column-sum chain is a grouped abstraction") {
  const ChainPair cp;
  const NaturalityReport report =
      check_naturality(cp.micro, cp.macro, cp.candidate, NaturalityMode::Grouped);
  CHECK(report.pass);
  CHECK(report.max_deviation <= 1e-15);
  // Both composite channels of the effect square equal the hand product.
  const auto lhs = oracles::multiply(cp.candidate.components[1].rows(),
                                     cp.micro.mechanisms[1].rows());
  const auto rhs = oracles::multiply(cp.macro.mechanisms[1].rows(),
                                     cp.candidate.components[0].rows());
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(report.checks[1].lhs(r, c) == doctest::Approx(lhs[r][c]));
      CHECK(report.checks[1].rhs(r, c) == doctest::Approx(rhs[r][c]));
    }
  }
}

TEST_CASE("a perturbed macro mechanism fails the grouped check by the right amount") {
  ChainPair cp;
  cp.macro.mechanisms[1] = StochasticChannel::from_rows({{0.3, 0.5}, {0.7, 0.5}});
  const NaturalityReport report =
      check_naturality(cp.micro, cp.macro, cp.candidate, NaturalityMode::Grouped);
  CHECK_FALSE(report.pass);
  CHECK(report.max_deviation == doctest::Approx(0.1));
}

TEST_CASE("macro-only causes are handled through prior components") {
  // Micro X -> Y; the macro adds an extra exogenous cause Z' feeding Y'.
  CausalModel micro;
  micro.dag = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
  micro.variables = {{"X", {"x1", "x2"}}, {"Y", {"y1", "y2"}}};
  micro.mechanisms = {StochasticChannel::from_rows({{0.3}, {0.7}}),
                      StochasticChannel::from_rows({{0.3, 0.5}, {0.7, 0.5}})};

  CausalModel macro;
  macro.dag = Dag::from_edges({"X'", "Z'", "Y'"}, {{"X'", "Y'"}, {"Z'", "Y'"}});
  macro.variables = {{"X'", {"x1", "x2"}}, {"Z'", {"z1", "z2"}}, {"Y'", {"y1", "y2"}}};
  macro.mechanisms = {StochasticChannel::from_rows({{0.3}, {0.7}}),
                      StochasticChannel::from_rows({{0.25}, {0.75}}),
                      // The coarse mechanism ignores Z', so the square closes.
                      StochasticChannel::from_rows({{0.3, 0.3, 0.5, 0.5}, {0.7, 0.7, 0.5, 0.5}})};

  const GraphHom hom =
      GraphHom::from_names(micro.dag, macro.dag, {{"X", "X'"}, {"Y", "Y'"}});
  AbstractionCandidate cand;
  cand.hom = hom;
  cand.components = {StochasticChannel::identity(2),
                     StochasticChannel::from_rows({{0.25}, {0.75}}),
                     StochasticChannel::identity(2)};
  const NaturalityReport report = check_naturality(micro, macro, cand, NaturalityMode::Grouped);
  CHECK(report.pass);
  CHECK(report.max_deviation <= 1e-15);

  // The intervention sweep agrees on all eight macro cut sets as well.
  std::vector<Distribution> dists{Distribution::uniform(2), Distribution::point_mass(2, 1)};
  SweepOptions opts;
  opts.tol = 1e-12;
  const InterventionSweepReport sweep =
      check_intervention_consistency(micro, macro, cand, dists, opts);
  CHECK(sweep.pass);
  CHECK(sweep.entries.size() == 8);
}

TEST_CASE("edgewise squares on a merged fork reproduce the three equalities") {
  // X -> Y and X -> Z merge onto X' -> W; with permutation channels the
  // macro mechanism is conjugate to f and g is chosen to match.
  CausalModel micro;
  micro.dag = Dag::from_edges({"X", "Y", "Z"}, {{"X", "Y"}, {"X", "Z"}});
  micro.variables = {{"X", {"x1", "x2"}}, {"Y", {"y1", "y2"}}, {"Z", {"z1", "z2"}}};
  const auto f = StochasticChannel::from_rows({{0.3, 0.5}, {0.7, 0.5}});
  const auto swap = StochasticChannel::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const auto ident = StochasticChannel::identity(2);
  // alpha_X = swap, alpha_Y = ident, alpha_Z = swap; W-mech = f swap^-1 and
  // the Z mechanism is swap^-1 (ident f) = swap f.
  const auto w_mech = compose(f, swap);  // f composed with swap^{-1} = swap
  const auto g = compose(swap, f);
  micro.mechanisms = {StochasticChannel::from_rows({{0.25}, {0.75}}), f, g};

  CausalModel macro;
  macro.dag = Dag::from_edges({"X'", "W"}, {{"X'", "W"}});
  macro.variables = {{"X'", {"a", "b"}}, {"W", {"w1", "w2"}}};
  macro.mechanisms = {compose(swap, micro.mechanisms[0]), w_mech};

  const GraphHom hom = GraphHom::from_names(micro.dag, macro.dag,
                                            {{"X", "X'"}, {"Y", "W"}, {"Z", "W"}});
  EdgewiseComponents comps;
  comps.per_micro = {swap, ident, swap};
  const NaturalityReport report = check_naturality_edgewise(micro, macro, hom, comps);
  CHECK(report.pass);
  CHECK(report.max_deviation <= 1e-15);

  // alpha_Y f = alpha_Z g = W-mech alpha_X, checked pairwise.
  const auto path_y = compose(ident, f);
  const auto path_z = compose(swap, g);
  const auto path_macro = compose(w_mech, swap);
  CHECK(max_abs_diff(path_y, path_z) <= 1e-15);
  CHECK(max_abs_diff(path_y, path_macro) <= 1e-15);

  // Grouped components for merged W cannot be reused edgewise.
  AbstractionCandidate grouped;
  grouped.hom = hom;
  grouped.components = {swap, StochasticChannel::from_rows({{1, 0, 0, 0}, {0, 1, 1, 1}})};
  CHECK_THROWS_AS(
      (void)check_naturality(micro, macro, grouped, NaturalityMode::Edgewise),
      ModePrecondition);
}

TEST_CASE("macro parent order may differ from the micro order") {
  // Y reads (A, B); the coarse vertex declares its parents as (B', A').
  CausalModel micro;
  micro.dag = Dag::from_edges({"A", "B", "Y"}, {{"A", "Y"}, {"B", "Y"}},
                              {{"Y", {"A", "B"}}});
  micro.variables = {{"A", {"a1", "a2"}}, {"B", {"b1", "b2", "b3"}}, {"Y", {"y1", "y2"}}};
  Rng rng(101);
  const StochasticChannel f = random_channel(rng, 2, 6);
  micro.mechanisms = {StochasticChannel::from_rows({{0.3}, {0.7}}),
                      StochasticChannel::from_rows({{0.2}, {0.3}, {0.5}}), f};

  CausalModel macro;
  macro.dag = Dag::from_edges({"A'", "B'", "Y'"}, {{"A'", "Y'"}, {"B'", "Y'"}},
                              {{"Y'", {"B'", "A'"}}});
  macro.variables = {{"A'", {"a1", "a2"}}, {"B'", {"b1", "b2", "b3"}}, {"Y'", {"y1", "y2"}}};
  StochasticChannel g(2, 6);
  for (std::size_t y = 0; y < 2; ++y) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 3; ++b) g(y, b * 2 + a) = f(y, a * 3 + b);
    }
  }
  macro.mechanisms = {micro.mechanisms[0], micro.mechanisms[1], g};

  const GraphHom hom = GraphHom::from_names(micro.dag, macro.dag,
                                            {{"A", "A'"}, {"B", "B'"}, {"Y", "Y'"}});
  AbstractionCandidate cand;
  cand.hom = hom;
  cand.components = {StochasticChannel::identity(2), StochasticChannel::identity(3),
                     StochasticChannel::identity(2)};
  const NaturalityReport grouped =
      check_naturality(micro, macro, cand, NaturalityMode::Grouped);
  CHECK(grouped.pass);
  CHECK(grouped.max_deviation == 0.0);

  EdgewiseComponents comps;
  comps.per_micro = {StochasticChannel::identity(2), StochasticChannel::identity(3),
                     StochasticChannel::identity(2)};
  const NaturalityReport edgewise = check_naturality_edgewise(micro, macro, hom, comps);
  CHECK(edgewise.pass);
  CHECK(edgewise.max_deviation == 0.0);
}

TEST_CASE("edgewise mode refuses extra macro parents") {
  CausalModel micro;
  micro.dag = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
  micro.variables = {{"X", {"x1", "x2"}}, {"Y", {"y1", "y2"}}};
  micro.mechanisms = {StochasticChannel::from_rows({{0.3}, {0.7}}),
                      StochasticChannel::from_rows({{0.3, 0.5}, {0.7, 0.5}})};
  CausalModel macro;
  macro.dag = Dag::from_edges({"X'", "Z'", "Y'"}, {{"X'", "Y'"}, {"Z'", "Y'"}});
  macro.variables = {{"X'", {"x1", "x2"}}, {"Z'", {"z1", "z2"}}, {"Y'", {"y1", "y2"}}};
  macro.mechanisms = {StochasticChannel::from_rows({{0.3}, {0.7}}),
                      StochasticChannel::from_rows({{0.25}, {0.75}}),
                      StochasticChannel::from_rows({{0.3, 0.3, 0.5, 0.5}, {0.7, 0.7, 0.5, 0.5}})};
  const GraphHom hom = GraphHom::from_names(micro.dag, macro.dag, {{"X", "X'"}, {"Y", "Y'"}});
  EdgewiseComponents comps;
  comps.per_micro = {StochasticChannel::identity(2), StochasticChannel::identity(2)};
  CHECK_THROWS_AS((void)check_naturality_edgewise(micro, macro, hom, comps), ModePrecondition);
}

TEST_CASE("edgewise mode accepts singleton-merge candidates directly") {
  const ChainPair cp;
  const NaturalityReport grouped =
      check_naturality(cp.micro, cp.macro, cp.candidate, NaturalityMode::Grouped);
  const NaturalityReport edgewise =
      check_naturality(cp.micro, cp.macro, cp.candidate, NaturalityMode::Edgewise);
  CHECK(edgewise.pass == grouped.pass);
  CHECK(edgewise.mode == NaturalityMode::Edgewise);
}

TEST_CASE("identity translations are equivalences") {
  const ChainPair cp;
  const GraphHom ident =
      GraphHom::from_names(cp.micro.dag, cp.micro.dag, {{"X", "X"}, {"Y", "Y"}});
  AbstractionCandidate cand;
  cand.hom = ident;
  cand.components = {StochasticChannel::identity(3), StochasticChannel::identity(2)};
  CHECK(check_equivalence(cp.micro, cp.micro, cand).equivalent);
}

TEST_CASE("conjugating by a value swap is an equivalence") {
  CausalModel micro;
  micro.dag = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
  micro.variables = {{"X", {"x1", "x2"}}, {"Y", {"y1", "y2"}}};
  const auto f = StochasticChannel::from_rows({{0.3, 0.5}, {0.7, 0.5}});
  const auto p = StochasticChannel::from_rows({{0.3}, {0.7}});
  micro.mechanisms = {p, f};

  const auto swap = StochasticChannel::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  CausalModel macro;
  macro.dag = Dag::from_edges({"A", "B"}, {{"A", "B"}});
  macro.variables = {{"A", {"a1", "a2"}}, {"B", {"b1", "b2"}}};
  // Conjugation: prior swaps, mechanism becomes identity f swap^{-1}.
  macro.mechanisms = {compose(swap, p), compose(f, swap)};

  const GraphHom hom = GraphHom::from_names(micro.dag, macro.dag, {{"X", "A"}, {"Y", "B"}});
  AbstractionCandidate cand;
  cand.hom = hom;
  cand.components = {swap, StochasticChannel::identity(2)};
  const EquivalenceReport report = check_equivalence(micro, macro, cand);
  CHECK(report.equivalent);

  // Any half-half entry disqualifies the component.
  cand.components[1] = StochasticChannel::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const EquivalenceReport fuzzy = check_equivalence(micro, macro, cand);
  CHECK_FALSE(fuzzy.equivalent);
  CHECK(fuzzy.non_permutation_components == std::vector<std::string>{"B"});
}

TEST_CASE("permutation components are exactly the stochastically invertible ones") {
  Rng rng(71);
  for (int round = 0; round < 60; ++round) {
    const std::size_t n = rng.range(1, 4);
    StochasticChannel ch = random_channel(rng, n, n);
    if (rng.chance(0.5)) {
      ch = StochasticChannel(n, n, 0.0);
      std::vector<std::size_t> pi(n);
      for (std::size_t k = 0; k < n; ++k) pi[k] = k;
      for (std::size_t k = 0; k + 1 < n; ++k) std::swap(pi[k], pi[k + rng.below(n - k)]);
      for (std::size_t k = 0; k < n; ++k) ch(pi[k], k) = 1.0;
    }
    const auto inverse = oracles::invert(ch);
    const bool invertible_stochastic =
        inverse.has_value() && oracles::is_stochastic_matrix(*inverse, 1e-9);
    CHECK(ch.is_permutation(1e-9) == invertible_stochastic);
  }
}

TEST_CASE("block partitions follow the cells") {
  const auto f = StochasticChannel::from_rows({{0.3, 0.3, 0.6}, {0.7, 0.7, 0.4}});
  const DeterministicMap tx = make_map({3}, {"lo", "hi"}, {0, 0, 1});
  const DeterministicMap ty = make_map({2}, {"y1", "y2"}, {0, 1});
  const BlockPartition part = partition_blocks(f, tx, ty);
  CHECK(part.domain_cells() == 2);
  CHECK(part.codomain_cells() == 2);
  CHECK(part.col_offsets == std::vector<std::size_t>{0, 2, 3});
  CHECK(part.row_offsets == std::vector<std::size_t>{0, 1, 2});
  CHECK(part.col_perm == std::vector<std::size_t>{0, 1, 2});

  // Identity merges make every block a single entry.
  const DeterministicMap ix = make_map({3}, {"a", "b", "c"}, {0, 1, 2});
  const BlockPartition fine = partition_blocks(f, ix, ty);
  CHECK(fine.domain_cells() == 3);
  CHECK(fine.col_offsets == std::vector<std::size_t>{0, 1, 2, 3});

  // Interleaved cells get permuted into contiguous runs.
  const DeterministicMap inter = make_map({3}, {"odd", "even"}, {0, 1, 0});
  const BlockPartition shuffled = partition_blocks(f, inter, ty);
  CHECK(shuffled.col_perm == std::vector<std::size_t>{0, 2, 1});
  CHECK(shuffled.permuted(0, 1) == f(0, 2));
}

TEST_CASE("the merged cholesterol states partition the effect mechanism") {
  const HeartPair hp(true);
  const StochasticChannel g = hp.micro.mechanisms[3];
  const DeterministicMap& tc = hp.maps[1];
  const DeterministicMap& hd = hp.maps[2];
  const BlockPartition part = partition_blocks(g, tc, hd);
  CHECK(part.col_offsets == std::vector<std::size_t>{0, 3, 4});
  CHECK(part.domain_cells() == 2);
  CHECK(part.codomain_cells() == 2);
}

TEST_CASE("the constant-column-sum mechanism is homogeneous with the expected constants") {
  const auto f = StochasticChannel::from_rows({{0.3, 0.3, 0.6}, {0.7, 0.7, 0.4}});
  const DeterministicMap tx = make_map({3}, {"lo", "hi"}, {0, 0, 1});
  const DeterministicMap ty = make_map({2}, {"y1", "y2"}, {0, 1});
  const HomogeneityReport report = check_homogeneity(f, tx, ty);
  CHECK(report.pass);
  CHECK(report.constant(0, 0) == doctest::Approx(0.3));
  CHECK(report.constant(0, 1) == doctest::Approx(0.7));
  CHECK(report.constant(1, 0) == doctest::Approx(0.6));
  CHECK(report.constant(1, 1) == doctest::Approx(0.4));
}

TEST_CASE("bumping one entry breaks homogeneity in the first block") {
  // f with entry (0,1) lifted to 0.4 and the column renormalized.
  const auto f = StochasticChannel::from_rows(
      {{0.3, 0.4 / 1.1, 0.6}, {0.7, 0.7 / 1.1, 0.4}});
  const DeterministicMap tx = make_map({3}, {"lo", "hi"}, {0, 0, 1});
  const DeterministicMap ty = make_map({2}, {"y1", "y2"}, {0, 1});
  const HomogeneityReport report = check_homogeneity(f, tx, ty);
  CHECK_FALSE(report.pass);
  REQUIRE_FALSE(report.failures.empty());
  CHECK(report.failures.front().cell_i == 0);
  CHECK(report.failures.front().cell_j == 0);
  CHECK(report.worst_deviation > 0.03);
}

TEST_CASE("identity merges are always homogeneous") {
  Rng rng(73);
  for (int round = 0; round < 20; ++round) {
    const std::size_t rows = rng.range(1, 5);
    const std::size_t cols = rng.range(1, 5);
    const StochasticChannel f = random_channel(rng, rows, cols);
    std::vector<std::size_t> ia(cols);
    for (std::size_t i = 0; i < cols; ++i) ia[i] = i;
    std::vector<std::string> la;
    for (std::size_t i = 0; i < cols; ++i) la.push_back("c" + std::to_string(i));
    std::vector<std::size_t> ra(rows);
    for (std::size_t i = 0; i < rows; ++i) ra[i] = i;
    std::vector<std::string> lr;
    for (std::size_t i = 0; i < rows; ++i) lr.push_back("r" + std::to_string(i));
    CHECK(check_homogeneity(f, make_map({cols}, la, ia), make_map({rows}, lr, ra)).pass);
  }
}

TEST_CASE("synthesis reads the coarse mechanism off the block constants") {
  const auto f = StochasticChannel::from_rows({{0.3, 0.3, 0.6}, {0.7, 0.7, 0.4}});
  const DeterministicMap tx = make_map({3}, {"lo", "hi"}, {0, 0, 1});
  const DeterministicMap ty = make_map({2}, {"y1", "y2"}, {0, 1});
  const StochasticChannel g = synthesize_macro_mechanism(f, tx, ty);
  CHECK(g.rows() == std::vector<std::vector<double>>{{0.3, 0.6}, {0.7, 0.4}});
}

TEST_CASE("bijective merges synthesize the permuted mechanism") {
  const auto f = StochasticChannel::from_rows({{0.3, 0.5}, {0.7, 0.5}});
  const DeterministicMap tx = make_map({2}, {"a", "b"}, {1, 0});  // swap columns
  const DeterministicMap ty = make_map({2}, {"c", "d"}, {0, 1});
  const StochasticChannel g = synthesize_macro_mechanism(f, tx, ty);
  CHECK(g(0, 0) == doctest::Approx(f(0, 1)));
  CHECK(g(0, 1) == doctest::Approx(f(0, 0)));
}

TEST_CASE("collapsing the whole codomain synthesizes the total-probability row") {
  Rng rng(79);
  const StochasticChannel f = random_channel(rng, 3, 4);
  const DeterministicMap tx = make_map({4}, {"a", "b"}, {0, 1, 0, 1});
  const DeterministicMap ty = make_map({3}, {"all"}, {0, 0, 0});
  const StochasticChannel g = synthesize_macro_mechanism(f, tx, ty);
  REQUIRE(g.codomain_arity() == 1);
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("non-homogeneous mechanisms refuse to synthesize and carry the report") {
  const auto f = StochasticChannel::from_rows({{0.3, 0.4, 0.6}, {0.7, 0.6, 0.4}});
  const DeterministicMap tx = make_map({3}, {"lo", "hi"}, {0, 0, 1});
  const DeterministicMap ty = make_map({2}, {"y1", "y2"}, {0, 1});
  try {
    (void)synthesize_macro_mechanism(f, tx, ty);
    FAIL("expected NotHomogeneous");
  } catch (const NotHomogeneous& e) {
    CHECK_FALSE(e.report.pass);
    CHECK(e.report.worst_deviation == doctest::Approx(0.05));
  }
}

TEST_CASE("random block-built channels synthesize exactly") {
  Rng rng(83);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = rng.range(1, 6);
    const std::size_t t = rng.range(1, 6);
    const DeterministicMap tx = random_map(rng, {n}, rng.range(1, n));
    const DeterministicMap ty = random_map(rng, {t}, rng.range(1, t));
    const StochasticChannel f = random_homogeneous_channel(rng, tx, ty);
    CHECK(f.is_column_stochastic(1e-12));
    const StochasticChannel g = synthesize_macro_mechanism(f, tx, ty);
    CHECK(g.is_column_stochastic(1e-9));
    const auto lhs = oracles::multiply(ty.to_channel().rows(), f.rows());
    const auto rhs = oracles::multiply(g.rows(), tx.to_channel().rows());
    double worst = 0.0;
    for (std::size_t r = 0; r < lhs.size(); ++r) {
      for (std::size_t c = 0; c < lhs[r].size(); ++c) {
        worst = std::max(worst, std::abs(lhs[r][c] - rhs[r][c]));
      }
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("perturbed channels fail the test and defeat the least-squares search") {
  Rng rng(89);
  for (int round = 0; round < 60; ++round) {
    const std::size_t n = rng.range(2, 6);
    const std::size_t t = rng.range(2, 6);
    const DeterministicMap tx = random_map(rng, {n}, rng.range(1, n - 1));
    const DeterministicMap ty = random_map(rng, {t}, rng.range(2, t));
    StochasticChannel f = random_homogeneous_channel(rng, tx, ty);
    perturb_across_cells(rng, f, tx, ty, 4e-3);
    const HomogeneityReport report = check_homogeneity(f, tx, ty, 1e-9);
    CHECK_FALSE(report.pass);
    CHECK(report.worst_deviation >= 1e-3);
    CHECK(oracles::least_squares_residual(f, tx, ty) > 1e-4);
  }
}

TEST_CASE("whole-model synthesis on the merged-cholesterol schema") {
  SUBCASE("equal merged columns succeed and pass the grouped check") {
    const HeartPair hp(true);
    const SynthesisResult result = synthesize_abstraction(hp.micro, hp.hom, hp.maps);
    CHECK(result.macro.dag == hp.hom.target);
    CHECK(validate_model(result.macro).ok());
    // tc mechanism: mass of the merged cell per diet state.
    const StochasticChannel& tc = result.macro.mechanisms[1];
    CHECK(tc(0, 0) == doctest::Approx(1.0 - 0.2 * 0.7));
    CHECK(tc(0, 1) == doctest::Approx(1.0 - 0.7 * 0.4));
    const StochasticChannel& hd = result.macro.mechanisms[2];
    CHECK(hd(0, 0) == doctest::Approx(0.7));
    CHECK(hd(0, 1) == doctest::Approx(0.1));
    const NaturalityReport nat = check_naturality(hp.micro, result.macro, result.candidate,
                                                  NaturalityMode::Grouped);
    CHECK(nat.pass);
    CHECK(nat.max_deviation <= 1e-12);
  }
  SUBCASE("unequal merged columns fail naming the vertex") {
    const HeartPair hp(false);
    try {
      (void)synthesize_abstraction(hp.micro, hp.hom, hp.maps);
      FAIL("expected NotHomogeneous");
    } catch (const NotHomogeneous& e) {
      CHECK(e.vertex == "hd");
      CHECK(std::string(e.what()).find("tc") != std::string::npos);
      CHECK_FALSE(e.report.pass);
    }
  }
}

TEST_CASE("bijective merges synthesize a relabeling that is an equivalence") {
  const HeartPair hp(true);
  std::vector<DeterministicMap> maps = {
      make_map({2}, {"poor", "good"}, {0, 1}),
      make_map({2, 2}, {"hh", "hl", "lh", "ll"}, {0, 1, 2, 3}),
      make_map({2}, {"disease", "healthy"}, {1, 0})};
  const SynthesisResult result = synthesize_abstraction(hp.micro, hp.hom, maps);
  const EquivalenceReport eq = check_equivalence(hp.micro, result.macro, result.candidate);
  CHECK(eq.equivalent);
}

TEST_CASE("merging everything to single values always synthesizes") {
  const HeartPair hp(true);
  std::vector<DeterministicMap> maps = {make_map({2}, {"d"}, {0, 0}),
                                        make_map({2, 2}, {"c"}, {0, 0, 0, 0}),
                                        make_map({2}, {"h"}, {0, 0})};
  const SynthesisResult result = synthesize_abstraction(hp.micro, hp.hom, maps);
  for (const StochasticChannel& mech : result.macro.mechanisms) {
    CHECK(mech.codomain_arity() == 1);
  }
  CHECK(check_naturality(hp.micro, result.macro, result.candidate, NaturalityMode::Grouped).pass);
}

TEST_CASE("synthesis refuses extra macro parents") {
  CausalModel micro;
  micro.dag = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
  micro.variables = {{"X", {"x1", "x2"}}, {"Y", {"y1", "y2"}}};
  micro.mechanisms = {StochasticChannel::from_rows({{0.3}, {0.7}}),
                      StochasticChannel::from_rows({{0.3, 0.5}, {0.7, 0.5}})};
  const Dag macro_dag = Dag::from_edges({"X'", "Z'", "Y'"}, {{"X'", "Y'"}, {"Z'", "Y'"}});
  const GraphHom hom = GraphHom::from_names(micro.dag, macro_dag, {{"X", "X'"}, {"Y", "Y'"}});
  std::vector<DeterministicMap> maps = {make_map({2}, {"a", "b"}, {0, 1}),
                                        make_map({}, {"z"}, {0}),
                                        make_map({2}, {"c", "d"}, {0, 1})};
  CHECK_THROWS_WITH_AS((void)synthesize_abstraction(micro, hom, maps),
                       doctest::Contains("Z'"), ModelError);
}

TEST_CASE("pushing a joint forward translates group by group") {
  const ChainPair cp;
  const Distribution micro_joint = joint_distribution(cp.micro);
  const Distribution pushed = pushforward(cp.micro, cp.candidate, micro_joint);
  // Deterministic components lump states: P(lo, y) = sum over x1, x2.
  CHECK(pushed.arity() == 4);
  CHECK(pushed.weights[0] ==
        doctest::Approx(micro_joint.weights[0] + micro_joint.weights[2]));
  CHECK(pushed.weights[3] == doctest::Approx(micro_joint.weights[5]));
  CHECK(std::abs(pushed.total() - 1.0) <= 1e-12);
  // And the result is the macro joint, because the candidate is exact.
  CHECK(pushed.max_abs_diff(joint_distribution(cp.macro)) <= 1e-12);
}

TEST_CASE("the intervention sweep agrees on every macro cut set of the chain pair") {
  const ChainPair cp;
  std::vector<Distribution> dists{Distribution(std::vector<double>{0.1, 0.2, 0.7}),
                                  Distribution(std::vector<double>{0.4, 0.6})};
  SweepOptions opts;
  opts.tol = 1e-10;
  const InterventionSweepReport report =
      check_intervention_consistency(cp.micro, cp.macro, cp.candidate, dists, opts);
  CHECK(report.pass);
  REQUIRE(report.entries.size() == 4);
  CHECK(report.entries[0].targets.empty());

  SweepOptions only;
  only.singletons_only = true;
  const InterventionSweepReport small =
      check_intervention_consistency(cp.micro, cp.macro, cp.candidate, dists, only);
  CHECK(small.entries.size() == 3);
}

TEST_CASE("a full cut factorizes both sides into translated interventions") {
  const ChainPair cp;
  const Distribution dx(std::vector<double>{0.1, 0.2, 0.7});
  const Distribution dy(std::vector<double>{0.4, 0.6});
  const CausalModel micro_cut =
      apply_intervention(cp.micro, {{"X", dx}, {"Y", dy}});
  const Distribution pushed =
      pushforward(micro_cut, cp.candidate, joint_distribution(micro_cut));
  const Distribution px = cp.candidate.components[0].apply(dx);
  const Distribution py = cp.candidate.components[1].apply(dy);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      CHECK(pushed.weights[a * 2 + b] == doctest::Approx(px.weights[a] * py.weights[b]));
    }
  }
}

TEST_CASE("the merged fork pulls a coarse cut back onto both members") {
  // Construct the coarse model by synthesis, then check cut {W} consistency.
  CausalModel micro;
  micro.dag = Dag::from_edges({"X", "Y", "Z"}, {{"X", "Y"}, {"X", "Z"}});
  micro.variables = {{"X", {"x1", "x2"}}, {"Y", {"y1", "y2"}}, {"Z", {"z1", "z2"}}};
  micro.mechanisms = {StochasticChannel::from_rows({{0.25}, {0.75}}),
                      StochasticChannel::from_rows({{0.3, 0.5}, {0.7, 0.5}}),
                      StochasticChannel::from_rows({{0.9, 0.2}, {0.1, 0.8}})};
  const Dag macro_dag = Dag::from_edges({"X'", "W"}, {{"X'", "W"}});
  const GraphHom hom = GraphHom::from_names(micro.dag, macro_dag,
                                            {{"X", "X'"}, {"Y", "W"}, {"Z", "W"}});
  std::vector<DeterministicMap> maps = {make_map({2}, {"x1", "x2"}, {0, 1}),
                                        make_map({2, 2}, {"w1", "w2"}, {0, 1, 1, 0})};
  const SynthesisResult result = synthesize_abstraction(micro, hom, maps);
  CHECK(preimage_cut(hom, CutSet::of(macro_dag, std::vector<std::string>{"W"})).target_names() ==
        std::vector<std::string>{"Y", "Z"});

  std::vector<Distribution> dists{Distribution(std::vector<double>{0.6, 0.4}),
                                  Distribution::point_mass(2, 0),
                                  Distribution(std::vector<double>{0.2, 0.8})};
  SweepOptions opts;
  opts.tol = 1e-10;
  const InterventionSweepReport report =
      check_intervention_consistency(micro, result.macro, result.candidate, dists, opts);
  CHECK(report.pass);
}

TEST_CASE("synthesized random pairs stay consistent under the whole sweep") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    GeneratorConfig cfg;
    cfg.kind = GeneratorConfig::Kind::HomogeneousPair;
    cfg.seed = seed;
    cfg.min_vertices = 3;
    cfg.max_vertices = 6;
    cfg.min_arity = 2;
    cfg.max_arity = 3;
    const GeneratedInstance inst = generate_instance(cfg);
    REQUIRE(inst.candidate.has_value());
    REQUIRE(inst.macro.has_value());
    const NaturalityReport nat = check_naturality(inst.micro, *inst.macro, *inst.candidate,
                                                  NaturalityMode::Grouped);
    CHECK(nat.pass);
    SweepOptions opts;
    opts.tol = 1e-8;
    const InterventionSweepReport sweep = check_intervention_consistency(
        inst.micro, *inst.macro, *inst.candidate, preset_interventions(inst.micro), opts);
    CHECK(sweep.pass);
  }
}
