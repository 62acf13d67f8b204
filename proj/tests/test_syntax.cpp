#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "causalabs/generator.hpp"
#include "causalabs/syntax.hpp"

using namespace causalabs;

namespace {

// X -> Y, X -> Z merged onto X' -> W.
struct ForkMerge {
  Dag micro = Dag::from_edges({"X", "Y", "Z"}, {{"X", "Y"}, {"X", "Z"}});
  Dag macro = Dag::from_edges({"X'", "W"}, {{"X'", "W"}});
  GraphHom hom = GraphHom::from_names(micro, macro, {{"X", "X'"}, {"Y", "W"}, {"Z", "W"}});
};

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t v = 0; v < n; ++v) {
      if (mask & (std::size_t{1} << v)) subset.push_back(v);
    }
    out.push_back(std::move(subset));
  }
  return out;
}

}  // namespace

TEST_CASE("cut sets compose by union with the empty set as identity") {
  const Dag g = Dag::from_edges({"X", "Y", "Z"}, {{"X", "Y"}});
  const CutSet x = CutSet::of(g, std::vector<std::string>{"X"});
  const CutSet y = CutSet::of(g, std::vector<std::string>{"Y"});
  const CutSet xy = CutSet::of(g, std::vector<std::string>{"X", "Y"});
  CHECK(compose_cuts(x, y) == xy);
  CHECK(compose_cuts(y, x) == xy);
  CHECK(compose_cuts(x, CutSet::none(g)) == x);
  CHECK(compose_cuts(x, x) == x);
}

TEST_CASE("cut monoid laws hold for every subset of a small graph") {
  Rng rng(5);
  const Dag g = random_dag(rng, 5, 0.4, "v");
  const auto subsets = all_subsets(5);
  std::vector<CutSet> cuts;
  for (const auto& s : subsets) cuts.push_back(CutSet::of_indices(g, s));
  const CutSet unit = CutSet::none(g);
  for (const CutSet& a : cuts) {
    CHECK(compose_cuts(a, unit) == a);
    CHECK(compose_cuts(a, a) == a);
    for (const CutSet& b : cuts) {
      CHECK(compose_cuts(a, b) == compose_cuts(b, a));
      for (const CutSet& c : cuts) {
        CHECK(compose_cuts(compose_cuts(a, b), c) == compose_cuts(a, compose_cuts(b, c)));
      }
    }
  }
}

TEST_CASE("cut sets from different graphs never compose") {
  const Dag g = Dag::from_edges({"X", "Y"}, {});
  const Dag h = Dag::from_edges({"A", "B"}, {});
  CHECK_THROWS_AS(compose_cuts(CutSet::none(g), CutSet::none(h)), ModelError);
  CHECK_THROWS_AS(CutSet::of(g, std::vector<std::string>{"A"}), ModelError);
}

TEST_CASE("cutting derives input-free boxes") {
  const Dag g = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
  const SurgeredDiagram base = SurgeredDiagram::base(g);
  CHECK(base.boxes[1].inputs == std::vector<std::string>{"X"});

  const SurgeredDiagram cut = apply_cut(base, CutSet::of(g, std::vector<std::string>{"Y"}));
  CHECK(cut.boxes[1].inputs.empty());
  CHECK(cut.boxes[0].inputs.empty());

  CHECK(apply_cut(base, CutSet::none(g)) == base);
  const CutSet x = CutSet::of(g, std::vector<std::string>{"X"});
  const CutSet y = CutSet::of(g, std::vector<std::string>{"Y"});
  CHECK(apply_cut(apply_cut(base, x), y) == apply_cut(base, compose_cuts(x, y)));
  CHECK(apply_cut(apply_cut(base, x), x) == apply_cut(base, x));
}

TEST_CASE("the fork merge is a valid homomorphism") {
  const ForkMerge fm;
  CHECK(validate_hom(fm.hom).ok());
  const auto pre = fm.hom.preimages();
  CHECK(pre[0] == std::vector<std::size_t>{0});
  CHECK(pre[1] == std::vector<std::size_t>{1, 2});
  CHECK(fm.hom.is_surjective());
}

TEST_CASE("the identity map is a valid homomorphism") {
  const Dag g = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
  const GraphHom ident = GraphHom::from_names(g, g, {{"X", "X"}, {"Y", "Y"}});
  CHECK(validate_hom(ident).ok());
}

TEST_CASE("collapsing an edge's endpoints needs a self-loop and is invalid") {
  const Dag g = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
  const Dag h = Dag::from_edges({"W"}, {});
  const GraphHom squash = GraphHom::from_names(g, h, {{"X", "W"}, {"Y", "W"}});
  const ValidationReport report = validate_hom(squash);
  REQUIRE_FALSE(report.ok());
  CHECK(report.issues[0].find("self-loop") != std::string::npos);
}

TEST_CASE("a dropped edge image is reported") {
  const Dag g = Dag::from_edges({"X", "Y"}, {{"X", "Y"}});
  const Dag h = Dag::from_edges({"A", "B"}, {});
  const GraphHom hom = GraphHom::from_names(g, h, {{"X", "A"}, {"Y", "B"}});
  const ValidationReport report = validate_hom(hom);
  REQUIRE_FALSE(report.ok());
  CHECK(report.issues[0].find("not an edge of the target") != std::string::npos);
}

TEST_CASE("macro cuts pull back to their full preimage") {
  const ForkMerge fm;
  const CutSet w = CutSet::of(fm.macro, std::vector<std::string>{"W"});
  CHECK(preimage_cut(fm.hom, w).target_names() == std::vector<std::string>{"Y", "Z"});
  CHECK(preimage_cut(fm.hom, CutSet::none(fm.macro)).empty());
}

TEST_CASE("micro cuts push forward to their image") {
  const ForkMerge fm;
  const CutSet yz = CutSet::of(fm.micro, std::vector<std::string>{"Y", "Z"});
  CHECK(image_cut(fm.hom, yz).target_names() == std::vector<std::string>{"W"});
  CHECK(image_cut(fm.hom, CutSet::none(fm.micro)).empty());

  // Pushing forward preserves unions, hence subset order.
  const auto subsets = all_subsets(fm.micro.vertex_count());
  for (const auto& sa : subsets) {
    for (const auto& sb : subsets) {
      const CutSet a = CutSet::of_indices(fm.micro, sa);
      const CutSet b = CutSet::of_indices(fm.micro, sb);
      CHECK(image_cut(fm.hom, compose_cuts(a, b)) ==
            compose_cuts(image_cut(fm.hom, a), image_cut(fm.hom, b)));
    }
  }
}

TEST_CASE("pulling back is a monoid homomorphism on every subset pair") {
  Rng rng(57);
  for (int round = 0; round < 8; ++round) {
    const Dag target = random_dag(rng, rng.range(1, 3), 0.5, "t");
    const Dag source = random_dag(rng, rng.range(1, 5), 0.4, "s");
    for (const GraphHom& hom : enumerate_homomorphisms(source, target, false)) {
      CHECK(preimage_cut(hom, CutSet::none(target)).empty());
      const auto subsets = all_subsets(target.vertex_count());
      for (const auto& sa : subsets) {
        for (const auto& sb : subsets) {
          const CutSet a = CutSet::of_indices(target, sa);
          const CutSet b = CutSet::of_indices(target, sb);
          CHECK(preimage_cut(hom, compose_cuts(a, b)) ==
                compose_cuts(preimage_cut(hom, a), preimage_cut(hom, b)));
        }
      }
    }
  }
}

TEST_CASE("for surjective maps the image of a pulled-back cut is the cut itself") {
  Rng rng(61);
  for (int round = 0; round < 10; ++round) {
    const Dag target = random_dag(rng, rng.range(1, 3), 0.5, "t");
    const Dag source = random_dag(rng, rng.range(2, 5), 0.4, "s");
    for (const GraphHom& hom : enumerate_homomorphisms(source, target, true)) {
      for (const auto& subset : all_subsets(target.vertex_count())) {
        const CutSet c = CutSet::of_indices(target, subset);
        CHECK(image_cut(hom, preimage_cut(hom, c)) == c);
      }
    }
  }
}

TEST_CASE("pulled-back cuts order-embed into the micro lattice") {
  const ForkMerge fm;
  const auto subsets = all_subsets(fm.macro.vertex_count());
  for (const auto& sa : subsets) {
    for (const auto& sb : subsets) {
      const CutSet a = CutSet::of_indices(fm.macro, sa);
      const CutSet b = CutSet::of_indices(fm.macro, sb);
      const bool macro_subset = compose_cuts(a, b) == b;  // a union b == b iff a <= b
      const CutSet pa = preimage_cut(fm.hom, a);
      const CutSet pb = preimage_cut(fm.hom, b);
      const bool micro_subset = compose_cuts(pa, pb) == pb;
      CHECK(macro_subset == micro_subset);
      if (pa == pb) CHECK(sa == sb);  // injective on the preimage-closed family
    }
  }
}

TEST_CASE("mapping a diagram collapses merged boxes onto the target generators") {
  const ForkMerge fm;
  const SurgeredDiagram image = map_diagram(fm.hom, SurgeredDiagram::base(fm.micro));
  CHECK(image.graph == fm.macro);
  CHECK(image.cuts.empty());
  REQUIRE(image.boxes.size() == 2);
  CHECK(image.boxes[0].output == "X'");
  CHECK(image.boxes[0].inputs.empty());
  CHECK(image.boxes[1].output == "W");
  CHECK(image.boxes[1].inputs == std::vector<std::string>{"X'"});
}

TEST_CASE("the cholesterol merge maps both mechanisms onto the single box") {
  const Dag micro = Dag::from_edges({"diet", "ldl", "hdl", "hd"},
                                    {{"diet", "ldl"}, {"diet", "hdl"}, {"ldl", "hd"}, {"hdl", "hd"}});
  const Dag macro = Dag::from_edges({"diet", "tc", "hd"}, {{"diet", "tc"}, {"tc", "hd"}});
  const GraphHom hom = GraphHom::from_names(
      micro, macro, {{"diet", "diet"}, {"ldl", "tc"}, {"hdl", "tc"}, {"hd", "hd"}});
  REQUIRE(validate_hom(hom).ok());
  const SurgeredDiagram image = map_diagram(hom, SurgeredDiagram::base(micro));
  REQUIRE(image.boxes.size() == 3);
  CHECK(image.boxes[1].output == "tc");
  CHECK(image.boxes[1].inputs == std::vector<std::string>{"diet"});
  CHECK(image.boxes[2].inputs == std::vector<std::string>{"tc"});
}

TEST_CASE("a fully cut diagram maps to the fully cut target") {
  const ForkMerge fm;
  const SurgeredDiagram all_cut =
      apply_cut(SurgeredDiagram::base(fm.micro),
                CutSet::of(fm.micro, std::vector<std::string>{"X", "Y", "Z"}));
  const SurgeredDiagram image = map_diagram(fm.hom, all_cut);
  const SurgeredDiagram expected =
      apply_cut(SurgeredDiagram::base(fm.macro),
                CutSet::of(fm.macro, std::vector<std::string>{"X'", "W"}));
  CHECK(image == expected);
}

TEST_CASE("partially cutting a merged class has no image") {
  const ForkMerge fm;
  const SurgeredDiagram partial = apply_cut(SurgeredDiagram::base(fm.micro),
                                            CutSet::of(fm.micro, std::vector<std::string>{"Y"}));
  CHECK_THROWS_AS((void)map_diagram(fm.hom, partial), UnrepresentableImage);
}

TEST_CASE("surgery commutes with diagram mapping on the fork") {
  const ForkMerge fm;
  CHECK(surgery_map_commutes(fm.hom, CutSet::of(fm.macro, std::vector<std::string>{"W"})));
  CHECK(surgery_map_commutes(fm.hom, CutSet::none(fm.macro)));
}

TEST_CASE("surgery commutes for every surjective map and macro cut found by search") {
  Rng rng(67);
  std::size_t checked = 0;
  for (int round = 0; round < 12; ++round) {
    const Dag target = random_dag(rng, rng.range(1, 3), 0.5, "t");
    const Dag source = random_dag(rng, rng.range(2, 6), 0.4, "s");
    for (const GraphHom& hom : enumerate_homomorphisms(source, target, true)) {
      for (const auto& subset : all_subsets(target.vertex_count())) {
        CHECK(surgery_map_commutes(hom, CutSet::of_indices(target, subset)));
        ++checked;
      }
    }
  }
  CHECK(checked > 100);  // the search actually found instances
}

TEST_CASE("homomorphism search returns exactly the edge-preserving maps") {
  const Dag source = Dag::from_edges({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}});
  const auto all = enumerate_homomorphisms(source, source, false);
  for (const GraphHom& hom : all) CHECK(validate_hom(hom).ok());
  // Chains of length three map into themselves only identically.
  REQUIRE(all.size() == 1);
  CHECK(all[0].map == std::vector<std::size_t>{0, 1, 2});

  const Dag singleton = Dag::from_edges({"w"}, {});
  CHECK(enumerate_homomorphisms(source, singleton, true).empty());  // needs a self-loop
  const Dag edgeless = Dag::from_edges({"a", "b"}, {});
  CHECK(enumerate_homomorphisms(edgeless, singleton, true).size() == 1);
}
