#include "causalabs/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "causalabs/kernels.hpp"

namespace causalabs {

namespace {

void require_graph(const Dag& got, const Dag& expected, const char* which) {
  if (!(got == expected)) {
    throw ModelError(std::string(which) + " model graph does not match the homomorphism");
  }
}

std::vector<std::size_t> preimage_arities(const CausalModel& micro,
                                          const std::vector<std::size_t>& members) {
  std::vector<std::size_t> a;
  a.reserve(members.size());
  for (std::size_t u : members) a.push_back(micro.arity(u));
  return a;
}

void validate_candidate_shapes(const CausalModel& micro, const CausalModel* macro,
                               const AbstractionCandidate& cand) {
  require_graph(micro.dag, cand.hom.source, "micro");
  if (macro != nullptr) require_graph(macro->dag, cand.hom.target, "macro");
  const auto pre = cand.hom.preimages();
  if (cand.components.size() != cand.hom.target.vertex_count()) {
    throw ModelError("candidate has " + std::to_string(cand.components.size()) +
                     " components for " + std::to_string(cand.hom.target.vertex_count()) +
                     " macro vertices");
  }
  for (std::size_t t = 0; t < pre.size(); ++t) {
    const std::string& name = cand.hom.target.vertex_name(t);
    std::size_t dom = 1;
    for (std::size_t u : pre[t]) dom *= micro.arity(u);
    if (cand.components[t].domain_arity() != dom) {
      throw ModelError("component for macro vertex '" + name + "' has domain arity " +
                       std::to_string(cand.components[t].domain_arity()) + ", expected " +
                       std::to_string(dom));
    }
    if (macro != nullptr && cand.components[t].codomain_arity() != macro->arity(t)) {
      throw ModelError("component for macro vertex '" + name + "' has codomain arity " +
                       std::to_string(cand.components[t].codomain_arity()) + ", expected " +
                       std::to_string(macro->arity(t)));
    }
  }
}

}  // namespace

std::size_t DeterministicMap::domain_size() const {
  std::size_t n = 1;
  for (std::size_t a : domain_arities) n *= a;
  return n;
}

bool DeterministicMap::is_surjective() const {
  std::vector<bool> hit(codomain_arity(), false);
  for (std::size_t v : assignment) {
    if (v >= codomain_arity()) return false;
    hit[v] = true;
  }
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

std::vector<std::vector<std::size_t>> DeterministicMap::cells() const {
  std::vector<std::vector<std::size_t>> out(codomain_arity());
  for (std::size_t x = 0; x < assignment.size(); ++x) out[assignment[x]].push_back(x);
  return out;
}

StochasticChannel DeterministicMap::to_channel() const {
  StochasticChannel ch(codomain_arity(), domain_size());
  for (std::size_t x = 0; x < assignment.size(); ++x) ch(assignment[x], x) = 1.0;
  return ch;
}

DeterministicMap tensor_maps(std::span<const DeterministicMap> maps) {
  DeterministicMap out;
  std::vector<std::size_t> codomains;
  for (const DeterministicMap& m : maps) {
    out.domain_arities.insert(out.domain_arities.end(), m.domain_arities.begin(),
                              m.domain_arities.end());
    codomains.push_back(m.codomain_arity());
  }
  const IndexScheme dom(out.domain_arities);
  const IndexScheme cod(codomains);
  out.codomain_values.resize(cod.size());
  {
    std::vector<std::size_t> cd(maps.size());
    for (std::size_t c = 0; c < cod.size(); ++c) {
      cod.decode(c, cd);
      std::string label;
      for (std::size_t k = 0; k < maps.size(); ++k) {
        if (k > 0) label += ",";
        label += maps[k].codomain_values[cd[k]];
      }
      out.codomain_values[c] = label;
    }
  }
  out.assignment.resize(dom.size());
  std::vector<std::size_t> digits(out.domain_arities.size());
  std::vector<std::size_t> values(maps.size());
  for (std::size_t x = 0; x < dom.size(); ++x) {
    dom.decode(x, digits);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < maps.size(); ++k) {
      const std::size_t r = maps[k].domain_arities.size();
      const IndexScheme local(maps[k].domain_arities);
      values[k] = maps[k].assignment[local.encode(
          std::span<const std::size_t>(digits.data() + offset, r))];
      offset += r;
    }
    out.assignment[x] = cod.encode(values);
  }
  return out;
}

AbstractionCandidate candidate_from_maps(const GraphHom& hom, const CausalModel& micro,
                                         std::span<const DeterministicMap> maps) {
  require_graph(micro.dag, hom.source, "micro");
  if (maps.size() != hom.target.vertex_count()) {
    throw ModelError("expected one value merge per macro vertex (" +
                     std::to_string(hom.target.vertex_count()) + "), got " +
                     std::to_string(maps.size()));
  }
  const auto pre = hom.preimages();
  AbstractionCandidate cand;
  cand.hom = hom;
  cand.components.reserve(maps.size());
  for (std::size_t t = 0; t < maps.size(); ++t) {
    const std::string& name = hom.target.vertex_name(t);
    if (maps[t].domain_arities != preimage_arities(micro, pre[t])) {
      throw ModelError("value merge for macro vertex '" + name +
                       "' does not match the arities of its merged variables");
    }
    if (!maps[t].is_surjective()) {
      throw ModelError("value merge for macro vertex '" + name + "' is not surjective");
    }
    cand.components.push_back(maps[t].to_channel());
  }
  return cand;
}

StochasticChannel group_channel(const CausalModel& micro, const GraphHom& hom,
                                std::size_t macro_vertex) {
  require_graph(micro.dag, hom.source, "micro");
  if (macro_vertex >= hom.target.vertex_count()) {
    throw ModelError("macro vertex index out of range");
  }
  const auto pre = hom.preimages();
  const std::vector<std::size_t>& members = pre[macro_vertex];

  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> position(micro.vertex_count(), kAbsent);
  std::vector<std::size_t> dom_arities;
  for (std::size_t mp : hom.target.parents(macro_vertex)) {
    for (std::size_t u : pre[mp]) {
      position[u] = dom_arities.size();
      dom_arities.push_back(micro.arity(u));
    }
  }
  const IndexScheme dom(dom_arities);
  const IndexScheme cod(preimage_arities(micro, members));

  StochasticChannel out(cod.size(), dom.size());
  std::vector<std::size_t> in_digits(dom.rank());
  std::vector<std::size_t> out_digits(cod.rank());
  for (std::size_t c = 0; c < dom.size(); ++c) {
    dom.decode(c, in_digits);
    for (std::size_t r = 0; r < cod.size(); ++r) {
      cod.decode(r, out_digits);
      double p = 1.0;
      for (std::size_t k = 0; k < members.size(); ++k) {
        const std::size_t m = members[k];
        std::size_t pa = 0;
        for (std::size_t q : micro.dag.parents(m)) {
          if (position[q] == kAbsent) {
            throw ModelError("parent '" + micro.dag.vertex_name(q) + "' of '" +
                             micro.dag.vertex_name(m) +
                             "' maps outside the macro parents; homomorphism is invalid");
          }
          pa = pa * micro.arity(q) + in_digits[position[q]];
        }
        p *= micro.mechanisms[m](out_digits[k], pa);
      }
      out(r, c) = p;
    }
  }
  return out;
}

NaturalityReport check_naturality(const CausalModel& micro, const CausalModel& macro,
                                  const AbstractionCandidate& cand, NaturalityMode mode,
                                  double tol) {
  if (mode == NaturalityMode::Edgewise) {
    // Reinterpret grouped components as per-micro channels; only possible
    // when every preimage is a singleton.
    validate_candidate_shapes(micro, &macro, cand);
    const auto pre = cand.hom.preimages();
    EdgewiseComponents comps;
    comps.per_micro.resize(micro.vertex_count(), StochasticChannel::scalar());
    for (std::size_t v = 0; v < micro.vertex_count(); ++v) {
      const std::size_t t = cand.hom.map[v];
      if (pre[t].size() != 1) {
        throw ModePrecondition("edgewise mode needs one channel per micro variable, but '" +
                               cand.hom.target.vertex_name(t) + "' merges " +
                               std::to_string(pre[t].size()) +
                               " variables; supply micro_components");
      }
      comps.per_micro[v] = cand.components[t];
    }
    return check_naturality_edgewise(micro, macro, cand.hom, comps, tol);
  }

  validate_candidate_shapes(micro, &macro, cand);
  const GraphHom& hom = cand.hom;
  NaturalityReport report;
  report.mode = NaturalityMode::Grouped;
  report.tolerance = tol;
  for (std::size_t t = 0; t < hom.target.vertex_count(); ++t) {
    NaturalityCheck check;
    check.label = hom.target.vertex_name(t);
    check.lhs = compose(cand.components[t], group_channel(micro, hom, t));
    StochasticChannel translated_parents = StochasticChannel::scalar();
    for (std::size_t mp : hom.target.parents(t)) {
      translated_parents = tensor(translated_parents, cand.components[mp]);
    }
    check.rhs = compose(macro.mechanisms[t], translated_parents);
    check.max_deviation = max_abs_diff(check.lhs, check.rhs);
    report.max_deviation = std::max(report.max_deviation, check.max_deviation);
    report.checks.push_back(std::move(check));
  }
  report.pass = report.max_deviation <= tol;
  return report;
}

NaturalityReport check_naturality_edgewise(const CausalModel& micro, const CausalModel& macro,
                                           const GraphHom& hom, const EdgewiseComponents& comps,
                                           double tol) {
  require_graph(micro.dag, hom.source, "micro");
  require_graph(macro.dag, hom.target, "macro");
  if (comps.per_micro.size() != micro.vertex_count()) {
    throw ModelError("expected one channel per micro vertex");
  }
  for (std::size_t v = 0; v < micro.vertex_count(); ++v) {
    const StochasticChannel& ch = comps.per_micro[v];
    if (ch.domain_arity() != micro.arity(v) || ch.codomain_arity() != macro.arity(hom.map[v])) {
      throw ModelError("channel for micro vertex '" + micro.dag.vertex_name(v) +
                       "' has shape " + std::to_string(ch.codomain_arity()) + "x" +
                       std::to_string(ch.domain_arity()) + ", expected " +
                       std::to_string(macro.arity(hom.map[v])) + "x" +
                       std::to_string(micro.arity(v)));
    }
  }

  NaturalityReport report;
  report.mode = NaturalityMode::Edgewise;
  report.tolerance = tol;
  for (std::size_t y = 0; y < micro.vertex_count(); ++y) {
    const std::size_t ty = hom.map[y];
    const auto& sp = micro.dag.parents(y);
    const auto& mp = macro.dag.parents(ty);

    // The image box must have exactly the mapped parents, one each.
    std::vector<std::size_t> source_for(mp.size(), static_cast<std::size_t>(-1));
    bool ok = sp.size() == mp.size();
    for (std::size_t j = 0; j < sp.size() && ok; ++j) {
      auto it = std::find(mp.begin(), mp.end(), hom.map[sp[j]]);
      if (it == mp.end()) {
        ok = false;
        break;
      }
      const std::size_t i = static_cast<std::size_t>(it - mp.begin());
      if (source_for[i] != static_cast<std::size_t>(-1)) {
        ok = false;  // two micro parents collapse onto one macro parent
        break;
      }
      source_for[i] = sp[j];
    }
    if (!ok) {
      throw ModePrecondition("edgewise mode: parents of micro vertex '" +
                             micro.dag.vertex_name(y) +
                             "' do not map one-to-one onto the parents of '" +
                             macro.dag.vertex_name(ty) + "'");
    }

    std::vector<std::size_t> sp_arities;
    for (std::size_t q : sp) sp_arities.push_back(micro.arity(q));
    std::vector<std::size_t> mp_arities;
    for (std::size_t z : mp) mp_arities.push_back(macro.arity(z));
    const IndexScheme sdom(sp_arities);
    const IndexScheme mdom(mp_arities);

    StochasticChannel translated(mdom.size(), sdom.size());
    std::vector<std::size_t> sd(sp.size());
    std::vector<std::size_t> md(mp.size());
    std::vector<std::size_t> pos_in_sp(micro.vertex_count(), 0);
    for (std::size_t j = 0; j < sp.size(); ++j) pos_in_sp[sp[j]] = j;
    for (std::size_t c = 0; c < sdom.size(); ++c) {
      sdom.decode(c, sd);
      for (std::size_t r = 0; r < mdom.size(); ++r) {
        mdom.decode(r, md);
        double p = 1.0;
        for (std::size_t i = 0; i < mp.size(); ++i) {
          const std::size_t x = source_for[i];
          p *= comps.per_micro[x](md[i], sd[pos_in_sp[x]]);
        }
        translated(r, c) = p;
      }
    }

    NaturalityCheck check;
    check.label = micro.dag.vertex_name(y);
    check.lhs = compose(comps.per_micro[y], micro.mechanisms[y]);
    check.rhs = compose(macro.mechanisms[ty], translated);
    check.max_deviation = max_abs_diff(check.lhs, check.rhs);
    report.max_deviation = std::max(report.max_deviation, check.max_deviation);
    report.checks.push_back(std::move(check));
  }
  report.pass = report.max_deviation <= tol;
  return report;
}

EquivalenceReport check_equivalence(const CausalModel& micro, const CausalModel& macro,
                                    const AbstractionCandidate& cand, double tol) {
  EquivalenceReport report;
  report.naturality = check_naturality(micro, macro, cand, NaturalityMode::Grouped, tol);
  for (std::size_t t = 0; t < cand.components.size(); ++t) {
    if (!cand.components[t].is_permutation(tol)) {
      report.non_permutation_components.push_back(cand.hom.target.vertex_name(t));
    }
  }
  report.equivalent = report.naturality.pass && report.non_permutation_components.empty();
  return report;
}

Distribution pushforward(const CausalModel& micro, const AbstractionCandidate& cand,
                         const Distribution& micro_joint, const EvalOptions& opts) {
  // Only the variables matter here, not the wiring; the model may be a
  // surgered variant of the homomorphism source.
  if (micro.dag.vertices() != cand.hom.source.vertices()) {
    throw ModelError("micro model vertices do not match the homomorphism");
  }
  {
    const auto pre = cand.hom.preimages();
    if (cand.components.size() != pre.size()) {
      throw ModelError("candidate does not have one component per macro vertex");
    }
    for (std::size_t t = 0; t < pre.size(); ++t) {
      std::size_t dom = 1;
      for (std::size_t u : pre[t]) dom *= micro.arity(u);
      if (cand.components[t].domain_arity() != dom) {
        throw ModelError("component for macro vertex '" + cand.hom.target.vertex_name(t) +
                         "' has domain arity " +
                         std::to_string(cand.components[t].domain_arity()) + ", expected " +
                         std::to_string(dom));
      }
    }
  }
  const IndexScheme micro_scheme = micro.joint_scheme();
  if (micro_joint.arity() != micro_scheme.size()) {
    throw ModelError("pushforward: joint has " + std::to_string(micro_joint.arity()) +
                     " states, model has " + std::to_string(micro_scheme.size()));
  }
  const auto pre = cand.hom.preimages();

  // Group coordinates macro-vertex-major, then translate group by group.
  std::vector<std::size_t> perm;
  perm.reserve(micro.vertex_count());
  for (const auto& members : pre) {
    perm.insert(perm.end(), members.begin(), members.end());
  }
  std::vector<double> cur(micro_scheme.size());
  if (kernels::use_parallel(cur.size(), opts)) {
    kernels::reorder_factors_omp(micro_joint.weights, micro_scheme, perm, cur);
  } else {
    kernels::reorder_factors_serial(micro_joint.weights, micro_scheme, perm, cur);
  }
  std::vector<std::size_t> arities;
  arities.reserve(perm.size());
  for (std::size_t u : perm) arities.push_back(micro.arity(u));

  for (std::size_t t = 0; t < pre.size(); ++t) {
    const IndexScheme scheme(arities);
    const std::size_t begin = t;
    const std::size_t end = t + pre[t].size();
    const StochasticChannel& ch = cand.components[t];
    std::size_t group = 1;
    for (std::size_t k = begin; k < end; ++k) group *= arities[k];
    const std::size_t out_size = scheme.size() / group * ch.codomain_arity();
    if (out_size > opts.state_cap) {
      throw StateCapExceeded("pushforward intermediate has " + std::to_string(out_size) +
                             " states, cap is " + std::to_string(opts.state_cap));
    }
    std::vector<double> next(out_size);
    if (kernels::use_parallel(out_size * group, opts)) {
      kernels::contract_group_omp(cur, scheme, begin, end, ch, next);
    } else {
      kernels::contract_group_serial(cur, scheme, begin, end, ch, next);
    }
    cur = std::move(next);
    arities.erase(arities.begin() + static_cast<std::ptrdiff_t>(begin),
                  arities.begin() + static_cast<std::ptrdiff_t>(end));
    arities.insert(arities.begin() + static_cast<std::ptrdiff_t>(begin), ch.codomain_arity());
  }
  return Distribution(std::move(cur));
}

namespace {

Distribution group_intervention(const CausalModel& micro, const std::vector<std::size_t>& members,
                                std::span<const Distribution> dists) {
  std::vector<std::size_t> arities;
  for (std::size_t u : members) arities.push_back(micro.arity(u));
  const IndexScheme scheme(arities);
  Distribution out;
  out.weights.resize(scheme.size());
  std::vector<std::size_t> digits(members.size());
  for (std::size_t x = 0; x < scheme.size(); ++x) {
    scheme.decode(x, digits);
    double w = 1.0;
    for (std::size_t k = 0; k < members.size(); ++k) w *= dists[members[k]].weights[digits[k]];
    out.weights[x] = w;
  }
  return out;
}

}  // namespace

InterventionSweepReport check_intervention_consistency(
    const CausalModel& micro, const CausalModel& macro, const AbstractionCandidate& cand,
    std::span<const Distribution> micro_interventions, const SweepOptions& opts) {
  validate_candidate_shapes(micro, &macro, cand);
  if (micro_interventions.size() != micro.vertex_count()) {
    throw ModelError("expected one intervention distribution per micro vertex");
  }
  for (std::size_t v = 0; v < micro.vertex_count(); ++v) {
    if (micro_interventions[v].arity() != micro.arity(v)) {
      throw ModelError("missing or mis-sized intervention distribution for micro vertex '" +
                       micro.dag.vertex_name(v) + "'");
    }
  }
  const EvalOptions eval{.state_cap = opts.state_cap, .force_serial = true};
  if (micro.joint_scheme().size() > opts.state_cap ||
      macro.joint_scheme().size() > opts.state_cap) {
    throw StateCapExceeded("joint state space exceeds the cap of " +
                           std::to_string(opts.state_cap));
  }

  const std::size_t m = macro.vertex_count();
  std::vector<std::vector<std::size_t>> cuts;
  if (!opts.only_cuts.empty()) {
    cuts = opts.only_cuts;
    for (const auto& cut : cuts) {
      for (std::size_t t : cut) {
        if (t >= m) throw ModelError("cut set names a vertex outside the macro model");
      }
    }
  } else if (opts.singletons_only) {
    cuts.push_back({});
    for (std::size_t t = 0; t < m; ++t) cuts.push_back({t});
  } else {
    if (m >= 8 * sizeof(std::size_t)) throw ModelError("too many macro vertices to sweep");
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      std::vector<std::size_t> cut;
      for (std::size_t t = 0; t < m; ++t) {
        if (mask & (std::size_t{1} << t)) cut.push_back(t);
      }
      cuts.push_back(std::move(cut));
    }
    std::sort(cuts.begin(), cuts.end());  // lexicographic on index sequences
  }

  const auto pre = cand.hom.preimages();
  InterventionSweepReport report;
  report.tolerance = opts.tol;
  report.entries.resize(cuts.size());
  std::string error;
  bool failed = false;

  const auto evaluate = [&](std::size_t i) {
    const std::vector<std::size_t>& cut = cuts[i];
    std::map<std::string, Distribution> micro_targets;
    std::map<std::string, Distribution> macro_targets;
    for (std::size_t t : cut) {
      for (std::size_t u : pre[t]) {
        micro_targets[micro.dag.vertex_name(u)] = micro_interventions[u];
      }
      macro_targets[macro.dag.vertex_name(t)] =
          cand.components[t].apply(group_intervention(micro, pre[t], micro_interventions));
    }
    const CausalModel micro_cut = apply_intervention(micro, micro_targets);
    const CausalModel macro_cut = apply_intervention(macro, macro_targets);
    const Distribution pushed =
        pushforward(micro_cut, cand, joint_distribution(micro_cut, eval), eval);
    const Distribution macro_joint = joint_distribution(macro_cut, eval);
    SweepEntry entry;
    for (std::size_t t : cut) entry.targets.push_back(macro.dag.vertex_name(t));
    entry.max_deviation = pushed.max_abs_diff(macro_joint);
    report.entries[i] = std::move(entry);
  };

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(cuts.size());
#if defined(_OPENMP)
  const bool par = opts.parallel;
#pragma omp parallel for schedule(dynamic) if (par)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      evaluate(static_cast<std::size_t>(i));
    } catch (const std::exception& e) {
#if defined(_OPENMP)
#pragma omp critical
#endif
      {
        failed = true;
        if (error.empty()) error = e.what();
      }
    }
  }
  if (failed) throw ModelError("intervention sweep failed: " + error);

  for (const SweepEntry& entry : report.entries) {
    report.worst_deviation = std::max(report.worst_deviation, entry.max_deviation);
  }
  report.pass = report.worst_deviation <= opts.tol;
  return report;
}

BlockPartition partition_blocks(const StochasticChannel& f, const DeterministicMap& tau_domain,
                                const DeterministicMap& tau_codomain) {
  if (tau_domain.domain_size() != f.domain_arity()) {
    throw ModelError("domain merge covers " + std::to_string(tau_domain.domain_size()) +
                     " values but the channel has " + std::to_string(f.domain_arity()) +
                     " columns");
  }
  if (tau_codomain.domain_size() != f.codomain_arity()) {
    throw ModelError("codomain merge covers " + std::to_string(tau_codomain.domain_size()) +
                     " values but the channel has " + std::to_string(f.codomain_arity()) +
                     " rows");
  }
  if (!tau_domain.is_surjective()) throw ModelError("domain merge is not surjective");
  if (!tau_codomain.is_surjective()) throw ModelError("codomain merge is not surjective");

  BlockPartition part;
  const auto col_cells = tau_domain.cells();
  const auto row_cells = tau_codomain.cells();
  part.col_offsets.push_back(0);
  for (const auto& cell : col_cells) {
    part.col_perm.insert(part.col_perm.end(), cell.begin(), cell.end());
    part.col_offsets.push_back(part.col_perm.size());
  }
  part.row_offsets.push_back(0);
  for (const auto& cell : row_cells) {
    part.row_perm.insert(part.row_perm.end(), cell.begin(), cell.end());
    part.row_offsets.push_back(part.row_perm.size());
  }
  part.permuted = StochasticChannel(f.codomain_arity(), f.domain_arity());
  for (std::size_t r = 0; r < f.codomain_arity(); ++r) {
    for (std::size_t c = 0; c < f.domain_arity(); ++c) {
      part.permuted(r, c) = f(part.row_perm[r], part.col_perm[c]);
    }
  }
  return part;
}

HomogeneityReport check_homogeneity(const StochasticChannel& f, const DeterministicMap& tau_domain,
                                    const DeterministicMap& tau_codomain, double tol) {
  HomogeneityReport report;
  report.partition = partition_blocks(f, tau_domain, tau_codomain);
  const BlockPartition& part = report.partition;
  report.domain_cells = part.domain_cells();
  report.codomain_cells = part.codomain_cells();
  report.constants.assign(report.domain_cells * report.codomain_cells, 0.0);

  for (std::size_t i = 0; i < report.domain_cells; ++i) {
    const std::size_t c0 = part.col_offsets[i];
    const std::size_t c1 = part.col_offsets[i + 1];
    for (std::size_t j = 0; j < report.codomain_cells; ++j) {
      const std::size_t r0 = part.row_offsets[j];
      const std::size_t r1 = part.row_offsets[j + 1];
      std::vector<double> sums(c1 - c0, 0.0);
      double mean = 0.0;
      for (std::size_t c = c0; c < c1; ++c) {
        double s = 0.0;
        for (std::size_t r = r0; r < r1; ++r) s += part.permuted(r, c);
        sums[c - c0] = s;
        mean += s;
      }
      mean /= static_cast<double>(c1 - c0);
      report.constants[j * report.domain_cells + i] = mean;
      for (std::size_t c = c0; c < c1; ++c) {
        const double dev = std::abs(sums[c - c0] - mean);
        report.worst_deviation = std::max(report.worst_deviation, dev);
        if (dev > tol) {
          report.failures.push_back({i, j, part.col_perm[c], sums[c - c0], mean});
        }
      }
    }
  }
  report.pass = report.failures.empty();
  return report;
}

StochasticChannel synthesize_macro_mechanism(const StochasticChannel& f,
                                             const DeterministicMap& tau_domain,
                                             const DeterministicMap& tau_codomain, double tol) {
  HomogeneityReport report = check_homogeneity(f, tau_domain, tau_codomain, tol);
  if (!report.pass) {
    const auto& fail = report.failures.front();
    throw NotHomogeneous("not homogeneous: block (" + std::to_string(fail.cell_i + 1) + "," +
                             std::to_string(fail.cell_j + 1) + ") column " +
                             std::to_string(fail.column) + " sums to " + fmt_num(fail.column_sum) +
                             ", block constant is " + fmt_num(fail.constant),
                         std::move(report));
  }
  StochasticChannel g(report.codomain_cells, report.domain_cells);
  for (std::size_t j = 0; j < report.codomain_cells; ++j) {
    for (std::size_t i = 0; i < report.domain_cells; ++i) {
      g(j, i) = report.constant(i, j);
    }
  }
  return g;
}

SynthesisResult synthesize_abstraction(const CausalModel& micro, const GraphHom& hom,
                                       std::span<const DeterministicMap> maps, double tol) {
  require_graph(micro.dag, hom.source, "micro");
  {
    const ValidationReport hv = validate_hom(hom);
    if (!hv.ok()) throw ModelError("invalid homomorphism: " + hv.issues.front());
  }
  AbstractionCandidate cand = candidate_from_maps(hom, micro, maps);
  const auto pre = hom.preimages();

  for (std::size_t t = 0; t < hom.target.vertex_count(); ++t) {
    std::set<std::size_t> induced;
    for (std::size_t u : pre[t]) {
      for (std::size_t q : micro.dag.parents(u)) induced.insert(hom.map[q]);
    }
    for (std::size_t mp : hom.target.parents(t)) {
      if (!induced.count(mp)) {
        throw ModelError("macro vertex '" + hom.target.vertex_name(t) + "' has parent '" +
                         hom.target.vertex_name(mp) +
                         "' with no counterpart among the merged parents; synthesis does not "
                         "cover extra macro parents");
      }
    }
  }

  CausalModel macro;
  macro.dag = hom.target;
  macro.variables.resize(hom.target.vertex_count());
  macro.mechanisms.resize(hom.target.vertex_count());
  for (std::size_t t = 0; t < hom.target.vertex_count(); ++t) {
    const std::string& name = hom.target.vertex_name(t);
    {
      std::set<std::string> labels(maps[t].codomain_values.begin(),
                                   maps[t].codomain_values.end());
      if (labels.size() != maps[t].codomain_values.size()) {
        throw ModelError("value merge for macro vertex '" + name + "' repeats a value label");
      }
    }
    macro.variables[t] = VariableSpec{name, maps[t].codomain_values};

    std::vector<DeterministicMap> parent_maps;
    std::vector<std::string> parent_names;
    for (std::size_t mp : hom.target.parents(t)) {
      parent_maps.push_back(maps[mp]);
      parent_names.push_back(hom.target.vertex_name(mp));
    }
    const DeterministicMap tau_parents = tensor_maps(parent_maps);
    const StochasticChannel group = group_channel(micro, hom, t);
    try {
      macro.mechanisms[t] = synthesize_macro_mechanism(group, tau_parents, maps[t], tol);
    } catch (NotHomogeneous& e) {
      std::string parents_desc;
      for (std::size_t k = 0; k < parent_names.size(); ++k) {
        if (k > 0) parents_desc += ",";
        parents_desc += parent_names[k];
      }
      NotHomogeneous out("mechanism for macro vertex '" + name + "' under the merge of parents (" +
                             parents_desc + ") is " + e.what(),
                         std::move(e.report));
      out.vertex = name;
      throw out;
    }
  }
  return SynthesisResult{std::move(macro), std::move(cand)};
}

}  // namespace causalabs
