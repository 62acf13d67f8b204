#include "causalabs/model.hpp"

#include <cmath>

#include "causalabs/kernels.hpp"

namespace causalabs {

std::size_t CausalModel::parent_domain_size(std::size_t v) const {
  std::size_t n = 1;
  for (std::size_t p : dag.parents(v)) n *= arity(p);
  return n;
}

IndexScheme CausalModel::joint_scheme() const {
  std::vector<std::size_t> a(vertex_count());
  for (std::size_t v = 0; v < vertex_count(); ++v) a[v] = arity(v);
  return IndexScheme(std::move(a));
}

IndexScheme CausalModel::parent_scheme(std::size_t v) const {
  std::vector<std::size_t> a;
  a.reserve(dag.parents(v).size());
  for (std::size_t p : dag.parents(v)) a.push_back(arity(p));
  return IndexScheme(std::move(a));
}

ValidationReport validate_model(const CausalModel& model, double tol) {
  ValidationReport report;
  if (model.vertex_count() == 0) {
    report.add("model has no variables");
    return report;
  }
  if (model.variables.size() != model.vertex_count() ||
      model.mechanisms.size() != model.vertex_count()) {
    report.add("variable/mechanism count does not match vertex count");
    return report;
  }
  for (std::size_t v = 0; v < model.vertex_count(); ++v) {
    const VariableSpec& var = model.variables[v];
    if (var.name != model.dag.vertex_name(v)) {
      report.add("variable " + std::to_string(v) + " is named '" + var.name +
                 "' but the graph vertex is '" + model.dag.vertex_name(v) + "'");
    }
    if (var.arity() == 0) {
      report.add("variable " + var.name + " has no values");
      continue;
    }
    for (std::size_t i = 0; i < var.values.size(); ++i) {
      for (std::size_t j = i + 1; j < var.values.size(); ++j) {
        if (var.values[i] == var.values[j]) {
          report.add("variable " + var.name + " repeats value label '" + var.values[i] + "'");
        }
      }
    }
  }
  for (std::size_t v = 0; v < model.vertex_count(); ++v) {
    const std::string& name = model.dag.vertex_name(v);
    const StochasticChannel& mech = model.mechanisms[v];
    if (mech.codomain_arity() != model.arity(v)) {
      report.add("mechanism " + name + ": codomain arity " +
                 std::to_string(mech.codomain_arity()) + " != " + std::to_string(model.arity(v)));
      continue;
    }
    const std::size_t expected = model.parent_domain_size(v);
    if (mech.domain_arity() != expected) {
      report.add("mechanism " + name + ": domain arity " + std::to_string(mech.domain_arity()) +
                 " != " + std::to_string(expected));
      continue;
    }
    for (std::size_t c = 0; c < mech.domain_arity(); ++c) {
      for (std::size_t r = 0; r < mech.codomain_arity(); ++r) {
        if (mech(r, c) < -tol) {
          report.add("mechanism " + name + ": entry (" + std::to_string(r) + "," +
                     std::to_string(c) + ") is negative: " + fmt_num(mech(r, c)));
        }
      }
      const double s = mech.column_sum(c);
      if (std::abs(s - 1.0) > tol) {
        report.add("column " + std::to_string(c) + " of mechanism " + name + " sums to " +
                   fmt_num(s));
      }
    }
  }
  for (const auto& [vertex, named] : model.presets) {
    auto vi = model.dag.index_of(vertex);
    if (!vi) {
      report.add("preset for unknown vertex '" + vertex + "'");
      continue;
    }
    for (const auto& [pname, dist] : named) {
      if (dist.arity() != model.arity(*vi)) {
        report.add("preset '" + pname + "' of " + vertex + ": arity " +
                   std::to_string(dist.arity()) + " != " + std::to_string(model.arity(*vi)));
        continue;
      }
      for (double w : dist.weights) {
        if (w < -tol) {
          report.add("preset '" + pname + "' of " + vertex + ": negative weight " + fmt_num(w));
          break;
        }
      }
      if (std::abs(dist.total() - 1.0) > tol) {
        report.add("preset '" + pname + "' of " + vertex + ": weights sum to " +
                   fmt_num(dist.total()));
      }
    }
  }
  return report;
}

Distribution joint_distribution(const CausalModel& model, const EvalOptions& opts) {
  const IndexScheme scheme = model.joint_scheme();
  if (scheme.size() > opts.state_cap) {
    throw StateCapExceeded("joint state space has " + std::to_string(scheme.size()) +
                           " states, cap is " + std::to_string(opts.state_cap));
  }
  Distribution out;
  out.weights.resize(scheme.size());
  if (kernels::use_parallel(scheme.size() * model.vertex_count(), opts)) {
    kernels::joint_table_omp(model, out.weights);
  } else {
    kernels::joint_table_serial(model, out.weights);
  }
  return out;
}

Distribution marginal(const Distribution& joint, const IndexScheme& scheme,
                      std::span<const std::size_t> keep, const EvalOptions& opts) {
  if (joint.arity() != scheme.size()) {
    throw ModelError("marginal: distribution has " + std::to_string(joint.arity()) +
                     " states, scheme has " + std::to_string(scheme.size()));
  }
  std::size_t out_size = 1;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= scheme.rank()) throw ModelError("marginal: kept factor out of range");
    if (i > 0 && keep[i] <= keep[i - 1]) {
      throw ModelError("marginal: kept factors must be strictly ascending");
    }
    out_size *= scheme.arity(keep[i]);
  }
  Distribution out;
  out.weights.resize(out_size);
  if (kernels::use_parallel(scheme.size(), opts)) {
    kernels::marginal_omp(joint.weights, scheme, keep, out.weights);
  } else {
    kernels::marginal_serial(joint.weights, scheme, keep, out.weights);
  }
  return out;
}

CausalModel apply_intervention(const CausalModel& model,
                               const std::map<std::string, Distribution>& targets) {
  std::vector<bool> cut(model.vertex_count(), false);
  for (const auto& [name, dist] : targets) {
    const std::size_t v = model.dag.require_index(name);
    if (dist.arity() != model.arity(v)) {
      throw ModelError("intervention on " + name + ": distribution arity " +
                       std::to_string(dist.arity()) + " != " + std::to_string(model.arity(v)));
    }
    cut[v] = true;
  }
  std::vector<std::vector<std::size_t>> parents(model.vertex_count());
  for (std::size_t v = 0; v < model.vertex_count(); ++v) {
    if (!cut[v]) parents[v] = model.dag.parents(v);
  }
  CausalModel out;
  out.dag = Dag(model.dag.vertices(), std::move(parents));
  out.variables = model.variables;
  out.mechanisms = model.mechanisms;
  out.presets = model.presets;
  for (const auto& [name, dist] : targets) {
    const std::size_t v = out.dag.require_index(name);
    out.mechanisms[v] = StochasticChannel::from_column(dist);
  }
  return out;
}

}  // namespace causalabs
