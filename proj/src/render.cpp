#include "causalabs/render.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace causalabs::render {

namespace {

const char* mode_name(NaturalityMode mode) {
  return mode == NaturalityMode::Grouped ? "grouped" : "edgewise";
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string sci3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", x);
  return buf;
}

std::string validation_text(const ValidationReport& report, const std::string& subject) {
  std::ostringstream out;
  if (report.ok()) {
    out << subject << ": ok\n";
    return out.str();
  }
  out << subject << ": " << report.issues.size() << " issue(s)\n";
  for (const std::string& issue : report.issues) out << "  - " << issue << "\n";
  return out.str();
}

json validation_json(const ValidationReport& report, const std::string& subject) {
  return json{{"subject", subject}, {"ok", report.ok()}, {"issues", report.issues}};
}

std::string hom_summary(const GraphHom& hom) {
  std::ostringstream out;
  out << "map:";
  for (std::size_t v = 0; v < hom.source.vertex_count(); ++v) {
    out << (v == 0 ? " " : ", ") << hom.source.vertex_name(v) << "->"
        << hom.target.vertex_name(hom.map[v]);
  }
  out << "\n";
  const auto pre = hom.preimages();
  for (std::size_t t = 0; t < pre.size(); ++t) {
    if (pre[t].size() == 1) continue;
    out << (pre[t].empty() ? "macro-only: " : "merged: ") << hom.target.vertex_name(t);
    if (!pre[t].empty()) {
      out << " <- {";
      for (std::size_t k = 0; k < pre[t].size(); ++k) {
        out << (k == 0 ? "" : ", ") << hom.source.vertex_name(pre[t][k]);
      }
      out << "}";
    }
    out << "\n";
  }
  return out.str();
}

json hom_json(const GraphHom& hom) {
  json map = json::object();
  for (std::size_t v = 0; v < hom.source.vertex_count(); ++v) {
    map[hom.source.vertex_name(v)] = hom.target.vertex_name(hom.map[v]);
  }
  json preimages = json::object();
  const auto pre = hom.preimages();
  for (std::size_t t = 0; t < pre.size(); ++t) {
    json members = json::array();
    for (std::size_t u : pre[t]) members.push_back(hom.source.vertex_name(u));
    preimages[hom.target.vertex_name(t)] = std::move(members);
  }
  return json{{"map", std::move(map)}, {"preimages", std::move(preimages)}};
}

std::string distribution_text(const Distribution& d, const std::vector<VariableSpec>& vars) {
  std::vector<std::size_t> arities;
  for (const VariableSpec& v : vars) arities.push_back(v.arity());
  const IndexScheme scheme{arities};
  std::ostringstream out;
  std::vector<std::size_t> digits(scheme.rank());
  for (std::size_t s = 0; s < d.arity(); ++s) {
    scheme.decode(s, digits);
    std::vector<std::string> labels;
    for (std::size_t v = 0; v < digits.size(); ++v) {
      labels.push_back(vars[v].values[digits[v]]);
    }
    out << "(" << join(labels, ",") << ")\t" << fmt_num(d.weights[s]) << "\n";
  }
  return out.str();
}

json distribution_json(const Distribution& d, const std::vector<VariableSpec>& vars) {
  json j;
  json names = json::array();
  for (const VariableSpec& v : vars) names.push_back(v.name);
  j["variables"] = std::move(names);
  j["weights"] = d.weights;
  return j;
}

json channel_json(const StochasticChannel& ch) { return json(ch.rows()); }

std::string naturality_text(const NaturalityReport& report) {
  std::ostringstream out;
  out << "naturality (" << mode_name(report.mode) << " mode, tol " << sci3(report.tolerance)
      << ")\n";
  for (const NaturalityCheck& check : report.checks) {
    out << "  " << check.label << "\tdeviation " << sci3(check.max_deviation) << "\t"
        << (check.max_deviation <= report.tolerance ? "ok" : "FAIL") << "\n";
  }
  out << (report.pass ? "pass" : "fail") << " (worst " << sci3(report.max_deviation) << ")\n";
  return out.str();
}

json naturality_json(const NaturalityReport& report) {
  json checks = json::array();
  for (const NaturalityCheck& check : report.checks) {
    checks.push_back({{"vertex", check.label},
                      {"max_deviation", check.max_deviation},
                      {"lhs", channel_json(check.lhs)},
                      {"rhs", channel_json(check.rhs)}});
  }
  return json{{"mode", mode_name(report.mode)},
              {"tolerance", report.tolerance},
              {"checks", std::move(checks)},
              {"max_deviation", report.max_deviation},
              {"pass", report.pass}};
}

std::string equivalence_text(const EquivalenceReport& report) {
  std::ostringstream out;
  out << naturality_text(report.naturality);
  if (report.non_permutation_components.empty()) {
    out << "all components are permutations\n";
  } else {
    out << "non-permutation components: " << join(report.non_permutation_components, ", ")
        << "\n";
  }
  out << (report.equivalent ? "equivalent" : "not equivalent") << "\n";
  return out.str();
}

json equivalence_json(const EquivalenceReport& report) {
  return json{{"naturality", naturality_json(report.naturality)},
              {"non_permutation_components", report.non_permutation_components},
              {"equivalent", report.equivalent}};
}

std::string homogeneity_text(const HomogeneityReport& report, const std::string& subject,
                             double tol) {
  std::ostringstream out;
  out << "homogeneity of " << subject << " (" << report.domain_cells << "x"
      << report.codomain_cells << " blocks, tol " << sci3(tol) << ")\n";
  out << "  block constants (codomain cell x domain cell):\n";
  for (std::size_t j = 0; j < report.codomain_cells; ++j) {
    out << "   ";
    for (std::size_t i = 0; i < report.domain_cells; ++i) {
      out << " " << fmt_num(report.constant(i, j));
    }
    out << "\n";
  }
  for (const auto& fail : report.failures) {
    out << "  block (" << fail.cell_i + 1 << "," << fail.cell_j + 1 << ") column " << fail.column
        << " sums to " << fmt_num(fail.column_sum) << ", expected " << fmt_num(fail.constant)
        << " (off by " << sci3(std::abs(fail.column_sum - fail.constant)) << ")\n";
  }
  out << (report.pass ? "homogeneous" : "not homogeneous") << " (worst deviation "
      << sci3(report.worst_deviation) << ")\n";
  return out.str();
}

json homogeneity_json(const HomogeneityReport& report, const std::string& subject, double tol) {
  json constants = json::array();
  for (std::size_t j = 0; j < report.codomain_cells; ++j) {
    json row = json::array();
    for (std::size_t i = 0; i < report.domain_cells; ++i) row.push_back(report.constant(i, j));
    constants.push_back(std::move(row));
  }
  json failures = json::array();
  for (const auto& fail : report.failures) {
    failures.push_back({{"domain_cell", fail.cell_i},
                        {"codomain_cell", fail.cell_j},
                        {"column", fail.column},
                        {"column_sum", fail.column_sum},
                        {"constant", fail.constant}});
  }
  return json{{"subject", subject},
              {"tolerance", tol},
              {"pass", report.pass},
              {"constants", std::move(constants)},
              {"worst_deviation", report.worst_deviation},
              {"failures", std::move(failures)},
              {"column_order", report.partition.col_perm},
              {"row_order", report.partition.row_perm}};
}

std::string sweep_text(const InterventionSweepReport& report) {
  std::ostringstream out;
  out << "intervention sweep (tol " << sci3(report.tolerance) << ")\n";
  for (const SweepEntry& entry : report.entries) {
    const std::string name = entry.targets.empty() ? "(none)" : join(entry.targets, ",");
    out << "  cut " << name << "\tdeviation " << sci3(entry.max_deviation) << "\t"
        << (entry.max_deviation <= report.tolerance ? "ok" : "FAIL") << "\n";
  }
  out << (report.pass ? "pass" : "fail") << " (worst " << sci3(report.worst_deviation) << ")\n";
  return out.str();
}

json sweep_json(const InterventionSweepReport& report) {
  json entries = json::array();
  for (const SweepEntry& entry : report.entries) {
    entries.push_back({{"targets", entry.targets}, {"max_deviation", entry.max_deviation}});
  }
  return json{{"tolerance", report.tolerance},
              {"entries", std::move(entries)},
              {"worst_deviation", report.worst_deviation},
              {"pass", report.pass}};
}

}  // namespace causalabs::render
