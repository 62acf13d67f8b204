#pragma once

#include <string>

#include <json.hpp>

#include "causalabs/abstraction.hpp"
#include "causalabs/model.hpp"
#include "causalabs/syntax.hpp"

// Report rendering: aligned text for humans, JSON for machines. Text rounds
// deviations to three significant digits; JSON carries full precision.
namespace causalabs::render {

using json = nlohmann::ordered_json;

std::string sci3(double x);  // "%.2e"

std::string validation_text(const ValidationReport& report, const std::string& subject);
json validation_json(const ValidationReport& report, const std::string& subject);

/// One-line vertex map plus the derived preimage partition (merged groups).
std::string hom_summary(const GraphHom& hom);
json hom_json(const GraphHom& hom);

std::string distribution_text(const Distribution& d, const std::vector<VariableSpec>& vars);
json distribution_json(const Distribution& d, const std::vector<VariableSpec>& vars);

std::string naturality_text(const NaturalityReport& report);
json naturality_json(const NaturalityReport& report);

std::string equivalence_text(const EquivalenceReport& report);
json equivalence_json(const EquivalenceReport& report);

std::string homogeneity_text(const HomogeneityReport& report, const std::string& subject,
                             double tol);
json homogeneity_json(const HomogeneityReport& report, const std::string& subject, double tol);

std::string sweep_text(const InterventionSweepReport& report);
json sweep_json(const InterventionSweepReport& report);

json channel_json(const StochasticChannel& ch);

}  // namespace causalabs::render
