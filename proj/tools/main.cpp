// causalabs command line: model validation, joint enumeration, interventions,
// abstraction/equivalence checking, homogeneity testing, macro-model
// synthesis and seeded instance generation.
//
// Exit codes: 0 = operation succeeded / check passed, 1 = check failed,
// 2 = invalid input (parse, schema or precondition errors).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "causalabs/abstraction.hpp"
#include "causalabs/generator.hpp"
#include "causalabs/io.hpp"
#include "causalabs/model.hpp"
#include "causalabs/render.hpp"
#include "causalabs/syntax.hpp"

namespace {

using namespace causalabs;
namespace fs = std::filesystem;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

double default_tol() {
  if (const char* env = std::getenv("CAUSAL_ABS_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != nullptr && *end == '\0' && v > 0.0) return v;
  }
  return kDefaultTol;
}

void apply_threads(std::size_t n) {
#if defined(_OPENMP)
  if (n > 0) omp_set_num_threads(static_cast<int>(n));
#else
  (void)n;
#endif
}

CausalModel load_valid_model(const fs::path& path, double tol) {
  CausalModel model = io::load_model(path);
  const ValidationReport report = validate_model(model, tol);
  if (!report.ok()) {
    throw io::ParseError(render::validation_text(report, path.string() + ": invalid model"));
  }
  return model;
}

struct PairInputs {
  CausalModel micro;
  CausalModel macro;
  GraphHom hom;
};

PairInputs load_pair(const std::string& micro_path, const std::string& macro_path,
                     const std::string& hom_path, double tol) {
  const io::LoadedHom loaded = io::read_hom_file(hom_path);
  fs::path mp = micro_path;
  if (mp.empty()) {
    if (!loaded.source_ref) {
      throw io::ParseError(hom_path + ": no --micro given and the file has no 'source' ref");
    }
    mp = io::resolve_ref(loaded.origin, *loaded.source_ref);
  }
  fs::path hp = macro_path;
  if (hp.empty()) {
    if (!loaded.target_ref) {
      throw io::ParseError(hom_path + ": no --macro given and the file has no 'target' ref");
    }
    hp = io::resolve_ref(loaded.origin, *loaded.target_ref);
  }
  PairInputs in{load_valid_model(mp, tol), load_valid_model(hp, tol), {}};
  in.hom = io::resolve_hom(loaded, in.micro.dag, in.macro.dag);
  const ValidationReport hv = validate_hom(in.hom);
  if (!hv.ok()) {
    throw io::ParseError(render::validation_text(hv, hom_path + ": invalid homomorphism"));
  }
  return in;
}

// Micro model + homomorphism whose target may be a bare graph (taken from
// --macro, an inline target_graph, or the file's target ref, in that order).
struct MicroHomInputs {
  CausalModel micro;
  std::optional<CausalModel> macro;
  GraphHom hom;
};

MicroHomInputs load_micro_hom(const std::string& micro_path, const std::string& macro_path,
                              const std::string& hom_path, double tol) {
  const io::LoadedHom loaded = io::read_hom_file(hom_path);
  fs::path mp = micro_path;
  if (mp.empty()) {
    if (!loaded.source_ref) {
      throw io::ParseError(hom_path + ": no --micro given and the file has no 'source' ref");
    }
    mp = io::resolve_ref(loaded.origin, *loaded.source_ref);
  }
  MicroHomInputs in{load_valid_model(mp, tol), std::nullopt, {}};
  Dag target;
  if (!macro_path.empty()) {
    in.macro = load_valid_model(macro_path, tol);
    target = in.macro->dag;
  } else if (loaded.target_graph) {
    target = *loaded.target_graph;
  } else if (loaded.target_ref) {
    in.macro = load_valid_model(io::resolve_ref(loaded.origin, *loaded.target_ref), tol);
    target = in.macro->dag;
  } else {
    throw io::ParseError(hom_path +
                         ": no macro graph; give --macro or add 'target'/'target_graph'");
  }
  in.hom = io::resolve_hom(loaded, in.micro.dag, target);
  const ValidationReport hv = validate_hom(in.hom);
  if (!hv.ok()) {
    throw io::ParseError(render::validation_text(hv, hom_path + ": invalid homomorphism"));
  }
  return in;
}

std::pair<std::string, std::string> split_assignment(const std::string& arg) {
  const std::size_t pos = arg.find('=');
  if (pos == std::string::npos || pos == 0) {
    throw ModelError("expected VAR=..., got '" + arg + "'");
  }
  return {arg.substr(0, pos), arg.substr(pos + 1)};
}

std::map<std::string, Distribution> parse_targets(const CausalModel& model,
                                                  const std::vector<std::string>& args) {
  std::map<std::string, Distribution> targets;
  for (const std::string& arg : args) {
    const auto [name, rhs] = split_assignment(arg);
    const std::size_t v = model.dag.require_index(name);
    targets[name] = io::parse_distribution_arg(model, v, rhs);
  }
  return targets;
}

void parse_count_range(const std::string& arg, std::size_t& lo, std::size_t& hi) {
  const std::size_t pos = arg.find(':');
  try {
    if (pos == std::string::npos) {
      lo = hi = std::stoul(arg);
    } else {
      lo = std::stoul(arg.substr(0, pos));
      hi = std::stoul(arg.substr(pos + 1));
    }
  } catch (const std::exception&) {
    throw ModelError("expected N or LO:HI, got '" + arg + "'");
  }
  if (lo == 0 || lo > hi) throw ModelError("bad range '" + arg + "'");
}

void emit(const std::string& text) { std::cout << text; }
void emit_json(const render::json& j) { std::cout << j.dump(2) << "\n"; }

int run_validate(const std::string& model_path, double tol, bool as_json) {
  const CausalModel model = io::load_model(model_path);
  const ValidationReport report = validate_model(model, tol);
  if (as_json) {
    emit_json(render::validation_json(report, model_path));
  } else {
    emit(render::validation_text(report, model_path));
  }
  return report.ok() ? kExitPass : kExitFail;
}

int run_joint(const std::string& model_path, double tol, std::size_t cap, bool serial,
              const std::string& keep_arg, bool as_json) {
  const CausalModel model = load_valid_model(model_path, tol);
  EvalOptions opts;
  opts.state_cap = cap;
  opts.force_serial = serial;
  Distribution dist = joint_distribution(model, opts);
  std::vector<VariableSpec> vars = model.variables;
  if (!keep_arg.empty()) {
    std::vector<std::size_t> keep;
    std::string token;
    std::vector<std::string> names;
    for (std::size_t start = 0; start <= keep_arg.size();) {
      std::size_t pos = keep_arg.find(',', start);
      if (pos == std::string::npos) pos = keep_arg.size();
      names.push_back(keep_arg.substr(start, pos - start));
      start = pos + 1;
    }
    for (const std::string& name : names) keep.push_back(model.dag.require_index(name));
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    dist = marginal(dist, model.joint_scheme(), keep, opts);
    vars.clear();
    for (std::size_t v : keep) vars.push_back(model.variables[v]);
  }
  if (as_json) {
    emit_json(render::distribution_json(dist, vars));
  } else {
    emit(render::distribution_text(dist, vars));
  }
  return kExitPass;
}

int run_intervene(const std::string& model_path, double tol,
                  const std::vector<std::string>& set_args, const std::string& out_path,
                  bool print_joint, std::size_t cap, bool serial, bool as_json) {
  const CausalModel model = load_valid_model(model_path, tol);
  const CausalModel cut = apply_intervention(model, parse_targets(model, set_args));
  if (!out_path.empty()) io::save_model(cut, out_path);
  if (print_joint) {
    EvalOptions opts;
    opts.state_cap = cap;
    opts.force_serial = serial;
    const Distribution dist = joint_distribution(cut, opts);
    if (as_json) {
      emit_json(render::distribution_json(dist, cut.variables));
    } else {
      emit(render::distribution_text(dist, cut.variables));
    }
  } else if (out_path.empty()) {
    emit_json(io::model_to_json(cut));
  }
  return kExitPass;
}

int run_check_abstraction(const std::string& micro_path, const std::string& macro_path,
                          const std::string& hom_path, const std::string& alpha_path,
                          const std::string& mode, double tol, bool as_json) {
  const PairInputs in = load_pair(micro_path, macro_path, hom_path, tol);
  const io::LoadedCandidate lc = io::read_candidate_file(alpha_path);
  NaturalityReport report;
  if (mode == "edgewise") {
    const EdgewiseComponents comps = io::resolve_edgewise(lc, in.micro, &in.macro, in.hom);
    report = check_naturality_edgewise(in.micro, in.macro, in.hom, comps, tol);
  } else {
    const AbstractionCandidate cand = io::resolve_candidate(lc, in.micro, &in.macro, in.hom);
    report = check_naturality(in.micro, in.macro, cand, NaturalityMode::Grouped, tol);
  }
  if (as_json) {
    render::json j = render::naturality_json(report);
    j["hom"] = render::hom_json(in.hom);
    emit_json(j);
  } else {
    emit(render::hom_summary(in.hom));
    emit(render::naturality_text(report));
  }
  return report.pass ? kExitPass : kExitFail;
}

int run_check_equivalence(const std::string& micro_path, const std::string& macro_path,
                          const std::string& hom_path, const std::string& alpha_path, double tol,
                          bool as_json) {
  const PairInputs in = load_pair(micro_path, macro_path, hom_path, tol);
  const io::LoadedCandidate lc = io::read_candidate_file(alpha_path);
  const AbstractionCandidate cand = io::resolve_candidate(lc, in.micro, &in.macro, in.hom);
  const EquivalenceReport report = check_equivalence(in.micro, in.macro, cand, tol);
  if (as_json) {
    render::json j = render::equivalence_json(report);
    j["hom"] = render::hom_json(in.hom);
    emit_json(j);
  } else {
    emit(render::hom_summary(in.hom));
    emit(render::equivalence_text(report));
  }
  return report.equivalent ? kExitPass : kExitFail;
}

int run_check_interventions(const std::string& micro_path, const std::string& macro_path,
                            const std::string& hom_path, const std::string& alpha_path, double tol,
                            double sweep_tol, const std::vector<std::string>& set_args,
                            const std::string& preset, bool singletons,
                            const std::vector<std::string>& cut_args, std::size_t cap,
                            bool serial, bool as_json) {
  const PairInputs in = load_pair(micro_path, macro_path, hom_path, tol);
  const io::LoadedCandidate lc = io::read_candidate_file(alpha_path);
  const AbstractionCandidate cand = io::resolve_candidate(lc, in.micro, &in.macro, in.hom);

  std::vector<Distribution> dists(in.micro.vertex_count());
  std::vector<bool> have(in.micro.vertex_count(), false);
  for (const std::string& arg : set_args) {
    const auto [name, rhs] = split_assignment(arg);
    const std::size_t v = in.micro.dag.require_index(name);
    dists[v] = io::parse_distribution_arg(in.micro, v, rhs);
    have[v] = true;
  }
  for (std::size_t v = 0; v < in.micro.vertex_count(); ++v) {
    if (have[v]) continue;
    if (preset.empty()) {
      throw ModelError("missing intervention distribution for vertex " +
                       in.micro.dag.vertex_name(v) + " (use --set or --preset)");
    }
    dists[v] = io::parse_distribution_arg(in.micro, v, "@" + preset);
  }

  SweepOptions opts;
  opts.tol = sweep_tol;
  opts.singletons_only = singletons;
  opts.state_cap = cap;
  opts.parallel = !serial;
  for (const std::string& arg : cut_args) {
    std::vector<std::size_t> cut;
    std::string token;
    for (std::size_t start = 0; start <= arg.size() && !arg.empty();) {
      std::size_t pos = arg.find(',', start);
      if (pos == std::string::npos) pos = arg.size();
      cut.push_back(in.macro.dag.require_index(arg.substr(start, pos - start)));
      start = pos + 1;
      if (pos == arg.size()) break;
    }
    std::sort(cut.begin(), cut.end());
    cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
    opts.only_cuts.push_back(std::move(cut));
  }
  const InterventionSweepReport report =
      check_intervention_consistency(in.micro, in.macro, cand, dists, opts);
  if (as_json) {
    emit_json(render::sweep_json(report));
  } else {
    emit(render::sweep_text(report));
  }
  return report.pass ? kExitPass : kExitFail;
}

int run_homogeneity(const std::string& micro_path, const std::string& macro_path,
                    const std::string& hom_path, const std::string& taus_path,
                    const std::string& vertex, double tol, bool as_json) {
  const MicroHomInputs in = load_micro_hom(micro_path, macro_path, hom_path, tol);
  const io::LoadedCandidate lc = io::read_candidate_file(taus_path);
  const CausalModel* macro = in.macro ? &*in.macro : nullptr;
  const std::vector<DeterministicMap> maps = io::resolve_maps(lc, in.micro, macro, in.hom);

  std::vector<std::size_t> to_check;
  if (vertex.empty()) {
    for (std::size_t t = 0; t < in.hom.target.vertex_count(); ++t) to_check.push_back(t);
  } else {
    to_check.push_back(in.hom.target.require_index(vertex));
  }

  bool all_pass = true;
  render::json out = render::json::array();
  if (!as_json) emit(render::hom_summary(in.hom));
  for (std::size_t t : to_check) {
    std::vector<DeterministicMap> parent_maps;
    for (std::size_t mp : in.hom.target.parents(t)) parent_maps.push_back(maps[mp]);
    const HomogeneityReport report = check_homogeneity(
        group_channel(in.micro, in.hom, t), tensor_maps(parent_maps), maps[t], tol);
    all_pass = all_pass && report.pass;
    const std::string subject = "mechanism for " + in.hom.target.vertex_name(t);
    if (as_json) {
      out.push_back(render::homogeneity_json(report, subject, tol));
    } else {
      emit(render::homogeneity_text(report, subject, tol));
    }
  }
  if (as_json) emit_json(out);
  return all_pass ? kExitPass : kExitFail;
}

int run_synthesize(const std::string& micro_path, const std::string& hom_path,
                   const std::string& taus_path, const std::string& out_macro,
                   const std::string& out_alpha, double tol, bool as_json) {
  const MicroHomInputs in = load_micro_hom(micro_path, "", hom_path, tol);
  const io::LoadedCandidate lc = io::read_candidate_file(taus_path);
  const CausalModel* macro = in.macro ? &*in.macro : nullptr;
  const std::vector<DeterministicMap> maps = io::resolve_maps(lc, in.micro, macro, in.hom);

  SynthesisResult result;
  try {
    result = synthesize_abstraction(in.micro, in.hom, maps, tol);
  } catch (const NotHomogeneous& e) {
    if (as_json) {
      render::json j = render::homogeneity_json(e.report, e.vertex, tol);
      j["error"] = e.what();
      emit_json(j);
    } else {
      emit(std::string(e.what()) + "\n");
      emit(render::homogeneity_text(e.report, "mechanism for " + e.vertex, tol));
    }
    return kExitFail;
  }
  if (!out_macro.empty()) io::save_model(result.macro, out_macro);
  if (!out_alpha.empty()) {
    io::save_candidate(result.candidate, out_alpha,
                       fs::path(hom_path).filename().string());
  }
  if (as_json) {
    render::json j;
    j["macro"] = io::model_to_json(result.macro);
    if (!out_macro.empty()) j["saved_macro"] = out_macro;
    if (!out_alpha.empty()) j["saved_alpha"] = out_alpha;
    emit_json(j);
  } else {
    emit("synthesized " + std::to_string(result.macro.vertex_count()) + " macro mechanism(s)\n");
    if (!out_macro.empty()) emit("wrote " + out_macro + "\n");
    if (!out_alpha.empty()) emit("wrote " + out_alpha + "\n");
  }
  return kExitPass;
}

int run_generate(const GeneratorConfig& config, const std::string& out_dir) {
  const GeneratedInstance inst = generate_instance(config);

  // Every emitted instance is checked against its kind's promise first.
  if (!validate_model(inst.micro).ok()) throw ModelError("generated micro model is invalid");
  if (inst.macro && !validate_model(*inst.macro).ok()) {
    throw ModelError("generated macro model is invalid");
  }
  if (inst.hom && !validate_hom(*inst.hom).ok()) {
    throw ModelError("generated vertex map is invalid");
  }
  if (config.kind == GeneratorConfig::Kind::EquivalencePair &&
      !check_equivalence(inst.micro, *inst.macro, *inst.candidate).equivalent) {
    throw ModelError("generated pair is not an equivalence");
  }
  if (config.kind == GeneratorConfig::Kind::HomogeneousPair) {
    bool any_failure = false;
    for (std::size_t t = 0; t < inst.hom->target.vertex_count(); ++t) {
      std::vector<DeterministicMap> parent_maps;
      for (std::size_t mp : inst.hom->target.parents(t)) parent_maps.push_back(inst.maps[mp]);
      const HomogeneityReport report = check_homogeneity(
          group_channel(inst.micro, *inst.hom, t), tensor_maps(parent_maps), inst.maps[t]);
      any_failure = any_failure || !report.pass;
    }
    if (config.perturb > 0.0 ? !any_failure : any_failure) {
      throw ModelError("generated pair does not match its homogeneity promise");
    }
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::vector<std::string> written;

  io::save_model(inst.micro, dir / "micro.json");
  written.push_back("micro.json");
  if (inst.macro) {
    io::save_model(*inst.macro, dir / "macro.json");
    written.push_back("macro.json");
  }
  if (inst.hom) {
    io::save_hom(*inst.hom, dir / "hom.json", "micro.json",
                 inst.macro ? "macro.json" : std::string{}, !inst.macro);
    written.push_back("hom.json");
  }
  if (!inst.maps.empty()) {
    io::write_text_file(dir / "taus.json",
                        io::maps_to_json(inst.maps, inst.micro, *inst.hom, "hom.json").dump(2) +
                            "\n");
    written.push_back("taus.json");
  }
  if (inst.candidate) {
    io::save_candidate(*inst.candidate, dir / "alpha.json", "hom.json");
    written.push_back("alpha.json");
  }
  for (const std::string& name : written) emit(out_dir + "/" + name + "\n");
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite discrete causal models: channels, interventions, abstraction checks"};
  app.require_subcommand(1);
  app.fallthrough();
  int exit_code = kExitPass;

  const double tol_default = default_tol();
  auto threads = std::make_shared<std::size_t>(0);
  app.add_option("--threads", *threads, "worker thread count (0 = library default)");

  // validate
  {
    auto* sub = app.add_subcommand("validate", "check a model file's invariants");
    auto model = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(tol_default);
    auto as_json = std::make_shared<bool>(false);
    sub->add_option("model", *model, "model file")->required();
    sub->add_option("--tol", *tol, "comparison tolerance");
    sub->add_flag("--json", *as_json, "machine-readable report");
    sub->callback([=, &exit_code] {
      apply_threads(*threads); exit_code = run_validate(*model, *tol, *as_json); });
  }

  // joint
  {
    auto* sub = app.add_subcommand("joint", "enumerate the exact joint distribution");
    auto model = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(tol_default);
    auto cap = std::make_shared<std::size_t>(kDefaultStateCap);
    auto serial = std::make_shared<bool>(false);
    auto keep = std::make_shared<std::string>();
    auto as_json = std::make_shared<bool>(false);
    sub->add_option("model", *model, "model file")->required();
    sub->add_option("--tol", *tol, "comparison tolerance");
    sub->add_option("--cap", *cap, "state-space cap");
    sub->add_option("--keep", *keep, "comma-separated variables to marginalize onto");
    sub->add_flag("--serial", *serial, "force the serial kernels");
    sub->add_flag("--json", *as_json, "machine-readable report");
    sub->callback([=, &exit_code] {
      apply_threads(*threads);
      exit_code = run_joint(*model, *tol, *cap, *serial, *keep, *as_json);
    });
  }

  // intervene
  {
    auto* sub = app.add_subcommand("intervene", "replace mechanisms of targeted variables");
    auto model = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(tol_default);
    auto sets = std::make_shared<std::vector<std::string>>();
    auto out = std::make_shared<std::string>();
    auto joint = std::make_shared<bool>(false);
    auto cap = std::make_shared<std::size_t>(kDefaultStateCap);
    auto serial = std::make_shared<bool>(false);
    auto as_json = std::make_shared<bool>(false);
    sub->add_option("model", *model, "model file")->required();
    sub->add_option("--set", *sets, "VAR=p1,p2,... | VAR=@preset | VAR=value");
    sub->add_option("--out", *out, "write the intervened model here");
    sub->add_flag("--joint", *joint, "print the post-intervention joint");
    sub->add_option("--tol", *tol, "comparison tolerance");
    sub->add_option("--cap", *cap, "state-space cap");
    sub->add_flag("--serial", *serial, "force the serial kernels");
    sub->add_flag("--json", *as_json, "machine-readable report");
    sub->callback([=, &exit_code] {
      apply_threads(*threads);
      exit_code = run_intervene(*model, *tol, *sets, *out, *joint, *cap, *serial, *as_json);
    });
  }

  // check-abstraction
  {
    auto* sub = app.add_subcommand("check-abstraction",
                                   "verify the commuting squares of a translation");
    auto micro = std::make_shared<std::string>();
    auto macro = std::make_shared<std::string>();
    auto hom = std::make_shared<std::string>();
    auto alpha = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("grouped");
    auto tol = std::make_shared<double>(tol_default);
    auto as_json = std::make_shared<bool>(false);
    sub->add_option("--micro", *micro, "micro model file");
    sub->add_option("--macro", *macro, "macro model file");
    sub->add_option("--hom", *hom, "homomorphism file")->required();
    sub->add_option("--alpha", *alpha, "abstraction file")->required();
    sub->add_option("--mode", *mode, "grouped | edgewise")
        ->check(CLI::IsMember({"grouped", "edgewise"}));
    sub->add_option("--tol", *tol, "comparison tolerance");
    sub->add_flag("--json", *as_json, "machine-readable report");
    sub->callback([=, &exit_code] {
      apply_threads(*threads);
      exit_code = run_check_abstraction(*micro, *macro, *hom, *alpha, *mode, *tol, *as_json);
    });
  }

  // check-equivalence
  {
    auto* sub = app.add_subcommand("check-equivalence",
                                   "abstraction check plus permutation components");
    auto micro = std::make_shared<std::string>();
    auto macro = std::make_shared<std::string>();
    auto hom = std::make_shared<std::string>();
    auto alpha = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(tol_default);
    auto as_json = std::make_shared<bool>(false);
    sub->add_option("--micro", *micro, "micro model file");
    sub->add_option("--macro", *macro, "macro model file");
    sub->add_option("--hom", *hom, "homomorphism file")->required();
    sub->add_option("--alpha", *alpha, "abstraction file")->required();
    sub->add_option("--tol", *tol, "comparison tolerance");
    sub->add_flag("--json", *as_json, "machine-readable report");
    sub->callback([=, &exit_code] {
      apply_threads(*threads);
      exit_code = run_check_equivalence(*micro, *macro, *hom, *alpha, *tol, *as_json);
    });
  }

  // check-interventions
  {
    auto* sub = app.add_subcommand("check-interventions",
                                   "compare pushed micro interventions with macro ones");
    auto micro = std::make_shared<std::string>();
    auto macro = std::make_shared<std::string>();
    auto hom = std::make_shared<std::string>();
    auto alpha = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(tol_default);
    auto sweep_tol = std::make_shared<double>(1e-7);
    auto sets = std::make_shared<std::vector<std::string>>();
    auto preset = std::make_shared<std::string>();
    auto singletons = std::make_shared<bool>(false);
    auto cuts = std::make_shared<std::vector<std::string>>();
    auto cap = std::make_shared<std::size_t>(kDefaultStateCap);
    auto serial = std::make_shared<bool>(false);
    auto as_json = std::make_shared<bool>(false);
    sub->add_option("--micro", *micro, "micro model file");
    sub->add_option("--macro", *macro, "macro model file");
    sub->add_option("--hom", *hom, "homomorphism file")->required();
    sub->add_option("--alpha", *alpha, "abstraction file")->required();
    sub->add_option("--set", *sets, "per-vertex intervention distribution (VAR=...)");
    sub->add_option("--preset", *preset, "preset name for vertices without --set");
    sub->add_flag("--singletons", *singletons, "sweep only the empty set and singletons");
    sub->add_option("--cut", *cuts,
                    "check only this cut set (comma-separated macro vertices; repeatable)");
    sub->add_option("--tol", *sweep_tol, "sweep comparison tolerance");
    sub->add_option("--model-tol", *tol, "model validation tolerance");
    sub->add_option("--cap", *cap, "state-space cap");
    sub->add_flag("--serial", *serial, "evaluate cut sets sequentially");
    sub->add_flag("--json", *as_json, "machine-readable report");
    sub->callback([=, &exit_code] {
      apply_threads(*threads);
      exit_code = run_check_interventions(*micro, *macro, *hom, *alpha, *tol, *sweep_tol, *sets,
                                          *preset, *singletons, *cuts, *cap, *serial, *as_json);
    });
  }

  // homogeneity
  {
    auto* sub = app.add_subcommand("homogeneity",
                                   "block column-sum test of group mechanisms under merges");
    auto micro = std::make_shared<std::string>();
    auto macro = std::make_shared<std::string>();
    auto hom = std::make_shared<std::string>();
    auto taus = std::make_shared<std::string>();
    auto vertex = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(tol_default);
    auto as_json = std::make_shared<bool>(false);
    sub->add_option("--micro", *micro, "micro model file");
    sub->add_option("--macro", *macro, "macro model file (optional)");
    sub->add_option("--hom", *hom, "homomorphism file")->required();
    sub->add_option("--taus", *taus, "value-merge file")->required();
    sub->add_option("--vertex", *vertex, "check a single macro vertex");
    sub->add_option("--tol", *tol, "comparison tolerance");
    sub->add_flag("--json", *as_json, "machine-readable report");
    sub->callback([=, &exit_code] {
      apply_threads(*threads);
      exit_code = run_homogeneity(*micro, *macro, *hom, *taus, *vertex, *tol, *as_json);
    });
  }

  // synthesize
  {
    auto* sub = app.add_subcommand("synthesize",
                                   "build the macro model from value merges when possible");
    auto micro = std::make_shared<std::string>();
    auto hom = std::make_shared<std::string>();
    auto taus = std::make_shared<std::string>();
    auto out_macro = std::make_shared<std::string>();
    auto out_alpha = std::make_shared<std::string>();
    auto tol = std::make_shared<double>(tol_default);
    auto as_json = std::make_shared<bool>(false);
    sub->add_option("--micro", *micro, "micro model file");
    sub->add_option("--hom", *hom, "homomorphism file")->required();
    sub->add_option("--taus", *taus, "value-merge file")->required();
    sub->add_option("--out-macro", *out_macro, "write the macro model here");
    sub->add_option("--out-alpha", *out_alpha, "write the translation here");
    sub->add_option("--tol", *tol, "comparison tolerance");
    sub->add_flag("--json", *as_json, "machine-readable report");
    sub->callback([=, &exit_code] {
      apply_threads(*threads);
      exit_code = run_synthesize(*micro, *hom, *taus, *out_macro, *out_alpha, *tol, *as_json);
    });
  }

  // generate
  {
    auto* sub = app.add_subcommand("generate", "write seeded random instances");
    auto kind = std::make_shared<std::string>("arbitrary");
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out_dir = std::make_shared<std::string>(".");
    auto vertices = std::make_shared<std::string>("2:5");
    auto arity = std::make_shared<std::string>("2:3");
    auto edge_prob = std::make_shared<double>(0.5);
    auto group_size = std::make_shared<std::size_t>(2);
    auto max_macro = std::make_shared<std::size_t>(4);
    auto perturb = std::make_shared<double>(0.0);
    sub->add_option("--kind", *kind, "arbitrary | homogeneous-pair | equivalence-pair")
        ->check(CLI::IsMember({"arbitrary", "homogeneous-pair", "equivalence-pair"}));
    sub->add_option("--seed", *seed, "generator seed")->required();
    sub->add_option("--out-dir", *out_dir, "output directory");
    sub->add_option("--vertices", *vertices, "micro vertex count (N or LO:HI)");
    sub->add_option("--arity", *arity, "variable arity (N or LO:HI)");
    sub->add_option("--edge-prob", *edge_prob, "edge probability");
    sub->add_option("--group-size", *group_size, "largest merged group");
    sub->add_option("--max-macro", *max_macro, "largest macro vertex count");
    sub->add_option("--perturb", *perturb,
                    "homogeneous-pair: break homogeneity by moving this much mass");
    sub->callback([=, &exit_code] {
      apply_threads(*threads);
      GeneratorConfig config;
      if (*kind == "homogeneous-pair") {
        config.kind = GeneratorConfig::Kind::HomogeneousPair;
      } else if (*kind == "equivalence-pair") {
        config.kind = GeneratorConfig::Kind::EquivalencePair;
      } else {
        config.kind = GeneratorConfig::Kind::Arbitrary;
      }
      config.seed = *seed;
      parse_count_range(*vertices, config.min_vertices, config.max_vertices);
      parse_count_range(*arity, config.min_arity, config.max_arity);
      config.edge_prob = *edge_prob;
      config.max_group_size = *group_size;
      config.max_macro_vertices = *max_macro;
      config.perturb = *perturb;
      exit_code = run_generate(config, *out_dir);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return exit_code;
}
