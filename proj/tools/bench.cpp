// Times the serial reference kernels against the OpenMP ones on synthetic
// models and checks that both produce identical tables.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "causalabs/generator.hpp"
#include "causalabs/kernels.hpp"
#include "causalabs/model.hpp"

using namespace causalabs;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_best_ms(std::size_t repeat, F&& f) {
  double best = 1e300;
  for (std::size_t i = 0; i < repeat; ++i) {
    const double t0 = now_ms();
    f();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

void report(const char* name, std::size_t size, double serial_ms, double parallel_ms,
            double diff) {
  std::printf("%-18s %10zu states  serial %8.2f ms  openmp %8.2f ms  speedup %5.2fx  max|diff| %g\n",
              name, size, serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t vertices = 20;
  std::size_t arity = 2;
  std::size_t repeat = 3;
  double edge_prob = 0.35;
  std::uint64_t seed = 7;

  CLI::App app{"kernel benchmark: serial reference vs OpenMP"};
  app.add_option("--vertices", vertices, "model size");
  app.add_option("--arity", arity, "values per variable");
  app.add_option("--repeat", repeat, "repetitions, best time wins");
  app.add_option("--edge-prob", edge_prob, "edge probability");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

#if defined(_OPENMP)
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without openmp; both columns run the serial code\n");
#endif

  Rng rng(seed);
  const Dag dag = random_dag(rng, vertices, edge_prob, "x");
  const CausalModel model = random_model_on(rng, dag, arity, arity);
  const IndexScheme scheme = model.joint_scheme();
  const std::size_t states = scheme.size();

  std::vector<double> a(states);
  std::vector<double> b(states);

  const double js = time_best_ms(repeat, [&] { kernels::joint_table_serial(model, a); });
  const double jp = time_best_ms(repeat, [&] { kernels::joint_table_omp(model, b); });
  report("joint", states, js, jp, max_diff(a, b));

  std::vector<std::size_t> keep;
  for (std::size_t v = 0; v < vertices / 2; ++v) keep.push_back(v);
  std::size_t kept_states = 1;
  for (std::size_t v : keep) kept_states *= model.arity(v);
  std::vector<double> ma(kept_states);
  std::vector<double> mb(kept_states);
  const double ms = time_best_ms(repeat, [&] { kernels::marginal_serial(a, scheme, keep, ma); });
  const double mp = time_best_ms(repeat, [&] { kernels::marginal_omp(a, scheme, keep, mb); });
  report("marginal", states, ms, mp, max_diff(ma, mb));

  // Contract the middle third of the factors through a random channel.
  const std::size_t begin = vertices / 3;
  const std::size_t end = 2 * vertices / 3;
  std::size_t group = 1;
  for (std::size_t v = begin; v < end; ++v) group *= model.arity(v);
  const StochasticChannel ch = random_channel(rng, 3, group);
  const std::size_t out_states = states / group * ch.codomain_arity();
  std::vector<double> ca(out_states);
  std::vector<double> cb(out_states);
  const double cs =
      time_best_ms(repeat, [&] { kernels::contract_group_serial(a, scheme, begin, end, ch, ca); });
  const double cp =
      time_best_ms(repeat, [&] { kernels::contract_group_omp(a, scheme, begin, end, ch, cb); });
  report("contract", states, cs, cp, max_diff(ca, cb));

  std::vector<std::size_t> perm(vertices);
  for (std::size_t v = 0; v < vertices; ++v) perm[v] = vertices - 1 - v;
  std::vector<double> ra(states);
  std::vector<double> rb(states);
  const double rs =
      time_best_ms(repeat, [&] { kernels::reorder_factors_serial(a, scheme, perm, ra); });
  const double rp =
      time_best_ms(repeat, [&] { kernels::reorder_factors_omp(a, scheme, perm, rb); });
  report("reorder", states, rs, rp, max_diff(ra, rb));

  return 0;
}
