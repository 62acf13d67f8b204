#include "causalabs/kernels.hpp"

#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace causalabs::kernels {

namespace {

// Hot loops walk mixed-radix digit odometers instead of decoding every flat
// index; per output entry the arithmetic and its order are identical across
// the serial and OpenMP variants, so results are bitwise equal.

inline void increment_digits(std::span<const std::size_t> arities,
                             std::vector<std::size_t>& digits) {
  for (std::size_t k = arities.size(); k-- > 0;) {
    if (++digits[k] < arities[k]) return;
    digits[k] = 0;
  }
}

inline double state_probability(const CausalModel& model,
                                const std::vector<std::size_t>& digits) {
  double p = 1.0;
  for (std::size_t v = 0; v < model.vertex_count(); ++v) {
    std::size_t pa = 0;
    for (std::size_t q : model.dag.parents(v)) {
      pa = pa * model.arity(q) + digits[q];
    }
    p *= model.mechanisms[v](digits[v], pa);
  }
  return p;
}

void joint_chunk(const CausalModel& model, const IndexScheme& scheme, std::size_t lo,
                 std::size_t hi, std::span<double> out) {
  std::vector<std::size_t> digits(model.vertex_count());
  scheme.decode(lo, digits);
  for (std::size_t s = lo; s < hi; ++s) {
    out[s] = state_probability(model, digits);
    increment_digits(scheme.arities(), digits);
  }
}

struct SplitScheme {
  std::vector<std::size_t> arities;
  std::vector<std::size_t> strides;  // strides in the original flat layout
  IndexScheme flat;                  // scheme over `arities` alone

  SplitScheme(const IndexScheme& scheme, std::span<const std::size_t> positions) {
    for (std::size_t k : positions) {
      arities.push_back(scheme.arity(k));
      strides.push_back(scheme.stride(k));
    }
    flat = IndexScheme(arities);
  }

  std::size_t offset_of(std::size_t sub_flat, std::vector<std::size_t>& digits) const {
    flat.decode(sub_flat, digits);
    std::size_t off = 0;
    for (std::size_t k = 0; k < digits.size(); ++k) off += digits[k] * strides[k];
    return off;
  }
};

// Sum of in[] over the sub-scheme, starting at `base`, in ascending
// mixed-radix order. The digit odometer keeps a running offset.
inline double strided_sum(std::span<const double> in, const SplitScheme& sub, std::size_t base,
                          std::vector<std::size_t>& digits) {
  std::fill(digits.begin(), digits.end(), 0);
  std::size_t off = base;
  double acc = 0.0;
  const std::size_t total = sub.flat.size();
  for (std::size_t count = 0; count < total; ++count) {
    acc += in[off];
    for (std::size_t k = digits.size(); k-- > 0;) {
      if (++digits[k] < sub.arities[k]) {
        off += sub.strides[k];
        break;
      }
      digits[k] = 0;
      off -= sub.strides[k] * (sub.arities[k] - 1);
    }
  }
  return acc;
}

void marginal_chunk(std::span<const double> in, const SplitScheme& kept,
                    const SplitScheme& dropped, std::size_t lo, std::size_t hi,
                    std::span<double> out) {
  std::vector<std::size_t> kd(kept.arities.size());
  std::vector<std::size_t> dd(dropped.arities.size());
  for (std::size_t o = lo; o < hi; ++o) {
    out[o] = strided_sum(in, dropped, kept.offset_of(o, kd), dd);
  }
}

std::vector<std::size_t> dropped_positions(const IndexScheme& scheme,
                                           std::span<const std::size_t> keep) {
  std::vector<bool> kept(scheme.rank(), false);
  for (std::size_t k : keep) kept[k] = true;
  std::vector<std::size_t> dropped;
  for (std::size_t k = 0; k < scheme.rank(); ++k) {
    if (!kept[k]) dropped.push_back(k);
  }
  return dropped;
}

struct GroupShape {
  std::size_t prefix = 1;
  std::size_t group = 1;
  std::size_t suffix = 1;
};

GroupShape group_shape(const IndexScheme& scheme, std::size_t begin, std::size_t end) {
  GroupShape s;
  for (std::size_t k = 0; k < begin; ++k) s.prefix *= scheme.arity(k);
  for (std::size_t k = begin; k < end; ++k) s.group *= scheme.arity(k);
  for (std::size_t k = end; k < scheme.rank(); ++k) s.suffix *= scheme.arity(k);
  return s;
}

inline double contract_one(std::span<const double> in, const StochasticChannel& ch,
                           std::size_t p, std::size_t t, std::size_t s, std::size_t group,
                           std::size_t suffix) {
  double acc = 0.0;
  const std::size_t base = p * group * suffix + s;
  for (std::size_t u = 0; u < group; ++u) {
    acc += ch(t, u) * in[base + u * suffix];
  }
  return acc;
}

void contract_chunk(std::span<const double> in, const GroupShape& shape,
                    const StochasticChannel& ch, std::size_t lo, std::size_t hi,
                    std::span<double> out) {
  const std::size_t k = ch.codomain_arity();
  for (std::size_t o = lo; o < hi; ++o) {
    const std::size_t s = o % shape.suffix;
    const std::size_t t = (o / shape.suffix) % k;
    const std::size_t p = o / (shape.suffix * k);
    out[o] = contract_one(in, ch, p, t, s, shape.group, shape.suffix);
  }
}

void reorder_chunk(std::span<const double> in, const SplitScheme& picked, std::size_t lo,
                   std::size_t hi, std::span<double> out) {
  if (lo >= hi) return;
  std::vector<std::size_t> digits(picked.arities.size());
  std::size_t src = picked.offset_of(lo, digits);
  for (std::size_t o = lo; o < hi; ++o) {
    out[o] = in[src];
    for (std::size_t k = digits.size(); k-- > 0;) {
      if (++digits[k] < picked.arities[k]) {
        src += picked.strides[k];
        break;
      }
      digits[k] = 0;
      src -= picked.strides[k] * (picked.arities[k] - 1);
    }
  }
}

template <typename Chunk>
void run_parallel(std::size_t total, Chunk&& chunk) {
#if defined(_OPENMP)
#pragma omp parallel
  {
    const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t per = (total + nt - 1) / nt;
    const std::size_t lo = std::min(total, tid * per);
    const std::size_t hi = std::min(total, lo + per);
    chunk(lo, hi);
  }
#else
  chunk(0, total);
#endif
}

}  // namespace

void joint_table_serial(const CausalModel& model, std::span<double> out) {
  const IndexScheme scheme = model.joint_scheme();
  joint_chunk(model, scheme, 0, out.size(), out);
}

void joint_table_omp(const CausalModel& model, std::span<double> out) {
  const IndexScheme scheme = model.joint_scheme();
  run_parallel(out.size(),
               [&](std::size_t lo, std::size_t hi) { joint_chunk(model, scheme, lo, hi, out); });
}

void marginal_serial(std::span<const double> in, const IndexScheme& scheme,
                     std::span<const std::size_t> keep, std::span<double> out) {
  const SplitScheme kept(scheme, keep);
  const SplitScheme dropped(scheme, dropped_positions(scheme, keep));
  marginal_chunk(in, kept, dropped, 0, out.size(), out);
}

void marginal_omp(std::span<const double> in, const IndexScheme& scheme,
                  std::span<const std::size_t> keep, std::span<double> out) {
  const SplitScheme kept(scheme, keep);
  const SplitScheme dropped(scheme, dropped_positions(scheme, keep));
  run_parallel(out.size(), [&](std::size_t lo, std::size_t hi) {
    marginal_chunk(in, kept, dropped, lo, hi, out);
  });
}

void contract_group_serial(std::span<const double> in, const IndexScheme& in_scheme,
                           std::size_t begin, std::size_t end, const StochasticChannel& ch,
                           std::span<double> out) {
  const GroupShape shape = group_shape(in_scheme, begin, end);
  contract_chunk(in, shape, ch, 0, out.size(), out);
}

void contract_group_omp(std::span<const double> in, const IndexScheme& in_scheme,
                        std::size_t begin, std::size_t end, const StochasticChannel& ch,
                        std::span<double> out) {
  const GroupShape shape = group_shape(in_scheme, begin, end);
  run_parallel(out.size(), [&](std::size_t lo, std::size_t hi) {
    contract_chunk(in, shape, ch, lo, hi, out);
  });
}

void reorder_factors_serial(std::span<const double> in, const IndexScheme& in_scheme,
                            std::span<const std::size_t> perm, std::span<double> out) {
  const SplitScheme picked(in_scheme, perm);
  reorder_chunk(in, picked, 0, out.size(), out);
}

void reorder_factors_omp(std::span<const double> in, const IndexScheme& in_scheme,
                         std::span<const std::size_t> perm, std::span<double> out) {
  const SplitScheme picked(in_scheme, perm);
  run_parallel(out.size(),
               [&](std::size_t lo, std::size_t hi) { reorder_chunk(in, picked, lo, hi, out); });
}

bool use_parallel(std::size_t work, const EvalOptions& opts) {
#if defined(_OPENMP)
  if (opts.force_serial) return false;
  if (omp_in_parallel()) return false;  // no nesting; outer loops own the threads
  return work >= opts.parallel_threshold;
#else
  (void)work;
  (void)opts;
  return false;
#endif
}

}  // namespace causalabs::kernels
