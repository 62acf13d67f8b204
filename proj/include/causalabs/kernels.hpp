#pragma once

#include <span>

#include "causalabs/channel.hpp"
#include "causalabs/model.hpp"
#include "causalabs/types.hpp"

// Dense enumeration kernels. Each kernel ships in two variants: a plain
// serial implementation (the reference) and an OpenMP one. Both perform the
// same arithmetic per output entry in the same order, so their results are
// bitwise identical; the test suite asserts exact agreement and the bench
// tool compares their throughput.
namespace causalabs::kernels {

/// out[s] = prod_v mech_v(digit_v(s), parent_index(s)); out.size() must be
/// the model's joint state count.
void joint_table_serial(const CausalModel& model, std::span<double> out);
void joint_table_omp(const CausalModel& model, std::span<double> out);

/// Sums out the factors not listed in keep (ascending positions). out.size()
/// must be the product of the kept arities. Per kept state, dropped states
/// are accumulated in ascending mixed-radix order.
void marginal_serial(std::span<const double> in, const IndexScheme& scheme,
                     std::span<const std::size_t> keep, std::span<double> out);
void marginal_omp(std::span<const double> in, const IndexScheme& scheme,
                  std::span<const std::size_t> keep, std::span<double> out);

/// Contracts the contiguous factor group [begin, end) through `ch`
/// (ch.domain must equal the product of the group arities). The group is
/// replaced by one factor of arity ch.codomain; begin == end inserts a new
/// factor (ch.domain == 1). Per output entry the contracted index runs
/// ascending.
void contract_group_serial(std::span<const double> in, const IndexScheme& in_scheme,
                           std::size_t begin, std::size_t end, const StochasticChannel& ch,
                           std::span<double> out);
void contract_group_omp(std::span<const double> in, const IndexScheme& in_scheme,
                        std::size_t begin, std::size_t end, const StochasticChannel& ch,
                        std::span<double> out);

/// Permutes factor order: output factor j is input factor perm[j].
void reorder_factors_serial(std::span<const double> in, const IndexScheme& in_scheme,
                            std::span<const std::size_t> perm, std::span<double> out);
void reorder_factors_omp(std::span<const double> in, const IndexScheme& in_scheme,
                         std::span<const std::size_t> perm, std::span<double> out);

/// Dispatch policy shared by the public entry points.
bool use_parallel(std::size_t work, const EvalOptions& opts);

}  // namespace causalabs::kernels
