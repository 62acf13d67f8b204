#pragma once

#include <span>
#include <vector>

#include "causalabs/types.hpp"

namespace causalabs {

/// Column-stochastic matrix: rows index the codomain, columns the domain,
/// and every column sums to 1. Entries are stored row-major.
class StochasticChannel {
 public:
  StochasticChannel() = default;
  StochasticChannel(std::size_t codomain, std::size_t domain, double fill = 0.0);

  static StochasticChannel identity(std::size_t n);
  static StochasticChannel scalar();  // the 1x1 unit
  static StochasticChannel uniform(std::size_t codomain, std::size_t domain);
  static StochasticChannel from_rows(const std::vector<std::vector<double>>& rows);
  static StochasticChannel from_column(const Distribution& d);

  std::size_t codomain_arity() const { return rows_; }
  std::size_t domain_arity() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> data() const { return data_; }

  double column_sum(std::size_t c) const;
  Distribution column(std::size_t c) const;
  Distribution apply(const Distribution& d) const;
  std::vector<std::vector<double>> rows() const;

  bool is_column_stochastic(double tol = kDefaultTol) const;
  /// Exactly one entry per row and per column is >= 1-tol, all others <= tol.
  bool is_permutation(double tol = kDefaultTol) const;
  /// Entries in [-tol, 0) are rounded up to 0 (tolerated fp noise).
  void clamp_small_negatives(double tol = kDefaultTol);

  friend bool operator==(const StochasticChannel&, const StochasticChannel&) = default;

 private:
  std::size_t rows_ = 1;
  std::size_t cols_ = 1;
  std::vector<double> data_{1.0};
};

/// Largest entrywise |a - b|; throws ModelError on shape mismatch.
double max_abs_diff(const StochasticChannel& a, const StochasticChannel& b);

/// Matrix product outer * inner; requires inner.codomain == outer.domain.
StochasticChannel compose(const StochasticChannel& outer, const StochasticChannel& inner);

/// Kronecker product with the first factor most significant, matching
/// IndexScheme order.
StochasticChannel tensor(const StochasticChannel& a, const StochasticChannel& b);

}  // namespace causalabs
