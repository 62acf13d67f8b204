#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace causalabs {

/// Comparison tolerance used when callers do not pass one explicitly.
inline constexpr double kDefaultTol = 1e-9;

/// Default cap on enumerated product state spaces.
inline constexpr std::size_t kDefaultStateCap = 10'000'000;

/// Violation of a domain-level precondition (unknown vertex, arity mismatch,
/// mismatched graphs, ...). File-format problems are reported separately by
/// the I/O layer.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A product state space would exceed the configured cap.
class StateCapExceeded : public ModelError {
 public:
  using ModelError::ModelError;
};

/// A finite variable: a name plus an ordered list of value labels.
/// Value order is meaningful; it fixes all matrix indexing.
struct VariableSpec {
  std::string name;
  std::vector<std::string> values;

  std::size_t arity() const { return values.size(); }
  std::optional<std::size_t> value_index(std::string_view label) const;

  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

/// Nonnegative weights summing to one (within tolerance).
struct Distribution {
  std::vector<double> weights;

  Distribution() = default;
  explicit Distribution(std::vector<double> w) : weights(std::move(w)) {}

  std::size_t arity() const { return weights.size(); }
  double total() const;
  double max_abs_diff(const Distribution& other) const;

  static Distribution point_mass(std::size_t arity, std::size_t index);
  static Distribution uniform(std::size_t arity);

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

/// Mixed-radix flattening of a product of finite factors. The first listed
/// factor is the most significant digit; an empty factor list has size 1.
class IndexScheme {
 public:
  IndexScheme() = default;
  explicit IndexScheme(std::vector<std::size_t> arities);

  std::size_t rank() const { return arities_.size(); }
  std::size_t size() const { return total_; }
  std::size_t arity(std::size_t k) const { return arities_[k]; }
  const std::vector<std::size_t>& arities() const { return arities_; }
  std::size_t stride(std::size_t k) const { return strides_[k]; }

  std::size_t encode(std::span<const std::size_t> digits) const;
  void decode(std::size_t flat, std::span<std::size_t> digits) const;
  std::size_t digit(std::size_t flat, std::size_t k) const;

 private:
  std::vector<std::size_t> arities_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

/// Accumulates human-readable invariant violations.
struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
  void add(std::string msg) { issues.push_back(std::move(msg)); }
};

/// Formats a double the way reports do ("%.12g").
std::string fmt_num(double x);

}  // namespace causalabs
