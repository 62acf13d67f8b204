#include "causalabs/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace causalabs {

std::optional<std::size_t> VariableSpec::value_index(std::string_view label) const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == label) return i;
  }
  return std::nullopt;
}

double Distribution::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double Distribution::max_abs_diff(const Distribution& other) const {
  if (weights.size() != other.weights.size()) {
    throw ModelError("distribution arity mismatch: " + std::to_string(weights.size()) + " vs " +
                     std::to_string(other.weights.size()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    worst = std::max(worst, std::abs(weights[i] - other.weights[i]));
  }
  return worst;
}

Distribution Distribution::point_mass(std::size_t arity, std::size_t index) {
  if (index >= arity) throw ModelError("point mass index out of range");
  Distribution d;
  d.weights.assign(arity, 0.0);
  d.weights[index] = 1.0;
  return d;
}

Distribution Distribution::uniform(std::size_t arity) {
  if (arity == 0) throw ModelError("uniform distribution over zero values");
  Distribution d;
  d.weights.assign(arity, 1.0 / static_cast<double>(arity));
  return d;
}

IndexScheme::IndexScheme(std::vector<std::size_t> arities) : arities_(std::move(arities)) {
  strides_.assign(arities_.size(), 1);
  std::size_t running = 1;
  for (std::size_t k = arities_.size(); k-- > 0;) {
    if (arities_[k] == 0) throw ModelError("index scheme: factor with arity 0");
    strides_[k] = running;
    if (arities_[k] != 0 && running > (std::size_t{1} << 62) / arities_[k]) {
      throw StateCapExceeded("index scheme: product state space overflows");
    }
    running *= arities_[k];
  }
  total_ = running;
}

std::size_t IndexScheme::encode(std::span<const std::size_t> digits) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < arities_.size(); ++k) {
    flat += digits[k] * strides_[k];
  }
  return flat;
}

void IndexScheme::decode(std::size_t flat, std::span<std::size_t> digits) const {
  for (std::size_t k = 0; k < arities_.size(); ++k) {
    digits[k] = (flat / strides_[k]) % arities_[k];
  }
}

std::size_t IndexScheme::digit(std::size_t flat, std::size_t k) const {
  return (flat / strides_[k]) % arities_[k];
}

std::string fmt_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace causalabs
