#include "causalabs/channel.hpp"

#include <algorithm>
#include <cmath>

namespace causalabs {

StochasticChannel::StochasticChannel(std::size_t codomain, std::size_t domain, double fill)
    : rows_(codomain), cols_(domain), data_(codomain * domain, fill) {
  if (codomain == 0 || domain == 0) throw ModelError("channel with zero arity");
}

StochasticChannel StochasticChannel::identity(std::size_t n) {
  StochasticChannel ch(n, n);
  for (std::size_t i = 0; i < n; ++i) ch(i, i) = 1.0;
  return ch;
}

StochasticChannel StochasticChannel::scalar() { return identity(1); }

StochasticChannel StochasticChannel::uniform(std::size_t codomain, std::size_t domain) {
  return StochasticChannel(codomain, domain, 1.0 / static_cast<double>(codomain));
}

StochasticChannel StochasticChannel::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ModelError("channel with zero rows");
  const std::size_t cols = rows.front().size();
  StochasticChannel ch(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw ModelError("ragged channel: row " + std::to_string(r) + " has " +
                       std::to_string(rows[r].size()) + " entries, expected " +
                       std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) ch(r, c) = rows[r][c];
  }
  return ch;
}

StochasticChannel StochasticChannel::from_column(const Distribution& d) {
  StochasticChannel ch(d.arity(), 1);
  for (std::size_t r = 0; r < d.arity(); ++r) ch(r, 0) = d.weights[r];
  return ch;
}

double StochasticChannel::column_sum(std::size_t c) const {
  double s = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, c);
  return s;
}

Distribution StochasticChannel::column(std::size_t c) const {
  Distribution d;
  d.weights.resize(rows_);
  for (std::size_t r = 0; r < rows_; ++r) d.weights[r] = (*this)(r, c);
  return d;
}

Distribution StochasticChannel::apply(const Distribution& d) const {
  if (d.arity() != cols_) {
    throw ModelError("channel applied to distribution of arity " + std::to_string(d.arity()) +
                     ", expected " + std::to_string(cols_));
  }
  Distribution out;
  out.weights.assign(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c) * d.weights[c];
    out.weights[r] = s;
  }
  return out;
}

std::vector<std::vector<double>> StochasticChannel::rows() const {
  std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out[r][c] = (*this)(r, c);
  }
  return out;
}

bool StochasticChannel::is_column_stochastic(double tol) const {
  for (std::size_t c = 0; c < cols_; ++c) {
    for (std::size_t r = 0; r < rows_; ++r) {
      if ((*this)(r, c) < -tol) return false;
    }
    if (std::abs(column_sum(c) - 1.0) > tol) return false;
  }
  return true;
}

bool StochasticChannel::is_permutation(double tol) const {
  if (rows_ != cols_) return false;
  std::vector<bool> row_hit(rows_, false);
  for (std::size_t c = 0; c < cols_; ++c) {
    std::size_t ones = 0;
    std::size_t one_row = 0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double v = (*this)(r, c);
      if (v >= 1.0 - tol) {
        ++ones;
        one_row = r;
      } else if (std::abs(v) > tol) {
        return false;
      }
    }
    if (ones != 1 || row_hit[one_row]) return false;
    row_hit[one_row] = true;
  }
  return true;
}

void StochasticChannel::clamp_small_negatives(double tol) {
  for (double& v : data_) {
    if (v < 0.0 && v >= -tol) v = 0.0;
  }
}

double max_abs_diff(const StochasticChannel& a, const StochasticChannel& b) {
  if (a.codomain_arity() != b.codomain_arity() || a.domain_arity() != b.domain_arity()) {
    throw ModelError("channel shape mismatch: " + std::to_string(a.codomain_arity()) + "x" +
                     std::to_string(a.domain_arity()) + " vs " +
                     std::to_string(b.codomain_arity()) + "x" + std::to_string(b.domain_arity()));
  }
  double worst = 0.0;
  for (std::size_t r = 0; r < a.codomain_arity(); ++r) {
    for (std::size_t c = 0; c < a.domain_arity(); ++c) {
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
    }
  }
  return worst;
}

StochasticChannel compose(const StochasticChannel& outer, const StochasticChannel& inner) {
  if (inner.codomain_arity() != outer.domain_arity()) {
    throw ModelError("compose arity mismatch: inner codomain " +
                     std::to_string(inner.codomain_arity()) + " vs outer domain " +
                     std::to_string(outer.domain_arity()));
  }
  StochasticChannel out(outer.codomain_arity(), inner.domain_arity());
  for (std::size_t r = 0; r < out.codomain_arity(); ++r) {
    for (std::size_t c = 0; c < out.domain_arity(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < inner.codomain_arity(); ++k) {
        s += outer(r, k) * inner(k, c);
      }
      out(r, c) = s;
    }
  }
  return out;
}

StochasticChannel tensor(const StochasticChannel& a, const StochasticChannel& b) {
  StochasticChannel out(a.codomain_arity() * b.codomain_arity(),
                        a.domain_arity() * b.domain_arity());
  for (std::size_t ra = 0; ra < a.codomain_arity(); ++ra) {
    for (std::size_t rb = 0; rb < b.codomain_arity(); ++rb) {
      for (std::size_t ca = 0; ca < a.domain_arity(); ++ca) {
        for (std::size_t cb = 0; cb < b.domain_arity(); ++cb) {
          out(ra * b.codomain_arity() + rb, ca * b.domain_arity() + cb) = a(ra, ca) * b(rb, cb);
        }
      }
    }
  }
  return out;
}

}  // namespace causalabs
