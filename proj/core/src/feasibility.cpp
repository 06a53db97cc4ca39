#include <vector>

#include "fedasm/optimizer.hpp"

namespace fedasm {

namespace {

/// Phase-one simplex over exact rationals with Bland's rule. Finds x >= 0
/// with A x = b (b >= 0) or reports that none exists.
class RationalFeasibility {
 public:
  RationalFeasibility(std::vector<std::vector<Rational>> a, std::vector<Rational> b)
      : rows_(a.size()), cols_(a.empty() ? 0 : a[0].size()) {
    // Tableau columns: structural, then one artificial per row, then rhs.
    width_ = cols_ + rows_ + 1;
    tableau_.assign(rows_ + 1, std::vector<Rational>(width_, 0));
    basis_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) tableau_[i][j] = a[i][j];
      tableau_[i][cols_ + i] = 1;
      tableau_[i][width_ - 1] = b[i];
      basis_[i] = cols_ + i;
    }
    // Objective row: minimize the sum of artificials, priced out.
    auto& obj = tableau_[rows_];
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < width_; ++j) {
        if (j < cols_ || j == width_ - 1) obj[j] -= tableau_[i][j];
      }
    }
  }

  bool solve() {
    for (;;) {
      std::size_t entering = width_;
      for (std::size_t j = 0; j + 1 < width_; ++j) {
        if (tableau_[rows_][j] < 0) {
          entering = j;
          break;
        }
      }
      if (entering == width_) break;
      std::size_t leaving = rows_;
      Rational best_ratio;
      for (std::size_t i = 0; i < rows_; ++i) {
        if (tableau_[i][entering] <= 0) continue;
        Rational ratio = tableau_[i][width_ - 1] / tableau_[i][entering];
        if (leaving == rows_ || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[leaving])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (leaving == rows_) break;  // unbounded direction; cannot happen in phase one
      pivot(leaving, entering);
    }
    return tableau_[rows_][width_ - 1] == 0;
  }

  std::vector<Rational> solution() const {
    std::vector<Rational> x(cols_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) x[basis_[i]] = tableau_[i][width_ - 1];
    }
    return x;
  }

 private:
  void pivot(std::size_t r, std::size_t c) {
    const Rational p = tableau_[r][c];
    for (auto& v : tableau_[r]) v /= p;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r || tableau_[i][c] == 0) continue;
      const Rational f = tableau_[i][c];
      for (std::size_t j = 0; j < width_; ++j) {
        if (tableau_[r][j] != 0) tableau_[i][j] -= f * tableau_[r][j];
      }
    }
    basis_[r] = c;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t width_ = 0;
  std::vector<std::vector<Rational>> tableau_;
  std::vector<std::size_t> basis_;
};

}  // namespace

RandomizedAssignment FeasibilityResult::randomized(std::int64_t n) const {
  RandomizedAssignment r;
  r.n = n;
  for (std::size_t s = 0; s < columns.size(); ++s) {
    if (weights[s] <= 0) continue;
    r.support.push_back(columns[s]);
    r.weights.push_back(to_double(weights[s]));
  }
  return r;
}

FeasibilityResult feasibility_oracle(const Instance& inst, std::int64_t n, std::size_t cap) {
  const ExAnteTargets targets = ex_ante_targets(inst, n);
  FeasibilityResult result;
  result.columns = enumerate_ex_post_feasible(inst, n, cap);
  result.enumerated = result.columns.size();
  if (result.columns.empty()) return result;

  const std::size_t k = result.columns.size();
  const std::size_t seats = targets.seat_targets.size();
  const std::size_t edges = targets.overlap_targets.size();
  // Variables: column weights, then one surplus per edge.
  std::vector<std::vector<Rational>> a(seats + edges + 1, std::vector<Rational>(k + edges, 0));
  std::vector<Rational> b(seats + edges + 1);
  for (std::size_t s = 0; s < k; ++s) {
    const CanonicalAssignment& col = result.columns[s];
    for (std::size_t i = 0; i < seats; ++i) {
      a[i][s] = col.count(targets.seat_keys[i].first, targets.seat_keys[i].second);
    }
    const auto es = inst.edges();
    for (std::size_t e = 0; e < edges; ++e) {
      a[seats + e][s] = canonical_overlap(inst, col, es[e].parent, es[e].child);
    }
    a[seats + edges][s] = 1;
  }
  for (std::size_t i = 0; i < seats; ++i) b[i] = targets.seat_targets[i];
  for (std::size_t e = 0; e < edges; ++e) {
    a[seats + e][k + e] = -1;
    b[seats + e] = targets.overlap_targets[e];
  }
  b[seats + edges] = 1;

  RationalFeasibility lp(std::move(a), std::move(b));
  result.feasible = lp.solve();
  if (result.feasible) {
    auto x = lp.solution();
    result.weights.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return result;
}

}  // namespace fedasm
