#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "fedasm/optimizer.hpp"

namespace fedasm {

RestrictedSolveError::RestrictedSolveError(const std::string& message, double g)
    : std::runtime_error(message + " (projected gradient norm " + std::to_string(g) + ")"),
      gradient_norm(g) {}

namespace {

constexpr double kPositive = 1e-14;

// Minimizes 0.5 |A y - b|^2 over y >= 0 with sum of the first k entries = 1.
class ActiveSet {
 public:
  ActiveSet(Eigen::MatrixXd a, Eigen::VectorXd b, std::size_t k)
      : a_(std::move(a)), b_(std::move(b)), k_(static_cast<Eigen::Index>(k)) {}

  Eigen::VectorXd solve_on(const std::vector<Eigen::Index>& passive) const {
    const auto p = static_cast<Eigen::Index>(passive.size());
    Eigen::MatrixXd ap(a_.rows(), p);
    for (Eigen::Index j = 0; j < p; ++j) ap.col(j) = a_.col(passive[static_cast<std::size_t>(j)]);
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(p + 1, p + 1);
    kkt.topLeftCorner(p, p) = ap.transpose() * ap;
    Eigen::VectorXd rhs(p + 1);
    rhs.head(p) = ap.transpose() * b_;
    rhs(p) = 1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double e = passive[static_cast<std::size_t>(j)] < k_ ? 1.0 : 0.0;
      kkt(j, p) = e;
      kkt(p, j) = e;
    }
    Eigen::VectorXd z = kkt.completeOrthogonalDecomposition().solve(rhs);
    return z.head(p);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& y) const { return a_.transpose() * (a_ * y - b_); }
  double objective(const Eigen::VectorXd& y) const { return (a_ * y - b_).squaredNorm(); }
  Eigen::Index size() const { return a_.cols(); }
  Eigen::Index k() const { return k_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::Index k_;
};

}  // namespace

RestrictedSolution solve_restricted(const Instance& inst, const ExAnteTargets& targets,
                                    std::span<const CanonicalAssignment> support, double tolerance,
                                    std::int64_t max_iterations, std::span<const double> warm_start) {
  if (support.empty()) throw std::invalid_argument("restricted master needs a nonempty support");
  const auto k = static_cast<Eigen::Index>(support.size());
  const auto seats = static_cast<Eigen::Index>(targets.seat_targets.size());
  const auto edges = static_cast<Eigen::Index>(targets.overlap_targets.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(seats + edges, k + edges);
  Eigen::VectorXd b(seats + edges);
  for (Eigen::Index i = 0; i < seats; ++i) b(i) = to_double(targets.seat_targets[static_cast<std::size_t>(i)]);
  for (Eigen::Index j = 0; j < edges; ++j) {
    b(seats + j) = to_double(targets.overlap_targets[static_cast<std::size_t>(j)]);
    a(seats + j, k + j) = -1.0;
  }
  for (Eigen::Index s = 0; s < k; ++s) {
    const FeatureVector f = features(inst, targets, support[static_cast<std::size_t>(s)]);
    for (Eigen::Index i = 0; i < seats; ++i) a(i, s) = f.seats[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < edges; ++j) a(seats + j, s) = f.overlaps[static_cast<std::size_t>(j)];
  }
  const ActiveSet problem(a, b, support.size());
  const Eigen::Index total = problem.size();
  if (max_iterations <= 0) max_iterations = 20 * total + 200;

  // Feasible start: warm weights if they sum to something positive, else the
  // first column; slacks absorb any overlap surplus.
  Eigen::VectorXd y = Eigen::VectorXd::Zero(total);
  double mass = 0;
  for (Eigen::Index s = 0; s < k && static_cast<std::size_t>(s) < warm_start.size(); ++s) {
    y(s) = std::max(0.0, warm_start[static_cast<std::size_t>(s)]);
    mass += y(s);
  }
  if (mass > 0) {
    y.head(k) /= mass;
  } else {
    y(0) = 1.0;
  }
  {
    const Eigen::VectorXd r = a.topLeftCorner(seats + edges, k) * y.head(k);
    for (Eigen::Index j = 0; j < edges; ++j) y(k + j) = std::max(0.0, r(seats + j) - b(seats + j));
  }
  std::vector<Eigen::Index> passive;
  for (Eigen::Index i = 0; i < total; ++i) {
    if (y(i) > 0) passive.push_back(i);
  }

  RestrictedSolution out;
  double projected = 0;
  for (std::int64_t it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    // Move to the optimum on the passive set, dropping variables that hit zero.
    for (;;) {
      const Eigen::VectorXd z = problem.solve_on(passive);
      double alpha = 1.0;
      bool interior = true;
      for (std::size_t j = 0; j < passive.size(); ++j) {
        const Eigen::Index i = passive[j];
        if (z(static_cast<Eigen::Index>(j)) <= kPositive) {
          interior = false;
          const double denom = y(i) - z(static_cast<Eigen::Index>(j));
          if (denom > 0) alpha = std::min(alpha, y(i) / denom);
        }
      }
      if (interior) {
        y.setZero();
        for (std::size_t j = 0; j < passive.size(); ++j) y(passive[j]) = z(static_cast<Eigen::Index>(j));
        break;
      }
      for (std::size_t j = 0; j < passive.size(); ++j) {
        const Eigen::Index i = passive[j];
        y(i) += alpha * (z(static_cast<Eigen::Index>(j)) - y(i));
      }
      std::vector<Eigen::Index> kept;
      for (Eigen::Index i : passive) {
        if (y(i) > kPositive) {
          kept.push_back(i);
        } else {
          y(i) = 0;
        }
      }
      bool has_weight = std::any_of(kept.begin(), kept.end(), [&](Eigen::Index i) { return i < k; });
      if (!has_weight) {
        // Keep the largest weight so the simplex constraint stays satisfiable.
        Eigen::Index best = 0;
        for (Eigen::Index i : passive) {
          if (i < k && (best >= k || y(i) >= y(best))) best = i;
        }
        kept.push_back(best);
        std::sort(kept.begin(), kept.end());
      }
      passive = std::move(kept);
    }

    const Eigen::VectorXd g = problem.gradient(y);
    double mu = 0;
    std::int64_t count = 0;
    for (Eigen::Index i : passive) {
      if (i < k) {
        mu -= g(i);
        ++count;
      }
    }
    mu /= static_cast<double>(std::max<std::int64_t>(count, 1));
    Eigen::Index entering = -1;
    double most_negative = 0;
    double scale = 1.0;
    for (Eigen::Index i = 0; i < total; ++i) scale = std::max(scale, std::abs(g(i)));
    projected = 0;
    for (Eigen::Index i = 0; i < total; ++i) {
      if (std::binary_search(passive.begin(), passive.end(), i)) continue;
      const double nu = g(i) + (i < k ? mu : 0.0);
      if (nu < 0) projected += nu * nu;
      if (nu < most_negative) {
        most_negative = nu;
        entering = i;
      }
    }
    if (entering < 0 || most_negative >= -tolerance * scale) {
      out.weights.assign(static_cast<std::size_t>(k), 0.0);
      double sum = 0;
      for (Eigen::Index s = 0; s < k; ++s) sum += y(s);
      for (Eigen::Index s = 0; s < k; ++s) out.weights[static_cast<std::size_t>(s)] = y(s) / sum;
      Eigen::VectorXd normalized = y;
      normalized.head(k) /= sum;
      out.loss = problem.objective(normalized);
      return out;
    }
    passive.insert(std::upper_bound(passive.begin(), passive.end(), entering), entering);
  }
  throw RestrictedSolveError("restricted master did not converge", std::sqrt(projected));
}

}  // namespace fedasm
