#pragma once

#include "stct/types.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stct::numerics {

/// d×C regression coefficients.
using CoefficientMatrix = Matrix;

inline constexpr double kCrossEntropyClamp = 1e-12;

/// Cholesky factorization of the regularized Gram matrix AᵀA + reg·I.
/// Computed once and reused for every solve against the same design matrix.
class RidgeFactor {
 public:
  RidgeFactor(const Matrix& design, double reg);

  /// (AᵀA + reg·I)⁻¹ · rhs, rhs has d rows.
  Matrix solve(const Matrix& rhs) const;

  const Matrix& gram() const noexcept { return gram_; }
  double reg() const noexcept { return reg_; }
  Index dim() const noexcept { return gram_.rows(); }

 private:
  Matrix gram_;
  double reg_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// W minimizing ||B − A·W||² + reg·||W||², i.e. (AᵀA + reg·I)⁻¹AᵀB.
CoefficientMatrix ridge_solve(const Matrix& design, const Matrix& targets, double reg);
CoefficientMatrix ridge_solve(const FeatureMatrix& design, const SoftLabelMatrix& targets,
                              double reg);

/// scale · trace(G) / d for a Gram matrix G.
double scaled_trace_ridge(const Matrix& gram, double scale);

/// Indices of the k rows most cosine-similar to row `i`, excluding `i`.
/// Highest similarity first; ties go to the lower index.
std::vector<Index> pairwise_cosine_topk(const FeatureMatrix& features, Index i, int k);

/// Same query for every row at once. Row-blocked, optionally threaded; the
/// result does not depend on the thread count.
std::vector<std::vector<Index>> cosine_topk_all(const FeatureMatrix& features, int k);

/// Temperature-scaled row softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits, double tau = 1.0);

/// −Σ_j q[j]·ln(max(p[j], 1e−12)).
double cross_entropy(std::span<const double> p, std::span<const double> q);

template <typename RowP, typename RowQ>
double cross_entropy_row(const RowP& p, const RowQ& q) {
  double s = 0.0;
  for (Index j = 0; j < p.size(); ++j) {
    const double pj = p[j] > kCrossEntropyClamp ? p[j] : kCrossEntropyClamp;
    s -= q[j] * std::log(pj);
  }
  return s;
}

/// Worker count from STCT_THREADS (0 or unset = hardware concurrency).
unsigned worker_threads();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is
/// processed by exactly one call, so per-index results are thread-count
/// independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace stct::numerics
