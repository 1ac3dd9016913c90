#include "stct/numerics.hpp"

#include "stct/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

namespace stct::numerics {

RidgeFactor::RidgeFactor(const Matrix& design, double reg) : reg_(reg) {
  if (!(reg >= 0.0) || !std::isfinite(reg)) {
    throw InputDomainError("ridge: regularizer must be a finite nonnegative number");
  }
  gram_ = design.transpose() * design;
  Eigen::MatrixXd system = gram_;
  system.diagonal().array() += reg;
  llt_.compute(system);
  if (llt_.info() != Eigen::Success || !(llt_.rcond() > 1e-14)) {
    throw SingularityError("ridge: Gram matrix AᵀA + " + std::to_string(reg) +
                           "·I is singular or not positive definite (" +
                           std::to_string(design.rows()) + " rows, " +
                           std::to_string(design.cols()) + " columns)");
  }
}

Matrix RidgeFactor::solve(const Matrix& rhs) const {
  if (rhs.rows() != gram_.rows()) {
    throw InputDomainError("ridge: right-hand side has wrong row count");
  }
  Eigen::MatrixXd x = llt_.solve(Eigen::MatrixXd(rhs));
  return Matrix(x);
}

CoefficientMatrix ridge_solve(const Matrix& design, const Matrix& targets, double reg) {
  if (design.rows() != targets.rows()) {
    throw InputDomainError("ridge_solve: design has " + std::to_string(design.rows()) +
                           " rows, targets have " + std::to_string(targets.rows()));
  }
  RidgeFactor factor(design, reg);
  return factor.solve(design.transpose() * targets);
}

CoefficientMatrix ridge_solve(const FeatureMatrix& design, const SoftLabelMatrix& targets,
                              double reg) {
  return ridge_solve(design.data(), targets.data(), reg);
}

double scaled_trace_ridge(const Matrix& gram, double scale) {
  return scale * gram.trace() / static_cast<double>(gram.rows());
}

namespace {

Matrix normalized_rows(const FeatureMatrix& features) {
  Matrix out = features.data();
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (!(norm > 0.0)) {
      throw InputDomainError("cosine similarity: row " + std::to_string(i) + " has zero norm");
    }
    out.row(i) /= norm;
  }
  return out;
}

void check_k(Index n, int k) {
  if (k < 1 || k > n - 1) {
    throw InputDomainError("cosine top-k: k = " + std::to_string(k) + " must lie in [1, " +
                           std::to_string(n - 1) + "]");
  }
}

// Selects the k best candidates from a similarity row, ranked by
// (similarity desc, index asc).
std::vector<Index> topk_from_row(const double* sims, Index n, Index self, int k,
                                 std::vector<Index>& scratch) {
  scratch.resize(static_cast<std::size_t>(n - 1));
  std::size_t pos = 0;
  for (Index j = 0; j < n; ++j) {
    if (j != self) scratch[pos++] = j;
  }
  auto better = [sims](Index a, Index b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  };
  std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end(), better);
  return {scratch.begin(), scratch.begin() + k};
}

}  // namespace

std::vector<Index> pairwise_cosine_topk(const FeatureMatrix& features, Index i, int k) {
  const Index n = features.rows();
  if (i < 0 || i >= n) throw InputDomainError("cosine top-k: row index out of range");
  check_k(n, k);
  const Matrix unit = normalized_rows(features);
  std::vector<double> sims(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) sims[static_cast<std::size_t>(j)] = unit.row(i).dot(unit.row(j));
  std::vector<Index> scratch;
  return topk_from_row(sims.data(), n, i, k, scratch);
}

std::vector<std::vector<Index>> cosine_topk_all(const FeatureMatrix& features, int k) {
  const Index n = features.rows();
  check_k(n, k);
  const Matrix unit = normalized_rows(features);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  constexpr Index kBlock = 256;
  const std::size_t blocks = static_cast<std::size_t>((n + kBlock - 1) / kBlock);
  parallel_for(blocks, [&](std::size_t b0, std::size_t b1) {
    std::vector<Index> scratch;
    for (std::size_t b = b0; b < b1; ++b) {
      const Index start = static_cast<Index>(b) * kBlock;
      const Index len = std::min(kBlock, n - start);
      const Matrix sims = unit.middleRows(start, len) * unit.transpose();
      for (Index r = 0; r < len; ++r) {
        out[static_cast<std::size_t>(start + r)] =
            topk_from_row(sims.row(r).data(), n, start + r, k, scratch);
      }
    }
  });
  return out;
}

Matrix softmax_rows(const Matrix& logits, double tau) {
  if (!(tau > 0.0)) throw InputDomainError("softmax_rows: temperature must be positive");
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp((logits(i, j) - mx) / tau);
      sum += out(i, j);
    }
    out.row(i) /= sum;
  }
  return out;
}

double cross_entropy(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InputDomainError("cross_entropy: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    s -= q[j] * std::log(std::max(p[j], kCrossEntropyClamp));
  }
  return s;
}

unsigned worker_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STCT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(worker_threads(), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, &errors, w, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace stct::numerics
