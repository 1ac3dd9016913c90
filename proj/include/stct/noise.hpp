#pragma once

#include "stct/types.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace stct::noise {

/// How symmetric noise treats the original class. IncludeSelf redraws the
/// label uniformly over all C classes (so it may land back on the original);
/// ExcludeSelf redraws over the other C−1 classes.
enum class SymmetricConvention { IncludeSelf, ExcludeSelf };

/// Row-stochastic C×C matrix, T(i, j) = Pr[noisy = j | clean = i].
class NoiseTransitionMatrix {
 public:
  explicit NoiseTransitionMatrix(Matrix t);

  const Matrix& matrix() const noexcept { return t_; }
  int classes() const noexcept { return static_cast<int>(t_.rows()); }
  double operator()(int i, int j) const { return t_(i, j); }

  /// T(i,i) > max_{j≠i} T(i,j) for every row.
  bool diagonally_dominant() const;
  /// Rows violating dominance.
  std::vector<int> dominance_violations() const;

 private:
  Matrix t_;
};

/// Length-C probability vector over classes.
class ClassPrior {
 public:
  explicit ClassPrior(Vector p);
  static ClassPrior uniform(int classes);

  const Vector& probabilities() const noexcept { return p_; }
  int classes() const noexcept { return static_cast<int>(p_.size()); }

 private:
  Vector p_;
};

NoiseTransitionMatrix make_symmetric_T(int classes, double rho,
                                       SymmetricConvention convention = SymmetricConvention::IncludeSelf);

/// Each mapped class keeps its label with probability 1−rho and flips to
/// flip_map[i] with probability rho. Unmapped classes are noise-free.
NoiseTransitionMatrix make_asymmetric_T(int classes, double rho, const std::map<int, int>& flip_map);

/// i → (i+1) mod C for every class.
std::map<int, int> cyclic_flip_map(int classes);

struct NoisyLabels {
  HardLabelVector labels;
  std::vector<bool> mask;  ///< true where the label changed
};

/// Resamples every label from its row of T. Deterministic given the seed.
NoisyLabels inject_noise(const HardLabelVector& clean, const NoiseTransitionMatrix& t,
                         std::uint64_t seed);

/// Accuracy of the clean-optimal classifier on the noisy distribution:
/// Σ_i prior(i)·T(i,i).
double theorem1_noisy_accuracy(const ClassPrior& prior, const NoiseTransitionMatrix& t);

struct ConfusionMatrix {
  Matrix rates;              ///< row-normalized counts; undefined rows are zero
  std::vector<bool> defined; ///< false where the class never occurs in truth
  bool all_defined() const;
};

/// C(i, j) = Pr(pred = j | truth = i).
ConfusionMatrix confusion_matrix(const HardLabelVector& pred, const HardLabelVector& truth,
                                 int classes);

/// Two-sided Hoeffding bound 2·exp(−2·n_v·eps²). Not capped at 1.
double hoeffding_bound(long long n_v, double eps);

}  // namespace stct::noise
