#pragma once

#include "stct/types.hpp"

#include <cstdint>
#include <vector>

namespace stct::synthetic {

enum class CenterPlacement {
  /// Center of class c at sep·e_c; requires C ≤ d.
  Orthogonal,
  /// sep-scaled random orthonormal directions (C ≤ d), or random unit
  /// directions when C > d.
  Random,
};

struct MixtureSpec {
  int classes = 10;
  Index n = 5000;
  int dim = 32;
  double sep = 6.0;
  std::vector<double> balance;  ///< empty = uniform
  CenterPlacement placement = CenterPlacement::Orthogonal;
  std::uint64_t seed = 17;

  void validate() const;
  std::vector<double> proportions() const;
};

/// C=10, d=32, n=5000, sep=6, balanced, seed=17.
MixtureSpec standard_benchmark();

/// Class centers as a C×d matrix.
Matrix mixture_centers(const MixtureSpec& spec);

/// Unit-variance isotropic Gaussian components around the centers. Labels
/// are drawn i.i.d. from the class proportions. Returned labels are
/// one-hot clean labels with clean_labels set.
Dataset gaussian_mixture(const MixtureSpec& spec);

/// Fresh i.i.d. draws from the same mixture (same centers) with a different
/// sample seed, e.g. for a held-out test set.
Dataset sample_mixture(const MixtureSpec& spec, Index n, std::uint64_t sample_seed);

struct MarginReport {
  std::vector<double> min_margin;  ///< per class; NaN when the class is absent
  bool all_positive() const;
};

/// One-vs-rest least-squares separators (with bias) fit on the clean labels;
/// reports, per class c, the minimum signed margin y·(wᵀx + b) over all
/// samples with targets ±1 for the c-vs-rest problem.
MarginReport margin_report(const Dataset& dataset);

}  // namespace stct::synthetic
