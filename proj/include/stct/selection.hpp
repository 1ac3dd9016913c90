#pragma once

#include "stct/types.hpp"

#include <vector>

namespace stct::selection {

/// n×C row-stochastic class histograms of neighbor labels.
class PseudoLabelMatrix {
 public:
  PseudoLabelMatrix() = default;
  explicit PseudoLabelMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  Index rows() const noexcept { return data_.rows(); }

 private:
  Matrix data_;
};

struct SelectionConfig {
  int k = 0;         ///< 0 picks default_k at run time
  double mu = 0.1;   ///< trust increment per alternation epoch
  int epoch = 1;

  /// min(1, mu·epoch).
  double mu_hat() const;
  void validate() const;
};

/// 40% of the expected per-class count, clamped to [1, n−1].
int default_k(Index n, int classes);

/// Row i is the normalized label histogram of the k cosine-nearest
/// neighbors of row i (self excluded).
PseudoLabelMatrix knn_pseudo_labels(const FeatureMatrix& embeddings, const HardLabelVector& hard,
                                    int k, int classes);

/// Per-class clean sets. For each class c, samples labeled c are ranked by
/// CE(Yp row, one_hot(c)) and the lowest ceil(mu_hat·count_c) are kept; any
/// further samples tying the boundary value are kept too.
std::vector<std::vector<Index>> select_clean(const HardLabelVector& hard, const PseudoLabelMatrix& yp,
                                             double mu_hat, int classes);

struct LabeledSet {
  FeatureMatrix features;  ///< may be empty (0 rows) when nothing is selected
  HardLabelVector labels;
  std::vector<Index> indices;
};

struct UnlabeledSet {
  Matrix features;
  std::vector<Index> indices;
};

struct SelectionSplit {
  LabeledSet labeled;
  UnlabeledSet unlabeled;
};

/// D_L = selected samples with their hardened labels; D_U = the rest,
/// labels dropped.
SelectionSplit split_labeled_unlabeled(const Matrix& features, const HardLabelVector& hard,
                                       const std::vector<std::vector<Index>>& selected);

}  // namespace stct::selection
