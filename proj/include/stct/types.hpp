#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stct {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// n×d matrix of sample features or embeddings. Every entry is finite and
/// both dimensions are at least one.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  Index rows() const noexcept { return data_.rows(); }
  Index cols() const noexcept { return data_.cols(); }
  auto row(Index i) const { return data_.row(i); }

  FeatureMatrix gather(std::span<const Index> idx) const;

 private:
  Matrix data_;
};

/// n×C label matrix. Starts one-hot; meta updates leave rows as arbitrary
/// finite reals with no renormalization.
class SoftLabelMatrix {
 public:
  SoftLabelMatrix() = default;
  explicit SoftLabelMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  Index rows() const noexcept { return data_.rows(); }
  Index classes() const noexcept { return data_.cols(); }

  SoftLabelMatrix gather(std::span<const Index> idx) const;

 private:
  Matrix data_;
};

/// Integer class labels in [0, C).
class HardLabelVector {
 public:
  HardLabelVector() = default;
  explicit HardLabelVector(std::vector<int> labels) : labels_(std::move(labels)) {}

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  int operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<int>& values() const noexcept { return labels_; }
  auto begin() const { return labels_.begin(); }
  auto end() const { return labels_.end(); }

  /// Largest label + 1, or 0 when empty.
  int inferred_classes() const;

  friend bool operator==(const HardLabelVector&, const HardLabelVector&) = default;

 private:
  std::vector<int> labels_;
};

/// Training data. `clean_labels` and `corruption_mask` are evaluation-only
/// and never feed a correction or training path.
struct Dataset {
  FeatureMatrix features;
  SoftLabelMatrix labels;
  std::optional<HardLabelVector> clean_labels;
  std::optional<std::vector<bool>> corruption_mask;

  Index size() const noexcept { return features.rows(); }
  /// Throws InputDomainError unless every component has the same row count.
  void validate() const;
};

/// Disjoint sub-training / noisy-validation partition of {0..n-1}.
struct SplitIndices {
  std::vector<Index> train_idx;
  std::vector<Index> val_idx;
  Index n = 0;
};

SoftLabelMatrix one_hot(const HardLabelVector& labels, int num_classes);

/// Per-row argmax; ties go to the lowest column.
HardLabelVector harden(const SoftLabelMatrix& soft);
HardLabelVector harden(const Matrix& soft);

/// Fraction of positions where the two label vectors agree.
double label_agreement(const HardLabelVector& a, const HardLabelVector& b);

bool all_finite(const Matrix& m);

}  // namespace stct
