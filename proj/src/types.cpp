#include "stct/types.hpp"

#include "stct/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stct {

bool all_finite(const Matrix& m) {
  const double* p = m.data();
  for (Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

FeatureMatrix::FeatureMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw InputDomainError("feature matrix must have at least one row and one column");
  }
  if (!all_finite(data_)) throw InputDomainError("feature matrix contains non-finite entries");
}

FeatureMatrix FeatureMatrix::gather(std::span<const Index> idx) const {
  Matrix out(static_cast<Index>(idx.size()), data_.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = data_.row(idx[i]);
  return FeatureMatrix(std::move(out));
}

SoftLabelMatrix::SoftLabelMatrix(Matrix data) : data_(std::move(data)) {
  if (!all_finite(data_)) throw InputDomainError("soft label matrix contains non-finite entries");
}

SoftLabelMatrix SoftLabelMatrix::gather(std::span<const Index> idx) const {
  Matrix out(static_cast<Index>(idx.size()), data_.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = data_.row(idx[i]);
  return SoftLabelMatrix(std::move(out));
}

int HardLabelVector::inferred_classes() const {
  if (labels_.empty()) return 0;
  return *std::max_element(labels_.begin(), labels_.end()) + 1;
}

void Dataset::validate() const {
  const Index n = features.rows();
  if (labels.rows() != n) {
    throw InputDomainError("dataset: labels have " + std::to_string(labels.rows()) +
                           " rows, features have " + std::to_string(n));
  }
  if (clean_labels && static_cast<Index>(clean_labels->size()) != n) {
    throw InputDomainError("dataset: clean label count does not match feature rows");
  }
  if (corruption_mask && static_cast<Index>(corruption_mask->size()) != n) {
    throw InputDomainError("dataset: corruption mask length does not match feature rows");
  }
}

SoftLabelMatrix one_hot(const HardLabelVector& labels, int num_classes) {
  if (num_classes < 1) throw InputDomainError("one_hot: class count must be positive");
  Matrix out = Matrix::Zero(static_cast<Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= num_classes) {
      throw InputDomainError("one_hot: label " + std::to_string(y) + " at position " +
                             std::to_string(i) + " is outside [0, " +
                             std::to_string(num_classes) + ")");
    }
    out(static_cast<Index>(i), y) = 1.0;
  }
  return SoftLabelMatrix(std::move(out));
}

HardLabelVector harden(const Matrix& soft) {
  std::vector<int> out(static_cast<std::size_t>(soft.rows()));
  for (Index i = 0; i < soft.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < soft.cols(); ++j) {
      if (soft(i, j) > soft(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return HardLabelVector(std::move(out));
}

HardLabelVector harden(const SoftLabelMatrix& soft) { return harden(soft.data()); }

double label_agreement(const HardLabelVector& a, const HardLabelVector& b) {
  if (a.size() != b.size()) {
    throw InputDomainError("label_agreement: length mismatch (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += (a[i] == b[i]);
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace stct
