#include "stct/selection.hpp"

#include "stct/errors.hpp"
#include "stct/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stct::selection {

PseudoLabelMatrix::PseudoLabelMatrix(Matrix data) : data_(std::move(data)) {
  for (Index i = 0; i < data_.rows(); ++i) {
    if ((data_.row(i).array() < 0.0).any() || std::abs(data_.row(i).sum() - 1.0) > 1e-12) {
      throw InputDomainError("pseudo label row " + std::to_string(i) + " is not a distribution");
    }
  }
}

double SelectionConfig::mu_hat() const {
  return std::min(1.0, mu * static_cast<double>(epoch));
}

void SelectionConfig::validate() const {
  if (k < 0) throw InputDomainError("selection: k must be >= 1 (or 0 for the default)");
  if (!(mu > 0.0 && mu <= 1.0)) throw InputDomainError("selection: mu must lie in (0,1]");
  if (epoch < 1) throw InputDomainError("selection: epoch must be >= 1");
}

int default_k(Index n, int classes) {
  const double per_class = static_cast<double>(n) / std::max(1, classes);
  const auto k = static_cast<Index>(std::llround(0.4 * per_class));
  return static_cast<int>(std::clamp<Index>(k, 1, std::max<Index>(1, n - 1)));
}

PseudoLabelMatrix knn_pseudo_labels(const FeatureMatrix& embeddings, const HardLabelVector& hard,
                                    int k, int classes) {
  const Index n = embeddings.rows();
  if (static_cast<Index>(hard.size()) != n) {
    throw InputDomainError("knn_pseudo_labels: label count does not match embedding rows");
  }
  const auto neighbors = numerics::cosine_topk_all(embeddings, k);
  Matrix out = Matrix::Zero(n, classes);
  const double w = 1.0 / static_cast<double>(k);
  for (Index i = 0; i < n; ++i) {
    for (Index j : neighbors[static_cast<std::size_t>(i)]) {
      const int y = hard[static_cast<std::size_t>(j)];
      if (y < 0 || y >= classes) throw InputDomainError("knn_pseudo_labels: label out of range");
      out(i, y) += w;
    }
  }
  return PseudoLabelMatrix(std::move(out));
}

std::vector<std::vector<Index>> select_clean(const HardLabelVector& hard, const PseudoLabelMatrix& yp,
                                             double mu_hat, int classes) {
  if (!(mu_hat > 0.0 && mu_hat <= 1.0)) throw InputDomainError("select_clean: mu_hat must lie in (0,1]");
  if (static_cast<Index>(hard.size()) != yp.rows()) {
    throw InputDomainError("select_clean: label count does not match pseudo label rows");
  }
  std::vector<std::vector<std::pair<double, Index>>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < hard.size(); ++i) {
    const int c = hard[i];
    if (c < 0 || c >= classes) throw InputDomainError("select_clean: label out of range");
    const double p = std::max(yp.data()(static_cast<Index>(i), c), numerics::kCrossEntropyClamp);
    by_class[static_cast<std::size_t>(c)].emplace_back(-std::log(p), static_cast<Index>(i));
  }
  std::vector<std::vector<Index>> selected(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    auto& items = by_class[static_cast<std::size_t>(c)];
    if (items.empty()) continue;
    std::sort(items.begin(), items.end());
    auto keep = static_cast<std::size_t>(std::ceil(mu_hat * static_cast<double>(items.size()) - 1e-12));
    keep = std::clamp<std::size_t>(keep, 1, items.size());
    const double boundary = items[keep - 1].first;
    while (keep < items.size() && items[keep].first == boundary) ++keep;
    auto& out = selected[static_cast<std::size_t>(c)];
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back(items[i].second);
    std::sort(out.begin(), out.end());
  }
  return selected;
}

SelectionSplit split_labeled_unlabeled(const Matrix& features, const HardLabelVector& hard,
                                       const std::vector<std::vector<Index>>& selected) {
  const Index n = features.rows();
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  for (const auto& cls : selected) {
    for (Index i : cls) {
      if (i < 0 || i >= n) throw InputDomainError("split: selected index out of range");
      if (chosen[static_cast<std::size_t>(i)]) {
        throw InputDomainError("split: index " + std::to_string(i) + " selected twice");
      }
      chosen[static_cast<std::size_t>(i)] = 1;
    }
  }
  SelectionSplit out;
  std::vector<int> labels;
  for (Index i = 0; i < n; ++i) {
    if (chosen[static_cast<std::size_t>(i)]) {
      out.labeled.indices.push_back(i);
      labels.push_back(hard[static_cast<std::size_t>(i)]);
    } else {
      out.unlabeled.indices.push_back(i);
    }
  }
  out.labeled.labels = HardLabelVector(std::move(labels));
  Matrix lf(static_cast<Index>(out.labeled.indices.size()), features.cols());
  for (std::size_t i = 0; i < out.labeled.indices.size(); ++i) {
    lf.row(static_cast<Index>(i)) = features.row(out.labeled.indices[i]);
  }
  Matrix uf(static_cast<Index>(out.unlabeled.indices.size()), features.cols());
  for (std::size_t i = 0; i < out.unlabeled.indices.size(); ++i) {
    uf.row(static_cast<Index>(i)) = features.row(out.unlabeled.indices[i]);
  }
  if (lf.rows() > 0) out.labeled.features = FeatureMatrix(std::move(lf));
  out.unlabeled.features = std::move(uf);
  return out;
}

}  // namespace stct::selection
