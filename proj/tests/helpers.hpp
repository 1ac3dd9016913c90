#pragma once

#include "stct/random.hpp"
#include "stct/types.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

namespace testing {

inline stct::Matrix random_matrix(stct::Index r, stct::Index c, stct::Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  stct::Matrix m(r, c);
  for (stct::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline stct::HardLabelVector random_labels(std::size_t n, int classes, stct::Rng& rng) {
  std::vector<int> v(n);
  for (auto& x : v) x = static_cast<int>(stct::uniform_below(rng, static_cast<std::uint64_t>(classes)));
  return stct::HardLabelVector(std::move(v));
}

inline double max_abs_diff(const stct::Matrix& a, const stct::Matrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("stct_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
