#pragma once

#include <initializer_list>
#include <random>

#include "facetmpc/numeric.hpp"
#include "facetmpc/plants.hpp"
#include "facetmpc/polytope.hpp"

namespace testing {

using facetmpc::Mat;
using facetmpc::Vec;

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = r ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
  Mat m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline facetmpc::Polytope box2(double x0, double x1, double y0, double y1) {
  return facetmpc::box(vec({x0, y0}), vec({x1, y1}));
}

inline Vec uniform_vec(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

inline Mat uniform_mat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

/// Sample plant with the cross-coupling matrices B_{1,2}, B_{2,1} zeroed.
inline facetmpc::Plant decoupled_sample_plant() {
  facetmpc::Plant p = facetmpc::sample_plant();
  p.subsystems[0].b[1].setZero();
  p.subsystems[1].b[0].setZero();
  return p;
}

}  // namespace testing
