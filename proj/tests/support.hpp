#pragma once

#include <random>

#include "aei/model.hpp"
#include "aei/spectral.hpp"

namespace aei::test {

// The constant field of the charged-particle benchmark.
inline Mat field_matrix() {
  Mat b(3, 3);
  b << 0.0, 0.2, 0.2, -0.2, 0.0, 1.0, -0.2, -1.0, 0.0;
  return b;
}

inline Mat random_skew(int d, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = u(rng);
  }
  return a - a.transpose();
}

inline Vec random_vec(int d, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = u(rng);
  return v;
}

// d = 2, K = I, B = [[0, 1], [-1, 0]].
inline Problem rotating_oscillator(double eps) {
  Mat b(2, 2);
  b << 0.0, 1.0, -1.0, 0.0;
  Vec x0(2), v0(2);
  x0 << 0.7, -0.4;
  v0 << 0.3, 0.9;
  return linear_problem(eps, SkewMatrix(b), Mat::Identity(2, 2), x0, v0);
}

}  // namespace aei::test
