// Copyright 2026 the adal authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

namespace adal::detail {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
// Deterministic start vector so repeated calls are bitwise reproducible.
inline double power_iteration_sym(const Matrix& h, double rel_tol = 1e-6,
                                  int max_iter = 10000) {
  const auto n = h.rows();
  if (n == 0) return 0.0;
  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if ((h * v).norm() == 0.0) {
    bool found = false;
    for (Eigen::Index j = 0; j < n && !found; ++j) {
      Vector e = Vector::Zero(n);
      e[j] = 1.0;
      if ((h * e).norm() > 0.0) {
        v = e;
        found = true;
      }
    }
    if (!found) return 0.0;  // zero matrix
  }
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = h * v;
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    const double next = v.dot(h * v);
    if (std::abs(next - lambda) <= rel_tol * std::max(std::abs(next), 1e-300)) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

// Shortest exact decimal form; identical doubles always format identically.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  return a.size() == 0 ||
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace adal::detail
