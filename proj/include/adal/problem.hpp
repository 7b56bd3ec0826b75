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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace adal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Per-agent objective: convex quadratic 0.5 x'Qx + q'x + c, or affine g'x + c.
// ---------------------------------------------------------------------------

enum class ObjectiveKind { kQuadratic, kAffine };

struct ConvexObjective {
  ObjectiveKind kind{ObjectiveKind::kAffine};
  Matrix hessian;  // n x n for quadratic, empty for affine
  Vector linear;   // quadratic linear term, or the constant gradient
  double constant{0.0};

  int dim() const { return static_cast<int>(linear.size()); }

  double value(const Vector& x) const {
    check_dim(x);
    if (kind == ObjectiveKind::kQuadratic) {
      return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant;
    }
    return linear.dot(x) + constant;
  }

  /// Exact gradient; it is the unique subgradient for this catalog.
  Vector gradient(const Vector& x) const {
    check_dim(x);
    if (kind == ObjectiveKind::kQuadratic) return hessian * x + linear;
    return linear;
  }

 private:
  void check_dim(const Vector& x) const {
    if (x.size() != linear.size()) {
      throw std::invalid_argument("objective: point has wrong dimension");
    }
  }
};

inline ConvexObjective make_quadratic(Matrix hessian, Vector linear,
                                      double constant = 0.0) {
  ConvexObjective f;
  f.kind = ObjectiveKind::kQuadratic;
  f.hessian = std::move(hessian);
  f.linear = std::move(linear);
  f.constant = constant;
  return f;
}

inline ConvexObjective make_affine(Vector gradient, double constant = 0.0) {
  ConvexObjective f;
  f.kind = ObjectiveKind::kAffine;
  f.linear = std::move(gradient);
  f.constant = constant;
  return f;
}

// ---------------------------------------------------------------------------
// Local feasible sets. A set is a product of box and ball factors laid out
// over consecutive coordinate blocks; plain boxes and balls are one factor.
// Products arise when MPC stage sets are stacked into one decision vector.
// ---------------------------------------------------------------------------

struct BoxFactor {
  Vector lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

struct BallFactor {
  Vector center;
  double radius{0.0};
  int dim() const { return static_cast<int>(center.size()); }
};

using SetFactor = std::variant<BoxFactor, BallFactor>;

struct LocalSet {
  std::vector<SetFactor> factors;

  int dim() const {
    int n = 0;
    for (const auto& f : factors) {
      n += std::visit([](const auto& s) { return s.dim(); }, f);
    }
    return n;
  }

  bool all_boxes() const {
    for (const auto& f : factors) {
      if (!std::holds_alternative<BoxFactor>(f)) return false;
    }
    return true;
  }

  // Euclidean projection, factor by factor. Idempotent: points already in
  // the set (up to a few ulps on the ball boundary) are returned unchanged.
  Vector project(const Vector& v) const {
    check_dim(v);
    Vector out(v.size());
    int at = 0;
    for (const auto& f : factors) {
      if (const auto* box = std::get_if<BoxFactor>(&f)) {
        const int n = box->dim();
        out.segment(at, n) =
            v.segment(at, n).cwiseMax(box->lo).cwiseMin(box->hi);
        at += n;
      } else {
        const auto& ball = std::get<BallFactor>(f);
        const int n = ball.dim();
        const Vector d = v.segment(at, n) - ball.center;
        const double nd = d.norm();
        constexpr double kSlack = 1.0 + 8.0 * std::numeric_limits<double>::epsilon();
        if (nd <= ball.radius * kSlack) {
          out.segment(at, n) = v.segment(at, n);
        } else {
          out.segment(at, n) = ball.center + d * (ball.radius / nd);
        }
        at += n;
      }
    }
    return out;
  }

  bool contains(const Vector& v, double tol = 0.0) const {
    check_dim(v);
    int at = 0;
    for (const auto& f : factors) {
      if (const auto* box = std::get_if<BoxFactor>(&f)) {
        const int n = box->dim();
        for (int j = 0; j < n; ++j) {
          const double c = v[at + j];
          if (c < box->lo[j] - tol || c > box->hi[j] + tol) return false;
        }
        at += n;
      } else {
        const auto& ball = std::get<BallFactor>(f);
        const int n = ball.dim();
        if ((v.segment(at, n) - ball.center).norm() > ball.radius + tol) {
          return false;
        }
        at += n;
      }
    }
    return true;
  }

  /// Exact Euclidean diameter of the product set.
  double diameter() const {
    double sq = 0.0;
    for (const auto& f : factors) {
      if (const auto* box = std::get_if<BoxFactor>(&f)) {
        sq += (box->hi - box->lo).squaredNorm();
      } else {
        const double d = 2.0 * std::get<BallFactor>(f).radius;
        sq += d * d;
      }
    }
    return std::sqrt(sq);
  }

 private:
  void check_dim(const Vector& v) const {
    if (v.size() != dim()) {
      throw std::invalid_argument("set: point has wrong dimension");
    }
  }
};

inline LocalSet make_box(Vector lo, Vector hi) {
  LocalSet s;
  s.factors.push_back(BoxFactor{std::move(lo), std::move(hi)});
  return s;
}

inline LocalSet make_ball(Vector center, double radius) {
  LocalSet s;
  s.factors.push_back(BallFactor{std::move(center), radius});
  return s;
}

// Cartesian product; an all-box product collapses into a single box factor.
inline LocalSet product_set(const std::vector<LocalSet>& parts) {
  bool boxes_only = true;
  int total = 0;
  for (const auto& p : parts) {
    total += p.dim();
    if (!p.all_boxes()) boxes_only = false;
  }
  LocalSet out;
  if (boxes_only) {
    Vector lo(total), hi(total);
    int at = 0;
    for (const auto& p : parts) {
      for (const auto& f : p.factors) {
        const auto& box = std::get<BoxFactor>(f);
        lo.segment(at, box.dim()) = box.lo;
        hi.segment(at, box.dim()) = box.hi;
        at += box.dim();
      }
    }
    out.factors.push_back(BoxFactor{std::move(lo), std::move(hi)});
    return out;
  }
  for (const auto& p : parts) {
    for (const auto& f : p.factors) out.factors.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sparse coupling block of one agent: an m x n_i matrix in canonical triplet
// form (sorted by (row, col), unique, no stored zeros).
// ---------------------------------------------------------------------------

struct Triplet {
  int row{0};
  int col{0};
  double value{0.0};
};

struct CouplingBlock {
  int rows{0};
  int cols{0};
  std::vector<Triplet> entries;

  // Sorts and drops exact zeros. Returns false if duplicate (row, col)
  // pairs remain, which validation reports as a structural violation.
  bool canonicalize() {
    std::sort(entries.begin(), entries.end(),
              [](const Triplet& a, const Triplet& b) {
                return a.row != b.row ? a.row < b.row : a.col < b.col;
              });
    for (std::size_t k = 1; k < entries.size(); ++k) {
      if (entries[k].row == entries[k - 1].row &&
          entries[k].col == entries[k - 1].col) {
        return false;
      }
    }
    entries.erase(std::remove_if(entries.begin(), entries.end(),
                                 [](const Triplet& t) { return t.value == 0.0; }),
                  entries.end());
    return true;
  }

  /// Rows with at least one nonzero entry, ascending. The set Q_i.
  std::vector<int> row_support() const {
    std::vector<int> sup;
    for (const auto& t : entries) {
      if (sup.empty() || sup.back() != t.row) sup.push_back(t.row);
    }
    return sup;
  }

  Vector multiply(const Vector& x) const {
    if (x.size() != cols) {
      throw std::invalid_argument("coupling: vector has wrong dimension");
    }
    Vector y = Vector::Zero(rows);
    for (const auto& t : entries) y[t.row] += t.value * x[t.col];
    return y;
  }

  /// Dense submatrix restricted to the given (ascending) rows.
  Matrix dense_rows(const std::vector<int>& which) const {
    Matrix sub = Matrix::Zero(static_cast<Eigen::Index>(which.size()), cols);
    std::size_t at = 0;
    for (const auto& t : entries) {
      while (at < which.size() && which[at] < t.row) ++at;
      if (at < which.size() && which[at] == t.row) {
        sub(static_cast<Eigen::Index>(at), t.col) = t.value;
      }
    }
    return sub;
  }
};

// ---------------------------------------------------------------------------
// The partitioned program: min sum_i f_i(x_i) s.t. sum_i A_i x_i = b,
// x_i in X_i. Immutable and freely shareable once validated.
// ---------------------------------------------------------------------------

struct ValidationReport {
  bool ok{true};
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
};

struct PartitionedProblem {
  std::vector<ConvexObjective> objectives;
  std::vector<LocalSet> sets;
  std::vector<CouplingBlock> couplings;
  Vector rhs;  // b

  bool validated{false};
  std::vector<int> offsets;  // size N+1; stacked start of each agent block

  int num_agents() const { return static_cast<int>(objectives.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }
  int agent_dim(int i) const { return objectives[static_cast<std::size_t>(i)].dim(); }

  int agent_offset(int i) const {
    require_validated();
    return offsets[static_cast<std::size_t>(i)];
  }

  int total_dim() const {
    require_validated();
    return offsets.back();
  }

  Eigen::VectorBlock<const Vector> agent_slice(const Vector& x, int i) const {
    return x.segment(agent_offset(i), agent_dim(i));
  }

  void require_validated() const {
    if (!validated) {
      throw std::logic_error("problem must pass validate() before use");
    }
  }
};

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace detail

// Structural validation. Canonicalizes coupling blocks, prunes vacuous rows
// whose right-hand side is zero, and freezes the stacked layout. The report
// carries all failures; nothing throws.
inline ValidationReport validate(PartitionedProblem& p) {
  ValidationReport rep;
  auto fail = [&rep](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };

  const std::size_t n_agents = p.objectives.size();
  if (n_agents == 0) fail("problem has no agents");
  if (p.sets.size() != n_agents || p.couplings.size() != n_agents) {
    fail("exactly one objective, set, and coupling block required per agent");
    return rep;
  }
  const int m = static_cast<int>(p.rhs.size());
  if (!detail::all_finite(p.rhs)) fail("right-hand side b has non-finite entries");

  for (std::size_t i = 0; i < n_agents; ++i) {
    const std::string tag = "agent " + std::to_string(i) + ": ";
    const auto& f = p.objectives[i];
    const int n_i = f.dim();
    if (n_i <= 0) fail(tag + "agent dimension must be positive");
    if (!detail::all_finite(f.linear) || !std::isfinite(f.constant)) {
      fail(tag + "objective has non-finite coefficients");
    }
    if (f.kind == ObjectiveKind::kQuadratic) {
      const auto& q = f.hessian;
      if (q.rows() != n_i || q.cols() != n_i) {
        fail(tag + "quadratic term must be " + std::to_string(n_i) + "x" +
             std::to_string(n_i));
      } else if (!detail::all_finite(q)) {
        fail(tag + "quadratic term has non-finite entries");
      } else {
        const double scale = q.cwiseAbs().maxCoeff();
        const double asym = (q - q.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * scale) {
          fail(tag + "quadratic term is not symmetric");
        } else {
          Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
          const double lo = es.eigenvalues().minCoeff();
          const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
          if (lo < -1e-10 * std::max(hi, 1e-300)) {
            fail(tag + "quadratic term is not positive semidefinite");
          }
        }
      }
    }

    const auto& set = p.sets[i];
    if (set.dim() != n_i) fail(tag + "set dimension disagrees with objective");
    for (const auto& factor : set.factors) {
      if (const auto* box = std::get_if<BoxFactor>(&factor)) {
        if (box->lo.size() != box->hi.size()) {
          fail(tag + "box bounds disagree in dimension");
          continue;
        }
        if (!detail::all_finite(box->lo) || !detail::all_finite(box->hi)) {
          fail(tag + "unbounded local set (non-finite box bound)");
        }
        if ((box->lo.array() > box->hi.array()).any()) {
          fail(tag + "empty local set (box has lo > hi)");
        }
      } else {
        const auto& ball = std::get<BallFactor>(factor);
        if (!(ball.radius > 0.0) || !std::isfinite(ball.radius)) {
          fail(tag + "ball radius must be positive and finite");
        }
        if (!detail::all_finite(ball.center)) {
          fail(tag + "ball center has non-finite entries");
        }
      }
    }

    auto& blk = p.couplings[i];
    if (blk.rows != m) {
      fail(tag + "coupling block row count disagrees with b");
    }
    if (blk.cols != n_i) {
      fail(tag + "coupling block column count disagrees with agent dimension");
    }
    for (const auto& t : blk.entries) {
      if (t.row < 0 || t.row >= m || t.col < 0 || t.col >= n_i) {
        fail(tag + "coupling triplet index out of range");
        break;
      }
      if (!std::isfinite(t.value)) {
        fail(tag + "coupling triplet value non-finite");
        break;
      }
    }
    if (!blk.canonicalize()) {
      fail(tag + "duplicate (row, col) pair in coupling triplets");
    }
  }
  if (!rep.ok) return rep;

  // Row coverage: every row needs a nonzero block somewhere; all-zero rows
  // with b_j = 0 are pruned, with b_j != 0 they are unsatisfiable.
  std::vector<int> degree(static_cast<std::size_t>(m), 0);
  for (const auto& blk : p.couplings) {
    for (int r : blk.row_support()) ++degree[static_cast<std::size_t>(r)];
  }
  std::vector<int> remap(static_cast<std::size_t>(m), -1);
  int kept = 0;
  for (int j = 0; j < m; ++j) {
    if (degree[static_cast<std::size_t>(j)] > 0) {
      remap[static_cast<std::size_t>(j)] = kept++;
    } else if (p.rhs[j] != 0.0) {
      fail("vacuous infeasible row " + std::to_string(j) + " (no agent, b=" +
           std::to_string(p.rhs[j]) + ")");
    } else {
      rep.warnings.push_back("pruned vacuous row " + std::to_string(j) +
                             " (b=0)");
    }
  }
  if (!rep.ok) return rep;
  if (kept < m) {
    Vector b2(kept);
    for (int j = 0; j < m; ++j) {
      if (remap[static_cast<std::size_t>(j)] >= 0) {
        b2[remap[static_cast<std::size_t>(j)]] = p.rhs[j];
      }
    }
    p.rhs = std::move(b2);
    for (auto& blk : p.couplings) {
      blk.rows = kept;
      for (auto& t : blk.entries) t.row = remap[static_cast<std::size_t>(t.row)];
    }
  }

  p.offsets.assign(n_agents + 1, 0);
  for (std::size_t i = 0; i < n_agents; ++i) {
    p.offsets[i + 1] = p.offsets[i] + p.objectives[i].dim();
  }
  p.validated = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Structural and evaluation operations.
// ---------------------------------------------------------------------------

/// Number of agents touching each constraint row (q_1..q_m).
inline std::vector<int> row_degrees(const PartitionedProblem& p) {
  p.require_validated();
  std::vector<int> deg(static_cast<std::size_t>(p.num_rows()), 0);
  for (const auto& blk : p.couplings) {
    for (int r : blk.row_support()) ++deg[static_cast<std::size_t>(r)];
  }
  return deg;
}

/// Maximum constraint degree q. Every row of a validated problem has q_j >= 1.
inline int max_degree(const PartitionedProblem& p) {
  const auto deg = row_degrees(p);
  int q = 0;
  for (std::size_t j = 0; j < deg.size(); ++j) {
    if (deg[j] == 0) {
      throw std::logic_error("row " + std::to_string(j) +
                             " has degree zero after validation");
    }
    q = std::max(q, deg[j]);
  }
  return q;
}

// Constraint violation r(x) = sum_i A_i x_i - b. The sum runs over agents in
// ascending order; this order is part of the determinism contract.
inline Vector residual(const PartitionedProblem& p, const Vector& x) {
  p.require_validated();
  if (x.size() != p.total_dim()) {
    throw std::invalid_argument("residual: stacked vector has wrong dimension");
  }
  Vector acc = Vector::Zero(p.num_rows());
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& blk = p.couplings[static_cast<std::size_t>(i)];
    const int off = p.agent_offset(i);
    for (const auto& t : blk.entries) acc[t.row] += t.value * x[off + t.col];
  }
  return acc - p.rhs;
}

inline double objective_value(const PartitionedProblem& p, const Vector& x) {
  p.require_validated();
  if (x.size() != p.total_dim()) {
    throw std::invalid_argument("objective: stacked vector has wrong dimension");
  }
  double total = 0.0;
  for (int i = 0; i < p.num_agents(); ++i) {
    total += p.objectives[static_cast<std::size_t>(i)].value(p.agent_slice(x, i));
  }
  return total;
}

inline Vector objective_subgradient(const PartitionedProblem& p, int agent,
                                    const Vector& x_i) {
  p.require_validated();
  return p.objectives.at(static_cast<std::size_t>(agent)).gradient(x_i);
}

/// Componentwise projection of a stacked vector onto X = X_1 x ... x X_N.
inline Vector project_onto_sets(const PartitionedProblem& p, const Vector& x) {
  p.require_validated();
  Vector out(x.size());
  for (int i = 0; i < p.num_agents(); ++i) {
    out.segment(p.agent_offset(i), p.agent_dim(i)) =
        p.sets[static_cast<std::size_t>(i)].project(p.agent_slice(x, i));
  }
  return out;
}

}  // namespace adal
