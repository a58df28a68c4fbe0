#pragma once

// Dense bounded-variable primal simplex.
//
//   minimize    c^T x
//   subject to  A_eq x  = b_eq
//               A_ub x <= b_ub
//               lower <= x <= upper
//
// Two phases with one artificial per row, Bland's smallest-index rule for
// both the entering and the leaving variable, and nonbasic variables resting
// at either bound. The solver is a template over the scalar so the same code
// runs on double and on exact rationals; refactorization and tolerances are
// only applied to inexact scalars.

#include "d2d/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace d2d {

template <typename Scalar>
struct LpProblem {
  VectorX<Scalar> objective;
  MatrixX<Scalar> eq_matrix;
  VectorX<Scalar> eq_rhs;
  MatrixX<Scalar> ub_matrix;
  VectorX<Scalar> ub_rhs;
  VectorX<Scalar> lower;  // must be finite
  VectorX<Scalar> upper;  // +infinity allowed when Scalar has one

  /// Empty problem over n variables with bounds [0, 1].
  static LpProblem unit_box(Index n) {
    LpProblem p;
    p.objective = VectorX<Scalar>::Zero(n);
    p.eq_matrix.resize(0, n);
    p.eq_rhs.resize(0);
    p.ub_matrix.resize(0, n);
    p.ub_rhs.resize(0);
    p.lower = VectorX<Scalar>::Zero(n);
    p.upper = VectorX<Scalar>::Ones(n);
    return p;
  }

  [[nodiscard]] Index num_variables() const { return objective.size(); }

  void validate() const {
    const Index n = objective.size();
    if (eq_matrix.cols() != n || ub_matrix.cols() != n || lower.size() != n ||
        upper.size() != n || eq_matrix.rows() != eq_rhs.size() ||
        ub_matrix.rows() != ub_rhs.size()) {
      throw ConfigError("LP dimensions are inconsistent");
    }
    for (Index j = 0; j < n; ++j) {
      if (lower(j) > upper(j)) throw ConfigError("LP bound lower > upper");
    }
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  VectorX<Scalar> x;
  Scalar objective = Scalar(0);
  // Row prices y with reduced costs c - A_eq^T y_eq - A_ub^T y_ub.
  VectorX<Scalar> eq_duals;
  VectorX<Scalar> ub_duals;
  long iterations = 0;
};

template <typename Scalar>
struct LpTolerances {
  Scalar optimality;
  Scalar pivot;
  Scalar feasibility;
  Scalar tie;

  static LpTolerances defaults() {
    if constexpr (std::numeric_limits<Scalar>::is_exact) {
      return {Scalar(0), Scalar(0), Scalar(0), Scalar(0)};
    } else {
      return {Scalar(1e-9), Scalar(1e-9), Scalar(1e-9), Scalar(1e-12)};
    }
  }
};

namespace detail {

template <typename Scalar>
bool has_finite_upper(const Scalar& v) {
  if constexpr (std::numeric_limits<Scalar>::has_infinity) {
    return v < std::numeric_limits<Scalar>::infinity();
  } else {
    return true;
  }
}

template <typename Scalar>
Scalar abs_value(const Scalar& v) {
  return v < Scalar(0) ? Scalar(-v) : v;
}

template <typename Scalar>
class BoundedSimplex {
 public:
  BoundedSimplex(const LpProblem<Scalar>& p, const LpTolerances<Scalar>& tol)
      : problem_(p), tol_(tol) {
    build();
  }

  LpResult<Scalar> solve() {
    LpResult<Scalar> result;

    // Phase 1: drive the artificials to zero.
    VectorX<Scalar> phase1 = VectorX<Scalar>::Zero(ncols_);
    for (Index r = 0; r < rows_; ++r) {
      if (uses_artificial_[static_cast<std::size_t>(r)]) phase1(art0_ + r) = Scalar(1);
    }
    if (run_phase(phase1) == LpStatus::unbounded) {
      throw SolverFailure("phase 1 reported unbounded");
    }
    Scalar infeasibility(0);
    for (Index r = 0; r < rows_; ++r) infeasibility += x_(art0_ + r);
    Scalar scale(1);
    for (Index r = 0; r < rows_; ++r) {
      if (abs_value(rhs_(r)) > scale) scale = abs_value(rhs_(r));
    }
    result.iterations = iterations_;
    if (infeasibility > tol_.feasibility * scale) {
      result.status = LpStatus::infeasible;
      return result;
    }
    retire_artificials();

    // Phase 2: original objective.
    VectorX<Scalar> phase2 = VectorX<Scalar>::Zero(ncols_);
    phase2.head(n_) = problem_.objective;
    const LpStatus st = run_phase(phase2);
    result.iterations = iterations_;
    if (st == LpStatus::unbounded) {
      result.status = LpStatus::unbounded;
      return result;
    }
    refactor(phase2);

    result.status = LpStatus::optimal;
    result.x = x_.head(n_);
    result.objective = problem_.objective.dot(result.x);
    VectorX<Scalar> y(rows_);
    for (Index r = 0; r < rows_; ++r) {
      Scalar acc(0);
      for (Index k = 0; k < rows_; ++k) {
        acc += phase2(basis_[static_cast<std::size_t>(k)]) * tableau_(k, init_col_[static_cast<std::size_t>(r)]);
      }
      y(r) = acc * init_sign_(r);
    }
    result.eq_duals = y.head(m_eq_);
    result.ub_duals = y.tail(m_ub_);
    check_feasible(result.x);
    return result;
  }

 private:
  enum class State : unsigned char { basic, at_lower, at_upper };

  void build() {
    problem_.validate();
    n_ = problem_.num_variables();
    m_eq_ = problem_.eq_matrix.rows();
    m_ub_ = problem_.ub_matrix.rows();
    rows_ = m_eq_ + m_ub_;
    slack0_ = n_;
    art0_ = n_ + m_ub_;
    ncols_ = art0_ + rows_;

    full_ = MatrixX<Scalar>::Zero(rows_, ncols_);
    full_.block(0, 0, m_eq_, n_) = problem_.eq_matrix;
    full_.block(m_eq_, 0, m_ub_, n_) = problem_.ub_matrix;
    for (Index k = 0; k < m_ub_; ++k) full_(m_eq_ + k, slack0_ + k) = Scalar(1);
    rhs_.resize(rows_);
    rhs_ << problem_.eq_rhs, problem_.ub_rhs;

    lower_ = VectorX<Scalar>::Zero(ncols_);
    upper_ = VectorX<Scalar>::Zero(ncols_);
    finite_upper_.assign(static_cast<std::size_t>(ncols_), true);
    lower_.head(n_) = problem_.lower;
    upper_.head(n_) = problem_.upper;
    for (Index j = 0; j < n_; ++j) finite_upper_[static_cast<std::size_t>(j)] = has_finite_upper(problem_.upper(j));
    for (Index j = slack0_; j < art0_; ++j) finite_upper_[static_cast<std::size_t>(j)] = false;

    x_ = VectorX<Scalar>::Zero(ncols_);
    x_.head(n_) = problem_.lower;
    state_.assign(static_cast<std::size_t>(ncols_), State::at_lower);
    basis_.assign(static_cast<std::size_t>(rows_), 0);
    uses_artificial_.assign(static_cast<std::size_t>(rows_), false);
    init_col_.assign(static_cast<std::size_t>(rows_), 0);
    init_sign_ = VectorX<Scalar>::Ones(rows_);

    const VectorX<Scalar> residual = rhs_ - full_.leftCols(n_) * x_.head(n_);
    for (Index r = 0; r < rows_; ++r) {
      const auto ru = static_cast<std::size_t>(r);
      const Scalar sign = residual(r) < Scalar(0) ? Scalar(-1) : Scalar(1);
      full_(r, art0_ + r) = sign;
      if (r >= m_eq_ && residual(r) >= Scalar(0)) {
        const Index s = slack0_ + (r - m_eq_);
        basis_[ru] = s;
        x_(s) = residual(r);
        init_col_[ru] = s;
      } else {
        const Index a = art0_ + r;
        basis_[ru] = a;
        x_(a) = abs_value(residual(r));
        finite_upper_[static_cast<std::size_t>(a)] = false;
        uses_artificial_[ru] = true;
        init_col_[ru] = a;
        init_sign_(r) = sign;
      }
      state_[static_cast<std::size_t>(basis_[ru])] = State::basic;
    }
    // Initial basis is diagonal with entries +-1, so B^-1 A = diag(sign) A.
    tableau_ = init_sign_.asDiagonal() * full_;

    const double dim = static_cast<double>(rows_ + ncols_);
    iteration_cap_ = static_cast<long>(10.0 * dim * dim) + 100;
  }

  bool is_fixed(Index j) const {
    return finite_upper_[static_cast<std::size_t>(j)] && !(lower_(j) < upper_(j));
  }

  void compute_reduced_costs(const VectorX<Scalar>& cost) {
    VectorX<Scalar> cb(rows_);
    for (Index r = 0; r < rows_; ++r) cb(r) = cost(basis_[static_cast<std::size_t>(r)]);
    reduced_ = cost - tableau_.transpose() * cb;
  }

  LpStatus run_phase(const VectorX<Scalar>& cost) {
    compute_reduced_costs(cost);
    long since_refactor = 0;
    for (;;) {
      if (++iterations_ > iteration_cap_) {
        throw SolverFailure("simplex iteration cap exceeded (" + std::to_string(iteration_cap_) + ")");
      }
      Index q = -1;
      int dir = 0;
      for (Index j = 0; j < ncols_; ++j) {
        const State s = state_[static_cast<std::size_t>(j)];
        if (s == State::basic || is_fixed(j)) continue;
        if (s == State::at_lower && reduced_(j) < -tol_.optimality) {
          q = j;
          dir = 1;
          break;
        }
        if (s == State::at_upper && reduced_(j) > tol_.optimality) {
          q = j;
          dir = -1;
          break;
        }
      }
      if (q < 0) return LpStatus::optimal;

      bool bounded = finite_upper_[static_cast<std::size_t>(q)];
      Scalar theta = bounded ? Scalar(upper_(q) - lower_(q)) : Scalar(0);
      Index leave = -1;
      bool leave_to_upper = false;
      for (Index r = 0; r < rows_; ++r) {
        const Scalar t = dir > 0 ? Scalar(tableau_(r, q)) : Scalar(-tableau_(r, q));
        if (abs_value(t) <= tol_.pivot) continue;
        const Index jb = basis_[static_cast<std::size_t>(r)];
        Scalar limit;
        bool to_upper = false;
        if (t > Scalar(0)) {
          limit = (x_(jb) - lower_(jb)) / t;
        } else {
          if (!finite_upper_[static_cast<std::size_t>(jb)]) continue;
          limit = (upper_(jb) - x_(jb)) / (-t);
          to_upper = true;
        }
        if (limit < Scalar(0)) limit = Scalar(0);
        bool take = false;
        if (!bounded) {
          take = true;
        } else if (limit < theta - tol_.tie) {
          take = true;
        } else if (leave >= 0 && !(limit > theta + tol_.tie) &&
                   jb < basis_[static_cast<std::size_t>(leave)]) {
          take = true;
        }
        if (take) {
          theta = limit;
          leave = r;
          leave_to_upper = to_upper;
          bounded = true;
        }
      }
      if (!bounded) return LpStatus::unbounded;

      const Scalar step = dir > 0 ? theta : Scalar(-theta);
      x_(q) += step;
      for (Index r = 0; r < rows_; ++r) {
        x_(basis_[static_cast<std::size_t>(r)]) -= step * tableau_(r, q);
      }
      if (leave < 0) {
        state_[static_cast<std::size_t>(q)] = dir > 0 ? State::at_upper : State::at_lower;
        x_(q) = dir > 0 ? upper_(q) : lower_(q);
        continue;
      }
      const Index out = basis_[static_cast<std::size_t>(leave)];
      pivot(leave, q);
      x_(out) = leave_to_upper ? upper_(out) : lower_(out);
      state_[static_cast<std::size_t>(out)] = leave_to_upper ? State::at_upper : State::at_lower;

      if constexpr (!std::numeric_limits<Scalar>::is_exact) {
        if (++since_refactor >= 50) {
          refactor(cost);
          since_refactor = 0;
        }
      }
    }
  }

  void pivot(Index r, Index q) {
    const Scalar piv = tableau_(r, q);
    tableau_.row(r) /= piv;
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pivot_row = tableau_.row(r);
    VectorX<Scalar> col = tableau_.col(q);
    col(r) = Scalar(0);
    for (Index i = 0; i < rows_; ++i) {
      if (col(i) != Scalar(0)) tableau_.row(i) -= col(i) * pivot_row;
    }
    const Scalar dq = reduced_(q);
    if (dq != Scalar(0)) reduced_ -= dq * pivot_row.transpose();
    reduced_(q) = Scalar(0);
    const auto ru = static_cast<std::size_t>(r);
    state_[static_cast<std::size_t>(q)] = State::basic;
    basis_[ru] = q;
  }

  // Rebuild B^-1 A, the basic values, and the reduced costs from the
  // original data to shed accumulated rounding.
  void refactor(const VectorX<Scalar>& cost) {
    if constexpr (std::numeric_limits<Scalar>::is_exact) {
      compute_reduced_costs(cost);
      return;
    } else {
      MatrixX<Scalar> basis_matrix(rows_, rows_);
      for (Index r = 0; r < rows_; ++r) basis_matrix.col(r) = full_.col(basis_[static_cast<std::size_t>(r)]);
      const Eigen::PartialPivLU<MatrixX<Scalar>> lu(basis_matrix);
      tableau_ = lu.solve(full_);
      VectorX<Scalar> nonbasic = x_;
      for (Index r = 0; r < rows_; ++r) nonbasic(basis_[static_cast<std::size_t>(r)]) = Scalar(0);
      const VectorX<Scalar> xb = lu.solve(rhs_ - full_ * nonbasic);
      for (Index r = 0; r < rows_; ++r) x_(basis_[static_cast<std::size_t>(r)]) = xb(r);
      compute_reduced_costs(cost);
    }
  }

  // Pin every artificial at zero and pivot basic ones out where possible.
  void retire_artificials() {
    for (Index r = 0; r < rows_; ++r) {
      const Index a = art0_ + r;
      finite_upper_[static_cast<std::size_t>(a)] = true;
      lower_(a) = Scalar(0);
      upper_(a) = Scalar(0);
      if (state_[static_cast<std::size_t>(a)] != State::basic) x_(a) = Scalar(0);
    }
    for (Index r = 0; r < rows_; ++r) {
      const Index jb = basis_[static_cast<std::size_t>(r)];
      if (jb < art0_) continue;
      Index best = -1;
      Scalar best_mag = tol_.pivot;
      for (Index j = 0; j < art0_; ++j) {
        if (state_[static_cast<std::size_t>(j)] == State::basic) continue;
        const Scalar mag = abs_value(Scalar(tableau_(r, j)));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; the artificial stays basic at zero
      pivot(r, best);
      x_(jb) = Scalar(0);
      state_[static_cast<std::size_t>(jb)] = State::at_lower;
    }
    if constexpr (!std::numeric_limits<Scalar>::is_exact) {
      refactor(VectorX<Scalar>::Zero(ncols_));
    }
  }

  void check_feasible(const VectorX<Scalar>& x) const {
    if constexpr (!std::numeric_limits<Scalar>::is_exact) {
      using std::abs;
      const Scalar tol = Scalar(1e-8);
      auto scaled = [](const Scalar& v) { return std::max(Scalar(1), abs(v)); };
      for (Index r = 0; r < m_eq_; ++r) {
        const Scalar lhs = problem_.eq_matrix.row(r).dot(x);
        if (abs(lhs - problem_.eq_rhs(r)) > tol * scaled(problem_.eq_rhs(r))) {
          throw SolverFailure("LP solution violates an equality row");
        }
      }
      for (Index r = 0; r < m_ub_; ++r) {
        const Scalar lhs = problem_.ub_matrix.row(r).dot(x);
        if (lhs - problem_.ub_rhs(r) > tol * scaled(problem_.ub_rhs(r))) {
          throw SolverFailure("LP solution violates an inequality row");
        }
      }
      for (Index j = 0; j < n_; ++j) {
        if (x(j) < problem_.lower(j) - tol * scaled(problem_.lower(j)) ||
            (has_finite_upper(problem_.upper(j)) &&
             x(j) > problem_.upper(j) + tol * scaled(problem_.upper(j)))) {
          throw SolverFailure("LP solution violates a variable bound");
        }
      }
    }
  }

  const LpProblem<Scalar>& problem_;
  LpTolerances<Scalar> tol_;
  Index n_ = 0, m_eq_ = 0, m_ub_ = 0, rows_ = 0, slack0_ = 0, art0_ = 0, ncols_ = 0;
  MatrixX<Scalar> full_;
  MatrixX<Scalar> tableau_;
  VectorX<Scalar> rhs_, lower_, upper_, x_, reduced_, init_sign_;
  std::vector<bool> finite_upper_;
  std::vector<bool> uses_artificial_;
  std::vector<State> state_;
  std::vector<Index> basis_;
  std::vector<Index> init_col_;
  long iterations_ = 0;
  long iteration_cap_ = 0;
};

}  // namespace detail

template <typename Scalar>
LpResult<Scalar> solve_lp(const LpProblem<Scalar>& problem,
                          const LpTolerances<Scalar>& tol = LpTolerances<Scalar>::defaults()) {
  detail::BoundedSimplex<Scalar> simplex(problem, tol);
  return simplex.solve();
}

}  // namespace d2d
