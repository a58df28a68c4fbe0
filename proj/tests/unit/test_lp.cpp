#include "support.hpp"

#include "d2d/lp.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace d2d;
using testing::Rational;

namespace {

struct VertexOptimum {
  bool feasible = false;
  double objective = kInfinity;
};

// Enumerates every point where n linearly independent constraints are
// tight. Variables are boxed, so the feasible set is a polytope and its
// minimum sits at one of these points.
VertexOptimum vertex_oracle(const LpProblem<double>& p) {
  const Index n = p.num_variables();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (Index r = 0; r < p.ub_matrix.rows(); ++r) {
    rows.push_back(p.ub_matrix.row(r));
    rhs.push_back(p.ub_rhs(r));
  }
  for (Index j = 0; j < n; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e(j) = 1;
    rows.push_back(e);
    rhs.push_back(p.lower(j));
    rows.push_back(e);
    rhs.push_back(p.upper(j));
  }
  const Index free_rows = n - p.eq_matrix.rows();
  VertexOptimum best;
  const auto k = rows.size();
  for (unsigned mask = 0; mask < (1U << k); ++mask) {
    if (std::popcount(mask) != free_rows) continue;
    MatrixXd a(n, n);
    VectorXd b(n);
    a.topRows(p.eq_matrix.rows()) = p.eq_matrix;
    b.head(p.eq_matrix.rows()) = p.eq_rhs;
    Index r = p.eq_matrix.rows();
    for (unsigned c = 0; c < k; ++c) {
      if ((mask >> c) & 1U) {
        a.row(r) = rows[c];
        b(r++) = rhs[c];
      }
    }
    Eigen::FullPivLU<MatrixXd> lu(a);
    if (lu.rank() < n) continue;
    const VectorXd x = lu.solve(b);
    bool ok = ((x - p.lower).array() >= -1e-9).all() && ((p.upper - x).array() >= -1e-9).all();
    if (p.eq_matrix.rows() > 0) ok = ok && ((p.eq_matrix * x - p.eq_rhs).cwiseAbs().array() <= 1e-9).all();
    if (p.ub_matrix.rows() > 0) ok = ok && ((p.ub_matrix * x - p.ub_rhs).array() <= 1e-9).all();
    if (ok) {
      best.feasible = true;
      best.objective = std::min(best.objective, p.objective.dot(x));
    }
  }
  return best;
}

LpProblem<double> random_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvar(1, 4), neq(0, 1), nub(0, 2);
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> ub(1, 3);
  const int n = nvar(rng);
  auto p = LpProblem<double>::unit_box(n);
  for (int j = 0; j < n; ++j) {
    p.objective(j) = coef(rng);
    p.upper(j) = ub(rng);
  }
  const int e = std::min(neq(rng), n);
  p.eq_matrix.resize(e, n);
  p.eq_rhs.resize(e);
  for (int r = 0; r < e; ++r) {
    for (int j = 0; j < n; ++j) p.eq_matrix(r, j) = coef(rng);
    p.eq_rhs(r) = coef(rng);
  }
  const int u = nub(rng);
  p.ub_matrix.resize(u, n);
  p.ub_rhs.resize(u);
  for (int r = 0; r < u; ++r) {
    for (int j = 0; j < n; ++j) p.ub_matrix(r, j) = coef(rng);
    p.ub_rhs(r) = coef(rng);
  }
  return p;
}

template <typename Scalar>
LpProblem<Scalar> beale() {
  // Classic instance on which the largest-coefficient rule cycles.
  auto p = LpProblem<Scalar>::unit_box(4);
  p.upper.setConstant(Scalar(1000));
  p.objective << Scalar(-3) / 4, Scalar(150), Scalar(-1) / 50, Scalar(6);
  p.ub_matrix.resize(3, 4);
  p.ub_matrix << Scalar(1) / 4, Scalar(-60), Scalar(-1) / 25, Scalar(9),  //
      Scalar(1) / 2, Scalar(-90), Scalar(-1) / 50, Scalar(3),             //
      Scalar(0), Scalar(0), Scalar(1), Scalar(0);
  p.ub_rhs.resize(3);
  p.ub_rhs << Scalar(0), Scalar(0), Scalar(1);
  return p;
}

}  // namespace

TEST_SUITE("lp") {
  TEST_CASE("no constraints puts each variable at its cheaper bound") {
    auto p = LpProblem<double>::unit_box(3);
    p.objective << 1, -2, 0;
    const auto r = solve_lp(p);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(-2));
    CHECK(r.x(0) == 0.0);
    CHECK(r.x(1) == 1.0);
  }

  TEST_CASE("empty problem is optimal at zero") {
    const auto r = solve_lp(LpProblem<double>::unit_box(0));
    CHECK(r.status == LpStatus::optimal);
    CHECK(r.objective == 0.0);
  }

  TEST_CASE("two identical relays: optimum value is unique") {
    auto p = LpProblem<double>::unit_box(2);
    p.objective << 0.5, 0.5;
    p.eq_matrix = MatrixXd::Ones(1, 2);
    p.eq_rhs = VectorXd::Ones(1);
    const auto r = solve_lp(p);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(0.5));
    CHECK(r.x.sum() == doctest::Approx(1.0));
  }

  TEST_CASE("infeasible and unbounded are distinct outcomes") {
    auto p = LpProblem<double>::unit_box(2);
    p.eq_matrix = MatrixXd::Ones(1, 2);
    p.eq_rhs = VectorXd::Constant(1, 3.0);
    CHECK(solve_lp(p).status == LpStatus::infeasible);

    auto q = LpProblem<double>::unit_box(1);
    q.objective << -1;
    q.upper(0) = kInfinity;
    CHECK(solve_lp(q).status == LpStatus::unbounded);
  }

  TEST_CASE("bad dimensions are rejected") {
    auto p = LpProblem<double>::unit_box(2);
    p.eq_matrix = MatrixXd::Ones(1, 3);
    p.eq_rhs = VectorXd::Ones(1);
    CHECK_THROWS_AS(solve_lp(p), ConfigError);
  }

  TEST_CASE("Bland's rule terminates on a cycling-prone instance, exactly") {
    const auto r = solve_lp(beale<Rational>());
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == Rational(-1, 20));
    CHECK(r.x(0) == Rational(1, 25));
    CHECK(r.x(2) == Rational(1));
    const auto d = solve_lp(beale<double>());
    REQUIRE(d.status == LpStatus::optimal);
    CHECK(d.objective == doctest::Approx(-0.05).epsilon(1e-12));
  }

  TEST_CASE("random boxed problems match vertex enumeration") {
    std::mt19937_64 rng(7);
    int optimal = 0;
    for (int trial = 0; trial < 400; ++trial) {
      const auto p = random_problem(rng);
      const auto oracle = vertex_oracle(p);
      const auto r = solve_lp(p);
      CAPTURE(trial);
      REQUIRE(r.status != LpStatus::unbounded);
      REQUIRE((r.status == LpStatus::optimal) == oracle.feasible);
      if (!oracle.feasible) continue;
      ++optimal;
      CHECK(r.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
      // Returned point is feasible and reproduces the objective.
      CHECK(p.objective.dot(r.x) == doctest::Approx(r.objective).epsilon(1e-9));
      CHECK(((r.x - p.lower).array() >= -1e-8).all());
      CHECK(((p.upper - r.x).array() >= -1e-8).all());
      if (p.eq_matrix.rows() > 0) CHECK((p.eq_matrix * r.x - p.eq_rhs).cwiseAbs().maxCoeff() <= 1e-8);
      if (p.ub_matrix.rows() > 0) CHECK((p.ub_matrix * r.x - p.ub_rhs).maxCoeff() <= 1e-8);
    }
    CHECK(optimal > 100);
  }

  TEST_CASE("duals certify optimality through reduced costs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
      const auto p = random_problem(rng);
      const auto r = solve_lp(p);
      if (r.status != LpStatus::optimal) continue;
      CAPTURE(trial);
      VectorXd d = p.objective;
      if (p.eq_matrix.rows() > 0) d -= p.eq_matrix.transpose() * r.eq_duals;
      if (p.ub_matrix.rows() > 0) {
        d -= p.ub_matrix.transpose() * r.ub_duals;
        CHECK((r.ub_duals.array() <= 1e-9).all());
        const VectorXd slack = p.ub_rhs - p.ub_matrix * r.x;
        for (Index k = 0; k < slack.size(); ++k) {
          if (slack(k) > 1e-7) CHECK(std::abs(r.ub_duals(k)) <= 1e-9);
        }
      }
      for (Index j = 0; j < p.num_variables(); ++j) {
        const bool at_lower = r.x(j) <= p.lower(j) + 1e-9;
        const bool at_upper = r.x(j) >= p.upper(j) - 1e-9;
        if (!at_lower) CHECK(d(j) <= 1e-9);
        if (!at_upper) CHECK(d(j) >= -1e-9);
      }
    }
  }

  TEST_CASE("rational and double runs agree") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const auto p = random_problem(rng);
      LpProblem<Rational> q;
      q.objective = p.objective.cast<Rational>();
      q.eq_matrix = p.eq_matrix.cast<Rational>();
      q.eq_rhs = p.eq_rhs.cast<Rational>();
      q.ub_matrix = p.ub_matrix.cast<Rational>();
      q.ub_rhs = p.ub_rhs.cast<Rational>();
      q.lower = p.lower.cast<Rational>();
      q.upper = p.upper.cast<Rational>();
      const auto a = solve_lp(p);
      const auto b = solve_lp(q);
      CAPTURE(trial);
      REQUIRE(a.status == b.status);
      if (a.status == LpStatus::optimal) {
        CHECK(a.objective == doctest::Approx(static_cast<double>(b.objective)).epsilon(1e-9));
      }
    }
  }
}
