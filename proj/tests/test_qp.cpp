#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "kcomb/error.hpp"
#include "kcomb/qp.hpp"
#include "oracles.hpp"

using namespace kcomb;

namespace {

BoxQP one_dim(double upper) {
  BoxQP p;
  p.Q = Matrix::Constant(1, 1, 1.0);
  p.linear = Vector::Constant(1, -1.0);
  p.eq_coeffs = Vector::Zero(1);
  p.eq_rhs = 0.0;
  p.lower = Vector::Zero(1);
  p.upper = Vector::Constant(1, upper);
  return p;
}

GramMatrix two_point_linear() {
  // x1 = 0, x2 = 2
  return GramMatrix((Matrix(2, 2) << 0, 0, 0, 4).finished(), GramProvenance::single_kernel);
}

SolverConfig tight() {
  SolverConfig cfg;
  cfg.kkt_tol = 1e-9;
  return cfg;
}

}  // namespace

TEST_CASE("brute force examples") {
  CHECK(brute_force_qp(one_dim(10.0)).alpha(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(brute_force_qp(one_dim(0.5)).alpha(0) == 0.5);
  const auto sol = brute_force_qp(csvm_problem(two_point_linear(), LabelDiagonal({-1, 1}), 10.0));
  CHECK(sol.alpha(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol.alpha(1) == doctest::Approx(0.5).epsilon(1e-12));
  BoxQP big = one_dim(1.0);
  big.Q = Matrix::Identity(17, 17);
  big.linear = Vector::Zero(17);
  big.eq_coeffs = Vector::Ones(17);
  big.lower = Vector::Zero(17);
  big.upper = Vector::Ones(17);
  CHECK_THROWS_AS(brute_force_qp(big), Error);
}

TEST_CASE("two-point C-SVM against the closed form") {
  const auto sol = solve_csvm_dual(two_point_linear(), LabelDiagonal({-1, 1}), 10.0, tight());
  const auto hand = oracle::two_point_csvm(0, 0, 4, -1, 1);
  REQUIRE(sol.converged);
  CHECK(sol.alpha(0) == doctest::Approx(hand.alpha).epsilon(1e-9));
  CHECK(sol.alpha(1) == doctest::Approx(hand.alpha).epsilon(1e-9));
  CHECK(sol.offset_b == doctest::Approx(hand.b).epsilon(1e-9));
  CHECK(hand.b == -1.0);
  // closed form for another geometry: x1 = 1, x2 = 3, gaussian-free quadratic gram
  const GramMatrix G((Matrix(2, 2) << 2, 1, 1, 5).finished(), GramProvenance::single_kernel);
  const auto h2 = oracle::two_point_csvm(2, 1, 5, 1, -1);
  const auto s2 = solve_csvm_dual(G, LabelDiagonal({1, -1}), 100.0, tight());
  CHECK(s2.alpha(0) == doctest::Approx(h2.alpha).epsilon(1e-9));
  CHECK(s2.offset_b == doctest::Approx(h2.b).epsilon(1e-9));
}

TEST_CASE("duplicated point with opposite labels sits at the bound") {
  const GramMatrix G(Matrix::Constant(2, 2, 1.0), GramProvenance::single_kernel);
  const LabelDiagonal y({1, -1});
  const auto sol = solve_csvm_dual(G, y, 0.1, {});
  const auto bf = brute_force_qp(csvm_problem(G, y, 0.1));
  CHECK(sol.alpha(0) == doctest::Approx(0.1));
  CHECK(sol.alpha(1) == doctest::Approx(0.1));
  CHECK(bf.alpha(0) == doctest::Approx(0.1));
}

TEST_CASE("C-SVM errors") {
  const GramMatrix G(Matrix::Identity(3, 3), GramProvenance::single_kernel);
  CHECK_THROWS_AS(solve_csvm_dual(G, LabelDiagonal({1, 1, 1}), 1.0, {}), Error);
  CHECK_THROWS_AS(solve_csvm_dual(G, LabelDiagonal({1, -1}), 1.0, {}), Error);
  CHECK_THROWS_AS(solve_csvm_dual(G, LabelDiagonal({1, -1, 1}), 0.0, {}), Error);
}

TEST_CASE("non-convergence is flagged") {
  std::mt19937_64 rng(1);
  const GramMatrix G(oracle::random_psd(30, rng), GramProvenance::single_kernel);
  SolverConfig cfg;
  cfg.max_iterations = 2;
  const auto sol = solve_csvm_dual(G, LabelDiagonal(oracle::random_labels(30, rng)), 10.0, cfg);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 2);
}

TEST_CASE("one-class examples") {
  const GramMatrix I(Matrix::Identity(2, 2), GramProvenance::single_kernel);
  const auto sol = solve_oneclass_dual(I, 1.0, {});
  CHECK(sol.alpha(0) == 0.5);
  CHECK(sol.alpha(1) == 0.5);
  CHECK(sol.objective == doctest::Approx(0.25));
  std::mt19937_64 rng(4);
  const GramMatrix G(oracle::random_psd(7, rng), GramProvenance::single_kernel);
  const auto uni = solve_oneclass_dual(G, 1.0, {});
  for (Eigen::Index i = 0; i < 7; ++i) CHECK(uni.alpha(i) == doctest::Approx(1.0 / 7).epsilon(1e-15));
  CHECK_THROWS_AS(solve_oneclass_dual(G, 0.1, {}), Error);
  CHECK_THROWS_AS(solve_oneclass_dual(G, 0.0, {}), Error);
  CHECK_THROWS_AS(solve_oneclass_dual(G, 1.5, {}), Error);
}

TEST_CASE("SMO matches brute force and certifies") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<Eigen::Index> size(2, 12);
  std::uniform_real_distribution<double> nu_draw(0.05, 1.0);
  const double Cs[] = {0.05, 1.0, 20.0};
  for (int t = 0; t < 150; ++t) {
    const Eigen::Index n = size(rng);
    const GramMatrix G(oracle::random_psd(n, rng), GramProvenance::single_kernel);
    const LabelDiagonal y(oracle::random_labels(static_cast<std::size_t>(n), rng));
    const double C = Cs[t % 3];
    const auto smo = solve_csvm_dual(G, y, C, tight());
    const auto problem = csvm_problem(G, y, C);
    REQUIRE(smo.converged);
    CHECK(std::abs(smo.objective - brute_force_qp(problem).objective) <= 1e-6);
    CHECK(certify_kkt(problem, smo.alpha).ok(1e-9));

    const double nu = std::max(nu_draw(rng), 1.0 / static_cast<double>(n));
    const auto oc = solve_oneclass_dual(G, nu, tight());
    const auto oc_problem = oneclass_problem(G, nu);
    REQUIRE(oc.converged);
    CHECK(std::abs(oc.objective - brute_force_qp(oc_problem).objective) <= 1e-6);
    CHECK(certify_kkt(oc_problem, oc.alpha).ok(1e-9));
    CHECK(std::abs(oc.alpha.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("monotone descent on PSD problems") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 20; ++t) {
    const GramMatrix G(oracle::random_psd(40, rng), GramProvenance::single_kernel);
    const LabelDiagonal y(oracle::random_labels(40, rng));
    std::vector<double> trace;
    SolverConfig cfg = tight();
    cfg.on_step = [&](std::size_t, double f) { trace.push_back(f); };
    const auto problem = csvm_problem(G, y, 1.0);
    const auto sol = solve_box_qp(problem, Vector::Zero(40), cfg);
    REQUIRE(trace.size() == sol.iterations);
    double prev = 0.0;  // objective at alpha = 0
    for (const double f : trace) {
      REQUIRE(f <= prev + 1e-12 * std::max(1.0, std::abs(prev)));
      prev = f;
    }
    CHECK(std::abs(trace.back() - problem.objective(sol.alpha)) <= 1e-9 * std::max(1.0, std::abs(trace.back())));
  }
}

TEST_CASE("scale covariance") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    BoxQP p = csvm_problem(GramMatrix(oracle::random_psd(8, rng), GramProvenance::single_kernel),
                           LabelDiagonal(oracle::random_labels(8, rng)), 2.0);
    // strictly convex instance so the argmin is unique
    p.Q += Matrix::Identity(8, 8);
    SolverConfig cfg;
    cfg.kkt_tol = 1e-12;
    const auto a = solve_box_qp(p, Vector::Zero(8), cfg);
    for (const double s : {0.01, 3.0, 250.0}) {
      BoxQP q = p;
      q.Q *= s;
      q.linear *= s;
      cfg.kkt_tol = 1e-12 * s;
      const auto b = solve_box_qp(q, Vector::Zero(8), cfg);
      CHECK(b.objective == doctest::Approx(s * a.objective).epsilon(1e-9));
      CHECK((a.alpha - b.alpha).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("indefinite Q is rejected unless allowed") {
  const GramMatrix G((Matrix(2, 2) << 0, 1, 1, 0).finished(), GramProvenance::combined);
  const LabelDiagonal y({1, -1});
  CHECK_THROWS_AS(solve_csvm_dual(G, y, 1.0, {}), Error);
  SolverConfig cfg;
  cfg.allow_indefinite = true;
  const auto sol = solve_csvm_dual(G, y, 1.0, cfg);
  const auto report = certify_kkt(csvm_problem(G, y, 1.0), sol.alpha);
  CHECK(report.ok(cfg.kkt_tol));
}

TEST_CASE("b falls back to the interval midpoint without free coordinates") {
  // Both alphas at C: interval for rho is bounded on both sides.
  const GramMatrix G(Matrix::Constant(2, 2, 1.0), GramProvenance::single_kernel);
  const auto problem = csvm_problem(G, LabelDiagonal({1, -1}), 0.1);
  const auto sol = solve_box_qp(problem, Vector::Zero(2), {});
  // g = Q a + p = (-1, -1); s g = (-1, 1). Both at upper: I_up = {1}
  // (y = -1 at upper), I_low = {0}; interval [-1, 1] for rho.
  CHECK(sol.offset_b == doctest::Approx(0.0).scale(1));
}

TEST_CASE("certify_kkt flags infeasible points") {
  const auto problem = csvm_problem(two_point_linear(), LabelDiagonal({-1, 1}), 10.0);
  const auto bad = certify_kkt(problem, (Vector(2) << 0.5, 0.4).finished());
  CHECK(bad.equality_violation == doctest::Approx(0.1));
  CHECK_FALSE(bad.ok(1e-3));
  const auto out = certify_kkt(problem, (Vector(2) << 11.0, 11.0).finished());
  CHECK(out.bound_violation == doctest::Approx(1.0));
  const auto opt = certify_kkt(problem, (Vector(2) << 0.5, 0.5).finished());
  CHECK(opt.ok(1e-12));
}
