#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <doctest.h>

#include "kcomb/error.hpp"
#include "kcomb/one_class.hpp"
#include "oracles.hpp"

using namespace kcomb;

namespace {

RowMatrix blob(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  RowMatrix X(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = z(rng) + (i % 3 == 0 ? 4.0 : 0.0);
    X(i, 1) = z(rng);
  }
  return X;
}

std::set<std::size_t> positive_support(const Vector& lambda) {
  std::set<std::size_t> s;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) > 0.0) s.insert(static_cast<std::size_t>(i));
  return s;
}

}  // namespace

TEST_CASE("order LP examples") {
  const std::vector<double> g1{3, 1, 2};
  const auto a = solve_order_lp(g1, 1.0 / 3);
  CHECK(a.lambda(0) == 0.0);
  CHECK(a.lambda(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.lambda(2) == 0.0);
  CHECK(a.objective == doctest::Approx(-1.0));
  CHECK(a.objective == doctest::Approx(oracle::order_lp_by_vertices(g1, 1.0 / 3)));

  const std::vector<double> g2{1, 2, 3, 4};
  const auto b = solve_order_lp(g2, 0.5);
  CHECK(b.lambda(0) == 0.5);
  CHECK(b.lambda(1) == 0.5);
  CHECK(b.lambda(2) == 0.0);
  CHECK(b.objective == -1.5);
  CHECK(b.objective == doctest::Approx(oracle::order_lp_by_vertices(g2, 0.5)));

  const std::vector<double> g3{5, -1, 2, 2, 7};
  const auto c = solve_order_lp(g3, 1.0);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(c.lambda(i) == doctest::Approx(0.2));
  CHECK(c.objective == doctest::Approx(-3.0));
}

TEST_CASE("order dual examples") {
  const std::vector<double> g1{3, 1, 2};
  CHECK(solve_order_dual(g1, 1.0 / 3).objective == doctest::Approx(-1.0));
  const std::vector<double> g2{1, 2, 3, 4};
  const auto d = solve_order_dual(g2, 0.5);
  CHECK(d.b == 2.0);
  CHECK(d.xi(0) == 1.0);
  CHECK(d.xi(1) == 0.0);
  CHECK(d.xi(3) == 0.0);
  CHECK(d.objective == -1.5);
  const std::vector<double> g3{5, -1, 2, 2, 7};
  const auto u = solve_order_dual(g3, 1.0);
  CHECK(u.b == 7.0);
  CHECK(u.objective == doctest::Approx(-3.0));
}

TEST_CASE("order LP errors") {
  const std::vector<double> g{1, 2, 3};
  CHECK_THROWS_AS(solve_order_lp(g, 0.2), Error);
  CHECK_THROWS_AS(solve_order_lp(g, 0.0), Error);
  CHECK_THROWS_AS(solve_order_dual(g, 1.1), Error);
  CHECK_THROWS_AS(solve_order_lp(std::vector<double>{}, 1.0), Error);
  CHECK_THROWS_AS(solve_order_lp(std::vector<double>{1.0, NAN}, 1.0), Error);
}

TEST_CASE("order LP: duality, mass, ties and the vertex oracle") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(1, 8), small(0, 3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 2000; ++t) {
    const int n = size(rng);
    std::vector<double> g(static_cast<std::size_t>(n));
    for (auto& v : g) v = t % 2 ? static_cast<double>(small(rng)) : u(rng);
    const double nu = t % 3 == 0 ? static_cast<double>(1 + t % n) / n : std::uniform_real_distribution<double>(1.0 / n, 1.0)(rng);
    const auto p = solve_order_lp(g, nu);
    const auto d = solve_order_dual(g, nu);
    REQUIRE(std::abs(p.objective - d.objective) <= 1e-9);
    REQUIRE(std::abs(p.lambda.sum() - 1.0) <= 1e-12);
    REQUIRE(p.lambda.minCoeff() >= 0.0);
    REQUIRE(p.lambda.maxCoeff() <= 1.0 / (nu * n) + 1e-15);
    REQUIRE(std::abs(p.objective - oracle::order_lp_by_vertices(g, nu)) <= 1e-9);
  }
}

TEST_CASE("order invariance under increasing transforms") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> g(20);
    for (auto& v : g) v = u(rng);
    const double nu = 0.05 + 0.9 * (t % 10) / 10.0;
    std::vector<double> h(g.size()), c(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      h[i] = std::exp(g[i]);
      c[i] = g[i] * g[i] * g[i] + 10.0;
    }
    const auto base = positive_support(solve_order_lp(g, nu).lambda);
    CHECK(positive_support(solve_order_lp(h, nu).lambda) == base);
    CHECK(positive_support(solve_order_lp(c, nu).lambda) == base);
  }
}

TEST_CASE("stable order on ties") {
  const std::vector<double> g{2, 1, 2, 1};
  CHECK(stable_order(g) == std::vector<std::size_t>{1, 3, 0, 2});
  const auto p = solve_order_lp(g, 0.25);
  CHECK(p.lambda(1) == 1.0);
  CHECK(p.lambda(3) == 0.0);
}

TEST_CASE("one-class training examples") {
  const auto X = blob(9, 1);
  const auto m = train_oneclass(X, KernelSpec::gaussian(1.0), 1.0, {});
  for (Eigen::Index i = 0; i < 9; ++i) CHECK(m.alpha(i) == doctest::Approx(1.0 / 9).epsilon(1e-15));

  RowMatrix same(3, 2);
  same.setConstant(0.4);
  const auto s = train_oneclass(same, KernelSpec::gaussian(1.0), 1.0, {});
  CHECK(s.offset_b == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(train_oneclass(X, KernelSpec::gaussian(1.0), 0.1, {}), Error);
}

TEST_CASE("one-class decision") {
  const auto X = blob(60, 2);
  const auto spec = KernelSpec::gaussian(2.0);
  const auto G = gram_matrix(spec, X);
  SolverConfig cfg;
  const auto m = train_oneclass(G, 0.2, cfg);
  CHECK(std::abs(m.alpha.sum() - 1.0) <= 1e-12);
  CHECK(m.offset_b > 0.0);
  const double ub = m.upper_bound();
  for (Eigen::Index i = 0; i < G.size(); ++i) {
    if (m.alpha(i) <= 1e-8 * ub || m.alpha(i) >= ub * (1 - 1e-8)) continue;
    Vector r = G.entries().row(i).transpose();
    const double score = oc_score(m, std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
    CHECK(std::abs(score - m.offset_b) <= 10 * cfg.kkt_tol);
  }
  const std::vector<double> zeros(60, 0.0);
  CHECK(oc_decision(m, zeros) == -1);
  RowMatrix far(1, 2);
  far << 1e3, 1e3;
  const Matrix k = cross_gram(spec, X, far);
  CHECK(oc_decision(m, std::span<const double>(k.data(), 60)) == -1);
  const std::vector<double> short_row(3, 0.0);
  CHECK_THROWS_AS(oc_score(m, short_row), Error);
}

TEST_CASE("one-class dual agrees with brute force on small data") {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index n = 3 + t % 10;
    const auto X = blob(n, static_cast<unsigned>(100 + t));
    const auto G = gram_matrix(KernelSpec::gaussian(1.0 + t % 4), X);
    const double nu = std::max(0.1 + 0.1 * (t % 8), 1.0 / static_cast<double>(n));
    SolverConfig cfg;
    cfg.kkt_tol = 1e-9;
    const auto sol = solve_oneclass_dual(G, nu, cfg);
    CHECK(std::abs(sol.objective - brute_force_qp(oneclass_problem(G, nu)).objective) <= 1e-6);
  }
}

TEST_CASE("one-class scores fed to the order LP flag the outliers") {
  const auto X = blob(150, 4);
  const auto G = gram_matrix(KernelSpec::gaussian(1.0), X);
  SolverConfig cfg;
  cfg.kkt_tol = 1e-8;
  for (const double nu : {0.1, 0.2, 0.3}) {
    const auto m = train_oneclass(G, nu, cfg);
    const Vector scores = G.entries() * m.alpha;
    std::size_t outliers = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i)
      if (scores(i) < m.offset_b - 1e-6) ++outliers;
    const std::vector<double> g(scores.data(), scores.data() + scores.size());
    const auto lp = solve_order_lp(g, nu);
    const auto lp_support = positive_support(lp.lambda).size();
    // the LP support holds ceil(nu n) points; the strict outliers are at most that
    CHECK(outliers <= lp_support);
    CHECK(lp_support <= outliers + m.support_indices.size());
    CHECK(static_cast<double>(lp_support) <= nu * 150 + 1);
  }
}
