#include <doctest.h>

#include <cmath>
#include <queue>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "graphcp/auxiliary.hpp"
#include "graphcp/error.hpp"

using namespace graphcp;

namespace {

int edge_id(const DependencyGraph& g, int a, int b) {
  const auto& edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].a == std::min(a, b) && edges[e].b == std::max(a, b)) return static_cast<int>(e);
  }
  return -1;
}

// Components by breadth-first search over the bonded pairs.
std::vector<std::vector<int>> bfs_components(int n, const std::vector<std::pair<int, int>>& bonds) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (auto [a, b] : bonds) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    std::vector<int> comp;
    std::queue<int> q;
    q.push(s);
    seen[static_cast<std::size_t>(s)] = true;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      comp.push_back(u);
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = true;
          q.push(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(comp);
  }
  return out;
}

}  // namespace

TEST_CASE("no bonds gives singletons") {
  DependencyGraph g(4);
  g.set_weight(0, 1, 1.0);
  const AuxiliaryField aux(g, 6);
  const auto c = clusters_at(aux, 3);
  CHECK(c == std::vector<std::vector<int>>{{0}, {1}, {2}, {3}});
}

TEST_CASE("bonds are transitive within a column") {
  DependencyGraph g(4);
  g.set_weight(0, 1, 1.0);
  g.set_weight(1, 2, 1.0);
  g.set_weight(2, 3, 1.0);
  AuxiliaryField aux(g, 6);
  aux.set(4, edge_id(g, 0, 1), true);
  aux.set(4, edge_id(g, 1, 2), true);
  CHECK(clusters_at(aux, 4) == std::vector<std::vector<int>>{{0, 1, 2}, {3}});
  CHECK(clusters_at(aux, 3).size() == 4);
  CHECK(aux.bond_pairs(4) == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
  CHECK(aux.bond_count() == 2);
  aux.set(4, edge_id(g, 0, 1), false);
  CHECK(clusters_at(aux, 4) == std::vector<std::vector<int>>{{0}, {1, 2}, {3}});
  aux.clear_all();
  CHECK(aux.bond_count() == 0);
}

TEST_CASE("union-find components agree with breadth-first search") {
  std::mt19937_64 gen(41);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(gen() % 9);
    DependencyGraph g(n);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (gen() % 3 == 0) g.set_weight(a, b, 1.0);
      }
    }
    AuxiliaryField aux(g, 3);
    std::vector<std::pair<int, int>> bonds;
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      if (gen() % 2) {
        aux.set(2, static_cast<int>(e), true);
        bonds.emplace_back(g.edges()[e].a, g.edges()[e].b);
      }
    }
    auto expected = bfs_components(n, bonds);
    std::sort(expected.begin(), expected.end());
    CHECK(clusters_at(aux, 2) == expected);
    std::vector<int> labels;
    CHECK(cluster_labels(aux, 2, labels) == static_cast<int>(expected.size()));
  }
}

TEST_CASE("delta zero gives no bonds") {
  DependencyGraph g(3);
  g.set_weight(0, 1, 5.0);
  g.set_weight(1, 2, 5.0);
  const auto m = to_matrix(ChangepointState({{3}, {3}, {3}}), 5);
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    CHECK(sample_aux_field(m, g, 0.0, rng).bond_count() == 0);
  }
}

TEST_CASE("unequal cells are never bonded") {
  DependencyGraph g(2);
  g.set_weight(0, 1, 50.0);
  const auto m = to_matrix(ChangepointState({{3}, {}}), 5);
  Rng rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto aux = sample_aux_field(m, g, 1.0, rng);
    CHECK(!aux.bonded(3, 0));
    // Equal cells (both zero) at the other columns bond almost surely.
    CHECK(aux.bonded(2, 0));
  }
}

TEST_CASE("bond frequency matches its probability") {
  DependencyGraph g(2);
  g.set_weight(0, 1, std::log(2.0));
  const auto m = to_matrix(ChangepointState({{3}, {3}}), 3);
  Rng rng(3);
  const int n = 100000;
  int hits = 0;
  for (int rep = 0; rep < n; ++rep) {
    if (sample_aux_field(m, g, 1.0, rng).bonded(3, 0)) ++hits;
  }
  const double sd = std::sqrt(0.25 / n);
  CHECK(std::abs(static_cast<double>(hits) / n - 0.5) < 3.0 * sd);
}

TEST_CASE("expected bond probability matches quadrature over the Beta slab") {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (double lambda : {0.5, 2.0, 5.0, 18.0}) {
    for (const auto& shapes : {std::pair{1.0, 30.0}, std::pair{1.0, 1.0}, std::pair{2.5, 4.0}}) {
      const double a = shapes.first;
      const double b = shapes.second;
      const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
      const double q = integrator.integrate(
          [&](double d) {
            return -std::expm1(-lambda * d) * std::pow(d, a - 1.0) *
                   std::pow(1.0 - d, b - 1.0) * std::exp(-log_beta);
          },
          0.0, 1.0);
      CHECK(expected_bond_probability(lambda, a, b) == doctest::Approx(q).epsilon(1e-9));
    }
  }
  CHECK(expected_bond_probability(0.0, 1.0, 30.0) == 0.0);
  // Beta(1, 30) bonds a weight-18 edge about 37% of the time.
  CHECK(expected_bond_probability(18.0, 1.0, 30.0) == doctest::Approx(0.3701).epsilon(1e-3));
}

TEST_CASE("calibrated delta prior hits the target bond probability") {
  for (double lambda : {1.0, 2.0, 5.0, 18.0}) {
    for (double target : {0.3, 0.5}) {
      const auto prior = calibrate_delta_prior(lambda, target);
      CHECK(prior.spike == 0.5);
      CHECK(prior.shape1 == 1.0);
      CHECK(expected_bond_probability(lambda, 1.0, prior.shape2) ==
            doctest::Approx(target).epsilon(1e-9));
    }
  }
  CHECK(calibrate_delta_prior(5.0).shape2 == doctest::Approx(4.4726).epsilon(1e-4));
  CHECK(calibrate_delta_prior(18.0).shape2 == doctest::Approx(17.4929).epsilon(1e-4));
  CHECK(calibrate_delta_prior(5.0, 0.5, 0.0).spike == 0.0);
  CHECK_THROWS_AS(calibrate_delta_prior(0.0), DomainError);
  CHECK_THROWS_AS(calibrate_delta_prior(0.5, 0.5), DomainError);  // 1 - exp(-0.5) < 0.5
  CHECK_THROWS_AS(calibrate_delta_prior(5.0, 1.0), DomainError);
}
