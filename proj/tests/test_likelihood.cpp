#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "graphcp/error.hpp"
#include "graphcp/likelihood.hpp"
#include "oracles.hpp"

using namespace graphcp;

namespace {

// log of the integral over theta of prod_t Poisson(x_t | theta) Gamma(theta | a, b).
double poisson_gamma_by_quadrature(const std::vector<std::int64_t>& x, double a, double b) {
  double sum = 0.0;
  double log_fact = 0.0;
  for (auto v : x) {
    sum += static_cast<double>(v);
    log_fact += std::lgamma(static_cast<double>(v) + 1.0);
  }
  const double n = static_cast<double>(x.size());
  // Scale by the integrand's log at its mode so the quadrature sees O(1) values.
  const double mode = std::max((a + sum - 1.0) / (b + n), 1e-12);
  auto log_f = [&](double th) {
    return (a + sum - 1.0) * std::log(th) - (b + n) * th;
  };
  const double ref = log_f(mode);
  boost::math::quadrature::exp_sinh<double> integrator;
  const double integral =
      integrator.integrate([&](double th) { return std::exp(log_f(th) - ref); });
  return std::log(integral) + ref + a * std::log(b) - std::lgamma(a) - log_fact;
}

// Two-category multinomial: Beta-Binomial over the first cell probability.
double beta_binomial_by_quadrature(const std::vector<std::array<std::int64_t, 2>>& cells,
                                   double a1, double a2) {
  double n1 = 0.0;
  double n2 = 0.0;
  double coef = 0.0;
  for (const auto& c : cells) {
    n1 += static_cast<double>(c[0]);
    n2 += static_cast<double>(c[1]);
    coef += std::lgamma(static_cast<double>(c[0] + c[1]) + 1.0) -
            std::lgamma(static_cast<double>(c[0]) + 1.0) -
            std::lgamma(static_cast<double>(c[1]) + 1.0);
  }
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double integral = integrator.integrate([&](double p) {
    return std::pow(p, n1 + a1 - 1.0) * std::pow(1.0 - p, n2 + a2 - 1.0);
  }, 0.0, 1.0);
  return coef + std::log(integral) + std::lgamma(a1 + a2) - std::lgamma(a1) - std::lgamma(a2);
}

}  // namespace

TEST_CASE("Poisson-Gamma segment matches numerical integration") {
  const std::vector<std::int64_t> x{3, 5, 4, 2, 4, 3, 9};
  const ObservationModel model = PoissonGamma{2.0, 0.4};
  const SegmentCache cache(model, SeriesPanel::counts({x}));
  for (int t1 = 1; t1 <= 7; ++t1) {
    for (int t2 = t1 + 1; t2 <= 8; ++t2) {
      std::vector<std::int64_t> part(x.begin() + (t1 - 1), x.begin() + (t2 - 1));
      CHECK(cache.log_segment(0, t1, t2) ==
            doctest::Approx(poisson_gamma_by_quadrature(part, 2.0, 0.4)).epsilon(1e-9));
    }
  }
}

TEST_CASE("Multinomial-Dirichlet segment matches numerical integration") {
  const std::vector<std::array<std::int64_t, 2>> cells{{3, 1}, {0, 4}, {2, 2}, {5, 0}};
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& c : cells) rows.push_back({c[0], c[1]});
  const ObservationModel model = MultinomialDirichlet{{1.5, 0.7}};
  const SegmentCache cache(model, SeriesPanel::multinomial({rows}));
  for (int t1 = 1; t1 <= 4; ++t1) {
    for (int t2 = t1 + 1; t2 <= 5; ++t2) {
      std::vector<std::array<std::int64_t, 2>> part(cells.begin() + (t1 - 1),
                                                    cells.begin() + (t2 - 1));
      CHECK(cache.log_segment(0, t1, t2) ==
            doctest::Approx(beta_binomial_by_quadrature(part, 1.5, 0.7)).epsilon(1e-9));
    }
  }
}

TEST_CASE("unused categories keep their prior mass") {
  // Category 3 is never observed; only its share of the Dirichlet total remains.
  const std::vector<std::vector<std::int64_t>> cells{{1, 2, 0}, {3, 0, 0}, {0, 4, 0}};
  const std::vector<double> alpha{1.0, 2.0, 5.0};
  const SegmentCache cache(MultinomialDirichlet{alpha}, SeriesPanel::multinomial({cells}));
  for (int t1 = 1; t1 <= 3; ++t1) {
    for (int t2 = t1 + 1; t2 <= 4; ++t2) {
      CHECK(cache.log_segment(0, t1, t2) ==
            doctest::Approx(oracle::dirichlet_segment(cells, t1, t2, alpha)).epsilon(1e-12));
    }
  }
}

TEST_CASE("cached segments agree with closed forms on random panels") {
  std::mt19937_64 gen(11);
  std::poisson_distribution<int> pois(6.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<std::int64_t>> rows(3, std::vector<std::int64_t>(15));
    std::vector<std::vector<std::vector<std::int64_t>>> cells(
        3, std::vector<std::vector<std::int64_t>>(15, std::vector<std::int64_t>(4)));
    for (auto& r : rows) {
      for (auto& v : r) v = pois(gen);
    }
    for (auto& s : cells) {
      for (auto& c : s) {
        for (auto& v : c) v = pois(gen) % 4;
      }
    }
    const auto counts = SeriesPanel::counts(rows);
    const auto multi = SeriesPanel::multinomial(cells);
    const ObservationModel pg = PoissonGamma{1.5, 0.25};
    const ObservationModel md = MultinomialDirichlet{{0.5, 1.0, 2.0, 3.0}};
    const SegmentCache c1(pg, counts);
    const SegmentCache c2(md, multi);
    const auto o1 = oracle::closed_form_segments(counts, pg);
    const auto o2 = oracle::closed_form_segments(multi, md);
    for (int i = 0; i < 3; ++i) {
      for (int t1 = 1; t1 <= 15; ++t1) {
        for (int t2 = t1 + 1; t2 <= 16; ++t2) {
          REQUIRE(c1.log_segment(i, t1, t2) == doctest::Approx(o1(i, t1, t2)).epsilon(1e-11));
          REQUIRE(c2.log_segment(i, t1, t2) == doctest::Approx(o2(i, t1, t2)).epsilon(1e-11));
        }
      }
    }
  }
}

TEST_CASE("full log likelihood sums segments") {
  const auto panel = SeriesPanel::counts({{1, 4, 2, 8, 5}, {0, 0, 3, 3, 3}});
  const ObservationModel model = PoissonGamma{1.0, 1.0};
  const SegmentCache cache(model, panel);
  const auto seg = oracle::closed_form_segments(panel, model);
  const ChangepointState s({{3, 5}, {}});
  const double expected = seg(0, 1, 3) + seg(0, 3, 5) + seg(0, 5, 6) + seg(1, 1, 6);
  CHECK(log_lik_full(model, cache, s) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(log_lik_series(cache, 0, {3, 5}) == doctest::Approx(expected - seg(1, 1, 6)));
}

TEST_CASE("likelihood rejects bad input") {
  const auto panel = SeriesPanel::counts({{1, 2, 3}});
  CHECK_THROWS_AS(validate_model(PoissonGamma{0.0, 1.0}, panel), ConfigError);
  CHECK_THROWS_AS(validate_model(MultinomialDirichlet{{1.0}}, panel), ConfigError);
  const auto multi = SeriesPanel::multinomial({{{1, 2}, {3, 4}}});
  CHECK_THROWS_AS(validate_model(MultinomialDirichlet{{1.0, 2.0, 3.0}}, multi), ConfigError);
  CHECK_THROWS_AS(validate_model(PoissonGamma{1.0, 1.0}, multi), ConfigError);
  const SegmentCache cache(PoissonGamma{1.0, 1.0}, panel);
  CHECK_THROWS_AS(cache.log_segment(0, 2, 2), DomainError);
  CHECK_THROWS_AS(cache.log_segment(0, 1, 5), DomainError);
}
