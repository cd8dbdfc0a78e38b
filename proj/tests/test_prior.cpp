#include <doctest.h>

#include <cmath>
#include <random>

#include "graphcp/error.hpp"
#include "graphcp/prior.hpp"
#include "oracles.hpp"

using namespace graphcp;

namespace {

// Every binary matrix of an L x (T-1) grid, as a ChangepointState.
ChangepointState state_from_code(std::uint64_t code, int L, int T) {
  ChangepointState s(L);
  for (int i = 0; i < L; ++i) {
    const auto row = static_cast<std::uint32_t>((code >> (i * (T - 1))) & ((1u << (T - 1)) - 1));
    s.tau[static_cast<std::size_t>(i)] = oracle::mask_positions(row, T);
  }
  return s;
}

std::vector<int> random_positions(std::mt19937_64& gen, int k, int T) {
  std::vector<int> all;
  for (int t = 2; t <= T; ++t) all.push_back(t);
  std::shuffle(all.begin(), all.end(), gen);
  all.resize(static_cast<std::size_t>(std::min<int>(k, T - 1)));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

TEST_CASE("MRF prior of the empty configuration is zero") {
  DependencyGraph g(3);
  g.set_weight(0, 1, 2.0);
  CHECK(log_mrf_prior_unnorm(ChangepointState(3), 8, -3.0, g) == 0.0);
}

TEST_CASE("two-series single column enumeration") {
  DependencyGraph g(2);
  g.set_weight(0, 1, std::log(2.0));
  double z = 0.0;
  double both = 0.0;
  for (std::uint64_t code = 0; code < 4; ++code) {
    const double w = std::exp(log_mrf_prior_unnorm(state_from_code(code, 2, 2), 2, 0.0, g));
    z += w;
    if (code == 3) both = w;
  }
  CHECK(z == doctest::Approx(5.0));
  CHECK(both / z == doctest::Approx(0.4));
}

TEST_CASE("MRF prior matches a direct cell sum") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int L = 4;
    const int T = 7;
    DependencyGraph g(L);
    for (int a = 0; a < L; ++a) {
      for (int b = a + 1; b < L; ++b) {
        if (gen() % 2) g.set_weight(a, b, unif(gen));
      }
    }
    const auto s = state_from_code(gen() & ((1ull << (L * (T - 1))) - 1), L, T);
    const auto m = to_matrix(s, T);
    double expected = 0.0;
    for (int t = 2; t <= T; ++t) {
      for (int a = 0; a < L; ++a) {
        if (m.at(a, t)) expected += -2.5;
        for (int b = a + 1; b < L; ++b) {
          if (m.at(a, t) && m.at(b, t)) expected += g.weight(a, b);
        }
      }
    }
    CHECK(log_mrf_prior_unnorm(s, T, -2.5, g) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("full conditional log-odds") {
  DependencyGraph g(3);
  g.set_weight(0, 1, 2.0);
  ChangepointState s({{}, {4}, {}});
  CHECK(log_full_conditional_prior(0, 3, s, 6, -2.0, g) == doctest::Approx(-2.0));
  CHECK(log_full_conditional_prior(0, 4, s, 6, -2.0, g) == doctest::Approx(0.0));
  CHECK(logistic(log_full_conditional_prior(0, 4, s, 6, -2.0, g)) == doctest::Approx(0.5));
}

TEST_CASE("full conditional equals the flip difference") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  const int L = 3;
  const int T = 6;
  for (int rep = 0; rep < 40; ++rep) {
    DependencyGraph g(L);
    g.set_weight(0, 1, unif(gen));
    g.set_weight(1, 2, unif(gen));
    if (gen() % 2) g.set_weight(0, 2, unif(gen));
    auto m = to_matrix(state_from_code(gen() & ((1ull << (L * (T - 1))) - 1), L, T), T);
    for (int i = 0; i < L; ++i) {
      for (int t = 2; t <= T; ++t) {
        auto on = m;
        on.set(i, t, true);
        auto off = m;
        off.set(i, t, false);
        const double flip =
            log_mrf_prior_unnorm(on, -1.3, g) - log_mrf_prior_unnorm(off, -1.3, g);
        CHECK(log_full_conditional_prior(i, t, m, -1.3, g) == doctest::Approx(flip).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("normalised MRF prior sums to one") {
  for (int L = 1; L <= 3; ++L) {
    for (int T = 2; T <= 5; ++T) {
      DependencyGraph g(L);
      for (int a = 0; a + 1 < L; ++a) g.set_weight(a, a + 1, 0.7 + a);
      const std::uint64_t n = 1ull << (L * (T - 1));
      double z = 0.0;
      for (std::uint64_t c = 0; c < n; ++c) {
        z += std::exp(log_mrf_prior_unnorm(state_from_code(c, L, T), T, -0.4, g));
      }
      double total = 0.0;
      for (std::uint64_t c = 0; c < n; ++c) {
        total += std::exp(log_mrf_prior_unnorm(state_from_code(c, L, T), T, -0.4, g)) / z;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("positive coupling raises the marginal changepoint probability") {
  const int L = 2;
  const int T = 4;
  double prev = 0.0;
  for (double lambda : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    DependencyGraph g(L);
    if (lambda > 0.0) g.set_weight(0, 1, lambda);
    double z = 0.0;
    double hit = 0.0;
    for (std::uint64_t c = 0; c < (1ull << (L * (T - 1))); ++c) {
      const auto s = state_from_code(c, L, T);
      const double w = std::exp(log_mrf_prior_unnorm(s, T, -2.0, g));
      z += w;
      if (to_matrix(s, T).at(0, 3)) hit += w;
    }
    CHECK(hit / z > prev);
    prev = hit / z;
  }
}

TEST_CASE("zero coupling reduces to the Bernoulli prior") {
  for (double p : {0.01, 0.1, 0.5}) {
    for (int L = 1; L <= 2; ++L) {
      for (int T = 2; T <= 6; ++T) {
        const DependencyGraph g(L);
        const double log_z = -L * (T - 1) * std::log(1.0 - p);
        for (std::uint64_t c = 0; c < (1ull << (L * (T - 1))); ++c) {
          const auto s = state_from_code(c, L, T);
          const double lhs = log_mrf_prior_unnorm(s, T, logit(p), g) - log_z;
          CHECK(lhs == doctest::Approx(log_bernoulli_prior(s, T, p)).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("lag set cardinality examples") {
  const std::vector<int> none;
  CHECK(lag_set_cardinality(3, none, 10) == 1);
  const std::vector<int> one{5};
  CHECK(lag_set_cardinality(2, one, 10) == 3);
  CHECK(lag_set_cardinality(20, one, 10) == 6);  // min(w+1, T+1-tau)
  const std::vector<int> two{5, 6};
  CHECK(lag_set_cardinality(1, two, 100) == 3);
  CHECK(lag_set_cardinality(0, two, 100) == 1);
  CHECK(log_lag_set_cardinality(1, two, 100) == doctest::Approx(std::log(3.0)));
  const std::vector<int> bad{6, 5};
  CHECK_THROWS_AS(lag_set_cardinality(1, bad, 10), DomainError);
  CHECK_THROWS_AS(lag_set_cardinality(-1, one, 10), DomainError);
}

TEST_CASE("lag set cardinality equals brute-force enumeration") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 400; ++rep) {
    const int T = 2 + static_cast<int>(gen() % 29);
    const int w = static_cast<int>(gen() % 5);
    const int k = static_cast<int>(gen() % 6);
    const auto tau = random_positions(gen, k, T);
    const auto brute = oracle::count_lag_vectors(w, tau, T);
    const BigInt exact = lag_set_cardinality(w, tau, T);
    REQUIRE(exact == BigInt(brute));
    CHECK(exact <= boost::multiprecision::pow(BigInt(w + 1), static_cast<unsigned>(tau.size())));
  }
}

TEST_CASE("wide gaps give the full product") {
  // Gaps above w and room before T+1: every lag in {0..w} is free.
  const std::vector<int> tau{3, 8, 14, 20};
  CHECK(lag_set_cardinality(4, tau, 40) == 625);
}

TEST_CASE("lag set cardinality is nondecreasing in the window and in each gap") {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 100; ++rep) {
    const int T = 20;
    const int k = 1 + static_cast<int>(gen() % 4);
    auto tau = random_positions(gen, k, T - 4);
    for (int w = 0; w < 5; ++w) {
      CHECK(lag_set_cardinality(w, tau, T) <= lag_set_cardinality(w + 1, tau, T));
    }
    // Widen the gap after changepoint j by moving every later one right.
    const auto j = static_cast<std::size_t>(gen() % tau.size());
    auto wider = tau;
    for (std::size_t m = j + 1; m < wider.size(); ++m) ++wider[m];
    const int w = static_cast<int>(gen() % 4);
    if (j + 1 < wider.size()) {
      CHECK(lag_set_cardinality(w, tau, T + 1) <= lag_set_cardinality(w, wider, T + 1));
    }
  }
}

TEST_CASE("lagged prior with zero windows equals the MRF prior") {
  std::mt19937_64 gen(31);
  DependencyGraph g(3);
  g.set_weight(0, 1, 1.2);
  g.set_weight(1, 2, 0.4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = state_from_code(gen() & ((1ull << 27) - 1), 3, 10);
    const LaggedState lagged(s);
    CHECK(log_joint_prior_lagged(lagged, 10, -2.0, g) == log_mrf_prior_unnorm(s, 10, -2.0, g));
  }
}

TEST_CASE("lagged prior subtracts the log cardinality per series") {
  DependencyGraph g(2);
  g.set_weight(0, 1, 1.0);
  LaggedState lagged(ChangepointState({{5, 6}, {5}}));
  lagged.windows = {1, 2};
  lagged.lags = {{1, 1}, {0}};
  const double expected = log_mrf_prior_unnorm(lagged.latent, 12, -3.0, g) -
                          std::log(static_cast<double>(oracle::count_lag_vectors(1, {5, 6}, 12))) -
                          std::log(static_cast<double>(oracle::count_lag_vectors(2, {5}, 12)));
  CHECK(log_joint_prior_lagged(lagged, 12, -3.0, g) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lagged prior is invariant to relabelling series") {
  DependencyGraph g(3);
  g.set_weight(0, 1, 1.0);
  g.set_weight(0, 2, 2.5);
  LaggedState a(ChangepointState({{3, 7}, {3}, {7}}));
  a.windows = {2, 0, 1};
  a.lags = {{1, 0}, {0}, {1}};
  // Swap series 1 and 2.
  DependencyGraph h(3);
  h.set_weight(0, 2, 1.0);
  h.set_weight(0, 1, 2.5);
  LaggedState b(ChangepointState({{3, 7}, {7}, {3}}));
  b.windows = {2, 1, 0};
  b.lags = {{1, 0}, {1}, {0}};
  CHECK(log_joint_prior_lagged(a, 9, -1.0, g) == doctest::Approx(log_joint_prior_lagged(b, 9, -1.0, h)));
}

TEST_CASE("geometric window prior") {
  CHECK(log_window_prior(0, 0.9) == doctest::Approx(std::log(0.9)));
  CHECK(log_window_prior(2, 0.9) == doctest::Approx(std::log(0.9 * 0.01)));
  double total = 0.0;
  for (int w = 0; w <= 1000; ++w) total += std::exp(log_window_prior(w, 0.3));
  CHECK(std::abs(total - 1.0) < 1e-12);
}
