#include "graphcp/prior.hpp"

#include <algorithm>
#include <cmath>

#include "graphcp/error.hpp"

namespace graphcp {

double log_mrf_prior_unnorm(const BinaryMatrix& matrix, double p_bar,
                            const DependencyGraph& graph) {
  double out = 0.0;
  for (int i = 0; i < matrix.series_count(); ++i) {
    for (int t = 2; t <= matrix.length(); ++t) {
      if (matrix.at(i, t)) out += p_bar;
    }
  }
  for (const auto& e : graph.edges()) {
    for (int t = 2; t <= matrix.length(); ++t) {
      if (matrix.at(e.a, t) && matrix.at(e.b, t)) out += e.weight;
    }
  }
  return out;
}

double log_mrf_prior_unnorm(const ChangepointState& state, int length, double p_bar,
                            const DependencyGraph& graph) {
  return log_mrf_prior_unnorm(to_matrix(state, length), p_bar, graph);
}

double log_full_conditional_prior(int i, int t, const BinaryMatrix& matrix, double p_bar,
                                  const DependencyGraph& graph) {
  double out = p_bar;
  for (const auto& nb : graph.neighbors(i)) {
    if (matrix.at(nb.node, t)) out += nb.weight;
  }
  return out;
}

double log_full_conditional_prior(int i, int t, const ChangepointState& state, int length,
                                  double p_bar, const DependencyGraph& graph) {
  return log_full_conditional_prior(i, t, to_matrix(state, length), p_bar, graph);
}

double log_bernoulli_prior(const ChangepointState& state, int length, double p) {
  double out = 0.0;
  for (int i = 0; i < state.series_count(); ++i) {
    const int k = state.k(i);
    out += k * std::log(p) + (length - 1 - k) * std::log1p(-p);
  }
  return out;
}

namespace {

BigInt binomial(long n, long r) {
  if (r < 0 || n < r) return 0;
  r = std::min(r, n - r);
  BigInt out = 1;
  for (long m = 1; m <= r; ++m) {
    out *= n - r + m;
    out /= m;
  }
  return out;
}

}  // namespace

BigInt lag_set_cardinality(int window, std::span<const int> tau, int length) {
  if (window < 0) throw DomainError("window must be non-negative");
  int prev = 1;
  for (int pos : tau) {
    if (pos <= prev || pos > length) throw DomainError("positions must satisfy 1 < tau_1 < ... <= T");
    prev = pos;
  }
  const int k = static_cast<int>(tau.size());
  if (k == 0 || window == 0) return 1;

  // 1-based view of the positions.
  auto at = [&](int j) { return tau[static_cast<std::size_t>(j - 1)]; };
  auto q = [&](int j, int l) -> BigInt {
    const int gap = at(j + l) - at(j);
    if (gap > window) return 0;
    const int rho = std::min(window + 1, length + 1 - at(j)) - gap;
    if (rho <= 0) return 0;
    return binomial(rho + l, l + 1);
  };

  std::vector<BigInt> z(static_cast<std::size_t>(k) + 1);
  z[0] = 1;
  for (int m = 1; m <= k; ++m) {
    BigInt acc = 0;
    for (int j = 1; j <= m; ++j) {
      BigInt term = z[static_cast<std::size_t>(j - 1)] * q(j, m - j);
      if ((m - j) % 2 == 0) {
        acc += term;
      } else {
        acc -= term;
      }
    }
    z[static_cast<std::size_t>(m)] = acc;
  }
  return z[static_cast<std::size_t>(k)];
}

double log_lag_set_cardinality(int window, std::span<const int> tau, int length) {
  if (tau.empty() || window == 0) return 0.0;
  const BigInt z = lag_set_cardinality(window, tau, length);
  // Fits a double for any realistic (w, k); fall back on the bit length.
  const double approx = z.convert_to<double>();
  if (std::isfinite(approx)) return std::log(approx);
  const auto bits = boost::multiprecision::msb(z);
  const BigInt top = z >> (bits - 60);
  return std::log(top.convert_to<double>()) + static_cast<double>(bits - 60) * std::log(2.0);
}

double log_joint_prior_lagged(const LaggedState& lagged, int length, double p_bar,
                              const DependencyGraph& graph) {
  lagged.validate(length);
  double out = log_mrf_prior_unnorm(lagged.latent, length, p_bar, graph);
  for (std::size_t i = 0; i < lagged.latent.tau.size(); ++i) {
    out -= log_lag_set_cardinality(lagged.windows[i], lagged.latent.tau[i], length);
  }
  return out;
}

double log_window_prior(int window, double eta) {
  if (window < 0) return -INFINITY;
  return std::log(eta) + window * std::log1p(-eta);
}

}  // namespace graphcp
