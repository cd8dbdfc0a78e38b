#pragma once

// Changepoint priors: the column-wise Markov random field over S, the uniform
// lag prior with its exact cardinality, and the geometric window prior.

#include <span>

#include <boost/multiprecision/cpp_int.hpp>

#include "graphcp/model.hpp"

namespace graphcp {

using BigInt = boost::multiprecision::cpp_int;

/// sum_t [ p_bar * sum_i S(i,t) + sum_{i<i'} lambda(i,i') S(i,t) S(i',t) ].
/// The normalising constant log Z(p, lambda) is not included.
double log_mrf_prior_unnorm(const ChangepointState& state, int length, double p_bar,
                            const DependencyGraph& graph);
double log_mrf_prior_unnorm(const BinaryMatrix& matrix, double p_bar,
                            const DependencyGraph& graph);

/// Log-odds of S(i,t) = 1 given every other cell:
/// p_bar + sum over neighbours i' of lambda(i,i') S(i',t).
double log_full_conditional_prior(int i, int t, const BinaryMatrix& matrix, double p_bar,
                                  const DependencyGraph& graph);
double log_full_conditional_prior(int i, int t, const ChangepointState& state, int length,
                                  double p_bar, const DependencyGraph& graph);

/// Independent Bernoulli(p) prior: sum_i [k_i log p + (T-1-k_i) log(1-p)].
double log_bernoulli_prior(const ChangepointState& state, int length, double p);

/// Number of lag vectors d in {0..w}^k keeping tau + d strictly increasing
/// and below T+1, via the alternating recursion
///   Z(0) = 1,  Z(k) = sum_{j=1}^{k} (-1)^{k-j} Z(j-1) Q(j, k-j),
/// with Q(j, l) = C(rho(j,l) + l, l + 1) when tau_{j+l} - tau_j <= w and
/// rho(j,l) = min(w+1, T+1-tau_j) - (tau_{j+l} - tau_j) > 0, otherwise 0.
/// Exact integer arithmetic throughout.
BigInt lag_set_cardinality(int window, std::span<const int> tau, int length);
double log_lag_set_cardinality(int window, std::span<const int> tau, int length);

/// log pi(k, latent, d | p, lambda, w) up to log Z(p, lambda): the MRF term on
/// the latent matrix minus sum_i log |D(w_i, k_i, latent_i)|.
double log_joint_prior_lagged(const LaggedState& lagged, int length, double p_bar,
                              const DependencyGraph& graph);

/// log[eta (1-eta)^w], support w >= 0.
double log_window_prior(int window, double eta);

}  // namespace graphcp
