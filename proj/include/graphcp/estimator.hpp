#pragma once

// Matching loss between changepoint configurations of one series and the
// Bayes estimate that minimises its posterior expectation over drawn states.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "graphcp/posterior.hpp"

namespace graphcp {

/// Minimum-cost assignment on a dense rows x cols matrix (Kuhn-Munkres with
/// potentials). Every row is assigned when rows <= cols, every column
/// otherwise. Returns the column of each row, or -1 for an unassigned row.
std::vector<int> hungarian_assignment(const std::vector<std::vector<double>>& cost);

/// gamma * |k_hat - k| + total weight of a minimum-weight maximum matching
/// between {1, tau_1..tau_k} and {1, tau_hat_1..tau_hat_k_hat} with pair
/// weights min(gamma, |tau - tau_hat|). Each matched pair is counted once.
double matching_loss(std::span<const int> estimate, std::span<const int> truth, double gamma);

using StateHistogram = std::vector<std::pair<std::vector<int>, std::uint64_t>>;

/// Mean loss of `candidate` against the draws of series i.
double expected_loss(const PosteriorSample& sample, int series, std::span<const int> candidate,
                     double gamma);
double expected_loss(const StateHistogram& histogram, std::span<const int> candidate,
                     double gamma);

/// Drawn state of series i with the least expected loss; ties go to fewer
/// changepoints, then to the lexicographically smaller positions.
std::vector<int> bayes_estimate(const PosteriorSample& sample, int series, double gamma);
std::vector<int> bayes_estimate(const StateHistogram& histogram, double gamma);

struct MarginalSummary {
  /// k_probs[i][m] = P(k_i = m), m = 0..max drawn k over all series.
  std::vector<std::vector<double>> k_probs;
  /// s_probs[i][t - 2] = P(S_{i,t} = 1) for derived positions, t = 2..T.
  std::vector<std::vector<double>> s_probs;
};

MarginalSummary marginal_summaries(const PosteriorSample& sample);

}  // namespace graphcp
