#include "graphcp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphcp/error.hpp"

namespace graphcp {

namespace {

// rows <= cols. Classic O(rows^2 cols) shortest augmenting path with
// row/column potentials, 1-based internally.
std::vector<int> assign_rows(const std::vector<std::vector<double>>& a, std::size_t n,
                             std::size_t m) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  return row_to_col;
}

}  // namespace

std::vector<int> hungarian_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t rows = cost.size();
  if (rows == 0) return {};
  const std::size_t cols = cost.front().size();
  for (const auto& row : cost) {
    if (row.size() != cols) throw DomainError("cost matrix rows differ in length");
  }
  if (cols == 0) return std::vector<int>(rows, -1);
  if (rows <= cols) return assign_rows(cost, rows, cols);
  std::vector<std::vector<double>> transposed(cols, std::vector<double>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) transposed[j][i] = cost[i][j];
  }
  const auto col_to_row = assign_rows(transposed, cols, rows);
  std::vector<int> out(rows, -1);
  for (std::size_t j = 0; j < cols; ++j) {
    out[static_cast<std::size_t>(col_to_row[j])] = static_cast<int>(j);
  }
  return out;
}

double matching_loss(std::span<const int> estimate, std::span<const int> truth, double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  const std::size_t n = truth.size() + 1;
  const std::size_t m = estimate.size() + 1;
  auto at = [](std::span<const int> tau, std::size_t j) { return j == 0 ? 1 : tau[j - 1]; };
  std::vector<std::vector<double>> cost(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cost[i][j] = std::min(gamma, static_cast<double>(std::abs(at(truth, i) - at(estimate, j))));
    }
  }
  const auto assignment = hungarian_assignment(cost);
  double loss = gamma * static_cast<double>(n > m ? n - m : m - n);
  for (std::size_t i = 0; i < n; ++i) {
    if (assignment[i] >= 0) loss += cost[i][static_cast<std::size_t>(assignment[i])];
  }
  return loss;
}

double expected_loss(const StateHistogram& histogram, std::span<const int> candidate,
                     double gamma) {
  double total = 0.0;
  std::uint64_t count = 0;
  for (const auto& [state, n] : histogram) {
    total += static_cast<double>(n) * matching_loss(candidate, state, gamma);
    count += n;
  }
  if (count == 0) throw DomainError("expected loss over an empty sample");
  return total / static_cast<double>(count);
}

double expected_loss(const PosteriorSample& sample, int series, std::span<const int> candidate,
                     double gamma) {
  return expected_loss(sample.series_histogram(series), candidate, gamma);
}

std::vector<int> bayes_estimate(const StateHistogram& histogram, double gamma) {
  if (histogram.empty()) throw DomainError("Bayes estimate of an empty sample");
  // Totals are compared unnormalised so that integer-valued losses compare
  // exactly.
  std::size_t best = 0;
  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < histogram.size(); ++c) {
    double total = 0.0;
    for (const auto& [state, n] : histogram) {
      total += static_cast<double>(n) * matching_loss(histogram[c].first, state, gamma);
      if (total > best_total) break;
    }
    const auto& cand = histogram[c].first;
    const auto& incumbent = histogram[best].first;
    const bool better =
        total < best_total ||
        (total == best_total &&
         (cand.size() < incumbent.size() || (cand.size() == incumbent.size() && cand < incumbent)));
    if (better) {
      best = c;
      best_total = total;
    }
  }
  return histogram[best].first;
}

std::vector<int> bayes_estimate(const PosteriorSample& sample, int series, double gamma) {
  if (series < 0 || series >= sample.series_count) throw DomainError("series out of range");
  if (sample.draw_count() == 0) throw DomainError("Bayes estimate of an empty sample");
  return bayes_estimate(sample.series_histogram(series), gamma);
}

MarginalSummary marginal_summaries(const PosteriorSample& sample) {
  const std::uint64_t draws = sample.draw_count();
  if (draws == 0) throw DomainError("marginal summaries of an empty sample");
  const auto L = static_cast<std::size_t>(sample.series_count);
  const int T = sample.length;
  std::vector<std::vector<std::uint64_t>> k_counts(L);
  std::vector<std::vector<std::uint64_t>> s_counts(
      L, std::vector<std::uint64_t>(static_cast<std::size_t>(std::max(T - 1, 0)), 0));
  std::size_t max_k = 0;
  for (const auto& run : sample.runs) {
    const auto derived = sample.derived(run);
    for (std::size_t i = 0; i < L; ++i) {
      const auto& tau = derived.tau[i];
      if (k_counts[i].size() <= tau.size()) k_counts[i].resize(tau.size() + 1, 0);
      k_counts[i][tau.size()] += run.count;
      max_k = std::max(max_k, tau.size());
      for (int t : tau) s_counts[i][static_cast<std::size_t>(t - 2)] += run.count;
    }
  }
  MarginalSummary out;
  const double total = static_cast<double>(draws);
  out.k_probs.assign(L, std::vector<double>(max_k + 1, 0.0));
  out.s_probs.assign(L, std::vector<double>(s_counts.empty() ? 0 : s_counts[0].size(), 0.0));
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t m = 0; m < k_counts[i].size(); ++m) {
      out.k_probs[i][m] = static_cast<double>(k_counts[i][m]) / total;
    }
    for (std::size_t t = 0; t < s_counts[i].size(); ++t) {
      out.s_probs[i][t] = static_cast<double>(s_counts[i][t]) / total;
    }
  }
  return out;
}

}  // namespace graphcp
