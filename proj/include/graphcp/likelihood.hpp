#pragma once

// Conjugate segment marginal likelihoods with O(1)-per-segment lookups.

#include <variant>
#include <vector>

#include "graphcp/model.hpp"

namespace graphcp {

/// Poisson counts with a Gamma(shape, rate) prior on the rate; prior mean is
/// shape / rate.
struct PoissonGamma {
  double shape = 1.0;
  double rate = 1.0;
};

/// Multinomial count vectors with a Dirichlet(alpha) prior on the cell
/// probabilities.
struct MultinomialDirichlet {
  std::vector<double> alpha;
};

using ObservationModel = std::variant<PoissonGamma, MultinomialDirichlet>;

void validate_model(const ObservationModel& model, const SeriesPanel& panel);

/// Per-series prefix sums of the segment sufficient statistics.
///
/// For the multinomial family only the categories a series actually uses are
/// stored; unused categories contribute exactly zero to the log marginal.
/// Immutable after construction.
class SegmentCache {
 public:
  SegmentCache(const ObservationModel& model, const SeriesPanel& panel);

  int series_count() const { return static_cast<int>(series_.size()); }
  int length() const { return length_; }
  const ObservationModel& model() const { return model_; }

  /// log L_i(t1, t2) for the data at times t1..t2-1; 1 <= t1 < t2 <= T+1.
  double log_segment(int i, int t1, int t2) const;

 private:
  struct Series {
    std::vector<double> log_factorials;         // prefix of per-cell log terms
    std::vector<std::int64_t> totals;           // prefix of cell totals
    std::vector<double> alpha;                  // active categories only
    std::vector<std::vector<std::int64_t>> by_category;  // [m][t] prefix
  };

  ObservationModel model_;
  int length_ = 0;
  double alpha_sum_ = 0.0;
  double lgamma_alpha_sum_ = 0.0;
  double shape_log_rate_ = 0.0;
  double lgamma_shape_ = 0.0;
  std::vector<Series> series_;
};

double log_segment_lik(const ObservationModel& model, const SegmentCache& cache, int i, int t1,
                       int t2);

/// Sum over series and segments of log L_i(tau_{j-1}, tau_j).
double log_lik_full(const ObservationModel& model, const SegmentCache& cache,
                    const ChangepointState& state);

/// log L for one series' positions.
double log_lik_series(const SegmentCache& cache, int i, const std::vector<int>& positions);

}  // namespace graphcp
