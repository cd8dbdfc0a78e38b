#include "graphcp/likelihood.hpp"

#include <cmath>
#include <numeric>

#include "graphcp/error.hpp"

namespace graphcp {

void validate_model(const ObservationModel& model, const SeriesPanel& panel) {
  if (const auto* pg = std::get_if<PoissonGamma>(&model)) {
    if (!(pg->shape > 0.0 && pg->rate > 0.0)) {
      throw ConfigError("Poisson-Gamma shape and rate must be positive");
    }
    if (panel.family() != ObservationFamily::kPoisson) {
      throw ConfigError("Poisson-Gamma model needs a count panel");
    }
    return;
  }
  const auto& md = std::get<MultinomialDirichlet>(model);
  if (panel.family() != ObservationFamily::kMultinomial) {
    throw ConfigError("multinomial-Dirichlet model needs a vector panel");
  }
  if (static_cast<int>(md.alpha.size()) != panel.categories()) {
    throw ConfigError("Dirichlet parameter length " + std::to_string(md.alpha.size()) +
                      " does not match category count " + std::to_string(panel.categories()));
  }
  for (double a : md.alpha) {
    if (!(a > 0.0)) throw ConfigError("Dirichlet parameters must be positive");
  }
}

SegmentCache::SegmentCache(const ObservationModel& model, const SeriesPanel& panel)
    : model_(model), length_(panel.length()) {
  validate_model(model, panel);
  const int T = panel.length();
  series_.resize(static_cast<std::size_t>(panel.series_count()));

  if (const auto* pg = std::get_if<PoissonGamma>(&model_)) {
    shape_log_rate_ = pg->shape * std::log(pg->rate);
    lgamma_shape_ = std::lgamma(pg->shape);
    for (int i = 0; i < panel.series_count(); ++i) {
      auto& s = series_[static_cast<std::size_t>(i)];
      s.log_factorials.assign(static_cast<std::size_t>(T) + 1, 0.0);
      s.totals.assign(static_cast<std::size_t>(T) + 1, 0);
      for (int t = 1; t <= T; ++t) {
        const auto x = panel.count(i, t);
        s.log_factorials[static_cast<std::size_t>(t)] =
            s.log_factorials[static_cast<std::size_t>(t - 1)] + std::lgamma(static_cast<double>(x) + 1.0);
        s.totals[static_cast<std::size_t>(t)] = s.totals[static_cast<std::size_t>(t - 1)] + x;
      }
    }
    return;
  }

  const auto& alpha = std::get<MultinomialDirichlet>(model_).alpha;
  alpha_sum_ = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  lgamma_alpha_sum_ = std::lgamma(alpha_sum_);
  const int M = panel.categories();
  for (int i = 0; i < panel.series_count(); ++i) {
    auto& s = series_[static_cast<std::size_t>(i)];
    std::vector<int> active;
    for (int m = 0; m < M; ++m) {
      for (int t = 1; t <= T; ++t) {
        if (panel.vector_at(i, t)[static_cast<std::size_t>(m)] > 0) {
          active.push_back(m);
          break;
        }
      }
    }
    s.log_factorials.assign(static_cast<std::size_t>(T) + 1, 0.0);
    s.totals.assign(static_cast<std::size_t>(T) + 1, 0);
    s.by_category.assign(active.size(), std::vector<std::int64_t>(static_cast<std::size_t>(T) + 1, 0));
    for (int m : active) s.alpha.push_back(alpha[static_cast<std::size_t>(m)]);
    for (int t = 1; t <= T; ++t) {
      const auto cell = panel.vector_at(i, t);
      std::int64_t n = 0;
      double log_coef = 0.0;
      for (auto x : cell) {
        n += x;
        log_coef -= std::lgamma(static_cast<double>(x) + 1.0);
      }
      log_coef += std::lgamma(static_cast<double>(n) + 1.0);
      const auto ut = static_cast<std::size_t>(t);
      s.log_factorials[ut] = s.log_factorials[ut - 1] + log_coef;
      s.totals[ut] = s.totals[ut - 1] + n;
      for (std::size_t a = 0; a < active.size(); ++a) {
        s.by_category[a][ut] =
            s.by_category[a][ut - 1] + cell[static_cast<std::size_t>(active[a])];
      }
    }
  }
}

double SegmentCache::log_segment(int i, int t1, int t2) const {
  if (t1 < 1 || t2 > length_ + 1 || t1 >= t2) {
    throw DomainError("segment [" + std::to_string(t1) + ", " + std::to_string(t2) +
                      ") is empty or outside [1, T+1]");
  }
  const auto& s = series_[static_cast<std::size_t>(i)];
  const auto a = static_cast<std::size_t>(t1 - 1);
  const auto b = static_cast<std::size_t>(t2 - 1);
  const double log_fact = s.log_factorials[b] - s.log_factorials[a];
  const auto total = static_cast<double>(s.totals[b] - s.totals[a]);

  if (const auto* pg = std::get_if<PoissonGamma>(&model_)) {
    const double n = static_cast<double>(t2 - t1);
    return std::lgamma(pg->shape + total) - lgamma_shape_ + shape_log_rate_ -
           (pg->shape + total) * std::log(pg->rate + n) - log_fact;
  }

  double out = log_fact + lgamma_alpha_sum_ - std::lgamma(alpha_sum_ + total);
  for (std::size_t m = 0; m < s.alpha.size(); ++m) {
    const auto count = static_cast<double>(s.by_category[m][b] - s.by_category[m][a]);
    if (count > 0.0) out += std::lgamma(s.alpha[m] + count) - std::lgamma(s.alpha[m]);
  }
  return out;
}

double log_segment_lik(const ObservationModel& /*model*/, const SegmentCache& cache, int i,
                       int t1, int t2) {
  return cache.log_segment(i, t1, t2);
}

double log_lik_series(const SegmentCache& cache, int i, const std::vector<int>& positions) {
  double out = 0.0;
  int prev = 1;
  for (int pos : positions) {
    out += cache.log_segment(i, prev, pos);
    prev = pos;
  }
  return out + cache.log_segment(i, prev, cache.length() + 1);
}

double log_lik_full(const ObservationModel& /*model*/, const SegmentCache& cache,
                    const ChangepointState& state) {
  state.validate(cache.length());
  double out = 0.0;
  for (int i = 0; i < state.series_count(); ++i) {
    out += log_lik_series(cache, i, state.tau[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace graphcp
