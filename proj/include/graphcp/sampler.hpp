#pragma once

// Reversible-jump MCMC over (k, latent positions, lags, windows) augmented with
// bond variables u and the partial-decoupling parameter delta.
//
// Target (up to a constant):
//   pi(delta) * pi(u | S~, delta) * exp(MRF(S~)) * prod_i |D(w_i, k_i, latent_i)|^{-1}
//   * prod_i pi(w_i) * prod_i L_i(derived segments)
//
// Moves: cluster birth/death, cluster shift, (delta, u) refresh, single-lag
// Gibbs update, and window update. Each random move draws from the chain's
// single Rng in a fixed order:
//   step:         move selector
//   birth/death:  column t', cluster, one lag per cluster member (birth only,
//                 skipped when the feasible range is a single value), accept U
//   shift:        active column t, cluster, target t', one lag per member,
//                 accept U, then fresh bonds at t (accepted moves only)
//   aux update:   spike/Beta draws for delta, then bonds column by column
//   lag update:   changepoint index, lag
//   window:       series, step size, direction, lags j = 1..k, accept U

#include <array>
#include <cstdint>
#include <utility>
#include <cmath>
#include <vector>

#include "graphcp/auxiliary.hpp"
#include "graphcp/likelihood.hpp"
#include "graphcp/model.hpp"
#include "graphcp/posterior.hpp"
#include "graphcp/rng.hpp"

namespace graphcp {

struct MoveWeights {
  double birth_death = 0.4;
  double shift = 0.3;
  double aux = 0.2;
  double lag = 0.05;
  double window = 0.05;
};

enum class InitStrategy { kCold, kIndependentFit };

struct SamplerConfig {
  std::uint64_t iterations = 50000;
  std::uint64_t burn_in = 10000;
  std::uint64_t thin = 1;
  MoveWeights weights;
  double rho = 0.5;  // window step ~ Geometric(rho) on {1, 2, ...}
  std::uint64_t seed = 1;
  InitStrategy init = InitStrategy::kCold;
  // Length of the per-series independent chain used by kIndependentFit.
  std::uint64_t init_iterations = 20000;
  std::uint64_t init_burn_in = 5000;
  // Keep lag/window/aux moves in the mixture even when they cannot act (lag
  // and window moves are then counted as skipped) instead of handing their
  // mass to birth/death.
  bool keep_idle_moves = false;

  void validate() const;
};

/// Move probabilities in MoveType order; the mass of disabled lag, window or
/// aux moves (aux is disabled on a graph without edges) goes to birth/death.
std::array<double, kMoveTypeCount> effective_move_weights(const MoveWeights& weights,
                                                          bool lags_enabled,
                                                          bool windows_enabled,
                                                          bool aux_enabled = true);

class ChangepointSampler {
 public:
  ChangepointSampler(const SeriesPanel& panel, const ObservationModel& model,
                     const DependencyGraph& graph, const Hyperparameters& hyper,
                     const SamplerConfig& config);

  /// Resets the chain to `state` with an empty bond field and the given delta.
  void initialize(const LaggedState& state, double delta = 0.0);

  MoveType step(MoveOutcome* outcome = nullptr);

  MoveOutcome move_birth_death();
  MoveOutcome move_shift();
  MoveOutcome move_aux_update();
  MoveOutcome move_lag_update();
  MoveOutcome move_window_update();

  // Proposals with the random selections fixed. `cluster` indexes clusters_at(t)
  // for birth/death and the all-changepoint clusters at t for shift. `force`
  // applies the proposal regardless of the acceptance draw (tests only).
  MoveOutcome birth_death_at(int t, std::size_t cluster, bool force = false);
  MoveOutcome shift_at(int t, std::size_t cluster, int target, bool force = false);

  /// log acceptance ratio of the most recent proposal.
  double last_log_ratio() const { return last_log_ratio_; }

  int series_count() const { return series_; }
  int length() const { return length_; }
  LaggedState lagged_state() const;
  ChangepointState derived_state() const;
  const AuxiliaryField& aux() const { return aux_; }
  void set_aux(const AuxiliaryField& aux);
  double delta() const { return aux_.delta(); }
  bool latent_at(int i, int t) const { return col(t, i); }
  /// Feasible lag range {lo..hi} of the j-th changepoint of series i given the
  /// other current positions.
  std::pair<int, int> lag_range(int i, int j) const;
  std::vector<std::vector<int>> clusters(int t) const { return clusters_at(aux_, t); }

  double log_likelihood() const;
  double recompute_log_likelihood() const;
  /// Unnormalised log density of the augmented state (delta prior excluded).
  double log_target() const;
  /// Throws std::logic_error when a cached quantity or a state invariant is off.
  void check_invariants() const;

  /// Incremented on every change to (latent, lags, windows).
  std::uint64_t version() const { return version_; }
  const std::array<double, kMoveTypeCount>& move_weights() const { return weights_; }
  Rng& rng() { return rng_; }

 private:
  struct LagChoice {
    int lo = 0;
    int hi = -1;
    std::vector<double> log_weight;
    double log_norm = 0.0;
    bool empty() const { return lo > hi; }
    double log_prob(int d) const {
      if (d < lo || d > hi) return -INFINITY;
      return log_weight[static_cast<std::size_t>(d - lo)] - log_norm;
    }
  };

  bool col(int t, int i) const {
    return cells_[static_cast<std::size_t>(t) * static_cast<std::size_t>(series_) +
                  static_cast<std::size_t>(i)] != 0;
  }
  void set_col(int t, int i, bool on);
  int derived_at(int i, int j) const;
  int prev_derived(int i, int j) const;
  int next_derived(int i, int j) const;
  double seg(int i, int t1, int t2) const { return cache_.log_segment(i, t1, t2); }
  LagChoice lag_choice(int i, int latent_pos, int prev_pos, int next_pos, int window) const;
  int draw_lag(const LagChoice& choice);
  double log_card(int i, const std::vector<int>& latent, int window) const;
  bool accept(double log_ratio, bool force);

  int series_;
  int length_;
  SegmentCache cache_;
  DependencyGraph graph_;
  Hyperparameters hyper_;
  SamplerConfig config_;
  Rng rng_;
  std::array<double, kMoveTypeCount> weights_{};
  bool lags_enabled_ = false;
  bool windows_enabled_ = false;
  std::vector<int> geometric_series_;

  std::vector<std::vector<int>> latent_;
  std::vector<std::vector<int>> lags_;
  std::vector<int> windows_;
  std::vector<std::uint8_t> cells_;  // latent S, [t][i]
  std::vector<int> column_count_;
  std::vector<int> active_;          // columns with at least one latent changepoint
  std::vector<int> active_slot_;
  AuxiliaryField aux_;
  std::vector<double> series_loglik_;
  std::vector<double> series_logcard_;

  std::vector<int> labels_;
  std::vector<int> labels2_;
  double last_log_ratio_ = 0.0;
  std::uint64_t version_ = 0;
};

/// Per-series Bayes estimates under the independence model (no edges), used
/// to seed a chain.
ChangepointState independent_fit(const SeriesPanel& panel, const ObservationModel& model,
                                 const Hyperparameters& hyper, const SamplerConfig& config);

/// Runs burn_in + iterations moves and stores every thin-th post-burn-in
/// state (derived positions plus lags and windows).
PosteriorSample run_chain(const SeriesPanel& panel, const ObservationModel& model,
                          const DependencyGraph& graph, const Hyperparameters& hyper,
                          const SamplerConfig& config);

std::string to_string(InitStrategy init);
InitStrategy init_strategy_from_string(const std::string& name);

}  // namespace graphcp
