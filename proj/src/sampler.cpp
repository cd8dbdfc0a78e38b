#include "graphcp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "graphcp/error.hpp"
#include "graphcp/estimator.hpp"
#include "graphcp/prior.hpp"

namespace graphcp {

namespace {

constexpr double kCacheTolerance = 1e-8;

}  // namespace

void SamplerConfig::validate() const {
  if (iterations == 0) throw ConfigError("sampler.iterations must be positive");
  if (thin == 0) throw ConfigError("sampler.thin must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("sampler.rho must lie in (0, 1)");
  const double w[] = {weights.birth_death, weights.shift, weights.aux, weights.lag,
                      weights.window};
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw ConfigError("sampler.move_weights must be finite and non-negative");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("sampler.move_weights must sum to 1");
  if (weights.birth_death <= 0.0) {
    throw ConfigError("sampler.move_weights.birth_death must be positive");
  }
  if (init == InitStrategy::kIndependentFit && init_iterations == 0) {
    throw ConfigError("sampler.init_iterations must be positive for independent-fit");
  }
}

std::array<double, kMoveTypeCount> effective_move_weights(const MoveWeights& weights,
                                                          bool lags_enabled,
                                                          bool windows_enabled,
                                                          bool aux_enabled) {
  std::array<double, kMoveTypeCount> out{weights.birth_death, weights.shift, weights.aux,
                                         weights.lag, weights.window};
  if (!aux_enabled) {
    out[0] += out[2];
    out[2] = 0.0;
  }
  if (!lags_enabled) {
    out[0] += out[3];
    out[3] = 0.0;
  }
  if (!windows_enabled) {
    out[0] += out[4];
    out[4] = 0.0;
  }
  return out;
}

ChangepointSampler::ChangepointSampler(const SeriesPanel& panel, const ObservationModel& model,
                                       const DependencyGraph& graph, const Hyperparameters& hyper,
                                       const SamplerConfig& config)
    : series_(panel.series_count()),
      length_(panel.length()),
      cache_(model, panel),
      graph_(graph),
      hyper_(hyper),
      config_(config),
      rng_(config.seed) {
  config_.validate();
  hyper_.validate(series_);
  if (graph_.node_count() != series_) {
    throw ConfigError("graph has " + std::to_string(graph_.node_count()) +
                      " nodes but the panel has " + std::to_string(series_) + " series");
  }
  graph_.edges();  // build adjacency before any const access
  for (int i = 0; i < series_; ++i) {
    const auto& wp = hyper_.window(i);
    if (wp.mode != WindowMode::kZero && !(wp.mode == WindowMode::kFixed && wp.fixed == 0)) {
      lags_enabled_ = true;
    }
    if (wp.mode == WindowMode::kGeometric) geometric_series_.push_back(i);
  }
  windows_enabled_ = !geometric_series_.empty();
  weights_ = effective_move_weights(config_.weights, lags_enabled_ || config_.keep_idle_moves,
                                    windows_enabled_ || config_.keep_idle_moves,
                                    !graph_.edges().empty() || config_.keep_idle_moves);
  LaggedState empty(ChangepointState{series_});
  empty.windows.clear();
  initialize(empty);
}

void ChangepointSampler::initialize(const LaggedState& input, double delta) {
  if (input.series_count() != series_) {
    throw InvalidStateError("initial state has " + std::to_string(input.series_count()) +
                            " series, expected " + std::to_string(series_));
  }
  LaggedState state = input;
  if (state.lags.empty()) {
    state.lags.resize(static_cast<std::size_t>(series_));
    for (int i = 0; i < series_; ++i) {
      state.lags[static_cast<std::size_t>(i)].assign(
          static_cast<std::size_t>(state.latent.k(i)), 0);
    }
  }
  if (state.windows.empty()) {
    state.windows.assign(static_cast<std::size_t>(series_), 0);
    for (int i = 0; i < series_; ++i) {
      if (hyper_.window(i).mode == WindowMode::kFixed) {
        state.windows[static_cast<std::size_t>(i)] = hyper_.window(i).fixed;
      }
    }
  }
  state.validate(length_);
  for (int i = 0; i < series_; ++i) {
    const auto& wp = hyper_.window(i);
    const int w = state.windows[static_cast<std::size_t>(i)];
    if ((wp.mode == WindowMode::kZero && w != 0) ||
        (wp.mode == WindowMode::kFixed && w != wp.fixed)) {
      throw InvalidLagError("window of series " + std::to_string(i + 1) +
                            " does not match its window prior");
    }
  }
  if (delta < 0.0 || !std::isfinite(delta)) throw DomainError("delta must be >= 0");

  latent_ = state.latent.tau;
  lags_ = state.lags;
  windows_ = state.windows;
  cells_.assign(static_cast<std::size_t>(length_ + 2) * static_cast<std::size_t>(series_), 0);
  column_count_.assign(static_cast<std::size_t>(length_ + 2), 0);
  active_.clear();
  active_slot_.assign(static_cast<std::size_t>(length_ + 2), -1);
  for (int i = 0; i < series_; ++i) {
    for (int t : latent_[static_cast<std::size_t>(i)]) set_col(t, i, true);
  }
  aux_ = AuxiliaryField(graph_, length_);
  aux_.set_delta(delta);
  series_loglik_.assign(static_cast<std::size_t>(series_), 0.0);
  series_logcard_.assign(static_cast<std::size_t>(series_), 0.0);
  const auto derived = derive_positions(state, length_);
  for (int i = 0; i < series_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    series_loglik_[u] = log_lik_series(cache_, i, derived.tau[u]);
    series_logcard_[u] = log_card(i, latent_[u], windows_[u]);
  }
  ++version_;
}

void ChangepointSampler::set_col(int t, int i, bool on) {
  auto& cell = cells_[static_cast<std::size_t>(t) * static_cast<std::size_t>(series_) +
                      static_cast<std::size_t>(i)];
  if ((cell != 0) == on) return;
  cell = on ? 1 : 0;
  auto& count = column_count_[static_cast<std::size_t>(t)];
  if (on) {
    if (count++ == 0) {
      active_slot_[static_cast<std::size_t>(t)] = static_cast<int>(active_.size());
      active_.push_back(t);
    }
  } else if (--count == 0) {
    const int slot = active_slot_[static_cast<std::size_t>(t)];
    const int last = active_.back();
    active_[static_cast<std::size_t>(slot)] = last;
    active_slot_[static_cast<std::size_t>(last)] = slot;
    active_.pop_back();
    active_slot_[static_cast<std::size_t>(t)] = -1;
  }
}

int ChangepointSampler::derived_at(int i, int j) const {
  const auto u = static_cast<std::size_t>(i);
  return latent_[u][static_cast<std::size_t>(j)] + lags_[u][static_cast<std::size_t>(j)];
}

int ChangepointSampler::prev_derived(int i, int j) const {
  return j == 0 ? 1 : derived_at(i, j - 1);
}

int ChangepointSampler::next_derived(int i, int j) const {
  return j + 1 >= static_cast<int>(latent_[static_cast<std::size_t>(i)].size())
             ? length_ + 1
             : derived_at(i, j + 1);
}

ChangepointSampler::LagChoice ChangepointSampler::lag_choice(int i, int latent_pos,
                                                             int prev_pos, int next_pos,
                                                             int window) const {
  LagChoice choice;
  choice.lo = std::max(0, prev_pos + 1 - latent_pos);
  choice.hi = std::min(window, next_pos - 1 - latent_pos);
  if (choice.empty()) return choice;
  choice.log_weight.reserve(static_cast<std::size_t>(choice.hi - choice.lo + 1));
  for (int d = choice.lo; d <= choice.hi; ++d) {
    const int x = latent_pos + d;
    choice.log_weight.push_back(seg(i, prev_pos, x) + seg(i, x, next_pos));
  }
  choice.log_norm = log_sum_exp(choice.log_weight);
  return choice;
}

std::pair<int, int> ChangepointSampler::lag_range(int i, int j) const {
  const auto u = static_cast<std::size_t>(i);
  if (j < 0 || j >= static_cast<int>(latent_[u].size())) throw DomainError("no such changepoint");
  const int x = latent_[u][static_cast<std::size_t>(j)];
  return {std::max(0, prev_derived(i, j) + 1 - x),
          std::min(windows_[u], next_derived(i, j) - 1 - x)};
}

int ChangepointSampler::draw_lag(const LagChoice& choice) {
  if (choice.lo == choice.hi) return choice.lo;
  return choice.lo + static_cast<int>(rng_.categorical_log(choice.log_weight));
}

double ChangepointSampler::log_card(int /*i*/, const std::vector<int>& latent,
                                    int window) const {
  if (window == 0 || latent.empty()) return 0.0;
  return log_lag_set_cardinality(window, latent, length_);
}

bool ChangepointSampler::accept(double log_ratio, bool force) {
  last_log_ratio_ = log_ratio;
  if (force) return true;
  return std::log(rng_.uniform()) < log_ratio;
}

MoveType ChangepointSampler::step(MoveOutcome* outcome) {
  const double u = rng_.uniform();
  double acc = 0.0;
  std::size_t pick = 0;
  for (std::size_t m = 0; m < kMoveTypeCount; ++m) {
    if (weights_[m] <= 0.0) continue;
    pick = m;
    acc += weights_[m];
    if (u < acc) break;
  }
  const auto type = static_cast<MoveType>(pick);
  MoveOutcome result = MoveOutcome::kSkipped;
  switch (type) {
    case MoveType::kBirthDeath:
      result = move_birth_death();
      break;
    case MoveType::kShift:
      result = move_shift();
      break;
    case MoveType::kAuxUpdate:
      result = move_aux_update();
      break;
    case MoveType::kLagUpdate:
      result = move_lag_update();
      break;
    case MoveType::kWindowUpdate:
      result = move_window_update();
      break;
  }
  if (outcome != nullptr) *outcome = result;
  return type;
}

MoveOutcome ChangepointSampler::move_birth_death() {
  const int t = rng_.integer(2, length_);
  const int count = cluster_labels(aux_, t, labels_);
  const auto cluster = rng_.index(static_cast<std::size_t>(count));
  return birth_death_at(t, cluster, false);
}

MoveOutcome ChangepointSampler::birth_death_at(int t, std::size_t cluster, bool force) {
  if (t < 2 || t > length_) throw DomainError("birth/death column outside {2..T}");
  const int count = cluster_labels(aux_, t, labels_);
  if (cluster >= static_cast<std::size_t>(count)) throw DomainError("no such cluster");
  std::vector<int> members;
  for (int i = 0; i < series_; ++i) {
    if (labels_[static_cast<std::size_t>(i)] == static_cast<int>(cluster)) members.push_back(i);
  }
  const bool birth = !col(t, members.front());
  const double sign = birth ? 1.0 : -1.0;
  const double delta = aux_.delta();

  // Prior and bond-compatibility terms on column t.
  double log_ratio = sign * hyper_.p_bar * static_cast<double>(members.size());
  for (int i : members) {
    for (const auto& nb : graph_.neighbors(i)) {
      if (labels_[static_cast<std::size_t>(nb.node)] == static_cast<int>(cluster)) {
        if (nb.node > i) log_ratio += sign * nb.weight;
        continue;
      }
      const bool other = col(t, nb.node);
      if (other) log_ratio += sign * nb.weight;
      // q = exp(-delta * lambda * [equal]) on the u = 0 boundary pair
      const bool equal_before = other == !birth;
      const bool equal_after = other == birth;
      log_ratio += delta * nb.weight *
                   (static_cast<double>(equal_before) - static_cast<double>(equal_after));
    }
  }

  struct Change {
    int i;
    int j;
    int lag;
    double loglik;
    double logcard;
  };
  std::vector<Change> changes;
  changes.reserve(members.size());
  for (int i : members) {
    const auto u = static_cast<std::size_t>(i);
    const auto& tau = latent_[u];
    const int w = windows_[u];
    if (birth) {
      const int j = static_cast<int>(std::lower_bound(tau.begin(), tau.end(), t) - tau.begin());
      const int prev = j == 0 ? 1 : derived_at(i, j - 1);
      const int next = j == static_cast<int>(tau.size()) ? length_ + 1 : derived_at(i, j);
      const auto choice = lag_choice(i, t, prev, next, w);
      if (choice.empty()) {
        last_log_ratio_ = -INFINITY;
        return MoveOutcome::kInvalid;
      }
      const int d = draw_lag(choice);
      const int x = t + d;
      const double dll = seg(i, prev, x) + seg(i, x, next) - seg(i, prev, next);
      std::vector<int> latent = tau;
      latent.insert(latent.begin() + j, t);
      const double card = log_card(i, latent, w);
      log_ratio += dll - (card - series_logcard_[u]) - choice.log_prob(d);
      changes.push_back({i, j, d, series_loglik_[u] + dll, card});
    } else {
      const int j = static_cast<int>(std::lower_bound(tau.begin(), tau.end(), t) - tau.begin());
      const int d = lags_[u][static_cast<std::size_t>(j)];
      const int x = t + d;
      const int prev = prev_derived(i, j);
      const int next = next_derived(i, j);
      const double dll = seg(i, prev, next) - seg(i, prev, x) - seg(i, x, next);
      std::vector<int> latent = tau;
      latent.erase(latent.begin() + j);
      const double card = log_card(i, latent, w);
      const auto reverse = lag_choice(i, t, prev, next, w);
      log_ratio += dll - (card - series_logcard_[u]) + reverse.log_prob(d);
      changes.push_back({i, j, d, series_loglik_[u] + dll, card});
    }
  }

  if (!accept(log_ratio, force)) return MoveOutcome::kRejected;
  for (const auto& c : changes) {
    const auto u = static_cast<std::size_t>(c.i);
    if (birth) {
      latent_[u].insert(latent_[u].begin() + c.j, t);
      lags_[u].insert(lags_[u].begin() + c.j, c.lag);
    } else {
      latent_[u].erase(latent_[u].begin() + c.j);
      lags_[u].erase(lags_[u].begin() + c.j);
    }
    set_col(t, c.i, birth);
    series_loglik_[u] = c.loglik;
    series_logcard_[u] = c.logcard;
  }
  ++version_;
  return MoveOutcome::kAccepted;
}

MoveOutcome ChangepointSampler::move_shift() {
  if (active_.empty()) return MoveOutcome::kSkipped;
  const int t = active_[rng_.index(active_.size())];
  const int count = cluster_labels(aux_, t, labels_);
  std::vector<int> eligible;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(count), 0);
  for (int i = 0; i < series_; ++i) {
    const int label = labels_[static_cast<std::size_t>(i)];
    if (col(t, i) && seen[static_cast<std::size_t>(label)] == 0) {
      seen[static_cast<std::size_t>(label)] = 1;
      eligible.push_back(label);
    }
  }
  const auto cluster = rng_.index(eligible.size());
  // Intersected latent window of the cluster.
  int lo = 2;
  int hi = length_;
  for (int i = 0; i < series_; ++i) {
    if (labels_[static_cast<std::size_t>(i)] != eligible[cluster]) continue;
    const auto& tau = latent_[static_cast<std::size_t>(i)];
    const auto j = static_cast<std::size_t>(std::lower_bound(tau.begin(), tau.end(), t) -
                                            tau.begin());
    lo = std::max(lo, j == 0 ? 2 : tau[j - 1] + 1);
    hi = std::min(hi, j + 1 == tau.size() ? length_ : tau[j + 1] - 1);
  }
  const int target = lo == hi ? t : rng_.integer(lo, hi);
  return shift_at(t, cluster, target, false);
}

MoveOutcome ChangepointSampler::shift_at(int t, std::size_t cluster, int target, bool force) {
  if (t < 2 || t > length_ || column_count_[static_cast<std::size_t>(t)] == 0) {
    throw DomainError("shift source column has no changepoints");
  }
  const int count = cluster_labels(aux_, t, labels_);
  std::vector<int> eligible;
  {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(count), 0);
    for (int i = 0; i < series_; ++i) {
      const int label = labels_[static_cast<std::size_t>(i)];
      if (col(t, i) && seen[static_cast<std::size_t>(label)] == 0) {
        seen[static_cast<std::size_t>(label)] = 1;
        eligible.push_back(label);
      }
    }
  }
  if (cluster >= eligible.size()) throw DomainError("no such changepoint cluster");
  const int label = eligible[cluster];
  std::vector<int> members;
  std::vector<std::uint8_t> in_cluster(static_cast<std::size_t>(series_), 0);
  for (int i = 0; i < series_; ++i) {
    if (labels_[static_cast<std::size_t>(i)] == label) {
      members.push_back(i);
      in_cluster[static_cast<std::size_t>(i)] = 1;
    }
  }
  std::vector<int> index(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto& tau = latent_[static_cast<std::size_t>(members[m])];
    index[m] = static_cast<int>(std::lower_bound(tau.begin(), tau.end(), t) - tau.begin());
    const int prev = index[m] == 0 ? 1 : tau[static_cast<std::size_t>(index[m] - 1)];
    const int next = index[m] + 1 == static_cast<int>(tau.size())
                         ? length_ + 1
                         : tau[static_cast<std::size_t>(index[m] + 1)];
    if (target <= prev || target >= next) throw DomainError("shift target outside window");
  }
  if (target == t) {
    last_log_ratio_ = 0.0;
    return MoveOutcome::kAccepted;
  }

  const double delta = aux_.delta();
  double log_ratio = 0.0;
  for (int i : members) {
    for (const auto& nb : graph_.neighbors(i)) {
      if (in_cluster[static_cast<std::size_t>(nb.node)] != 0) continue;
      const bool at_source = col(t, nb.node);
      const bool at_target = col(target, nb.node);
      log_ratio += nb.weight * (static_cast<double>(at_target) - static_cast<double>(at_source));
      if (at_source) log_ratio += delta * nb.weight;
      if (at_target) log_ratio -= delta * nb.weight;
    }
  }

  // Selection probabilities of (column, cluster) forward and in reverse.
  const int active_now = static_cast<int>(active_.size());
  const int column_size = column_count_[static_cast<std::size_t>(t)];
  const int active_after = active_now - (column_size == static_cast<int>(members.size()) ? 1 : 0) +
                           (column_count_[static_cast<std::size_t>(target)] == 0 ? 1 : 0);
  const int target_clusters = cluster_labels(aux_, target, labels2_);
  int eligible_target = 0;
  {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(target_clusters), 0);
    for (int i = 0; i < series_; ++i) {
      const int l = labels2_[static_cast<std::size_t>(i)];
      if (col(target, i) && seen[static_cast<std::size_t>(l)] == 0) {
        seen[static_cast<std::size_t>(l)] = 1;
        ++eligible_target;
      }
    }
  }
  log_ratio += std::log(static_cast<double>(active_now) * static_cast<double>(eligible.size())) -
               std::log(static_cast<double>(active_after) *
                        static_cast<double>(eligible_target + 1));

  struct Change {
    int i;
    int j;
    int lag;
    double loglik;
    double logcard;
  };
  std::vector<Change> changes;
  changes.reserve(members.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    const int i = members[m];
    const auto u = static_cast<std::size_t>(i);
    const int j = index[m];
    const int w = windows_[u];
    const int prev = prev_derived(i, j);
    const int next = next_derived(i, j);
    const int d_old = lags_[u][static_cast<std::size_t>(j)];
    const auto forward = lag_choice(i, target, prev, next, w);
    if (forward.empty()) {
      last_log_ratio_ = -INFINITY;
      return MoveOutcome::kInvalid;
    }
    const int d_new = draw_lag(forward);
    const auto reverse = lag_choice(i, t, prev, next, w);
    const int x_old = t + d_old;
    const int x_new = target + d_new;
    const double dll = seg(i, prev, x_new) + seg(i, x_new, next) - seg(i, prev, x_old) -
                       seg(i, x_old, next);
    double card = series_logcard_[u];
    if (w > 0) {
      std::vector<int> latent = latent_[u];
      latent[static_cast<std::size_t>(j)] = target;
      card = log_card(i, latent, w);
    }
    log_ratio += dll - (card - series_logcard_[u]) + reverse.log_prob(d_old) -
                 forward.log_prob(d_new);
    changes.push_back({i, j, d_new, series_loglik_[u] + dll, card});
  }

  if (!accept(log_ratio, force)) return MoveOutcome::kRejected;

  for (const auto& c : changes) {
    const auto u = static_cast<std::size_t>(c.i);
    latent_[u][static_cast<std::size_t>(c.j)] = target;
    lags_[u][static_cast<std::size_t>(c.j)] = c.lag;
    set_col(t, c.i, false);
    set_col(target, c.i, true);
    series_loglik_[u] = c.loglik;
    series_logcard_[u] = c.logcard;
  }
  // Bond bookkeeping: swap within-cluster bonds between t and target, drop
  // boundary bonds at target, draw fresh boundary bonds at t.
  std::vector<int> within_source;
  std::vector<int> within_target;
  std::vector<int> boundary;
  for (int i : members) {
    for (const auto& nb : graph_.neighbors(i)) {
      if (in_cluster[static_cast<std::size_t>(nb.node)] != 0) {
        if (nb.node > i) {
          if (aux_.bonded(t, nb.edge)) within_source.push_back(nb.edge);
          if (aux_.bonded(target, nb.edge)) within_target.push_back(nb.edge);
        }
      } else {
        aux_.set(target, nb.edge, false);
        boundary.push_back(nb.edge);
      }
    }
  }
  for (int e : within_source) aux_.set(t, e, false);
  for (int e : within_target) aux_.set(target, e, false);
  for (int e : within_source) aux_.set(target, e, true);
  for (int e : within_target) aux_.set(t, e, true);
  if (delta > 0.0) {
    for (int e : boundary) {
      const auto& edge = aux_.edges()[static_cast<std::size_t>(e)];
      const int other = in_cluster[static_cast<std::size_t>(edge.a)] != 0 ? edge.b : edge.a;
      if (col(t, other)) continue;
      if (rng_.bernoulli(-std::expm1(-delta * edge.weight))) aux_.set(t, e, true);
    }
  }
  ++version_;
  return MoveOutcome::kAccepted;
}

MoveOutcome ChangepointSampler::move_aux_update() {
  const auto& prior = hyper_.delta;
  double delta = 0.0;
  if (!(rng_.uniform() < prior.spike)) delta = rng_.beta(prior.shape1, prior.shape2);
  aux_.clear_all();
  aux_.set_delta(delta);
  if (delta > 0.0) {
    const auto& edges = aux_.edges();
    std::vector<double> bond_prob(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      bond_prob[e] = -std::expm1(-delta * edges[e].weight);
    }
    for (int t = 2; t <= length_; ++t) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (col(t, edges[e].a) != col(t, edges[e].b)) continue;
        if (rng_.bernoulli(bond_prob[e])) aux_.set(t, static_cast<int>(e), true);
      }
    }
  }
  last_log_ratio_ = 0.0;
  return MoveOutcome::kAccepted;
}

MoveOutcome ChangepointSampler::move_lag_update() {
  std::size_t total = 0;
  for (int i = 0; i < series_; ++i) {
    if (windows_[static_cast<std::size_t>(i)] > 0) total += latent_[static_cast<std::size_t>(i)].size();
  }
  if (total == 0) return MoveOutcome::kSkipped;
  auto n = rng_.index(total);
  int i = 0;
  for (;; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (windows_[u] == 0) continue;
    if (n < latent_[u].size()) break;
    n -= latent_[u].size();
  }
  const auto u = static_cast<std::size_t>(i);
  const int j = static_cast<int>(n);
  const int x = latent_[u][n];
  const int prev = prev_derived(i, j);
  const int next = next_derived(i, j);
  const auto choice = lag_choice(i, x, prev, next, windows_[u]);
  const int d_old = lags_[u][n];
  const int d_new = draw_lag(choice);
  last_log_ratio_ = 0.0;
  if (d_new != d_old) {
    series_loglik_[u] += choice.log_weight[static_cast<std::size_t>(d_new - choice.lo)] -
                         choice.log_weight[static_cast<std::size_t>(d_old - choice.lo)];
    lags_[u][n] = d_new;
    ++version_;
  }
  return MoveOutcome::kAccepted;
}

namespace {

// log P(w -> w') for w' = w + sigma or |w - sigma| (probability 1/2 each),
// sigma ~ Geometric(rho) on {1, 2, ...}. Reflection at zero makes the walk
// asymmetric: w' is reached by sigma = |w' - w| and, when w' > 0, by the
// reflected step sigma = w + w'.
double log_window_step(int from, int to, double rho) {
  auto g = [rho](int sigma) { return rho * std::pow(1.0 - rho, sigma - 1); };
  double p = 0.0;
  if (to != from) p += g(std::abs(to - from));
  if (to > 0) p += g(from + to);
  return std::log(0.5 * p);
}

}  // namespace

MoveOutcome ChangepointSampler::move_window_update() {
  if (geometric_series_.empty()) return MoveOutcome::kSkipped;
  const int i = geometric_series_[rng_.index(geometric_series_.size())];
  const auto u = static_cast<std::size_t>(i);
  const int sigma = rng_.geometric_from_one(config_.rho);
  const bool up = rng_.bernoulli(0.5);
  const int w = windows_[u];
  const int w_new = up ? w + sigma : std::abs(w - sigma);
  const double eta = hyper_.window(i).eta;
  const auto& tau = latent_[u];
  const auto& d = lags_[u];
  const int k = static_cast<int>(tau.size());

  std::vector<int> d_new(d.size());
  double log_forward = 0.0;
  double log_reverse = 0.0;
  for (int j = 0; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const int prev = j == 0 ? 1 : tau[ju - 1] + d_new[ju - 1];
    const int next = j + 1 == k ? length_ + 1 : tau[ju + 1] + d[ju + 1];
    const auto forward = lag_choice(i, tau[ju], prev, next, w_new);
    if (forward.empty()) {
      last_log_ratio_ = -INFINITY;
      return MoveOutcome::kInvalid;
    }
    d_new[ju] = draw_lag(forward);
    log_forward += forward.log_prob(d_new[ju]);
  }
  for (int j = 0; j < k; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const int prev = j == 0 ? 1 : tau[ju - 1] + d[ju - 1];
    const int next = j + 1 == k ? length_ + 1 : tau[ju + 1] + d_new[ju + 1];
    const auto reverse = lag_choice(i, tau[ju], prev, next, w);
    log_reverse += reverse.log_prob(d[ju]);
  }

  std::vector<int> positions(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    positions[static_cast<std::size_t>(j)] =
        tau[static_cast<std::size_t>(j)] + d_new[static_cast<std::size_t>(j)];
  }
  const double loglik = log_lik_series(cache_, i, positions);
  const double card = log_card(i, tau, w_new);
  double log_ratio = loglik - series_loglik_[u] + log_window_prior(w_new, eta) -
                     log_window_prior(w, eta) - (card - series_logcard_[u]);
  log_ratio += log_reverse - log_forward + log_window_step(w_new, w, config_.rho) -
               log_window_step(w, w_new, config_.rho);
  if (!std::isfinite(log_reverse)) {
    last_log_ratio_ = -INFINITY;
    return MoveOutcome::kRejected;
  }
  if (!accept(log_ratio, false)) return MoveOutcome::kRejected;
  windows_[u] = w_new;
  lags_[u] = std::move(d_new);
  series_loglik_[u] = loglik;
  series_logcard_[u] = card;
  ++version_;
  return MoveOutcome::kAccepted;
}

LaggedState ChangepointSampler::lagged_state() const {
  LaggedState state;
  state.latent = ChangepointState(latent_);
  state.lags = lags_;
  state.windows = windows_;
  return state;
}

ChangepointState ChangepointSampler::derived_state() const {
  ChangepointState out(series_);
  for (int i = 0; i < series_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out.tau[u].resize(latent_[u].size());
    for (std::size_t j = 0; j < latent_[u].size(); ++j) {
      out.tau[u][j] = latent_[u][j] + lags_[u][j];
    }
  }
  return out;
}

void ChangepointSampler::set_aux(const AuxiliaryField& aux) {
  if (aux.length() != length_ || aux.node_count() != series_ ||
      aux.edges().size() != graph_.edges().size()) {
    throw InvalidStateError("auxiliary field does not match the chain");
  }
  for (int t = 2; t <= length_; ++t) {
    for (int e : aux.bonds(t)) {
      const auto& edge = aux.edges()[static_cast<std::size_t>(e)];
      if (col(t, edge.a) != col(t, edge.b)) {
        throw InvalidStateError("bond between series with different changepoint indicators");
      }
    }
  }
  aux_ = aux;
}

double ChangepointSampler::log_likelihood() const {
  return std::accumulate(series_loglik_.begin(), series_loglik_.end(), 0.0);
}

double ChangepointSampler::recompute_log_likelihood() const {
  const auto derived = derived_state();
  double total = 0.0;
  for (int i = 0; i < series_; ++i) {
    total += log_lik_series(cache_, i, derived.tau[static_cast<std::size_t>(i)]);
  }
  return total;
}

double ChangepointSampler::log_target() const {
  const auto lagged = lagged_state();
  double value = recompute_log_likelihood() +
                 log_joint_prior_lagged(lagged, length_, hyper_.p_bar, graph_);
  for (int i : geometric_series_) {
    value += log_window_prior(windows_[static_cast<std::size_t>(i)], hyper_.window(i).eta);
  }
  const double delta = aux_.delta();
  const auto& edges = aux_.edges();
  for (int t = 2; t <= length_; ++t) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const bool bonded = aux_.bonded(t, static_cast<int>(e));
      if (col(t, edges[e].a) != col(t, edges[e].b)) {
        if (bonded) return -INFINITY;
        continue;
      }
      value += bonded ? std::log(-std::expm1(-delta * edges[e].weight))
                      : -delta * edges[e].weight;
    }
  }
  return value;
}

void ChangepointSampler::check_invariants() const {
  const auto lagged = lagged_state();
  try {
    lagged.validate(length_);
  } catch (const ValidationError& e) {
    throw std::logic_error(std::string("state invariant broken: ") + e.what());
  }
  std::vector<int> counts(static_cast<std::size_t>(length_ + 2), 0);
  for (int i = 0; i < series_; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const auto& wp = hyper_.window(i);
    if ((wp.mode == WindowMode::kZero && windows_[u] != 0) ||
        (wp.mode == WindowMode::kFixed && windows_[u] != wp.fixed)) {
      throw std::logic_error("window differs from its prior mode");
    }
    std::size_t j = 0;
    for (int t = 0; t <= length_ + 1; ++t) {
      const bool expected = j < latent_[u].size() && latent_[u][j] == t;
      if (expected) ++j;
      if (col(t, i) != expected) throw std::logic_error("latent matrix out of sync");
      if (expected) ++counts[static_cast<std::size_t>(t)];
    }
    const auto derived = derived_state();
    const double ll = log_lik_series(cache_, i, derived.tau[u]);
    if (std::abs(ll - series_loglik_[u]) > kCacheTolerance * std::max(1.0, std::abs(ll))) {
      throw std::logic_error("cached log-likelihood of series " + std::to_string(i + 1) +
                             " is " + std::to_string(series_loglik_[u]) + ", recomputed " +
                             std::to_string(ll));
    }
    const double card = log_card(i, latent_[u], windows_[u]);
    if (std::abs(card - series_logcard_[u]) > kCacheTolerance) {
      throw std::logic_error("cached lag-set cardinality out of sync");
    }
  }
  if (counts != column_count_) throw std::logic_error("column counts out of sync");
  std::size_t active = 0;
  for (int t = 0; t <= length_ + 1; ++t) {
    const int slot = active_slot_[static_cast<std::size_t>(t)];
    if ((counts[static_cast<std::size_t>(t)] > 0) != (slot >= 0)) {
      throw std::logic_error("active column set out of sync");
    }
    if (slot >= 0) {
      ++active;
      if (active_[static_cast<std::size_t>(slot)] != t) {
        throw std::logic_error("active column slot out of sync");
      }
    }
  }
  if (active != active_.size()) throw std::logic_error("active column list out of sync");
  for (int t = 2; t <= length_; ++t) {
    for (int e : aux_.bonds(t)) {
      const auto& edge = aux_.edges()[static_cast<std::size_t>(e)];
      if (col(t, edge.a) != col(t, edge.b)) {
        throw std::logic_error("bond at t=" + std::to_string(t) +
                               " joins series with different latent indicators");
      }
      if (aux_.delta() <= 0.0) throw std::logic_error("bond present with delta = 0");
    }
  }
}

namespace {

SeriesPanel single_series(const SeriesPanel& panel, int i) {
  const int length = panel.length();
  if (panel.family() == ObservationFamily::kPoisson) {
    std::vector<std::vector<std::int64_t>> rows(1);
    rows[0].reserve(static_cast<std::size_t>(length));
    for (int t = 1; t <= length; ++t) rows[0].push_back(panel.count(i, t));
    return SeriesPanel::counts(rows);
  }
  std::vector<std::vector<std::vector<std::int64_t>>> cells(1);
  cells[0].reserve(static_cast<std::size_t>(length));
  for (int t = 1; t <= length; ++t) {
    const auto v = panel.vector_at(i, t);
    cells[0].emplace_back(v.begin(), v.end());
  }
  return SeriesPanel::multinomial(cells);
}

}  // namespace

ChangepointState independent_fit(const SeriesPanel& panel, const ObservationModel& model,
                                 const Hyperparameters& hyper, const SamplerConfig& config) {
  Hyperparameters independent = hyper;
  independent.delta.spike = 1.0;
  independent.windows = {WindowPrior{}};
  SamplerConfig chain = config;
  chain.init = InitStrategy::kCold;
  chain.iterations = config.init_iterations;
  chain.burn_in = config.init_burn_in;
  chain.thin = 1;
  ChangepointState out(panel.series_count());
  for (int i = 0; i < panel.series_count(); ++i) {
    chain.seed = mix_seed(config.seed, 0x696e6974ULL + static_cast<std::uint64_t>(i));
    const auto sub = single_series(panel, i);
    const auto sample = run_chain(sub, model, DependencyGraph(1), independent, chain);
    out.tau[static_cast<std::size_t>(i)] = bayes_estimate(sample, 0, hyper.gamma_loss);
  }
  return out;
}

PosteriorSample run_chain(const SeriesPanel& panel, const ObservationModel& model,
                          const DependencyGraph& graph, const Hyperparameters& hyper,
                          const SamplerConfig& config) {
  config.validate();
  hyper.validate(panel.series_count());
  validate_model(model, panel);
  ChangepointState start(panel.series_count());
  if (config.init == InitStrategy::kIndependentFit) {
    start = independent_fit(panel, model, hyper, config);
  }
  ChangepointSampler sampler(panel, model, graph, hyper, config);
  LaggedState seeded(start);
  seeded.windows.clear();  // filled from the window prior
  sampler.initialize(seeded);

  PosteriorSample sample;
  sample.series_count = panel.series_count();
  sample.length = panel.length();
  sample.thin = config.thin;
  sample.burn_in = config.burn_in;
  sample.total_iterations = config.iterations;
  for (std::uint64_t n = 0; n < config.burn_in; ++n) sampler.step();
  std::uint64_t stored_version = 0;
  bool stored = false;
  for (std::uint64_t n = 1; n <= config.iterations; ++n) {
    MoveOutcome outcome = MoveOutcome::kSkipped;
    const auto type = sampler.step(&outcome);
    sample.moves[static_cast<std::size_t>(type)].record(outcome);
    if (n % config.thin != 0) continue;
    const bool unchanged = stored && sampler.version() == stored_version;
    sample.append(unchanged ? LaggedState{} : sampler.lagged_state(), sampler.delta(),
                  unchanged);
    stored_version = sampler.version();
    stored = true;
  }
  return sample;
}

std::string to_string(InitStrategy init) {
  return init == InitStrategy::kCold ? "cold" : "independent-fit";
}

InitStrategy init_strategy_from_string(const std::string& name) {
  if (name == "cold") return InitStrategy::kCold;
  if (name == "independent-fit") return InitStrategy::kIndependentFit;
  throw ConfigError("unknown init strategy '" + name + "' (expected cold or independent-fit)");
}

}  // namespace graphcp
