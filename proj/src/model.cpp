#include "graphcp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphcp/error.hpp"

namespace graphcp {

SeriesPanel SeriesPanel::counts(const std::vector<std::vector<std::int64_t>>& rows) {
  if (rows.empty()) throw ValidationError("panel has no series");
  SeriesPanel panel;
  panel.family_ = ObservationFamily::kPoisson;
  panel.series_ = static_cast<int>(rows.size());
  panel.length_ = static_cast<int>(rows.front().size());
  panel.categories_ = 1;
  if (panel.length_ < 2) throw ValidationError("series length must be at least 2");
  panel.data_.reserve(rows.size() * rows.front().size());
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != panel.length_) {
      throw ValidationError("series have different lengths");
    }
    for (auto x : row) {
      if (x < 0) throw ValidationError("negative count in panel");
      panel.data_.push_back(x);
    }
  }
  return panel;
}

SeriesPanel SeriesPanel::multinomial(
    const std::vector<std::vector<std::vector<std::int64_t>>>& cells) {
  if (cells.empty()) throw ValidationError("panel has no series");
  SeriesPanel panel;
  panel.family_ = ObservationFamily::kMultinomial;
  panel.series_ = static_cast<int>(cells.size());
  panel.length_ = static_cast<int>(cells.front().size());
  if (panel.length_ < 2) throw ValidationError("series length must be at least 2");
  panel.categories_ = static_cast<int>(cells.front().front().size());
  if (panel.categories_ < 1) throw ValidationError("category count must be at least 1");
  for (const auto& series : cells) {
    if (static_cast<int>(series.size()) != panel.length_) {
      throw ValidationError("series have different lengths");
    }
    for (const auto& cell : series) {
      if (static_cast<int>(cell.size()) != panel.categories_) {
        throw ValidationError("cells have different category counts");
      }
      for (auto x : cell) {
        if (x < 0) throw ValidationError("negative count in panel");
        panel.data_.push_back(x);
      }
    }
  }
  return panel;
}

std::int64_t SeriesPanel::count(int i, int t) const {
  return data_[(static_cast<std::size_t>(i) * static_cast<std::size_t>(length_) +
                static_cast<std::size_t>(t - 1)) *
               static_cast<std::size_t>(categories_)];
}

std::span<const std::int64_t> SeriesPanel::vector_at(int i, int t) const {
  const std::size_t offset =
      (static_cast<std::size_t>(i) * static_cast<std::size_t>(length_) +
       static_cast<std::size_t>(t - 1)) *
      static_cast<std::size_t>(categories_);
  return {data_.data() + offset, static_cast<std::size_t>(categories_)};
}

int ChangepointState::total() const {
  int n = 0;
  for (const auto& row : tau) n += static_cast<int>(row.size());
  return n;
}

bool ChangepointState::is_valid(int length) const {
  for (const auto& row : tau) {
    int prev = 1;
    for (int pos : row) {
      if (pos <= prev || pos > length) return false;
      prev = pos;
    }
  }
  return true;
}

void ChangepointState::validate(int length) const {
  for (std::size_t i = 0; i < tau.size(); ++i) {
    int prev = 1;
    for (int pos : tau[i]) {
      if (pos <= prev || pos > length) {
        throw InvalidStateError("series " + std::to_string(i + 1) + ": position " +
                                std::to_string(pos) +
                                " breaks 1 < tau_1 < ... < tau_k <= T (T=" +
                                std::to_string(length) + ")");
      }
      prev = pos;
    }
  }
}

BinaryMatrix::BinaryMatrix(int series, int length)
    : series_(series),
      length_(length),
      cells_(static_cast<std::size_t>(series) * static_cast<std::size_t>(std::max(length - 1, 0)), 0) {}

std::size_t BinaryMatrix::index(int i, int t) const {
  return static_cast<std::size_t>(i) * static_cast<std::size_t>(length_ - 1) +
         static_cast<std::size_t>(t - 2);
}

std::vector<std::uint8_t> BinaryMatrix::row(int i) const {
  auto first = cells_.begin() + static_cast<std::ptrdiff_t>(index(i, 2));
  return {first, first + (length_ - 1)};
}

BinaryMatrix to_matrix(const ChangepointState& state, int length) {
  state.validate(length);
  BinaryMatrix matrix(state.series_count(), length);
  for (int i = 0; i < state.series_count(); ++i) {
    for (int pos : state.tau[static_cast<std::size_t>(i)]) matrix.set(i, pos, true);
  }
  return matrix;
}

ChangepointState from_matrix(const BinaryMatrix& matrix) {
  ChangepointState state(matrix.series_count());
  for (int i = 0; i < matrix.series_count(); ++i) {
    for (int t = 2; t <= matrix.length(); ++t) {
      if (matrix.at(i, t)) state.tau[static_cast<std::size_t>(i)].push_back(t);
    }
  }
  return state;
}

LaggedState::LaggedState(ChangepointState positions)
    : latent(std::move(positions)),
      lags(latent.tau.size()),
      windows(latent.tau.size(), 0) {
  for (std::size_t i = 0; i < latent.tau.size(); ++i) {
    lags[i].assign(latent.tau[i].size(), 0);
  }
}

void LaggedState::validate(int length) const {
  latent.validate(length);
  if (lags.size() != latent.tau.size() || windows.size() != latent.tau.size()) {
    throw InvalidLagError("lag/window arrays do not match the series count");
  }
  for (std::size_t i = 0; i < latent.tau.size(); ++i) {
    const auto& tau = latent.tau[i];
    const auto& d = lags[i];
    if (d.size() != tau.size()) {
      throw InvalidLagError("series " + std::to_string(i + 1) +
                            ": one lag per latent changepoint required");
    }
    if (windows[i] < 0) throw InvalidLagError("negative window");
    int prev = 1;
    for (std::size_t j = 0; j < tau.size(); ++j) {
      if (d[j] < 0 || d[j] > windows[i]) {
        throw InvalidLagError("series " + std::to_string(i + 1) + ": lag " +
                              std::to_string(d[j]) + " outside [0, " +
                              std::to_string(windows[i]) + "]");
      }
      const int pos = tau[j] + d[j];
      if (pos <= prev || pos > length) {
        throw InvalidLagError("series " + std::to_string(i + 1) + ": derived position " +
                              std::to_string(pos) + " breaks ordering");
      }
      prev = pos;
    }
  }
}

ChangepointState derive_positions(const LaggedState& lagged, int length) {
  lagged.validate(length);
  ChangepointState out(lagged.series_count());
  for (std::size_t i = 0; i < lagged.latent.tau.size(); ++i) {
    const auto& tau = lagged.latent.tau[i];
    out.tau[i].resize(tau.size());
    for (std::size_t j = 0; j < tau.size(); ++j) out.tau[i][j] = tau[j] + lagged.lags[i][j];
  }
  return out;
}

DependencyGraph::DependencyGraph(int nodes)
    : nodes_(nodes), weights_(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes), 0.0) {}

double DependencyGraph::weight(int i, int j) const {
  return weights_[static_cast<std::size_t>(i) * static_cast<std::size_t>(nodes_) +
                  static_cast<std::size_t>(j)];
}

void DependencyGraph::set_weight(int i, int j, double weight) {
  if (i < 0 || j < 0 || i >= nodes_ || j >= nodes_) {
    throw ValidationError("edge endpoint out of range");
  }
  if (i == j) throw ValidationError("self loops are not allowed");
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw ValidationError("edge weights must be finite and non-negative");
  }
  const auto n = static_cast<std::size_t>(nodes_);
  weights_[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = weight;
  weights_[static_cast<std::size_t>(j) * n + static_cast<std::size_t>(i)] = weight;
  dirty_ = true;
}

void DependencyGraph::rebuild() const {
  edges_.clear();
  adjacency_.assign(static_cast<std::size_t>(nodes_), {});
  for (int a = 0; a < nodes_; ++a) {
    for (int b = a + 1; b < nodes_; ++b) {
      const double w = weight(a, b);
      if (w > 0.0) {
        const int id = static_cast<int>(edges_.size());
        edges_.push_back({a, b, w});
        adjacency_[static_cast<std::size_t>(a)].push_back({b, id, w});
        adjacency_[static_cast<std::size_t>(b)].push_back({a, id, w});
      }
    }
  }
  dirty_ = false;
}

const std::vector<DependencyGraph::Edge>& DependencyGraph::edges() const {
  if (dirty_) rebuild();
  return edges_;
}

const std::vector<DependencyGraph::Neighbor>& DependencyGraph::neighbors(int i) const {
  if (dirty_) rebuild();
  return adjacency_[static_cast<std::size_t>(i)];
}

int DependencyGraph::max_degree() const {
  int best = 0;
  for (int i = 0; i < nodes_; ++i) best = std::max(best, degree(i));
  return best;
}

double DependencyGraph::mean_degree() const {
  if (nodes_ == 0) return 0.0;
  return 2.0 * static_cast<double>(edges().size()) / static_cast<double>(nodes_);
}

const WindowPrior& Hyperparameters::window(int i) const {
  return windows.size() == 1 ? windows.front() : windows[static_cast<std::size_t>(i)];
}

bool Hyperparameters::synchronous() const {
  return std::all_of(windows.begin(), windows.end(), [](const WindowPrior& w) {
    return w.mode == WindowMode::kZero || (w.mode == WindowMode::kFixed && w.fixed == 0);
  });
}

bool Hyperparameters::any_geometric() const {
  return std::any_of(windows.begin(), windows.end(),
                     [](const WindowPrior& w) { return w.mode == WindowMode::kGeometric; });
}

void Hyperparameters::validate(int series) const {
  if (!std::isfinite(p_bar)) throw ConfigError("p_bar must be finite");
  if (!(delta.spike >= 0.0 && delta.spike <= 1.0)) {
    throw ConfigError("delta spike mass must lie in [0, 1]");
  }
  if (!(delta.shape1 > 0.0 && delta.shape2 > 0.0)) {
    throw ConfigError("delta Beta shapes must be positive");
  }
  if (windows.size() != 1 && static_cast<int>(windows.size()) != series) {
    throw ConfigError("window prior needs one entry or one per series");
  }
  for (const auto& w : windows) {
    if (w.mode == WindowMode::kFixed && w.fixed < 0) throw ConfigError("fixed window must be >= 0");
    if (w.mode == WindowMode::kGeometric && !(w.eta > 0.0 && w.eta < 1.0)) {
      throw ConfigError("geometric window rate must lie in (0, 1)");
    }
  }
  if (!(gamma_loss >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (!(varpi >= 0.0)) throw ConfigError("varpi must be non-negative");
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string to_string(WindowMode mode) {
  switch (mode) {
    case WindowMode::kZero:
      return "zero";
    case WindowMode::kFixed:
      return "fixed";
    case WindowMode::kGeometric:
      return "geometric";
  }
  return "zero";
}

WindowMode window_mode_from_string(const std::string& name) {
  if (name == "zero") return WindowMode::kZero;
  if (name == "fixed") return WindowMode::kFixed;
  if (name == "geometric") return WindowMode::kGeometric;
  throw ConfigError("unknown window mode '" + name + "'");
}

}  // namespace graphcp
