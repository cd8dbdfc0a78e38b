#pragma once

// Shared domain types for multi-series changepoint models.
//
// Conventions used throughout the library:
//   * series are indexed 0..L-1 internally and 1..L in every file format;
//   * time is 1-based, t in {1..T}; changepoint positions live in {2..T};
//   * the boundary positions 1 and T+1 are implicit and never stored.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace graphcp {

enum class ObservationFamily { kPoisson, kMultinomial };

/// L series of common length T. Cells are either counts or count vectors of a
/// common length M.
class SeriesPanel {
 public:
  SeriesPanel() = default;

  /// rows[i][t-1] is the count of series i at time t.
  static SeriesPanel counts(const std::vector<std::vector<std::int64_t>>& rows);
  /// cells[i][t-1][m] is the count of category m of series i at time t.
  static SeriesPanel multinomial(
      const std::vector<std::vector<std::vector<std::int64_t>>>& cells);

  ObservationFamily family() const { return family_; }
  int series_count() const { return series_; }
  int length() const { return length_; }
  /// 1 for count panels.
  int categories() const { return categories_; }

  std::int64_t count(int i, int t) const;
  std::span<const std::int64_t> vector_at(int i, int t) const;

  bool operator==(const SeriesPanel&) const = default;

 private:
  ObservationFamily family_ = ObservationFamily::kPoisson;
  int series_ = 0;
  int length_ = 0;
  int categories_ = 1;
  std::vector<std::int64_t> data_;  // [i][t][m], row-major
};

/// Ordered changepoint positions for each series.
struct ChangepointState {
  std::vector<std::vector<int>> tau;

  ChangepointState() = default;
  explicit ChangepointState(int series) : tau(static_cast<std::size_t>(series)) {}
  explicit ChangepointState(std::vector<std::vector<int>> positions)
      : tau(std::move(positions)) {}

  int series_count() const { return static_cast<int>(tau.size()); }
  int k(int i) const { return static_cast<int>(tau[static_cast<std::size_t>(i)].size()); }
  int total() const;

  /// Throws InvalidStateError unless 1 < tau_1 < ... < tau_k < T+1 for all i.
  void validate(int length) const;
  bool is_valid(int length) const;

  bool operator==(const ChangepointState&) const = default;
};

/// Dense binary changepoint matrix, S(i, t) for t in {2..T}.
class BinaryMatrix {
 public:
  BinaryMatrix(int series, int length);

  int series_count() const { return series_; }
  int length() const { return length_; }

  bool at(int i, int t) const { return cells_[index(i, t)] != 0; }
  void set(int i, int t, bool value) { cells_[index(i, t)] = value ? 1 : 0; }
  /// Row i over t = 2..T.
  std::vector<std::uint8_t> row(int i) const;

  bool operator==(const BinaryMatrix&) const = default;

 private:
  std::size_t index(int i, int t) const;

  int series_ = 0;
  int length_ = 0;
  std::vector<std::uint8_t> cells_;
};

BinaryMatrix to_matrix(const ChangepointState& state, int length);
ChangepointState from_matrix(const BinaryMatrix& matrix);

/// Latent positions plus non-negative lags bounded by a per-series window.
struct LaggedState {
  ChangepointState latent;
  std::vector<std::vector<int>> lags;
  std::vector<int> windows;

  LaggedState() = default;
  /// Zero lags, zero windows.
  explicit LaggedState(ChangepointState positions);

  int series_count() const { return latent.series_count(); }

  /// Throws InvalidLagError on any lag outside [0, w_i] or when the derived
  /// positions are not strictly increasing within {2..T}.
  void validate(int length) const;

  bool operator==(const LaggedState&) const = default;
};

/// tau_{i,j} = latent_{i,j} + d_{i,j}.
ChangepointState derive_positions(const LaggedState& lagged, int length);

/// Symmetric non-negative weights with zero diagonal; an edge exists iff its
/// weight is positive.
class DependencyGraph {
 public:
  struct Edge {
    int a = 0;  // a < b
    int b = 0;
    double weight = 0.0;
  };
  struct Neighbor {
    int node = 0;
    int edge = 0;  // index into edges()
    double weight = 0.0;
  };

  DependencyGraph() = default;
  explicit DependencyGraph(int nodes);

  int node_count() const { return nodes_; }
  double weight(int i, int j) const;
  /// Sets both (i, j) and (j, i). Zero removes the edge.
  void set_weight(int i, int j, double weight);

  const std::vector<Edge>& edges() const;
  const std::vector<Neighbor>& neighbors(int i) const;
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  int max_degree() const;
  double mean_degree() const;

  bool operator==(const DependencyGraph& other) const {
    return nodes_ == other.nodes_ && weights_ == other.weights_;
  }

 private:
  void rebuild() const;

  int nodes_ = 0;
  std::vector<double> weights_;
  mutable bool dirty_ = true;
  mutable std::vector<Edge> edges_;
  mutable std::vector<std::vector<Neighbor>> adjacency_;
};

struct DeltaPrior {
  double spike = 0.5;   // P(delta = 0)
  double shape1 = 1.0;  // Beta shape pair for delta > 0
  double shape2 = 30.0;
};

enum class WindowMode { kZero, kFixed, kGeometric };

struct WindowPrior {
  WindowMode mode = WindowMode::kZero;
  int fixed = 0;      // kFixed
  double eta = 0.9;   // kGeometric, pmf eta (1-eta)^w on w >= 0
};

struct Hyperparameters {
  double p_bar = -4.0;
  DeltaPrior delta;
  /// One entry per series, or a single entry applied to all.
  std::vector<WindowPrior> windows{WindowPrior{}};
  double gamma_loss = 40.0;
  double varpi = 24.0;

  const WindowPrior& window(int i) const;
  bool synchronous() const;
  bool any_geometric() const;
  void validate(int series) const;
};

double logit(double p);
double logistic(double x);

std::string to_string(WindowMode mode);
WindowMode window_mode_from_string(const std::string& name);

}  // namespace graphcp
