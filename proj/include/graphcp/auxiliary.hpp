#pragma once

// Binary bond variables u_t(i, i') on graph edges, and the per-column
// partitions of the series they induce.

#include <span>
#include <utility>
#include <vector>

#include "graphcp/model.hpp"
#include "graphcp/rng.hpp"

namespace graphcp {

class AuxiliaryField {
 public:
  AuxiliaryField() = default;
  AuxiliaryField(const DependencyGraph& graph, int length);

  int length() const { return length_; }
  int node_count() const { return nodes_; }
  const std::vector<DependencyGraph::Edge>& edges() const { return edges_; }

  double delta() const { return delta_; }
  void set_delta(double delta) { delta_ = delta; }

  bool bonded(int t, int edge) const { return flags_[slot(t, edge)] != 0; }
  void set(int t, int edge, bool on);
  /// Edge ids with u_t = 1, in no particular order.
  std::span<const int> bonds(int t) const { return lists_[static_cast<std::size_t>(t)]; }
  /// (i, i') pairs with i < i', sorted.
  std::vector<std::pair<int, int>> bond_pairs(int t) const;
  void clear(int t);
  void clear_all();
  std::size_t bond_count() const;

 private:
  std::size_t slot(int t, int edge) const {
    return static_cast<std::size_t>(t) * edges_.size() + static_cast<std::size_t>(edge);
  }

  int length_ = 0;
  int nodes_ = 0;
  double delta_ = 0.0;
  std::vector<DependencyGraph::Edge> edges_;
  std::vector<std::uint8_t> flags_;
  std::vector<int> where_;  // position of an edge inside lists_[t]
  std::vector<std::vector<int>> lists_;
};

/// Independently per column t and edge (i, i'):
/// u_t(i,i') ~ Bernoulli(1 - exp(-delta * lambda * (1 - |S(i,t) - S(i',t)|))).
AuxiliaryField sample_aux_field(const BinaryMatrix& matrix, const DependencyGraph& graph,
                                double delta, Rng& rng);

/// Connected components of the bond graph at column t. Components are listed
/// in order of their smallest member and each is sorted.
std::vector<std::vector<int>> clusters_at(const AuxiliaryField& aux, int t);

/// Component label per node at column t, numbered in order of smallest member.
/// Returns the number of components.
int cluster_labels(const AuxiliaryField& aux, int t, std::vector<int>& labels);

/// P(u = 1) for two equal cells joined by an edge of weight lambda, averaged
/// over delta ~ Beta(shape1, shape2).
double expected_bond_probability(double lambda, double shape1, double shape2);

/// Delta prior with slab Beta(1, shape2), shape2 solved so that equal cells on
/// an edge of weight lambda bond with probability `target` when delta > 0.
/// Throws DomainError when no shape2 > 0 reaches the target.
DeltaPrior calibrate_delta_prior(double lambda, double target = 0.5, double spike = 0.5);

}  // namespace graphcp
