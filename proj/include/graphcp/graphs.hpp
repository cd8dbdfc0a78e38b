#pragma once

// Dependency-graph motifs, homogeneous weight scaling and the network
// connectedness score of detected changepoints.

#include <string>
#include <vector>

#include "graphcp/model.hpp"

namespace graphcp {

/// Node 0 joined to every other node, unit weights.
DependencyGraph build_star(int nodes);

/// rows x cols grid, node index row * cols + col, edges between cells at
/// Manhattan distance 1, unit weights.
DependencyGraph build_lattice(int rows, int cols);

/// Band graph: edge (i, j) iff 1 <= |i - j| <= r, unit weights.
DependencyGraph build_rchain(int nodes, int r);

enum class DegreeMode { kMax, kMean };

std::string to_string(DegreeMode mode);
DegreeMode degree_mode_from_string(const std::string& name);

/// Sets every existing edge to lambda_s * |p_bar| / n, n the maximum or mean
/// degree. lambda_s = 0 removes every edge.
DependencyGraph scale_weights(const DependencyGraph& graph, double p_bar, double lambda_s,
                              DegreeMode mode);

struct ConnectednessScores {
  /// c[i][j] for the j-th changepoint of series i.
  std::vector<std::vector<double>> c;
  std::vector<double> m;
};

/// n_ij = neighbours of i with a changepoint within varpi of tau_ij;
/// c_ij = (n_ij + 1) / (deg(i) + 1); m_i = sum_j c_ij.
ConnectednessScores connectedness_scores(const DependencyGraph& graph,
                                         const ChangepointState& estimates, double varpi);

}  // namespace graphcp
