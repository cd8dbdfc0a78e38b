#include "graphcp/graphs.hpp"

#include <algorithm>
#include <cmath>

#include "graphcp/error.hpp"

namespace graphcp {

DependencyGraph build_star(int nodes) {
  if (nodes < 2) throw DomainError("star graph needs at least 2 nodes");
  DependencyGraph g(nodes);
  for (int i = 1; i < nodes; ++i) g.set_weight(0, i, 1.0);
  return g;
}

DependencyGraph build_lattice(int rows, int cols) {
  if (rows < 1 || cols < 1) throw DomainError("lattice dimensions must be positive");
  DependencyGraph g(rows * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int node = r * cols + c;
      if (c + 1 < cols) g.set_weight(node, node + 1, 1.0);
      if (r + 1 < rows) g.set_weight(node, node + cols, 1.0);
    }
  }
  return g;
}

DependencyGraph build_rchain(int nodes, int r) {
  if (nodes < 2) throw DomainError("r-chain needs at least 2 nodes");
  if (r < 1) throw DomainError("r-chain bandwidth must be >= 1");
  DependencyGraph g(nodes);
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes && j - i <= r; ++j) g.set_weight(i, j, 1.0);
  }
  return g;
}

std::string to_string(DegreeMode mode) { return mode == DegreeMode::kMax ? "max" : "mean"; }

DegreeMode degree_mode_from_string(const std::string& name) {
  if (name == "max") return DegreeMode::kMax;
  if (name == "mean") return DegreeMode::kMean;
  throw ConfigError("unknown degree mode '" + name + "' (expected max or mean)");
}

DependencyGraph scale_weights(const DependencyGraph& graph, double p_bar, double lambda_s,
                              DegreeMode mode) {
  if (!(lambda_s >= 0.0) || !std::isfinite(lambda_s)) {
    throw DomainError("lambda_s must be finite and >= 0");
  }
  DependencyGraph out(graph.node_count());
  const double n =
      mode == DegreeMode::kMax ? static_cast<double>(graph.max_degree()) : graph.mean_degree();
  if (n <= 0.0 || lambda_s == 0.0) return out;
  const double lambda = lambda_s * std::abs(p_bar) / n;
  for (const auto& e : graph.edges()) out.set_weight(e.a, e.b, lambda);
  return out;
}

ConnectednessScores connectedness_scores(const DependencyGraph& graph,
                                         const ChangepointState& estimates, double varpi) {
  if (!(varpi >= 0.0)) throw DomainError("varpi must be >= 0");
  const int L = graph.node_count();
  if (estimates.series_count() != L) {
    throw DomainError("estimates cover " + std::to_string(estimates.series_count()) +
                      " series but the graph has " + std::to_string(L) + " nodes");
  }
  ConnectednessScores out;
  out.c.resize(static_cast<std::size_t>(L));
  out.m.assign(static_cast<std::size_t>(L), 0.0);
  for (int i = 0; i < L; ++i) {
    const auto& tau = estimates.tau[static_cast<std::size_t>(i)];
    const auto& nbrs = graph.neighbors(i);
    for (int x : tau) {
      int near = 0;
      for (const auto& nb : nbrs) {
        const auto& other = estimates.tau[static_cast<std::size_t>(nb.node)];
        const bool hit = std::any_of(other.begin(), other.end(), [&](int y) {
          return std::abs(static_cast<double>(x - y)) <= varpi;
        });
        if (hit) ++near;
      }
      const double c = static_cast<double>(near + 1) / static_cast<double>(nbrs.size() + 1);
      out.c[static_cast<std::size_t>(i)].push_back(c);
      out.m[static_cast<std::size_t>(i)] += c;
    }
  }
  return out;
}

}  // namespace graphcp
