#include "graphcp/auxiliary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/math/tools/roots.hpp>

#include "graphcp/error.hpp"

namespace graphcp {

namespace {

struct DisjointSets {
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<int> parent;
};

}  // namespace

AuxiliaryField::AuxiliaryField(const DependencyGraph& graph, int length)
    : length_(length),
      nodes_(graph.node_count()),
      edges_(graph.edges()),
      flags_((static_cast<std::size_t>(length) + 1) * graph.edges().size(), 0),
      where_(flags_.size(), -1),
      lists_(static_cast<std::size_t>(length) + 1) {}

void AuxiliaryField::set(int t, int edge, bool on) {
  const auto s = slot(t, edge);
  auto& list = lists_[static_cast<std::size_t>(t)];
  if (on == (flags_[s] != 0)) return;
  if (on) {
    flags_[s] = 1;
    where_[s] = static_cast<int>(list.size());
    list.push_back(edge);
  } else {
    flags_[s] = 0;
    const int pos = where_[s];
    const int last = list.back();
    list[static_cast<std::size_t>(pos)] = last;
    where_[slot(t, last)] = pos;
    list.pop_back();
    where_[s] = -1;
  }
}

std::vector<std::pair<int, int>> AuxiliaryField::bond_pairs(int t) const {
  std::vector<std::pair<int, int>> out;
  for (int e : bonds(t)) {
    const auto& edge = edges_[static_cast<std::size_t>(e)];
    out.emplace_back(edge.a, edge.b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void AuxiliaryField::clear(int t) {
  auto& list = lists_[static_cast<std::size_t>(t)];
  for (int e : list) {
    flags_[slot(t, e)] = 0;
    where_[slot(t, e)] = -1;
  }
  list.clear();
}

void AuxiliaryField::clear_all() {
  for (int t = 0; t <= length_; ++t) clear(t);
}

std::size_t AuxiliaryField::bond_count() const {
  std::size_t n = 0;
  for (const auto& list : lists_) n += list.size();
  return n;
}

AuxiliaryField sample_aux_field(const BinaryMatrix& matrix, const DependencyGraph& graph,
                                double delta, Rng& rng) {
  AuxiliaryField aux(graph, matrix.length());
  aux.set_delta(delta);
  if (delta <= 0.0) return aux;
  const auto& edges = aux.edges();
  std::vector<double> bond_prob(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    bond_prob[e] = -std::expm1(-delta * edges[e].weight);
  }
  for (int t = 2; t <= matrix.length(); ++t) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (matrix.at(edges[e].a, t) != matrix.at(edges[e].b, t)) continue;
      if (rng.bernoulli(bond_prob[e])) aux.set(t, static_cast<int>(e), true);
    }
  }
  return aux;
}

int cluster_labels(const AuxiliaryField& aux, int t, std::vector<int>& labels) {
  const int n = aux.node_count();
  DisjointSets sets(n);
  for (int e : aux.bonds(t)) {
    const auto& edge = aux.edges()[static_cast<std::size_t>(e)];
    sets.unite(edge.a, edge.b);
  }
  labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> root_label(static_cast<std::size_t>(n), -1);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const int root = sets.find(i);
    auto& rl = root_label[static_cast<std::size_t>(root)];
    if (rl < 0) rl = count++;
    labels[static_cast<std::size_t>(i)] = rl;
  }
  return count;
}

std::vector<std::vector<int>> clusters_at(const AuxiliaryField& aux, int t) {
  std::vector<int> labels;
  const int count = cluster_labels(aux, t, labels);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(count));
  for (int i = 0; i < aux.node_count(); ++i) {
    out[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  return out;
}

double expected_bond_probability(double lambda, double shape1, double shape2) {
  if (!(lambda >= 0.0) || !(shape1 > 0.0) || !(shape2 > 0.0)) {
    throw DomainError("expected_bond_probability needs lambda >= 0 and positive Beta shapes");
  }
  // E[exp(-lambda delta)] under Beta(a, b) is 1F1(a; a + b; -lambda).
  return 1.0 - boost::math::hypergeometric_1F1(shape1, shape1 + shape2, -lambda);
}

DeltaPrior calibrate_delta_prior(double lambda, double target, double spike) {
  if (!(target > 0.0 && target < 1.0) || !(spike >= 0.0 && spike < 1.0)) {
    throw DomainError("calibrate_delta_prior needs target in (0, 1) and spike in [0, 1)");
  }
  // Bond probability falls from 1 - exp(-lambda) (as shape2 -> 0) towards 0.
  if (!(lambda > 0.0) || target >= 1.0 - std::exp(-lambda)) {
    throw DomainError("no Beta(1, b) delta prior reaches bond probability " +
                      std::to_string(target) + " at lambda " + std::to_string(lambda));
  }
  auto gap = [&](double b) { return expected_bond_probability(lambda, 1.0, b) - target; };
  double lo = 1e-6;
  double hi = 1.0;
  while (gap(hi) > 0.0) hi *= 2.0;
  std::uintmax_t max_iter = 200;
  const auto root = boost::math::tools::toms748_solve(
      gap, lo, hi, boost::math::tools::eps_tolerance<double>(40), max_iter);
  return DeltaPrior{spike, 1.0, 0.5 * (root.first + root.second)};
}

}  // namespace graphcp
