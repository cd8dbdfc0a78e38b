#include "graphcp/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "graphcp/error.hpp"
#include "graphcp/estimator.hpp"

namespace graphcp {

namespace {

std::vector<int> zero_based(std::initializer_list<int> ids) {
  std::vector<int> out;
  for (int id : ids) out.push_back(id - 1);
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

std::string to_string(Design design) {
  switch (design) {
    case Design::kLatticeCluster:
      return "lattice-cluster";
    case Design::kChainCluster:
      return "chain-cluster";
    case Design::kStar:
      return "star";
    case Design::kAsync:
      return "async";
  }
  return "unknown";
}

Design design_from_string(const std::string& name) {
  if (name == "lattice-cluster") return Design::kLatticeCluster;
  if (name == "chain-cluster") return Design::kChainCluster;
  if (name == "star") return Design::kStar;
  if (name == "async") return Design::kAsync;
  throw ConfigError("unknown scenario '" + name +
                    "' (expected lattice-cluster, chain-cluster, star or async)");
}

DependencyGraph design_graph(Design design, int series) {
  switch (design) {
    case Design::kLatticeCluster:
      if (series != 30) throw ConfigError("the lattice design needs 30 series");
      return build_lattice(5, 6);
    case Design::kChainCluster:
    case Design::kAsync:
      return build_rchain(series, 2);
    case Design::kStar:
      return build_star(series);
  }
  throw ConfigError("unknown design");
}

ObservationModel simulation_model() { return PoissonGamma{100.0, 0.1}; }

SimulatedData simulate_panel(const Scenario& s, Rng& rng) {
  if (s.length < 2) throw ConfigError("scenario length must be >= 2");
  if (s.change_at < 2 || s.change_at > s.length) {
    throw ConfigError("scenario change_at must lie in {2..T}");
  }
  if (!(s.baseline > 0.0) || !(s.theta > 0.0) || !(s.peripheral_theta > 0.0)) {
    throw ConfigError("scenario means must be positive");
  }
  const int L = s.series;
  std::vector<int> change(static_cast<std::size_t>(L), 0);
  std::vector<double> after(static_cast<std::size_t>(L), s.baseline);
  SimulatedData data;
  std::vector<int> in_group(static_cast<std::size_t>(L), 0);
  auto add_group = [&](const std::string& name, std::vector<int> members) {
    std::sort(members.begin(), members.end());
    for (int i : members) in_group[static_cast<std::size_t>(i)] = 1;
    data.groups.push_back({name, std::move(members)});
  };

  if (s.design == Design::kStar) {
    if (L < 2) throw ConfigError("star design needs at least 2 series");
    if (s.star_changed < 0 || s.star_changed > L - 1) {
      throw ConfigError("star_changed must lie in {0..L-1}");
    }
    std::vector<int> peripheral(static_cast<std::size_t>(L - 1));
    std::iota(peripheral.begin(), peripheral.end(), 1);
    // Partial Fisher-Yates for the changed subset.
    for (int n = 0; n < s.star_changed; ++n) {
      const auto pick = static_cast<std::size_t>(n) +
                        rng.index(peripheral.size() - static_cast<std::size_t>(n));
      std::swap(peripheral[static_cast<std::size_t>(n)], peripheral[pick]);
    }
    std::vector<int> c2(peripheral.begin(), peripheral.begin() + s.star_changed);
    change[0] = s.change_at;
    after[0] = s.theta;
    for (int i : c2) {
      change[static_cast<std::size_t>(i)] = s.change_at;
      after[static_cast<std::size_t>(i)] = s.peripheral_theta;
    }
    add_group("C1", {0});
    add_group("C2", c2);
  } else {
    if (L != 30) throw ConfigError("cluster designs need 30 series");
    const auto c1 = zero_based({1, 2, 3, 4, 5, 6});
    const auto c2 = zero_based({17, 18, 23, 24, 29, 30});
    const auto c3 = zero_based({14});
    for (const auto* group : {&c1, &c2, &c3}) {
      for (int i : *group) {
        change[static_cast<std::size_t>(i)] = s.change_at;
        after[static_cast<std::size_t>(i)] = s.theta;
      }
    }
    if (s.design == Design::kAsync) {
      if (s.v < 0) throw ConfigError("async offset v must be >= 0");
      for (int i : zero_based({3, 6, 18, 30})) change[static_cast<std::size_t>(i)] += s.v;
      for (int i : zero_based({1, 4, 17, 24, 29})) change[static_cast<std::size_t>(i)] -= s.v;
      for (int c : change) {
        if (c != 0 && (c < 2 || c > s.length)) {
          throw ConfigError("async offset moves a changepoint outside {2..T}");
        }
      }
    }
    add_group("C1", c1);
    add_group("C2", c2);
    add_group("C3", c3);
  }
  std::vector<int> rest;
  for (int i = 0; i < L; ++i) {
    if (in_group[static_cast<std::size_t>(i)] == 0) rest.push_back(i);
  }
  add_group("N", rest);

  std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(L));
  data.truth = ChangepointState(L);
  for (int i = 0; i < L; ++i) {
    const auto u = static_cast<std::size_t>(i);
    rows[u].reserve(static_cast<std::size_t>(s.length));
    for (int t = 1; t <= s.length; ++t) {
      const bool post = change[u] != 0 && t >= change[u];
      rows[u].push_back(rng.poisson(post ? after[u] : s.baseline));
    }
    if (change[u] != 0) data.truth.tau[u].push_back(change[u]);
  }
  data.panel = SeriesPanel::counts(rows);
  return data;
}

ExperimentDesign ExperimentDesign::full(Design design) {
  ExperimentDesign d = desk(design);
  d.p_bars = {-60, -70, -80, -90, -100, -110, -120, -130};
  d.lambda_s = {0.0, 0.2, 0.4, 0.6, 0.8};
  d.thetas = {1040, 1050, 1060};
  if (design == Design::kAsync) d.vs = {5, 10, 15};
  if (design == Design::kStar) d.star_sizes = {0, 9, 18, 27};
  d.repetitions = 10;
  d.sampler.iterations = 50000;
  d.sampler.burn_in = 10000;
  return d;
}

ExperimentDesign ExperimentDesign::desk(Design design) {
  ExperimentDesign d;
  d.design = design;
  d.name = to_string(design);
  if (design == Design::kAsync) {
    d.windows = {WindowPrior{WindowMode::kFixed, 30, 0.9},
                 WindowPrior{WindowMode::kGeometric, 0, 0.9}, WindowPrior{}};
  }
  d.sampler.init = InitStrategy::kIndependentFit;
  return d;
}

std::vector<ResultRow> run_experiment(const ExperimentDesign& design) {
  if (design.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  const auto model = simulation_model();
  const auto graph = design_graph(design.design, 30);
  std::vector<ResultRow> rows;
  const bool star = design.design == Design::kStar;
  const bool async = design.design == Design::kAsync;
  const std::vector<int> vs = async ? design.vs : std::vector<int>{0};
  const std::vector<int> sizes = star ? design.star_sizes : std::vector<int>{0};
  std::uint64_t cell = 0;
  for (double theta : design.thetas) {
    for (int v : vs) {
      for (int size : sizes) {
        for (int rep = 0; rep < design.repetitions; ++rep) {
          ++cell;
          Scenario scenario;
          scenario.design = design.design;
          scenario.theta = theta;
          scenario.v = v;
          scenario.star_changed = size;
          Rng data_rng(mix_seed(design.seed, cell));
          const auto data = simulate_panel(scenario, data_rng);
          for (std::size_t pi = 0; pi < design.p_bars.size(); ++pi) {
            const double p_bar = design.p_bars[pi];
            for (std::size_t wi = 0; wi < design.windows.size(); ++wi) {
              SamplerConfig config = design.sampler;
              config.seed = mix_seed(mix_seed(design.seed, cell), 1000 * (pi + 1) + wi);
              for (double lambda_s : design.lambda_s) {
                const auto scaled = scale_weights(graph, p_bar, lambda_s, design.degree_mode);
                for (const auto& [sampler_name, delta_prior] : design.samplers) {
                  Hyperparameters hyper;
                  hyper.p_bar = p_bar;
                  hyper.delta = delta_prior;
                  hyper.windows = {design.windows[wi]};
                  hyper.gamma_loss = design.gamma_loss;
                  const auto sample = run_chain(data.panel, model, scaled, hyper, config);
                  const auto summary = marginal_summaries(sample);
                  for (const auto& group : data.groups) {
                    if (group.members.empty()) continue;
                    ResultRow row;
                    row.design = design.name;
                    row.p_bar = p_bar;
                    row.lambda_s = lambda_s;
                    row.theta = theta;
                    row.v = v;
                    row.star_changed = size;
                    row.window_mode = to_string(design.windows[wi].mode);
                    row.sampler = sampler_name;
                    row.repetition = rep + 1;
                    row.series_group = group.name;
                    for (int i : group.members) {
                      const auto u = static_cast<std::size_t>(i);
                      const auto& kp = summary.k_probs[u];
                      row.prob_k1 += kp.size() > 1 ? kp[1] : 0.0;
                      const auto hist = sample.series_histogram(i);
                      row.expected_loss += expected_loss(hist, data.truth.tau[u], design.gamma_loss);
                      row.bayes_loss += matching_loss(bayes_estimate(hist, design.gamma_loss),
                                                      data.truth.tau[u], design.gamma_loss);
                    }
                    const auto n = static_cast<double>(group.members.size());
                    row.prob_k1 /= n;
                    row.expected_loss /= n;
                    row.bayes_loss /= n;
                    row.accept_birth_death =
                        sample.moves[static_cast<std::size_t>(MoveType::kBirthDeath)]
                            .acceptance_rate();
                    row.accept_shift =
                        sample.moves[static_cast<std::size_t>(MoveType::kShift)].acceptance_rate();
                    rows.push_back(std::move(row));
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return rows;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << "design,p_bar,lambda_s,theta,v,star_changed,window_mode,sampler,repetition,"
         "series_group,prob_k1,expected_loss,bayes_loss,accept_birth_death,accept_shift\n";
  for (const auto& r : rows) {
    out << r.design << ',' << fmt(r.p_bar) << ',' << fmt(r.lambda_s) << ',' << fmt(r.theta)
        << ',' << r.v << ',' << r.star_changed << ',' << r.window_mode << ',' << r.sampler << ','
        << r.repetition << ',' << r.series_group << ',' << fmt(r.prob_k1) << ','
        << fmt(r.expected_loss) << ',' << fmt(r.bayes_loss) << ',' << fmt(r.accept_birth_death)
        << ',' << fmt(r.accept_shift) << '\n';
  }
}

}  // namespace graphcp
