#include <doctest.h>

#include <numeric>
#include <set>
#include <sstream>

#include "graphcp/error.hpp"
#include "graphcp/simulation.hpp"

using namespace graphcp;

namespace {

std::vector<int> members(const SimulatedData& d, const std::string& name) {
  for (const auto& g : d.groups) {
    if (g.name == name) return g.members;
  }
  return {};
}

void check_partition(const SimulatedData& d, int L) {
  std::vector<int> seen(static_cast<std::size_t>(L), 0);
  for (const auto& g : d.groups) {
    for (int i : g.members) ++seen[static_cast<std::size_t>(i)];
  }
  for (int c : seen) CHECK(c == 1);
}

}  // namespace

TEST_CASE("chain-cluster memberships and truth") {
  Rng rng(7);
  Scenario s;
  s.design = Design::kChainCluster;
  const auto d = simulate_panel(s, rng);
  CHECK(members(d, "C1") == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK(members(d, "C2") == std::vector<int>{16, 17, 22, 23, 28, 29});
  CHECK(members(d, "C3") == std::vector<int>{13});
  check_partition(d, 30);
  CHECK(d.panel.series_count() == 30);
  CHECK(d.panel.length() == 300);
  for (int i = 0; i < 30; ++i) {
    const bool changed = i < 6 || i == 13 || i == 16 || i == 17 || i == 22 || i == 23 ||
                         i == 28 || i == 29;
    CHECK(d.truth.tau[static_cast<std::size_t>(i)] ==
          (changed ? std::vector<int>{200} : std::vector<int>{}));
  }
}

TEST_CASE("simulated means follow the scenario") {
  Rng rng(3);
  Scenario s;
  s.theta = 1060;
  const auto d = simulate_panel(s, rng);
  double before = 0.0;
  double after = 0.0;
  for (int t = 1; t < 200; ++t) before += static_cast<double>(d.panel.count(0, t));
  for (int t = 200; t <= 300; ++t) after += static_cast<double>(d.panel.count(0, t));
  CHECK(before / 199.0 == doctest::Approx(1000.0).epsilon(0.01));
  CHECK(after / 101.0 == doctest::Approx(1060.0).epsilon(0.01));
}

TEST_CASE("async offsets") {
  Rng rng(1);
  Scenario s;
  s.design = Design::kAsync;
  s.v = 10;
  const auto d = simulate_panel(s, rng);
  for (int i : {3, 6, 18, 30}) CHECK(d.truth.tau[static_cast<std::size_t>(i - 1)] == std::vector<int>{210});
  for (int i : {1, 4, 17, 24, 29}) CHECK(d.truth.tau[static_cast<std::size_t>(i - 1)] == std::vector<int>{190});
  for (int i : {2, 5, 23, 14}) CHECK(d.truth.tau[static_cast<std::size_t>(i - 1)] == std::vector<int>{200});
  s.v = 250;
  Rng again(1);
  CHECK_THROWS_AS(simulate_panel(s, again), ConfigError);
}

TEST_CASE("star design changes the hub and a random peripheral subset") {
  Rng rng(5);
  Scenario s;
  s.design = Design::kStar;
  s.star_changed = 9;
  const auto d = simulate_panel(s, rng);
  CHECK(members(d, "C1") == std::vector<int>{0});
  const auto c2 = members(d, "C2");
  CHECK(c2.size() == 9);
  CHECK(std::set<int>(c2.begin(), c2.end()).count(0) == 0);
  check_partition(d, 30);
  CHECK(d.truth.k(0) == 1);
}

TEST_CASE("panels are reproducible from the seed") {
  Scenario s;
  Rng a(11);
  Rng b(11);
  Rng c(12);
  const auto x = simulate_panel(s, a);
  const auto y = simulate_panel(s, b);
  const auto z = simulate_panel(s, c);
  CHECK(x.panel == y.panel);
  CHECK(!(x.panel == z.panel));
}

TEST_CASE("design graphs") {
  const auto lattice = design_graph(Design::kLatticeCluster, 30);
  CHECK(lattice.edges().size() == 49);
  // Rows of six: series 1..6 form the first row.
  CHECK(lattice.weight(0, 1) == 1.0);
  CHECK(lattice.weight(0, 6) == 1.0);
  CHECK(lattice.weight(5, 6) == 0.0);
  CHECK(design_graph(Design::kChainCluster, 30) == build_rchain(30, 2));
  CHECK(design_graph(Design::kStar, 30) == build_star(30));
  CHECK(design_from_string("lattice-cluster") == Design::kLatticeCluster);
  CHECK_THROWS_AS(design_from_string("ring"), ConfigError);
}

TEST_CASE("small experiment produces one row per cell and group") {
  auto d = ExperimentDesign::desk(Design::kChainCluster);
  d.p_bars = {-90};
  d.lambda_s = {0.0, 0.8};
  d.repetitions = 1;
  d.samplers = {{"aux", DeltaPrior{}}, {"no-aux", DeltaPrior{1.0, 1.0, 30.0}}};
  d.sampler.iterations = 3000;
  d.sampler.burn_in = 500;
  d.sampler.init_iterations = 2000;
  d.sampler.init_burn_in = 500;
  const auto rows = run_experiment(d);
  CHECK(rows.size() == 2 * 2 * 4);
  for (const auto& r : rows) {
    CHECK(r.prob_k1 >= 0.0);
    CHECK(r.prob_k1 <= 1.0);
    CHECK(r.expected_loss >= 0.0);
  }
  std::ostringstream out;
  write_results_csv(rows, out);
  const auto text = out.str();
  CHECK(text.rfind("design,p_bar,lambda_s,theta,v,star_changed,window_mode,sampler,repetition,"
                   "series_group,prob_k1,expected_loss,bayes_loss,accept_birth_death,accept_shift\n",
                   0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 17);
  // Same design, same rows.
  std::ostringstream again;
  write_results_csv(run_experiment(d), again);
  CHECK(again.str() == text);
}

TEST_CASE("full grid settings") {
  const auto d = ExperimentDesign::full(Design::kAsync);
  CHECK(d.p_bars.size() == 8);
  CHECK(d.thetas == std::vector<double>{1040, 1050, 1060});
  CHECK(d.vs == std::vector<int>{5, 10, 15});
  CHECK(d.windows.size() == 3);
  CHECK(d.repetitions == 10);
  CHECK(d.sampler.iterations == 50000);
  CHECK(d.sampler.burn_in == 10000);
}
