#pragma once

// Synthetic panels with planted changepoints and the grid experiments run on
// them.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "graphcp/graphs.hpp"
#include "graphcp/likelihood.hpp"
#include "graphcp/model.hpp"
#include "graphcp/rng.hpp"
#include "graphcp/sampler.hpp"

namespace graphcp {

enum class Design { kLatticeCluster, kChainCluster, kStar, kAsync };

std::string to_string(Design design);
Design design_from_string(const std::string& name);

/// Series indices below are 1-based, as in file formats.
struct Scenario {
  Design design = Design::kChainCluster;
  int series = 30;
  int length = 300;
  int change_at = 200;
  double baseline = 1000.0;
  double theta = 1050.0;     // post-change mean of the changed series
  int v = 10;                // kAsync offset
  int star_changed = 9;      // kStar: number of changed peripheral series
  double peripheral_theta = 1100.0;
};

struct SeriesGroup {
  std::string name;
  std::vector<int> members;  // 0-based
};

struct SimulatedData {
  SeriesPanel panel;
  ChangepointState truth;
  /// Disjoint, covering every series: C1, C2, C3 (cluster designs), N.
  std::vector<SeriesGroup> groups;
};

/// Poisson counts: mean `baseline` before the planted changepoint, the
/// design's post-change mean after it. The star design draws its changed
/// peripheral subset from `rng` before any count.
SimulatedData simulate_panel(const Scenario& scenario, Rng& rng);

/// Graph the design is analysed with: 5 x 6 lattice (rows of six series),
/// 2-chain, or star.
DependencyGraph design_graph(Design design, int series);

/// Gamma(100, 0.1): prior mean 1000.
ObservationModel simulation_model();

struct ExperimentDesign {
  std::string name = "cluster";
  Design design = Design::kChainCluster;
  std::vector<double> p_bars{-60.0, -90.0, -120.0};
  std::vector<double> lambda_s{0.0, 0.4, 0.8};
  std::vector<double> thetas{1050.0};
  std::vector<int> vs{10};
  std::vector<int> star_sizes{9};
  std::vector<WindowPrior> windows{WindowPrior{}};
  /// Delta priors compared side by side, e.g. {"aux", default prior} and
  /// {"no-aux", spike 1}.
  std::vector<std::pair<std::string, DeltaPrior>> samplers{{"aux", DeltaPrior{}}};
  int repetitions = 3;
  double gamma_loss = 40.0;
  DegreeMode degree_mode = DegreeMode::kMax;
  SamplerConfig sampler;
  std::uint64_t seed = 1;

  /// Full grids: p_bar -60..-130, lambda_s 0..0.8, theta {1040, 1050, 1060},
  /// v {5, 10, 15}, ten repetitions, 50 000 draws after 10 000 burn-in.
  static ExperimentDesign full(Design design);
  /// Desk-scale default: three p_bar, three lambda_s, three repetitions.
  static ExperimentDesign desk(Design design);
};

struct ResultRow {
  std::string design;
  double p_bar = 0.0;
  double lambda_s = 0.0;
  double theta = 0.0;
  int v = 0;
  int star_changed = 0;
  std::string window_mode;
  std::string sampler;
  int repetition = 0;
  std::string series_group;
  double prob_k1 = 0.0;        // group mean of P(k_i = 1)
  double expected_loss = 0.0;  // group mean of posterior expected loss vs truth
  double bayes_loss = 0.0;     // group mean loss of the Bayes estimate vs truth
  double accept_birth_death = 0.0;
  double accept_shift = 0.0;
};

/// Seeds: the panel of a (theta, v, star size, repetition) cell is shared by
/// every hyperparameter setting, and the chain seed does not depend on
/// lambda_s or on the delta prior.
std::vector<ResultRow> run_experiment(const ExperimentDesign& design);

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);

}  // namespace graphcp
