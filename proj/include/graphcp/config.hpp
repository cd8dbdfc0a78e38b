#pragma once

// JSON run configuration shared by the CLI subcommands.
//
// {
//   "model": {"family": "poisson_gamma", "shape": 100, "rate": 0.1}
//          | {"family": "multinomial_dirichlet", "alpha": 1.0 | [a_1, ..., a_M]},
//   "p_bar": -90,
//   "delta_prior": {"spike": 0.5, "shape1": 1, "shape2": 30},
//   "window_prior": {"mode": "zero" | "fixed" | "geometric", "w": 30, "eta": 0.9}
//                 | [one object per series],
//   "gamma_loss": 40,
//   "varpi": 24,
//   "graph_scaling": {"lambda_s": 0.4, "degree_mode": "max" | "mean"},
//   "sampler": {"iterations": 50000, "burn_in": 10000, "thin": 1,
//               "move_weights": {"birth_death": 0.4, "shift": 0.3, "aux": 0.2,
//                                "lag": 0.05, "window": 0.05},
//               "rho": 0.5, "seed": 1, "init": "cold" | "independent-fit",
//               "init_iterations": 20000, "init_burn_in": 5000,
//               "keep_idle_moves": false}
// }
//
// Every key is optional; unknown keys are rejected.

#include <optional>
#include <string>

#include "graphcp/graphs.hpp"
#include "graphcp/likelihood.hpp"
#include "graphcp/model.hpp"
#include "graphcp/sampler.hpp"

namespace graphcp {

struct RunConfig {
  std::optional<ObservationModel> model;
  Hyperparameters hyper;
  SamplerConfig sampler;
  /// When set, input edge weights are replaced by lambda_s |p_bar| / n.
  std::optional<double> lambda_s;
  DegreeMode degree_mode = DegreeMode::kMax;
};

/// Throws ConfigError naming the offending key.
RunConfig parse_config(const std::string& json_text);

/// Canonical JSON (sorted keys, no whitespace) with every field filled in.
std::string config_to_json(const RunConfig& config);

/// The configured model, or Gamma(1, 1) / Dirichlet(1, ..., 1) to match the
/// panel. A scalar Dirichlet alpha is broadcast to the panel's categories.
ObservationModel resolve_model(const RunConfig& config, const SeriesPanel& panel);

}  // namespace graphcp
