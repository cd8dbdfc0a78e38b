#include "graphcp/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "graphcp/config.hpp"
#include "graphcp/error.hpp"
#include "graphcp/estimator.hpp"
#include "graphcp/graphs.hpp"
#include "graphcp/io.hpp"
#include "graphcp/sampler.hpp"
#include "graphcp/simulation.hpp"

namespace graphcp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

template <typename Writer>
void write_to(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  writer(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  return in;
}

std::string with_file(const std::string& path, const std::exception& e) {
  return path + ": " + e.what();
}

SeriesPanel load_panel(const std::string& path) {
  auto in = open_input(path);
  try {
    return read_panel_csv(in);
  } catch (const IngestError& e) {
    throw IngestError(with_file(path, e));
  }
}

DependencyGraph load_graph(const std::string& path, int nodes) {
  auto in = open_input(path);
  try {
    return read_edge_list(in, nodes);
  } catch (const IngestError& e) {
    throw IngestError(with_file(path, e));
  }
}

json model_json(const ObservationModel& model) {
  if (const auto* pg = std::get_if<PoissonGamma>(&model)) {
    return {{"family", "poisson_gamma"}, {"shape", pg->shape}, {"rate", pg->rate}};
  }
  return {{"family", "multinomial_dirichlet"},
          {"alpha", std::get<MultinomialDirichlet>(model).alpha}};
}

json delta_summary(const std::vector<double>& trace) {
  if (trace.empty()) return {{"draws", 0}};
  const auto zeros = std::count(trace.begin(), trace.end(), 0.0);
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) /
                      static_cast<double>(trace.size());
  return {{"draws", trace.size()},
          {"mean", mean},
          {"min", *std::min_element(trace.begin(), trace.end())},
          {"max", *std::max_element(trace.begin(), trace.end())},
          {"zero_fraction", static_cast<double>(zeros) / static_cast<double>(trace.size())}};
}

int cmd_simulate(const std::string& scenario_name, const Scenario& base, std::uint64_t seed,
                 const std::string& out_dir, std::ostream& out) {
  Scenario scenario = base;
  scenario.design = design_from_string(scenario_name);
  Rng rng(seed);
  const auto data = simulate_panel(scenario, rng);
  const auto dir = prepare_out(out_dir);
  write_to(dir / "panel.csv", [&](std::ostream& o) { write_panel_csv(data.panel, o); });
  write_to(dir / "truth.csv", [&](std::ostream& o) { write_states_csv(data.truth, o); });
  write_to(dir / "graph.csv", [&](std::ostream& o) {
    write_edge_list(design_graph(scenario.design, scenario.series), o);
  });
  write_to(dir / "groups.csv", [&](std::ostream& o) {
    o << "series,group\n";
    std::vector<std::string> group(static_cast<std::size_t>(scenario.series));
    for (const auto& g : data.groups) {
      for (int i : g.members) group[static_cast<std::size_t>(i)] = g.name;
    }
    for (std::size_t i = 0; i < group.size(); ++i) o << i + 1 << ',' << group[i] << '\n';
  });
  out << "wrote panel.csv, truth.csv, graph.csv, groups.csv to " << dir.string() << '\n';
  return 0;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  try {
    return parse_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(with_file(path, e));
  }
}

int cmd_sample(const std::string& panel_path, const std::string& graph_path,
               const std::string& config_path, const std::optional<std::uint64_t>& seed,
               const std::string& out_dir, std::ostream& out) {
  RunConfig config = load_config(config_path);
  if (seed) config.sampler.seed = *seed;
  const auto panel = load_panel(panel_path);
  DependencyGraph graph(panel.series_count());
  if (!graph_path.empty()) graph = load_graph(graph_path, panel.series_count());
  if (config.lambda_s) {
    graph = scale_weights(graph, config.hyper.p_bar, *config.lambda_s, config.degree_mode);
  }
  const auto model = resolve_model(config, panel);
  config.hyper.validate(panel.series_count());
  const auto sample = run_chain(panel, model, graph, config.hyper, config.sampler);

  const auto dir = prepare_out(out_dir);
  write_to(dir / "samples.csv", [&](std::ostream& o) { write_samples_csv(sample, o); });
  json manifest;
  const auto config_text = config_to_json(config);
  manifest["tool"] = "graphcp";
  manifest["command"] = "sample";
  manifest["seed"] = config.sampler.seed;
  manifest["config"] = json::parse(config_text);
  manifest["config_sha256"] = sha256_hex(config_text);
  manifest["model"] = model_json(model);
  manifest["inputs"]["panel"] = {{"path", panel_path}, {"sha256", sha256_file(panel_path)}};
  if (!graph_path.empty()) {
    manifest["inputs"]["graph"] = {{"path", graph_path}, {"sha256", sha256_file(graph_path)}};
  }
  if (!config_path.empty()) {
    manifest["inputs"]["config"] = {{"path", config_path}, {"sha256", sha256_file(config_path)}};
  }
  manifest["series"] = sample.series_count;
  manifest["length"] = sample.length;
  manifest["burn_in"] = sample.burn_in;
  manifest["iterations"] = sample.total_iterations;
  manifest["thin"] = sample.thin;
  manifest["draws"] = sample.draw_count();
  manifest["distinct_states"] = sample.runs.size();
  json moves = json::object();
  for (std::size_t m = 0; m < kMoveTypeCount; ++m) {
    const auto& c = sample.moves[m];
    moves[to_string(static_cast<MoveType>(m))] = {{"proposed", c.proposed},
                                                  {"accepted", c.accepted},
                                                  {"rejected", c.rejected},
                                                  {"invalid", c.invalid},
                                                  {"skipped", c.skipped},
                                                  {"acceptance_rate", c.acceptance_rate()}};
  }
  manifest["moves"] = moves;
  manifest["delta"] = delta_summary(sample.delta_trace);
  write_to(dir / "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  out << "stored " << sample.draw_count() << " draws (" << sample.runs.size()
      << " runs) in " << dir.string() << '\n';
  return 0;
}

PosteriorSample load_sample(const std::string& run_dir) {
  const fs::path dir(run_dir);
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw IngestError((dir / "manifest.json").string() + ": " + e.what());
  }
  const auto get = [&](const char* key) -> std::uint64_t {
    if (!manifest.contains(key) || !manifest.at(key).is_number_unsigned()) {
      throw IngestError((dir / "manifest.json").string() + ": missing or invalid '" + key + "'");
    }
    return manifest.at(key).get<std::uint64_t>();
  };
  const auto path = (dir / "samples.csv").string();
  auto in = open_input(path);
  try {
    return read_samples_csv(in, static_cast<int>(get("series")), static_cast<int>(get("length")),
                            get("thin"), get("draws"));
  } catch (const IngestError& e) {
    throw IngestError(with_file(path, e));
  }
}

int cmd_estimate(const std::string& run_dir, double gamma, const std::string& out_dir,
                 std::ostream& out) {
  if (!(gamma >= 0.0)) throw DomainError("--gamma must be >= 0");
  const auto sample = load_sample(run_dir);
  ChangepointState estimates(sample.series_count);
  for (int i = 0; i < sample.series_count; ++i) {
    estimates.tau[static_cast<std::size_t>(i)] = bayes_estimate(sample, i, gamma);
  }
  const auto summary = marginal_summaries(sample);
  const auto dir = prepare_out(out_dir);
  write_to(dir / "estimates.csv", [&](std::ostream& o) { write_states_csv(estimates, o); });
  write_to(dir / "k_marginals.csv", [&](std::ostream& o) { write_k_marginals_csv(summary, o); });
  write_to(dir / "s_marginals.csv", [&](std::ostream& o) { write_s_marginals_csv(summary, o); });
  out << "wrote estimates.csv, k_marginals.csv, s_marginals.csv to " << dir.string() << '\n';
  return 0;
}

int cmd_score(const std::string& estimates_path, const std::string& graph_path, double varpi,
              const std::string& out_dir, std::ostream& out) {
  auto in = open_input(estimates_path);
  ChangepointState estimates;
  try {
    estimates = read_states_csv(in);
  } catch (const IngestError& e) {
    throw IngestError(with_file(estimates_path, e));
  }
  const auto graph = load_graph(graph_path, estimates.series_count());
  const auto scores = connectedness_scores(graph, estimates, varpi);
  const auto dir = prepare_out(out_dir);
  write_to(dir / "scores.csv", [&](std::ostream& o) { write_scores_csv(estimates, scores, o); });
  write_to(dir / "connectedness.csv",
           [&](std::ostream& o) { write_connectedness_csv(estimates, scores, o); });
  out << "wrote scores.csv, connectedness.csv to " << dir.string() << '\n';
  return 0;
}

struct GraphArgs {
  std::string motif;
  int nodes = 30;
  int rows = 5;
  int cols = 6;
  int r = 2;
  std::optional<double> lambda_s;
  double p_bar = -90.0;
  std::string degree_mode = "max";
};

int cmd_graph(const GraphArgs& a, const std::string& out_dir, std::ostream& out) {
  DependencyGraph g;
  if (a.motif == "star") {
    g = build_star(a.nodes);
  } else if (a.motif == "lattice") {
    g = build_lattice(a.rows, a.cols);
  } else if (a.motif == "rchain") {
    g = build_rchain(a.nodes, a.r);
  } else {
    throw ConfigError("unknown motif '" + a.motif + "' (expected star, lattice or rchain)");
  }
  if (a.lambda_s) g = scale_weights(g, a.p_bar, *a.lambda_s, degree_mode_from_string(a.degree_mode));
  const auto dir = prepare_out(out_dir);
  write_to(dir / "graph.csv", [&](std::ostream& o) { write_edge_list(g, o); });
  out << "wrote graph.csv (" << g.node_count() << " nodes, " << g.edges().size() << " edges) to "
      << dir.string() << '\n';
  return 0;
}

int cmd_ingest(const std::string& events_path, std::size_t max_pair, std::size_t max_users,
               const std::string& out_dir, std::ostream& out) {
  auto in = open_input(events_path);
  AuthIngest result;
  try {
    result = ingest_auth_events(in, max_pair, max_users);
  } catch (const IngestError& e) {
    throw IngestError(with_file(events_path, e));
  }
  const auto dir = prepare_out(out_dir);
  write_to(dir / "panel.csv", [&](std::ostream& o) { write_panel_csv(result.panel, o); });
  write_to(dir / "graph.csv", [&](std::ostream& o) { write_edge_list(result.graph, o); });
  write_to(dir / "users.csv", [&](std::ostream& o) {
    o << "series,user\n";
    for (std::size_t i = 0; i < result.users.size(); ++i) o << i + 1 << ',' << result.users[i] << '\n';
  });
  write_to(dir / "sources.csv", [&](std::ostream& o) {
    o << "category,source\n";
    for (std::size_t m = 0; m < result.sources.size(); ++m) {
      o << m + 1 << ',' << result.sources[m] << '\n';
    }
  });
  json manifest = {{"tool", "graphcp"},
                   {"command", "ingest-auth"},
                   {"inputs", {{"events", {{"path", events_path}, {"sha256", sha256_file(events_path)}}}}},
                   {"max_pair_events", max_pair},
                   {"max_users_per_source", max_users},
                   {"first_hour", result.first_hour},
                   {"hours", result.panel.length()},
                   {"users", result.users.size()},
                   {"sources", result.sources.size()},
                   {"edges", result.graph.edges().size()},
                   {"skipped_rows", result.skipped_rows},
                   {"dropped_pair_events", result.dropped_pair_events},
                   {"dropped_source_events", result.dropped_source_events}};
  write_to(dir / "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  out << "ingested " << result.users.size() << " users x " << result.panel.length() << " hours x "
      << result.sources.size() << " sources (" << result.skipped_rows << " rows skipped) into "
      << dir.string() << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string design = "chain-cluster";
  bool full_grid = false;
  bool ablation = false;
  std::optional<std::uint64_t> iterations;
  std::optional<std::uint64_t> burn_in;
  std::optional<int> repetitions;
};

int cmd_experiment(const ExperimentArgs& a, std::uint64_t seed, const std::string& out_dir,
                   std::ostream& out) {
  const Design design = design_from_string(a.design);
  auto exp = a.full_grid ? ExperimentDesign::full(design) : ExperimentDesign::desk(design);
  exp.seed = seed;
  if (a.ablation) {
    DeltaPrior off;
    off.spike = 1.0;
    exp.samplers = {{"aux", DeltaPrior{}}, {"no-aux", off}};
  }
  if (a.iterations) exp.sampler.iterations = *a.iterations;
  if (a.burn_in) exp.sampler.burn_in = *a.burn_in;
  if (a.repetitions) exp.repetitions = *a.repetitions;
  const auto rows = run_experiment(exp);
  const auto dir = prepare_out(out_dir);
  write_to(dir / "results.csv", [&](std::ostream& o) { write_results_csv(rows, o); });
  out << "wrote " << rows.size() << " rows to " << (dir / "results.csv").string() << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian changepoint detection for graph-coupled time series", "graphcp"};
  app.require_subcommand(1);
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> seed_override;
  std::string config_path;

  auto* simulate = app.add_subcommand("simulate", "Simulate a panel with planted changepoints");
  std::string scenario = "chain-cluster";
  Scenario sc;
  simulate->add_option("--scenario", scenario,
                       "lattice-cluster | chain-cluster | star | async")->capture_default_str();
  simulate->add_option("--theta", sc.theta, "Post-change mean")->capture_default_str();
  simulate->add_option("--v", sc.v, "Asynchrony offset (async)")->capture_default_str();
  simulate->add_option("--star-changed", sc.star_changed,
                       "Changed peripheral series (star)")->capture_default_str();
  simulate->add_option("--seed", seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Draw from the changepoint posterior");
  std::string panel_path;
  std::string graph_path;
  sample->add_option("--panel", panel_path, "Panel CSV")->required();
  sample->add_option("--graph", graph_path, "Edge-list CSV (default: no edges)");
  sample->add_option("--config", config_path, "JSON configuration");
  sample->add_option("--seed", seed_override, "Override sampler.seed");
  sample->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* estimate = app.add_subcommand("estimate", "Bayes estimates and marginal summaries");
  std::string samples_dir;
  double gamma = 40.0;
  estimate->add_option("--samples", samples_dir, "Directory written by sample")->required();
  estimate->add_option("--gamma", gamma, "Loss truncation")->capture_default_str();
  estimate->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* score = app.add_subcommand("score", "Connectedness scores of estimated changepoints");
  std::string estimates_path;
  double varpi = 24.0;
  score->add_option("--estimates", estimates_path, "estimates.csv")->required();
  score->add_option("--graph", graph_path, "Edge-list CSV")->required();
  score->add_option("--varpi", varpi, "Neighbourhood window")->capture_default_str();
  score->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* graph = app.add_subcommand("graph", "Build a dependency-graph motif");
  GraphArgs ga;
  graph->add_option("--motif", ga.motif, "star | lattice | rchain")->required();
  graph->add_option("--nodes", ga.nodes, "Node count (star, rchain)")->capture_default_str();
  graph->add_option("--rows", ga.rows, "Lattice rows")->capture_default_str();
  graph->add_option("--cols", ga.cols, "Lattice columns")->capture_default_str();
  graph->add_option("--r", ga.r, "r-chain bandwidth")->capture_default_str();
  graph->add_option("--lambda-s", ga.lambda_s, "Scale weights to lambda_s |p_bar| / n");
  graph->add_option("--p-bar", ga.p_bar, "p_bar used for scaling")->capture_default_str();
  graph->add_option("--degree-mode", ga.degree_mode, "max | mean")->capture_default_str();
  graph->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest-auth", "Aggregate an authentication event log");
  std::string events_path;
  std::size_t max_pair = 5000;
  std::size_t max_users = 300;
  ingest->add_option("--events", events_path, "CSV: time,user,source,destination")->required();
  ingest->add_option("--max-pair-events", max_pair, "Drop user-source pairs above this count")
      ->capture_default_str();
  ingest->add_option("--max-users-per-source", max_users,
                     "Drop sources used by more users than this")->capture_default_str();
  ingest->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* experiment = app.add_subcommand("experiment", "Run a simulation-study grid");
  ExperimentArgs ea;
  experiment->add_option("--design", ea.design, "lattice-cluster | chain-cluster | star | async")
      ->capture_default_str();
  experiment->add_flag("--full-grid", ea.full_grid, "Full hyperparameter grids, ten repetitions");
  experiment->add_flag("--ablation", ea.ablation, "Also run with delta fixed at 0");
  experiment->add_option("--iterations", ea.iterations, "Override stored iterations");
  experiment->add_option("--burn-in", ea.burn_in, "Override burn-in");
  experiment->add_option("--repetitions", ea.repetitions, "Override repetitions");
  experiment->add_option("--seed", seed, "Random seed")->capture_default_str();
  experiment->add_option("--out", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "graphcp: error[validation]: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*simulate) return cmd_simulate(scenario, sc, seed, out_dir, out);
    if (*sample) return cmd_sample(panel_path, graph_path, config_path, seed_override, out_dir, out);
    if (*estimate) return cmd_estimate(samples_dir, gamma, out_dir, out);
    if (*score) return cmd_score(estimates_path, graph_path, varpi, out_dir, out);
    if (*graph) return cmd_graph(ga, out_dir, out);
    if (*ingest) return cmd_ingest(events_path, max_pair, max_users, out_dir, out);
    if (*experiment) return cmd_experiment(ea, seed, out_dir, out);
  } catch (const ValidationError& e) {
    err << "graphcp: error[validation]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "graphcp: error[runtime]: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace graphcp
