#pragma once

// File formats. Every CSV has a header line, comma separators, no quoting,
// '\n' line ends; series and time indices are 1-based.
//
//   panel (counts)       series_id,t,value
//   panel (multinomial)  series_id,t,category,value
//   edge list            i,j,weight          (i < j, one line per edge)
//   samples              iteration,series,position,lag,window
//   states               series,k,positions  (positions joined by ';')
//   k marginals          series,k,probability
//   S marginals          series,t,probability
//   scores               series,k,m
//   connectedness        series,j,position,c
//   auth events          time,user,source,destination

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "graphcp/estimator.hpp"
#include "graphcp/graphs.hpp"
#include "graphcp/model.hpp"
#include "graphcp/posterior.hpp"

namespace graphcp {

/// Shortest round-tripping decimal form.
std::string format_number(double x);

/// Reads either panel layout (chosen by the header). Every (series, t) cell,
/// and for multinomial panels every category 1..M, must appear exactly once.
SeriesPanel read_panel_csv(std::istream& in);
void write_panel_csv(const SeriesPanel& panel, std::ostream& out);

/// `nodes` fixes the node count; 0 infers it from the largest index.
DependencyGraph read_edge_list(std::istream& in, int nodes = 0);
void write_edge_list(const DependencyGraph& graph, std::ostream& out);

void write_states_csv(const ChangepointState& state, std::ostream& out);
/// `series` fixes the series count; 0 infers it from the largest index.
ChangepointState read_states_csv(std::istream& in, int series = 0);

/// One row per changepoint per stored draw. Draws without changepoints leave
/// no rows; read_samples_csv rebuilds them from the draw count and thin.
void write_samples_csv(const PosteriorSample& sample, std::ostream& out);
PosteriorSample read_samples_csv(std::istream& in, int series, int length, std::uint64_t thin,
                                 std::uint64_t draws);

void write_k_marginals_csv(const MarginalSummary& summary, std::ostream& out);
void write_s_marginals_csv(const MarginalSummary& summary, std::ostream& out);

void write_scores_csv(const ChangepointState& estimates, const ConnectednessScores& scores,
                      std::ostream& out);
void write_connectedness_csv(const ChangepointState& estimates,
                             const ConnectednessScores& scores, std::ostream& out);

struct AuthIngest {
  SeriesPanel panel;        // hourly logon counts per source, one series per user
  DependencyGraph graph;    // users sharing a source on the same day
  std::vector<std::string> users;    // series order
  std::vector<std::string> sources;  // category order
  std::int64_t first_hour = 0;       // hour index (UTC, seconds / 3600) of t = 1
  std::size_t skipped_rows = 0;
  std::size_t dropped_pair_events = 0;
  std::size_t dropped_source_events = 0;
};

/// Removes every event of a (user, source) pair seen more than
/// `max_pair_events` times, then every event from a source used by more than
/// `max_users_per_source` distinct users. Times are integer seconds; hour and
/// day are floor(time / 3600) and floor(time / 86400).
AuthIngest ingest_auth_events(std::istream& in, std::size_t max_pair_events = 5000,
                              std::size_t max_users_per_source = 300);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

}  // namespace graphcp
