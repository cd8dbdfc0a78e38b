#include "graphcp/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "graphcp/error.hpp"

namespace graphcp {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == sep) {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

template <typename T>
bool parse_int(const std::string& s, T& value) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end && !s.empty();
}

bool parse_double(const std::string& s, double& value) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc() && ptr == end && !s.empty();
}

template <typename T>
T field_int(const std::vector<std::string>& fields, std::size_t k, const char* name,
            std::size_t row) {
  T value{};
  if (!parse_int(fields[k], value)) {
    throw IngestError(std::string("field '") + name + "' is not an integer: '" + fields[k] + "'",
                      row);
  }
  return value;
}

std::vector<std::string> read_header(std::istream& in, const char* what) {
  std::string line;
  if (!next_line(in, line)) throw IngestError(std::string("empty ") + what + " file");
  return split(line);
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                   const char* what) {
  if (got != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    throw IngestError(std::string(what) + " header must be '" + joined + "'", 1);
  }
}

std::string join_positions(const std::vector<int>& tau) {
  std::string out;
  for (std::size_t j = 0; j < tau.size(); ++j) {
    if (j > 0) out += ';';
    out += std::to_string(tau[j]);
  }
  return out;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

SeriesPanel read_panel_csv(std::istream& in) {
  const auto header = read_header(in, "panel");
  const bool multinomial = header.size() == 4;
  if (multinomial) {
    expect_header(header, {"series_id", "t", "category", "value"}, "panel");
  } else {
    expect_header(header, {"series_id", "t", "value"}, "panel");
  }
  struct Entry {
    int series;
    int t;
    int category;
    std::int64_t value;
    std::size_t row;
  };
  std::vector<Entry> entries;
  int L = 0;
  int T = 0;
  int M = 1;
  std::string line;
  std::size_t row = 1;
  while (next_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw IngestError("expected " + std::to_string(header.size()) + " fields, found " +
                            std::to_string(f.size()),
                        row);
    }
    Entry e{};
    e.series = field_int<int>(f, 0, "series_id", row);
    e.t = field_int<int>(f, 1, "t", row);
    e.category = multinomial ? field_int<int>(f, 2, "category", row) : 1;
    e.value = field_int<std::int64_t>(f, multinomial ? 3 : 2, "value", row);
    e.row = row;
    if (e.series < 1) throw IngestError("series_id must be >= 1", row);
    if (e.t < 1) throw IngestError("t must be >= 1", row);
    if (e.category < 1) throw IngestError("category must be >= 1", row);
    if (e.value < 0) throw IngestError("negative count " + std::to_string(e.value), row);
    L = std::max(L, e.series);
    T = std::max(T, e.t);
    M = std::max(M, e.category);
    entries.push_back(e);
  }
  if (entries.empty()) throw IngestError("panel file has no data rows");
  if (T < 2) throw IngestError("panel length must be >= 2");
  const auto cells = static_cast<std::size_t>(L) * static_cast<std::size_t>(T) *
                     static_cast<std::size_t>(M);
  std::vector<std::int64_t> data(cells, -1);
  for (const auto& e : entries) {
    const auto idx = (static_cast<std::size_t>(e.series - 1) * static_cast<std::size_t>(T) +
                      static_cast<std::size_t>(e.t - 1)) *
                         static_cast<std::size_t>(M) +
                     static_cast<std::size_t>(e.category - 1);
    if (data[idx] >= 0) throw IngestError("duplicate cell", e.row);
    data[idx] = e.value;
  }
  for (int i = 0; i < L; ++i) {
    for (int t = 0; t < T; ++t) {
      for (int m = 0; m < M; ++m) {
        const auto idx = (static_cast<std::size_t>(i) * static_cast<std::size_t>(T) +
                          static_cast<std::size_t>(t)) *
                             static_cast<std::size_t>(M) +
                         static_cast<std::size_t>(m);
        if (data[idx] >= 0) continue;
        if (multinomial) {
          throw IngestError("series " + std::to_string(i + 1) + " at t=" + std::to_string(t + 1) +
                            " lacks category " + std::to_string(m + 1) +
                            " (every cell needs categories 1.." + std::to_string(M) + ")");
        }
        throw IngestError("missing cell: series " + std::to_string(i + 1) + " at t=" +
                          std::to_string(t + 1) + " (panels must be dense, lengths equal)");
      }
    }
  }
  if (!multinomial) {
    std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) {
      rows[static_cast<std::size_t>(i)].assign(data.begin() + static_cast<std::ptrdiff_t>(i) * T,
                                               data.begin() + static_cast<std::ptrdiff_t>(i + 1) * T);
    }
    return SeriesPanel::counts(rows);
  }
  std::vector<std::vector<std::vector<std::int64_t>>> vec(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) {
    auto& series = vec[static_cast<std::size_t>(i)];
    series.resize(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      const auto base = (static_cast<std::ptrdiff_t>(i) * T + t) * M;
      series[static_cast<std::size_t>(t)].assign(data.begin() + base, data.begin() + base + M);
    }
  }
  return SeriesPanel::multinomial(vec);
}

void write_panel_csv(const SeriesPanel& panel, std::ostream& out) {
  const bool multinomial = panel.family() == ObservationFamily::kMultinomial;
  out << (multinomial ? "series_id,t,category,value\n" : "series_id,t,value\n");
  for (int i = 0; i < panel.series_count(); ++i) {
    for (int t = 1; t <= panel.length(); ++t) {
      if (!multinomial) {
        out << i + 1 << ',' << t << ',' << panel.count(i, t) << '\n';
        continue;
      }
      const auto v = panel.vector_at(i, t);
      for (std::size_t m = 0; m < v.size(); ++m) {
        out << i + 1 << ',' << t << ',' << m + 1 << ',' << v[m] << '\n';
      }
    }
  }
}

DependencyGraph read_edge_list(std::istream& in, int nodes) {
  expect_header(read_header(in, "edge list"), {"i", "j", "weight"}, "edge list");
  struct Row {
    int i;
    int j;
    double w;
    std::size_t row;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t row = 1;
  int largest = 0;
  while (next_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 3) throw IngestError("expected 3 fields", row);
    Row r{field_int<int>(f, 0, "i", row), field_int<int>(f, 1, "j", row), 0.0, row};
    if (!parse_double(f[2], r.w)) throw IngestError("weight is not a number: '" + f[2] + "'", row);
    if (r.i < 1 || r.j < 1) throw IngestError("node indices must be >= 1", row);
    if (r.i >= r.j) throw IngestError("edges must be listed once with i < j", row);
    if (!(r.w >= 0.0) || !std::isfinite(r.w)) {
      throw IngestError("weight must be finite and >= 0", row);
    }
    if (nodes > 0 && r.j > nodes) {
      throw IngestError("node " + std::to_string(r.j) + " exceeds the " + std::to_string(nodes) +
                            " series of the panel",
                        row);
    }
    largest = std::max(largest, r.j);
    rows.push_back(r);
  }
  DependencyGraph g(nodes > 0 ? nodes : largest);
  std::set<std::pair<int, int>> seen;
  for (const auto& r : rows) {
    if (!seen.insert({r.i, r.j}).second) throw IngestError("duplicate edge", r.row);
    g.set_weight(r.i - 1, r.j - 1, r.w);
  }
  return g;
}

void write_edge_list(const DependencyGraph& graph, std::ostream& out) {
  out << "i,j,weight\n";
  for (const auto& e : graph.edges()) {
    out << e.a + 1 << ',' << e.b + 1 << ',' << format_number(e.weight) << '\n';
  }
}

void write_states_csv(const ChangepointState& state, std::ostream& out) {
  out << "series,k,positions\n";
  for (int i = 0; i < state.series_count(); ++i) {
    out << i + 1 << ',' << state.k(i) << ',' << join_positions(state.tau[static_cast<std::size_t>(i)])
        << '\n';
  }
}

ChangepointState read_states_csv(std::istream& in, int series) {
  expect_header(read_header(in, "states"), {"series", "k", "positions"}, "states");
  std::map<int, std::vector<int>> rows;
  std::string line;
  std::size_t row = 1;
  while (next_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 3) throw IngestError("expected 3 fields", row);
    const int i = field_int<int>(f, 0, "series", row);
    const int k = field_int<int>(f, 1, "k", row);
    if (i < 1 || (series > 0 && i > series)) throw IngestError("series out of range", row);
    std::vector<int> tau;
    if (!f[2].empty()) {
      for (const auto& p : split(f[2], ';')) {
        int x = 0;
        if (!parse_int(p, x)) throw IngestError("bad position '" + p + "'", row);
        tau.push_back(x);
      }
    }
    if (static_cast<int>(tau.size()) != k) throw IngestError("k does not match positions", row);
    if (!rows.emplace(i, std::move(tau)).second) throw IngestError("duplicate series", row);
  }
  const int L = series > 0 ? series : (rows.empty() ? 0 : rows.rbegin()->first);
  ChangepointState state(L);
  for (auto& [i, tau] : rows) state.tau[static_cast<std::size_t>(i - 1)] = std::move(tau);
  return state;
}

void write_samples_csv(const PosteriorSample& sample, std::ostream& out) {
  out << "iteration,series,position,lag,window\n";
  for (const auto& run : sample.runs) {
    const auto& s = run.snapshot;
    // Format one draw once, then repeat it for the run.
    std::string block;
    for (int i = 0; i < sample.series_count; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const auto& tau = s.latent.tau[u];
      for (std::size_t j = 0; j < tau.size(); ++j) {
        block += ',' + std::to_string(i + 1) + ',' + std::to_string(tau[j] + s.lags[u][j]) + ',' +
                 std::to_string(s.lags[u][j]) + ',' + std::to_string(s.windows[u]) + '\n';
      }
    }
    if (block.empty()) continue;
    for (std::uint64_t n = run.first_draw; n < run.first_draw + run.count; ++n) {
      const std::string iteration = std::to_string(sample.iteration_of(n));
      std::size_t start = 0;
      while (start < block.size()) {
        const auto end = block.find('\n', start);
        out << iteration;
        out.write(block.data() + start, static_cast<std::streamsize>(end - start + 1));
        start = end + 1;
      }
    }
  }
}

PosteriorSample read_samples_csv(std::istream& in, int series, int length, std::uint64_t thin,
                                 std::uint64_t draws) {
  expect_header(read_header(in, "samples"), {"iteration", "series", "position", "lag", "window"},
                "samples");
  if (thin == 0) throw IngestError("thin must be positive");
  std::map<std::uint64_t, std::vector<std::array<int, 4>>> by_draw;
  std::string line;
  std::size_t row = 1;
  while (next_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) throw IngestError("expected 5 fields", row);
    const auto iteration = field_int<std::uint64_t>(f, 0, "iteration", row);
    const int i = field_int<int>(f, 1, "series", row);
    const int position = field_int<int>(f, 2, "position", row);
    const int lag = field_int<int>(f, 3, "lag", row);
    const int window = field_int<int>(f, 4, "window", row);
    if (iteration == 0 || iteration % thin != 0 || iteration / thin > draws) {
      throw IngestError("iteration " + std::to_string(iteration) + " is not a stored draw", row);
    }
    if (i < 1 || i > series) throw IngestError("series out of range", row);
    if (lag < 0 || lag > window) throw IngestError("lag outside [0, window]", row);
    if (position - lag < 2 || position > length) {
      throw IngestError("position outside {2..T}", row);
    }
    by_draw[iteration / thin - 1].push_back({i - 1, position, lag, window});
  }
  PosteriorSample sample;
  sample.series_count = series;
  sample.length = length;
  sample.thin = thin;
  sample.total_iterations = draws * thin;
  auto it = by_draw.begin();
  for (std::uint64_t n = 0; n < draws; ++n) {
    LaggedState state(ChangepointState{series});
    if (it != by_draw.end() && it->first == n) {
      for (const auto& [i, position, lag, window] : it->second) {
        const auto u = static_cast<std::size_t>(i);
        state.latent.tau[u].push_back(position - lag);
        state.lags[u].push_back(lag);
        state.windows[u] = window;
      }
      ++it;
    }
    try {
      state.validate(length);
    } catch (const ValidationError& e) {
      throw IngestError("draw at iteration " + std::to_string(sample.iteration_of(n)) + ": " +
                        e.what());
    }
    const bool unchanged = !sample.runs.empty() && sample.runs.back().snapshot == state;
    sample.append(state, 0.0, unchanged);
  }
  sample.delta_trace.clear();
  return sample;
}

void write_k_marginals_csv(const MarginalSummary& summary, std::ostream& out) {
  out << "series,k,probability\n";
  for (std::size_t i = 0; i < summary.k_probs.size(); ++i) {
    for (std::size_t m = 0; m < summary.k_probs[i].size(); ++m) {
      out << i + 1 << ',' << m << ',' << format_number(summary.k_probs[i][m]) << '\n';
    }
  }
}

void write_s_marginals_csv(const MarginalSummary& summary, std::ostream& out) {
  out << "series,t,probability\n";
  for (std::size_t i = 0; i < summary.s_probs.size(); ++i) {
    for (std::size_t t = 0; t < summary.s_probs[i].size(); ++t) {
      out << i + 1 << ',' << t + 2 << ',' << format_number(summary.s_probs[i][t]) << '\n';
    }
  }
}

void write_scores_csv(const ChangepointState& estimates, const ConnectednessScores& scores,
                      std::ostream& out) {
  out << "series,k,m\n";
  for (int i = 0; i < estimates.series_count(); ++i) {
    out << i + 1 << ',' << estimates.k(i) << ','
        << format_number(scores.m[static_cast<std::size_t>(i)]) << '\n';
  }
}

void write_connectedness_csv(const ChangepointState& estimates,
                             const ConnectednessScores& scores, std::ostream& out) {
  out << "series,j,position,c\n";
  for (int i = 0; i < estimates.series_count(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < estimates.tau[u].size(); ++j) {
      out << i + 1 << ',' << j + 1 << ',' << estimates.tau[u][j] << ','
          << format_number(scores.c[u][j]) << '\n';
    }
  }
}

AuthIngest ingest_auth_events(std::istream& in, std::size_t max_pair_events,
                              std::size_t max_users_per_source) {
  struct Event {
    std::int64_t time;
    std::string user;
    std::string source;
  };
  AuthIngest result;
  std::vector<Event> events;
  std::string line;
  std::size_t row = 0;
  while (next_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split(line);
    if (row == 1 && !f.empty() && f[0] == "time") continue;  // header
    std::int64_t time = 0;
    if (f.size() != 4 || !parse_int(f[0], time) || f[1].empty() || f[2].empty()) {
      ++result.skipped_rows;
      continue;
    }
    events.push_back({time, f[1], f[2]});
  }

  std::map<std::pair<std::string, std::string>, std::size_t> pair_count;
  for (const auto& e : events) ++pair_count[{e.user, e.source}];
  std::vector<Event> kept;
  for (auto& e : events) {
    if (pair_count[{e.user, e.source}] > max_pair_events) {
      ++result.dropped_pair_events;
    } else {
      kept.push_back(std::move(e));
    }
  }
  std::map<std::string, std::set<std::string>> source_users;
  for (const auto& e : kept) source_users[e.source].insert(e.user);
  std::vector<Event> filtered;
  for (auto& e : kept) {
    if (source_users[e.source].size() > max_users_per_source) {
      ++result.dropped_source_events;
    } else {
      filtered.push_back(std::move(e));
    }
  }
  if (filtered.empty()) throw IngestError("no authentication events left after filtering");

  auto floor_div = [](std::int64_t a, std::int64_t b) {
    return a / b - ((a % b != 0) && ((a < 0) != (b < 0)) ? 1 : 0);
  };
  std::set<std::string> user_set;
  std::set<std::string> source_set;
  std::int64_t first = INT64_MAX;
  std::int64_t last = INT64_MIN;
  for (const auto& e : filtered) {
    user_set.insert(e.user);
    source_set.insert(e.source);
    const auto hour = floor_div(e.time, 3600);
    first = std::min(first, hour);
    last = std::max(last, hour);
  }
  result.users.assign(user_set.begin(), user_set.end());
  result.sources.assign(source_set.begin(), source_set.end());
  result.first_hour = first;
  const auto T = static_cast<std::size_t>(last - first + 1);
  if (T < 2) throw IngestError("events span a single hour; a panel needs at least 2 hours");
  std::unordered_map<std::string, int> user_id;
  std::unordered_map<std::string, int> source_id;
  for (std::size_t i = 0; i < result.users.size(); ++i) {
    user_id[result.users[i]] = static_cast<int>(i);
  }
  for (std::size_t m = 0; m < result.sources.size(); ++m) {
    source_id[result.sources[m]] = static_cast<int>(m);
  }
  const std::size_t M = result.sources.size();
  std::vector<std::vector<std::vector<std::int64_t>>> cells(
      result.users.size(), std::vector<std::vector<std::int64_t>>(T, std::vector<std::int64_t>(M, 0)));
  std::map<std::pair<int, std::int64_t>, std::set<int>> day_users;  // (source, day) -> users
  for (const auto& e : filtered) {
    const int i = user_id[e.user];
    const int m = source_id[e.source];
    const auto t = static_cast<std::size_t>(floor_div(e.time, 3600) - first);
    ++cells[static_cast<std::size_t>(i)][t][static_cast<std::size_t>(m)];
    day_users[{m, floor_div(e.time, 86400)}].insert(i);
  }
  result.panel = SeriesPanel::multinomial(cells);
  result.graph = DependencyGraph(static_cast<int>(result.users.size()));
  for (const auto& [key, users] : day_users) {
    for (auto a = users.begin(); a != users.end(); ++a) {
      for (auto b = std::next(a); b != users.end(); ++b) result.graph.set_weight(*a, *b, 1.0);
    }
  }
  return result;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * size);
  for (unsigned int k = 0; k < size; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 15]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace graphcp
