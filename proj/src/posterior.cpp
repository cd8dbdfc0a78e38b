#include "graphcp/posterior.hpp"

#include <algorithm>
#include <map>

namespace graphcp {

std::string to_string(MoveType type) {
  switch (type) {
    case MoveType::kBirthDeath:
      return "birth_death";
    case MoveType::kShift:
      return "shift";
    case MoveType::kAuxUpdate:
      return "aux_update";
    case MoveType::kLagUpdate:
      return "lag_update";
    case MoveType::kWindowUpdate:
      return "window_update";
  }
  return "unknown";
}

void MoveCounters::record(MoveOutcome outcome) {
  ++proposed;
  switch (outcome) {
    case MoveOutcome::kAccepted:
      ++accepted;
      break;
    case MoveOutcome::kRejected:
      ++rejected;
      break;
    case MoveOutcome::kInvalid:
      ++invalid;
      break;
    case MoveOutcome::kSkipped:
      ++skipped;
      break;
  }
}

std::uint64_t PosteriorSample::draw_count() const {
  std::uint64_t n = 0;
  for (const auto& run : runs) n += run.count;
  return n;
}

void PosteriorSample::append(const LaggedState& state, double delta, bool unchanged) {
  delta_trace.push_back(delta);
  if (unchanged && !runs.empty()) {
    ++runs.back().count;
    return;
  }
  const std::uint64_t first = runs.empty() ? 0 : runs.back().first_draw + runs.back().count;
  runs.push_back({state, first, 1});
}

ChangepointState PosteriorSample::derived(const SampleRun& run) const {
  ChangepointState out(series_count);
  for (int i = 0; i < series_count; ++i) {
    const auto& tau = run.snapshot.latent.tau[static_cast<std::size_t>(i)];
    const auto& d = run.snapshot.lags[static_cast<std::size_t>(i)];
    auto& row = out.tau[static_cast<std::size_t>(i)];
    row.resize(tau.size());
    for (std::size_t j = 0; j < tau.size(); ++j) row[j] = tau[j] + d[j];
  }
  return out;
}

std::vector<std::pair<std::vector<int>, std::uint64_t>> PosteriorSample::series_histogram(
    int i) const {
  std::map<std::pair<std::size_t, std::vector<int>>, std::uint64_t> counts;
  for (const auto& run : runs) {
    const auto& tau = run.snapshot.latent.tau[static_cast<std::size_t>(i)];
    const auto& d = run.snapshot.lags[static_cast<std::size_t>(i)];
    std::vector<int> pos(tau.size());
    for (std::size_t j = 0; j < tau.size(); ++j) pos[j] = tau[j] + d[j];
    counts[{pos.size(), std::move(pos)}] += run.count;
  }
  std::vector<std::pair<std::vector<int>, std::uint64_t>> out;
  out.reserve(counts.size());
  for (auto& [key, n] : counts) out.emplace_back(key.second, n);
  return out;
}

PosteriorSample PosteriorSample::from_draws(int series, int length,
                                            const std::vector<ChangepointState>& draws) {
  PosteriorSample sample;
  sample.series_count = series;
  sample.length = length;
  sample.total_iterations = draws.size();
  for (const auto& draw : draws) {
    LaggedState state(draw);
    const bool unchanged = !sample.runs.empty() && sample.runs.back().snapshot == state;
    sample.append(state, 0.0, unchanged);
  }
  return sample;
}

}  // namespace graphcp
