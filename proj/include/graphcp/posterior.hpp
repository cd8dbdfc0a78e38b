#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphcp/model.hpp"

namespace graphcp {

enum class MoveType { kBirthDeath = 0, kShift, kAuxUpdate, kLagUpdate, kWindowUpdate };
inline constexpr std::size_t kMoveTypeCount = 5;

std::string to_string(MoveType type);

enum class MoveOutcome {
  kAccepted,
  kRejected,
  kInvalid,  // proposal left the support (e.g. no feasible lag); auto-rejected
  kSkipped,  // move not applicable in the current state
};

struct MoveCounters {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t invalid = 0;
  std::uint64_t skipped = 0;

  void record(MoveOutcome outcome);
  double acceptance_rate() const {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

/// Consecutive stored draws sharing one state.
struct SampleRun {
  LaggedState snapshot;
  std::uint64_t first_draw = 0;
  std::uint64_t count = 0;
};

/// Thinned post-burn-in draws, run-length encoded, with chain diagnostics.
/// Draw n (0-based) was taken at post-burn-in iteration (n + 1) * thin.
struct PosteriorSample {
  int series_count = 0;
  int length = 0;
  std::uint64_t thin = 1;
  std::uint64_t burn_in = 0;
  std::uint64_t total_iterations = 0;
  std::vector<SampleRun> runs;
  std::vector<double> delta_trace;  // one entry per stored draw
  std::array<MoveCounters, kMoveTypeCount> moves{};

  std::uint64_t draw_count() const;
  std::uint64_t iteration_of(std::uint64_t draw) const { return (draw + 1) * thin; }

  /// Appends a draw; extends the last run when `unchanged` is true.
  void append(const LaggedState& state, double delta, bool unchanged);

  ChangepointState derived(const SampleRun& run) const;

  /// Distinct derived positions of series i with their multiplicities, sorted
  /// by (k, positions).
  std::vector<std::pair<std::vector<int>, std::uint64_t>> series_histogram(int i) const;

  /// Builds a sample with zero lags/windows from plain draws (one per entry).
  static PosteriorSample from_draws(int series, int length,
                                    const std::vector<ChangepointState>& draws);
};

}  // namespace graphcp
