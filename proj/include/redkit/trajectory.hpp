#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace redkit {

/// Where a trajectory's token counters come from.
enum class TokenSource {
    Recorded,     ///< per-attempt counts from a results matrix
    Placeholder,  ///< synthetic oracle: 1 input + 1 output token per attempt
    None,         ///< replayed matrix without token data
};

enum class StopReason {
    PoolEmpty,   ///< every question solved, or abandoned after its recorded attempts
    Budget,      ///< the next attempt would exceed the attempt or cost budget
    RoundLimit,  ///< requested number of ReD rounds completed
};

/// State after one attempt.
struct TrajectoryEvent {
    std::uint64_t attempts;
    std::uint64_t input_tokens;
    std::uint64_t output_tokens;
    std::uint32_t coverage;
};

/// One realization of a policy run.
struct Trajectory {
    std::size_t pool_size = 0;
    std::vector<TrajectoryEvent> events;
    /// R_0 = N, R_1, ... at ReD(tau = 1) round boundaries; empty otherwise.
    std::vector<std::size_t> round_remainders;
    /// Cumulative attempts at each recorded round boundary, t(0) = 0.
    std::vector<std::uint64_t> round_attempts;
    /// Questions abandoned after their recorded attempts ran out (replay only).
    std::vector<std::size_t> exhausted;
    /// Questions still queued when the run stopped.
    std::size_t remaining = 0;
    TokenSource tokens = TokenSource::Placeholder;
    StopReason stop = StopReason::PoolEmpty;

    std::size_t coverage() const noexcept { return events.empty() ? 0 : events.back().coverage; }
    std::uint64_t attempts() const noexcept { return events.empty() ? 0 : events.back().attempts; }
};

}  // namespace redkit
