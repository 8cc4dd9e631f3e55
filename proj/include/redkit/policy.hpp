#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "redkit/cost.hpp"
#include "redkit/difficulty.hpp"
#include "redkit/ingest.hpp"
#include "redkit/rng.hpp"
#include "redkit/trajectory.hpp"

namespace redkit {

//---------------------------------------------------------------------------//
// Policies and stopping rules
//---------------------------------------------------------------------------//

struct SolveToCompletion {};

/// Reset-and-Discard: at most tau consecutive attempts per visit; solved
/// questions leave the queue, failed ones go to the back.
struct ResetAndDiscard {
    std::size_t tau = 1;
};

using Policy = std::variant<SolveToCompletion, ResetAndDiscard>;

Policy make_red_policy(std::size_t tau);

enum class CostAxis { Attempts, Tokens, Usd };

/*!
 * Stopping conditions, all optional. A run halts before the attempt that
 * would push the attempt count or the axis cost past its limit. Token cost
 * is input + output tokens; USD needs a pricing table.
 */
struct Budget {
    std::optional<std::uint64_t> max_attempts;
    std::optional<double> max_cost;
    CostAxis cost_axis = CostAxis::Attempts;
    std::optional<PricingTable> pricing;
    /// Complete ReD rounds to run; ignored by solve-to-completion.
    std::optional<std::size_t> max_rounds;

    static Budget unbounded() { return {}; }
    static Budget attempts(std::uint64_t n)
    {
        Budget b;
        b.max_attempts = n;
        return b;
    }
};

//---------------------------------------------------------------------------//
// Oracles
//---------------------------------------------------------------------------//

struct AttemptOutcome {
    bool solved;
    std::uint64_t input_tokens;
    std::uint64_t output_tokens;
};

/// Source of verified attempt outcomes for a pool of questions 0..N-1.
class SolverOracle {
public:
    virtual ~SolverOracle() = default;

    virtual std::size_t pool_size() const = 0;
    virtual AttemptOutcome attempt(std::size_t question) = 0;
    /// std::nullopt means unbounded.
    virtual std::optional<std::size_t> remaining_attempts(std::size_t question) const = 0;
    /// Token cost the next attempt on this question will incur.
    virtual std::pair<std::uint64_t, std::uint64_t> next_attempt_tokens(std::size_t question) const = 0;
    virtual TokenSource token_source() const = 0;
};

/// Independent Bernoulli(p_i) attempts; 1 input + 1 output token each.
class SyntheticOracle final : public SolverOracle {
public:
    SyntheticOracle(std::vector<double> success_probabilities, std::uint64_t seed);

    std::size_t pool_size() const override { return p_.size(); }
    AttemptOutcome attempt(std::size_t question) override;
    std::optional<std::size_t> remaining_attempts(std::size_t) const override { return std::nullopt; }
    std::pair<std::uint64_t, std::uint64_t> next_attempt_tokens(std::size_t) const override { return {1, 1}; }
    TokenSource token_source() const override { return TokenSource::Placeholder; }

    std::span<const double> success_probabilities() const noexcept { return p_; }

private:
    std::vector<double> p_;
    Engine engine_;
};

/// Consumes each row of a results matrix left to right, one cell per attempt.
class ReplayOracle final : public SolverOracle {
public:
    explicit ReplayOracle(ResultsMatrix matrix);

    std::size_t pool_size() const override { return matrix_.n_questions(); }
    AttemptOutcome attempt(std::size_t question) override;
    std::optional<std::size_t> remaining_attempts(std::size_t question) const override;
    std::pair<std::uint64_t, std::uint64_t> next_attempt_tokens(std::size_t question) const override;
    TokenSource token_source() const override
    {
        return matrix_.has_tokens() ? TokenSource::Recorded : TokenSource::None;
    }

    std::uint64_t cells_consumed() const noexcept { return consumed_; }
    /// Columns already read for this question.
    std::size_t cursor(std::size_t question) const { return cursor_.at(question); }

private:
    ResultsMatrix matrix_;
    std::vector<std::size_t> cursor_;
    std::uint64_t consumed_ = 0;
};

//---------------------------------------------------------------------------//
// Single realizations
//---------------------------------------------------------------------------//

/// ReD over questions 0..N-1 in that initial order.
Trajectory run_red(SolverOracle& oracle, std::size_t tau, const Budget& budget = Budget::unbounded());

/// Each question in order until solved; replayed questions whose recorded
/// attempts run out are marked exhausted and skipped.
Trajectory run_solve_to_completion(SolverOracle& oracle, const Budget& budget = Budget::unbounded());

Trajectory run_policy(const Policy& policy, SolverOracle& oracle, const Budget& budget = Budget::unbounded());

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//

struct SyntheticPool {
    DifficultyModel model;
    std::size_t size;
};

struct ReplayPool {
    ResultsMatrix matrix;
    ShuffleMode shuffle = ShuffleMode::RowsAndColumns;
};

using PoolSpec = std::variant<SyntheticPool, ReplayPool>;

enum class Execution { Serial, Parallel };

struct EnsembleOptions {
    std::size_t realizations = 100;
    std::uint64_t master_seed = 0;
    /// Axis of the output grid.
    CostAxis grid_axis = CostAxis::Attempts;
    std::optional<PricingTable> pricing;
    /// 0 on the attempts axis gives the integer grid 0, 1, ..., t_max; otherwise
    /// grid_points + 1 evenly spaced points from 0 to the largest final cost.
    std::size_t grid_points = 0;
    bool keep_trajectories = false;
    Execution execution = Execution::Parallel;
    int workers = 0;
};

struct EnsembleSummary {
    CostAxis axis = CostAxis::Attempts;
    std::vector<double> grid;
    std::vector<double> mean;
    std::vector<double> std_dev;
    std::size_t realizations = 0;
    std::uint64_t master_seed = 0;
    std::size_t pool_size = 0;
    /// <R_n> and <t(n)> across realizations (ReD tau = 1 only). Realizations
    /// that emptied their pool contribute R = 0 for later rounds.
    std::vector<double> mean_round_remainders;
    std::vector<double> mean_round_attempts;
    std::vector<Trajectory> trajectories;
};

/// Sub-seed used by realization i.
inline std::uint64_t realization_seed(std::uint64_t master, std::size_t i) { return substream_seed(master, i); }

/// Builds the oracle for realization i: fresh difficulties and outcomes for
/// synthetic pools, a fresh shuffle for replay pools.
std::unique_ptr<SolverOracle> make_realization_oracle(const PoolSpec& pool, std::uint64_t seed);

/// Cumulative cost after each event on the given axis.
std::vector<double> event_costs(const Trajectory& trajectory, CostAxis axis, const std::optional<PricingTable>& pricing);

/// Average coverage over independent realizations on a common grid
/// (last value carried forward; unbiased std). Output is independent of
/// the execution mode and worker count.
EnsembleSummary monte_carlo(const PoolSpec& pool, const Policy& policy, const Budget& budget,
                            const EnsembleOptions& options);

}  // namespace redkit
