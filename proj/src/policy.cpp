#include "redkit/policy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <memory>
#include <type_traits>

#include <fmt/format.h>

#include "redkit/error.hpp"

#ifdef REDKIT_HAVE_OPENMP
#include <omp.h>
#endif

namespace redkit {

Policy make_red_policy(std::size_t tau)
{
    if (tau < 1) throw ValidationError("ReD resetting interval tau must be >= 1");
    return ResetAndDiscard{tau};
}

//---------------------------------------------------------------------------//
// Oracles
//---------------------------------------------------------------------------//

SyntheticOracle::SyntheticOracle(std::vector<double> success_probabilities, std::uint64_t seed)
    : p_(std::move(success_probabilities)), engine_(seed)
{
    for (double p : p_) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(fmt::format("success probability {} outside [0, 1]", p));
    }
}

AttemptOutcome SyntheticOracle::attempt(std::size_t question)
{
    return {bernoulli(engine_, p_.at(question)), 1, 1};
}

ReplayOracle::ReplayOracle(ResultsMatrix matrix) : matrix_(std::move(matrix)), cursor_(matrix_.n_questions(), 0) {}

AttemptOutcome ReplayOracle::attempt(std::size_t question)
{
    auto& col = cursor_.at(question);
    if (col >= matrix_.n_attempts()) {
        throw ValidationError(fmt::format("question {} has no recorded attempts left", question));
    }
    AttemptOutcome o{matrix_.outcome(question, col), matrix_.input_tokens(question, col),
                     matrix_.output_tokens(question, col)};
    ++col;
    ++consumed_;
    return o;
}

std::optional<std::size_t> ReplayOracle::remaining_attempts(std::size_t question) const
{
    return matrix_.n_attempts() - cursor_.at(question);
}

std::pair<std::uint64_t, std::uint64_t> ReplayOracle::next_attempt_tokens(std::size_t question) const
{
    const auto col = cursor_.at(question);
    if (col >= matrix_.n_attempts()) return {0, 0};
    return {matrix_.input_tokens(question, col), matrix_.output_tokens(question, col)};
}

//---------------------------------------------------------------------------//
// Single realizations
//---------------------------------------------------------------------------//

namespace {

double axis_cost(CostAxis axis, std::uint64_t attempts, std::uint64_t in, std::uint64_t out,
                 const std::optional<PricingTable>& pricing)
{
    switch (axis) {
    case CostAxis::Attempts:
        return static_cast<double>(attempts);
    case CostAxis::Tokens:
        return static_cast<double>(in + out);
    case CostAxis::Usd:
        if (!pricing) throw ValidationError("USD costs need a pricing table");
        return tokens_to_usd(in, out, *pricing);
    }
    return 0.0;
}

// Mutable state of one policy run; owns the trajectory under construction.
class Runner {
public:
    Runner(SolverOracle& oracle, const Budget& budget) : oracle_(oracle), budget_(budget)
    {
        if (oracle.pool_size() == 0) throw ValidationError("question pool is empty");
        if (budget.max_cost && budget.cost_axis == CostAxis::Usd && !budget.pricing) {
            throw ValidationError("a USD budget needs a pricing table");
        }
        tr_.pool_size = oracle.pool_size();
        tr_.tokens = oracle.token_source();
    }

    bool affordable(std::size_t q) const
    {
        if (budget_.max_attempts && attempts_ + 1 > *budget_.max_attempts) return false;
        if (budget_.max_cost) {
            const auto [in, out] = oracle_.next_attempt_tokens(q);
            if (axis_cost(budget_.cost_axis, attempts_ + 1, in_ + in, out_ + out, budget_.pricing) >
                *budget_.max_cost) {
                return false;
            }
        }
        return true;
    }

    bool out_of_attempts(std::size_t q) const
    {
        const auto rem = oracle_.remaining_attempts(q);
        return rem && *rem == 0;
    }

    bool attempt(std::size_t q)
    {
        const auto o = oracle_.attempt(q);
        ++attempts_;
        in_ += o.input_tokens;
        out_ += o.output_tokens;
        if (o.solved) ++coverage_;
        tr_.events.push_back({attempts_, in_, out_, coverage_});
        return o.solved;
    }

    void mark_exhausted(std::size_t q) { tr_.exhausted.push_back(q); }

    void record_round()
    {
        tr_.round_remainders.push_back(tr_.pool_size - coverage_);
        tr_.round_attempts.push_back(attempts_);
    }

    Trajectory finish(std::size_t remaining, StopReason why)
    {
        tr_.remaining = remaining;
        tr_.stop = why;
        return std::move(tr_);
    }

private:
    SolverOracle& oracle_;
    const Budget& budget_;
    Trajectory tr_;
    std::uint64_t attempts_ = 0;
    std::uint64_t in_ = 0;
    std::uint64_t out_ = 0;
    std::uint32_t coverage_ = 0;
};

enum class VisitResult { Solved, Failed, Exhausted, Stopped };

}  // namespace

Trajectory run_red(SolverOracle& oracle, std::size_t tau, const Budget& budget)
{
    if (tau < 1) throw ValidationError("ReD resetting interval tau must be >= 1");
    Runner run(oracle, budget);
    const bool record_rounds = tau == 1;

    std::deque<std::size_t> queue;
    for (std::size_t q = 0; q < oracle.pool_size(); ++q) queue.push_back(q);

    if (record_rounds) run.record_round();
    if (budget.max_rounds && *budget.max_rounds == 0) return run.finish(queue.size(), StopReason::RoundLimit);

    std::size_t round_left = queue.size();
    std::size_t rounds_done = 0;

    while (!queue.empty()) {
        const std::size_t q = queue.front();
        queue.pop_front();

        VisitResult visit = VisitResult::Failed;
        for (std::size_t i = 0; i < tau; ++i) {
            if (run.out_of_attempts(q)) {
                visit = VisitResult::Exhausted;
                break;
            }
            if (!run.affordable(q)) {
                visit = VisitResult::Stopped;
                break;
            }
            if (run.attempt(q)) {
                visit = VisitResult::Solved;
                break;
            }
        }
        if (visit == VisitResult::Failed && run.out_of_attempts(q)) visit = VisitResult::Exhausted;

        if (visit == VisitResult::Stopped) {
            queue.push_front(q);
            return run.finish(queue.size(), StopReason::Budget);
        }
        if (visit == VisitResult::Exhausted) run.mark_exhausted(q);
        if (visit == VisitResult::Failed) queue.push_back(q);

        if (--round_left == 0) {
            ++rounds_done;
            if (record_rounds) run.record_round();
            round_left = queue.size();
            if (budget.max_rounds && rounds_done >= *budget.max_rounds) {
                return run.finish(queue.size(), queue.empty() ? StopReason::PoolEmpty : StopReason::RoundLimit);
            }
        }
    }
    return run.finish(0, StopReason::PoolEmpty);
}

Trajectory run_solve_to_completion(SolverOracle& oracle, const Budget& budget)
{
    Runner run(oracle, budget);
    const std::size_t n = oracle.pool_size();
    for (std::size_t q = 0; q < n; ++q) {
        while (true) {
            if (run.out_of_attempts(q)) {
                run.mark_exhausted(q);
                break;
            }
            if (!run.affordable(q)) return run.finish(n - q, StopReason::Budget);
            if (run.attempt(q)) break;
        }
    }
    return run.finish(0, StopReason::PoolEmpty);
}

Trajectory run_policy(const Policy& policy, SolverOracle& oracle, const Budget& budget)
{
    if (const auto* red = std::get_if<ResetAndDiscard>(&policy)) return run_red(oracle, red->tau, budget);
    return run_solve_to_completion(oracle, budget);
}

//---------------------------------------------------------------------------//
// Ensembles
//---------------------------------------------------------------------------//

std::unique_ptr<SolverOracle> make_realization_oracle(const PoolSpec& pool, std::uint64_t seed)
{
    if (const auto* s = std::get_if<SyntheticPool>(&pool)) {
        auto p = sample_difficulties(s->model, s->size, substream_seed(seed, 0));
        return std::make_unique<SyntheticOracle>(std::move(p), substream_seed(seed, 1));
    }
    const auto& r = std::get<ReplayPool>(pool);
    return std::make_unique<ReplayOracle>(shuffle_realization(r.matrix, seed, r.shuffle));
}

std::vector<double> event_costs(const Trajectory& trajectory, CostAxis axis, const std::optional<PricingTable>& pricing)
{
    if (axis != CostAxis::Attempts && trajectory.tokens == TokenSource::None && !trajectory.events.empty()) {
        throw ValidationError("the token and USD axes need token counts; the replayed matrix has none");
    }
    std::vector<double> costs;
    costs.reserve(trajectory.events.size());
    for (const auto& e : trajectory.events) {
        costs.push_back(axis_cost(axis, e.attempts, e.input_tokens, e.output_tokens, pricing));
    }
    return costs;
}

namespace {

// What the reduction needs from one realization.
struct RealizationResult {
    std::vector<double> solve_costs;  // non-decreasing
    double final_cost = 0.0;
    std::vector<std::size_t> remainders;
    std::vector<std::uint64_t> round_attempts;
    bool pool_emptied = false;
    std::optional<Trajectory> trajectory;
};

RealizationResult run_one(const PoolSpec& pool, const Policy& policy, const Budget& budget,
                          const EnsembleOptions& opt, std::size_t index)
{
    auto oracle = make_realization_oracle(pool, realization_seed(opt.master_seed, index));
    Trajectory tr = run_policy(policy, *oracle, budget);

    RealizationResult res;
    const auto costs = event_costs(tr, opt.grid_axis, opt.pricing);
    std::uint32_t prev = 0;
    for (std::size_t i = 0; i < tr.events.size(); ++i) {
        if (tr.events[i].coverage != prev) res.solve_costs.push_back(costs[i]);
        prev = tr.events[i].coverage;
    }
    res.final_cost = costs.empty() ? 0.0 : costs.back();
    res.remainders = tr.round_remainders;
    res.round_attempts = tr.round_attempts;
    res.pool_emptied = tr.stop == StopReason::PoolEmpty;
    if (opt.keep_trajectories) res.trajectory = std::move(tr);
    return res;
}

// Coverage of one realization on an ascending grid, last value carried forward.
template <class Fn>
void for_each_on_grid(const RealizationResult& r, const std::vector<double>& grid, Fn&& fn)
{
    std::size_t solved = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        while (solved < r.solve_costs.size() && r.solve_costs[solved] <= grid[g]) ++solved;
        fn(g, static_cast<double>(solved));
    }
}

}  // namespace

EnsembleSummary monte_carlo(const PoolSpec& pool, const Policy& policy, const Budget& budget,
                            const EnsembleOptions& opt)
{
    if (opt.realizations < 1) throw ValidationError("need at least one realization");
    if (opt.grid_axis == CostAxis::Usd && !opt.pricing) throw ValidationError("USD grid needs a pricing table");

    const std::size_t n_real = opt.realizations;
    std::vector<RealizationResult> results(n_real);
    std::vector<std::exception_ptr> errors(n_real);
    const auto n_signed = static_cast<std::ptrdiff_t>(n_real);

    if (opt.execution == Execution::Serial) {
        for (std::ptrdiff_t i = 0; i < n_signed; ++i) {
            results[i] = run_one(pool, policy, budget, opt, static_cast<std::size_t>(i));
        }
    } else {
#ifdef REDKIT_HAVE_OPENMP
        const int threads = opt.workers > 0 ? opt.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
        for (std::ptrdiff_t i = 0; i < n_signed; ++i) {
            try {
                results[i] = run_one(pool, policy, budget, opt, static_cast<std::size_t>(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    EnsembleSummary out;
    out.axis = opt.grid_axis;
    out.realizations = n_real;
    out.master_seed = opt.master_seed;
    out.pool_size = std::visit(
        [](const auto& p) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, SyntheticPool>) {
                return p.size;
            } else {
                return p.matrix.n_questions();
            }
        },
        pool);

    double max_cost = 0.0;
    for (const auto& r : results) max_cost = std::max(max_cost, r.final_cost);

    if (opt.grid_axis == CostAxis::Attempts && opt.grid_points == 0) {
        const auto top = static_cast<std::size_t>(max_cost);
        out.grid.resize(top + 1);
        for (std::size_t g = 0; g <= top; ++g) out.grid[g] = static_cast<double>(g);
    } else {
        const std::size_t pts = opt.grid_points == 0 ? 200 : opt.grid_points;
        out.grid.resize(pts + 1);
        for (std::size_t g = 0; g <= pts; ++g) {
            out.grid[g] = g == pts ? max_cost : max_cost * static_cast<double>(g) / static_cast<double>(pts);
        }
    }

    // Two passes in realization order: deterministic regardless of scheduling.
    const std::size_t n_grid = out.grid.size();
    std::vector<double> sum(n_grid, 0.0);
    for (const auto& r : results) for_each_on_grid(r, out.grid, [&](std::size_t g, double c) { sum[g] += c; });
    out.mean.resize(n_grid);
    for (std::size_t g = 0; g < n_grid; ++g) out.mean[g] = sum[g] / static_cast<double>(n_real);

    out.std_dev.assign(n_grid, 0.0);
    if (n_real > 1) {
        std::vector<double> ss(n_grid, 0.0);
        for (const auto& r : results) {
            for_each_on_grid(r, out.grid, [&](std::size_t g, double c) {
                const double d = c - out.mean[g];
                ss[g] += d * d;
            });
        }
        for (std::size_t g = 0; g < n_grid; ++g) out.std_dev[g] = std::sqrt(ss[g] / static_cast<double>(n_real - 1));
    }

    // Round statistics. Emptied pools extend with their final values.
    const bool have_rounds = std::all_of(results.begin(), results.end(), [](const auto& r) { return !r.remainders.empty(); });
    if (have_rounds) {
        std::size_t rounds = std::numeric_limits<std::size_t>::max();
        std::size_t longest = 0;
        for (const auto& r : results) {
            longest = std::max(longest, r.remainders.size());
            if (!r.pool_emptied) rounds = std::min(rounds, r.remainders.size());
        }
        if (rounds == std::numeric_limits<std::size_t>::max()) rounds = longest;
        out.mean_round_remainders.assign(rounds, 0.0);
        out.mean_round_attempts.assign(rounds, 0.0);
        for (const auto& r : results) {
            for (std::size_t n = 0; n < rounds; ++n) {
                const std::size_t i = std::min(n, r.remainders.size() - 1);
                out.mean_round_remainders[n] += static_cast<double>(r.remainders[i]);
                out.mean_round_attempts[n] += static_cast<double>(r.round_attempts[i]);
            }
        }
        for (std::size_t n = 0; n < rounds; ++n) {
            out.mean_round_remainders[n] /= static_cast<double>(n_real);
            out.mean_round_attempts[n] /= static_cast<double>(n_real);
        }
    }

    if (opt.keep_trajectories) {
        out.trajectories.reserve(n_real);
        for (auto& r : results) out.trajectories.push_back(std::move(*r.trajectory));
    }
    return out;
}

}  // namespace redkit
