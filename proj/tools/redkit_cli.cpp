// redkit command-line entry point: predict, simulate, replay, infer, generate.
//
// Exit codes: 0 success, 2 validation error, 3 numeric failure. Diagnostics
// go to stderr; data goes to the files named by --output.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "redkit/cost.hpp"
#include "redkit/difficulty.hpp"
#include "redkit/error.hpp"
#include "redkit/estimator.hpp"
#include "redkit/ingest.hpp"
#include "redkit/policy.hpp"
#include "redkit/renewal.hpp"
#include "redkit/table_io.hpp"

using namespace redkit;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct OutputArgs {
    std::string path;
    std::string format = "csv";
};

void add_output(CLI::App* cmd, OutputArgs& out)
{
    cmd->add_option("-o,--output", out.path, "Output file")->required();
    cmd->add_option("--format", out.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

struct RunArgs {
    std::string difficulty;
    std::string matrix;
    std::string series;
    std::string policy = "red:1";
    std::optional<double> budget;
    std::string budget_axis = "attempts";
    std::optional<std::size_t> rounds;
    std::size_t pool = 0;
    std::size_t realizations = 100;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string axis;
    std::size_t grid_points = 0;
    std::string pricing_path;
    std::string model;
    bool rows_only = false;
    std::string trajectories_path;
};

Policy parse_policy(const std::string& text)
{
    if (text == "stc") return SolveToCompletion{};
    if (text.rfind("red:", 0) == 0) {
        std::size_t tau = 0;
        try {
            tau = std::stoul(text.substr(4));
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("cannot parse resetting interval in '{}'", text));
        }
        return make_red_policy(tau);
    }
    if (text == "red") return make_red_policy(1);
    throw ValidationError(fmt::format("unknown policy '{}' (stc | red:TAU)", text));
}

std::vector<PricingTable> pricing_tables(const std::string& path)
{
    if (!path.empty()) return load_pricing_file(path);
    if (const char* env = std::getenv(kPricingEnvVar); env && *env) return load_pricing_file(env);
    return default_pricing_tables();
}

std::optional<PricingTable> resolve_pricing(const RunArgs& a, CostAxis budget_axis, CostAxis grid_axis,
                                            const std::string& fallback_model)
{
    if (budget_axis != CostAxis::Usd && grid_axis != CostAxis::Usd) return std::nullopt;
    const auto tables = pricing_tables(a.pricing_path);
    if (!a.model.empty()) return select_pricing(tables, a.model);
    // No explicit model: the matrix's own name, else a lone table entry.
    if (tables.size() == 1) {
        try {
            return select_pricing(tables, fallback_model);
        } catch (const ValidationError&) {
            return tables.front();
        }
    }
    return select_pricing(tables, fallback_model);
}

Budget make_budget(const RunArgs& a, CostAxis axis, const std::optional<PricingTable>& pricing)
{
    Budget b;
    if (a.budget) {
        if (!(*a.budget > 0.0)) throw ValidationError("--budget must be positive");
        if (axis == CostAxis::Attempts) {
            b.max_attempts = static_cast<std::uint64_t>(*a.budget);
        } else {
            b.max_cost = *a.budget;
            b.cost_axis = axis;
            b.pricing = pricing;
        }
    }
    b.max_rounds = a.rounds;
    return b;
}

void warn_placeholder_tokens(const PoolSpec& pool, CostAxis budget_axis, CostAxis grid_axis)
{
    if (std::holds_alternative<SyntheticPool>(pool) &&
        (budget_axis != CostAxis::Attempts || grid_axis != CostAxis::Attempts)) {
        std::cerr << "note: synthetic pools count 1 input + 1 output token per attempt\n";
    }
}

int run_ensemble(const RunArgs& a, const OutputArgs& out, PoolSpec pool, const std::string& fallback_model)
{
    const auto policy = parse_policy(a.policy);
    const auto budget_axis = parse_cost_axis(a.budget_axis);
    const auto grid_axis = a.axis.empty() ? budget_axis : parse_cost_axis(a.axis);
    const auto pricing = resolve_pricing(a, budget_axis, grid_axis, fallback_model);
    const auto budget = make_budget(a, budget_axis, pricing);

    if (const auto* replay = std::get_if<ReplayPool>(&pool); replay && !replay->matrix.has_tokens() &&
                                                             (budget_axis != CostAxis::Attempts ||
                                                              grid_axis != CostAxis::Attempts)) {
        throw ValidationError("this matrix has no token data; use the attempts axis");
    }
    warn_placeholder_tokens(pool, budget_axis, grid_axis);

    EnsembleOptions opt;
    opt.realizations = a.realizations;
    opt.master_seed = a.seed;
    opt.grid_axis = grid_axis;
    opt.pricing = pricing;
    opt.grid_points = a.grid_points;
    opt.workers = a.workers;
    opt.keep_trajectories = !a.trajectories_path.empty();

    const auto summary = monte_carlo(pool, policy, budget, opt);
    const auto fmt_kind = parse_table_format(out.format);
    write_text_file(out.path, ensemble_table(summary, fmt_kind));
    if (opt.keep_trajectories) write_text_file(a.trajectories_path, trajectories_table(summary.trajectories, fmt_kind));
    return 0;
}

void add_ensemble_flags(CLI::App* cmd, RunArgs& a)
{
    cmd->add_option("--policy", a.policy, "stc | red:TAU");
    cmd->add_option("--budget", a.budget, "Stop before exceeding this cost on --budget-axis");
    cmd->add_option("--budget-axis", a.budget_axis, "attempts | tokens | usd")
        ->check(CLI::IsMember({"attempts", "tokens", "usd"}));
    cmd->add_option("--rounds", a.rounds, "Complete ReD rounds to run");
    cmd->add_option("--realizations", a.realizations, "Independent realizations")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", a.seed, "64-bit master seed");
    cmd->add_option("--workers", a.workers, "Worker threads (0 = OpenMP default)");
    cmd->add_option("--axis", a.axis, "Output grid axis (default: budget axis)")
        ->check(CLI::IsMember({"attempts", "tokens", "usd"}));
    cmd->add_option("--grid-points", a.grid_points, "Grid resolution (0 = every attempt)");
    cmd->add_option("--pricing", a.pricing_path, fmt::format("Pricing JSON (default: ${} or built-in)", kPricingEnvVar));
    cmd->add_option("--model", a.model, "Pricing entry to use");
    cmd->add_option("--trajectories", a.trajectories_path, "Also write per-realization trajectories here");
}

bool has_geometric_tail(const DifficultyModel& m)
{
    return std::holds_alternative<PointMass>(m.variant()) || std::holds_alternative<EmpiricalDifficulty>(m.variant());
}

//---------------------------------------------------------------------------//

struct PredictArgs {
    std::string difficulty;
    std::string matrix;
    std::size_t t_max = 100;
    std::optional<std::size_t> tau;
    std::optional<std::size_t> pool;
    std::optional<std::size_t> rounds;
    bool prefix_estimator = false;
    int workers = 0;
};

int cmd_predict(const PredictArgs& a, const OutputArgs& out)
{
    if (a.difficulty.empty() == a.matrix.empty()) throw ValidationError("give exactly one of --difficulty or --matrix");
    if (a.pool && !a.rounds) throw ValidationError("--pool needs --rounds");

    std::size_t need = a.pool ? *a.rounds : std::max<std::size_t>(1, a.tau ? std::min(*a.tau, a.t_max) : a.t_max);
    need = std::max<std::size_t>(need, 1);

    std::optional<PassCurve> curve;
    if (!a.difficulty.empty()) {
        const auto model = parse_difficulty_spec(a.difficulty);
        std::size_t k = need;
        if (model.is_tabulated()) {
            const auto& c = std::get<TabulatedDifficulty>(model.variant()).curve;
            if (k > c.max_index()) {
                throw ValidationError(fmt::format("tabulated curve has K = {}, need {}", c.max_index(), k));
            }
        }
        curve = build_pass_curve(model, k);
    } else {
        const auto matrix = load_results_matrix(a.matrix);
        if (need > matrix.n_attempts()) {
            throw ValidationError(fmt::format("matrix records {} attempts, need {}", matrix.n_attempts(), need));
        }
        curve = empirical_pass_curve(matrix, need,
                                     a.prefix_estimator ? PassEstimator::Prefix : PassEstimator::Combinatorial)
                    .curve;
    }

    const double p1 = curve->at(1);
    const auto fmt_kind = parse_table_format(out.format);
    if (a.pool) {
        const auto rows = finite_pool_red_prediction(*curve, *a.pool, *a.rounds);
        write_text_file(out.path, finite_pool_table(rows, p1, fmt_kind));
        return 0;
    }

    RenewalOptions opts;
    opts.with_second_moment = true;
    opts.workers = a.workers;
    const auto schedule = a.tau ? ResetSchedule::every(*a.tau) : ResetSchedule::none();
    const auto prediction = predict_coverage(*curve, schedule, a.t_max, opts);
    write_text_file(out.path, coverage_table(prediction, p1, fmt_kind));
    return 0;
}

//---------------------------------------------------------------------------//

struct InferArgs {
    RunArgs run;
    double min_remainder = 5.0;
    std::optional<std::size_t> max_round;
    std::string series_out;
};

int cmd_infer(InferArgs a, const OutputArgs& out)
{
    const int sources = int(!a.run.series.empty()) + int(!a.run.difficulty.empty()) + int(!a.run.matrix.empty());
    if (sources != 1) throw ValidationError("give exactly one of --series, --difficulty, or --matrix");

    RoundSeries series;
    if (!a.run.series.empty()) {
        series = load_round_series_csv(a.run.series);
    } else {
        PoolSpec pool = [&]() -> PoolSpec {
            if (!a.run.difficulty.empty()) {
                if (a.run.pool == 0) throw ValidationError("--difficulty needs --pool");
                return SyntheticPool{parse_difficulty_spec(a.run.difficulty), a.run.pool};
            }
            return ReplayPool{load_results_matrix(a.run.matrix),
                              a.run.rows_only ? ShuffleMode::RowsOnly : ShuffleMode::RowsAndColumns};
        }();
        Budget budget;
        budget.max_rounds = a.run.rounds.value_or(16);
        EnsembleOptions opt;
        opt.realizations = a.run.realizations;
        opt.master_seed = a.run.seed;
        opt.workers = a.run.workers;
        opt.grid_points = 1;
        const auto summary = monte_carlo(pool, ResetAndDiscard{1}, budget, opt);
        series = RoundSeries::make(summary.mean_round_remainders, summary.realizations);
    }
    if (!a.series_out.empty()) write_text_file(a.series_out, round_series_csv(series));

    const auto estimate = infer_alpha_from_rounds(series, a.min_remainder, a.max_round);
    write_text_file(out.path, alpha_estimate_json(estimate));
    return 0;
}

//---------------------------------------------------------------------------//

struct GenerateArgs {
    std::string difficulty;
    std::size_t questions = 164;
    std::size_t attempts = 100;
    std::uint64_t seed = 0;
    std::string model_name = "synthetic";
    std::string benchmark = "synthetic";
    SyntheticTokenModel tokens;
};

int cmd_generate(const GenerateArgs& a, const std::string& path)
{
    const auto model = parse_difficulty_spec(a.difficulty);
    const auto matrix =
        generate_synthetic_matrix(model, a.questions, a.attempts, a.seed, a.tokens, a.model_name, a.benchmark);
    save_results_matrix(matrix, path);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coverage under a fixed attempt budget: renewal predictions, ReD simulation, exponent inference"};
    app.require_subcommand(1);

    // predict
    PredictArgs pa;
    OutputArgs po;
    auto* predict = app.add_subcommand("predict", "Predicted coverage@cost from a pass curve");
    predict->add_option("--difficulty", pa.difficulty, "point:P | beta:A,B | empirical:... | curve:@file.json");
    predict->add_option("--matrix", pa.matrix, "Results matrix JSON (empirical pass curve)");
    predict->add_option("--t-max", pa.t_max, "Budget horizon in attempts");
    predict->add_option("--tau", pa.tau, "Reset every TAU attempts (infinite pool)")->check(CLI::PositiveNumber);
    predict->add_option("--pool", pa.pool, "Finite pool size N for the ReD(tau=1) round prediction")
        ->check(CLI::PositiveNumber);
    predict->add_option("--rounds", pa.rounds, "Rounds for the finite-pool prediction")->check(CLI::PositiveNumber);
    predict->add_flag("--prefix-estimator", pa.prefix_estimator, "Naive prefix pass@k from --matrix");
    predict->add_option("--workers", pa.workers, "Worker threads for the convolution");
    add_output(predict, po);

    // simulate
    RunArgs sa;
    OutputArgs so;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo on a synthetic pool");
    simulate->add_option("--difficulty", sa.difficulty, "Difficulty model spec")->required();
    simulate->add_option("--pool", sa.pool, "Pool size N")->required()->check(CLI::PositiveNumber);
    add_ensemble_flags(simulate, sa);
    add_output(simulate, so);

    // replay
    RunArgs ra;
    OutputArgs ro;
    auto* replay = app.add_subcommand("replay", "Shuffle-and-replay a recorded results matrix");
    replay->add_option("--matrix", ra.matrix, "Results matrix JSON")->required();
    replay->add_flag("--rows-only", ra.rows_only, "Shuffle rows but keep the recorded column order");
    add_ensemble_flags(replay, ra);
    add_output(replay, ro);

    // infer
    InferArgs ia;
    OutputArgs io;
    auto* infer = app.add_subcommand("infer", "Infer the pass@k power-law exponent from ReD rounds");
    infer->add_option("--series", ia.run.series, "Round series CSV (n, mean_remainder)");
    infer->add_option("--difficulty", ia.run.difficulty, "Simulate ReD(tau=1) on this model");
    infer->add_option("--matrix", ia.run.matrix, "Replay ReD(tau=1) on this matrix");
    infer->add_option("--pool", ia.run.pool, "Pool size for --difficulty");
    infer->add_option("--rounds", ia.run.rounds, "Rounds to simulate (default 16)");
    infer->add_option("--realizations", ia.run.realizations, "Independent realizations")->check(CLI::PositiveNumber);
    infer->add_option("--seed", ia.run.seed, "64-bit master seed");
    infer->add_option("--workers", ia.run.workers, "Worker threads");
    infer->add_flag("--rows-only", ia.run.rows_only, "Shuffle rows only when replaying");
    infer->add_option("--min-remainder", ia.min_remainder, "Skip rounds with fewer unsolved questions");
    infer->add_option("--max-round", ia.max_round, "Last round included in the fit");
    infer->add_option("--series-out", ia.series_out, "Also write the round series CSV here");
    io.format = "json";
    infer->add_option("-o,--output", io.path, "Output JSON file")->required();

    // generate
    GenerateArgs ga;
    std::string gen_out;
    auto* generate = app.add_subcommand("generate", "Write a synthetic results matrix");
    generate->add_option("--difficulty", ga.difficulty, "Difficulty model spec")->required();
    generate->add_option("--questions", ga.questions, "Rows")->check(CLI::PositiveNumber);
    generate->add_option("--attempts", ga.attempts, "Columns")->check(CLI::PositiveNumber);
    generate->add_option("--seed", ga.seed, "Seed");
    generate->add_option("--model-name", ga.model_name, "Value of the \"model\" field");
    generate->add_option("--benchmark", ga.benchmark, "Value of the \"benchmark\" field");
    generate->add_option("--input-tokens-min", ga.tokens.input_min);
    generate->add_option("--input-tokens-max", ga.tokens.input_max);
    generate->add_option("--output-tokens-min", ga.tokens.output_min);
    generate->add_option("--output-tokens-max", ga.tokens.output_max);
    generate->add_option("-o,--output", gen_out, "Output JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*predict) return cmd_predict(pa, po);
        if (*simulate) {
            const auto model = parse_difficulty_spec(sa.difficulty);
            if (!sa.budget && !sa.rounds && !has_geometric_tail(model)) {
                throw ValidationError("this model has a heavy tail; bound the run with --budget or --rounds");
            }
            return run_ensemble(sa, so, SyntheticPool{model, sa.pool}, "");
        }
        if (*replay) {
            auto matrix = load_results_matrix(ra.matrix);
            const auto name = matrix.model_name();
            return run_ensemble(ra, ro,
                                ReplayPool{std::move(matrix), ra.rows_only ? ShuffleMode::RowsOnly
                                                                           : ShuffleMode::RowsAndColumns},
                                name);
        }
        if (*infer) return cmd_infer(ia, io);
        if (*generate) return cmd_generate(ga, gen_out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
