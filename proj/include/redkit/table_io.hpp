#pragma once

#include <span>
#include <string>
#include <vector>

#include "redkit/cost.hpp"
#include "redkit/estimator.hpp"
#include "redkit/policy.hpp"
#include "redkit/renewal.hpp"

// Plot-ready CSV / JSON renderings. Numbers are written in shortest
// round-trip form, so re-reading a file reproduces the doubles exactly.

namespace redkit {

enum class TableFormat { Csv, Json };

TableFormat parse_table_format(const std::string& text);
const char* axis_name(CostAxis axis);
CostAxis parse_cost_axis(const std::string& text);

/// Columns t, mean, second_moment, std, first_round (pass@1 * t).
std::string coverage_table(const CoveragePrediction& prediction, double pass_at_1, TableFormat format);

/// Columns round, attempts, coverage, remainder, first_round.
std::string finite_pool_table(std::span<const FinitePoolRound> rows, double pass_at_1, TableFormat format);

/// Columns t, mean, std.
std::string ensemble_table(const EnsembleSummary& summary, TableFormat format);

/// Columns attempts, input_tokens, output_tokens, coverage.
std::string trajectory_table(const Trajectory& trajectory, TableFormat format);

/// Columns realization, attempts, input_tokens, output_tokens, coverage.
std::string trajectories_table(std::span<const Trajectory> trajectories, TableFormat format);

/// Columns usd, coverage.
std::string cost_table(std::span<const CostPoint> points, TableFormat format);

std::string alpha_estimate_json(const AlphaEstimate& estimate);

/// Columns n, mean_remainder.
std::string round_series_csv(const RoundSeries& series);
RoundSeries parse_round_series_csv(const std::string& text);
RoundSeries load_round_series_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace redkit
