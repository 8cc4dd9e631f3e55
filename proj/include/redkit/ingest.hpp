#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "redkit/difficulty.hpp"

namespace redkit {

/*!
 * Recorded outcomes of repeated attempts, questions x attempts, with
 * optional per-attempt token counts.
 *
 * The cell data is immutable and shared; a ResultsMatrix is a view that
 * maps its (row, column) indices through a row and a column permutation.
 * Shuffled realizations therefore cost two index vectors, not a copy.
 */
class ResultsMatrix {
public:
    ResultsMatrix(std::string model_name, std::string benchmark_name, std::size_t n_questions,
                  std::size_t n_attempts, std::vector<std::uint8_t> outcomes,
                  std::optional<std::vector<std::uint64_t>> input_tokens = std::nullopt,
                  std::optional<std::vector<std::uint64_t>> output_tokens = std::nullopt);

    std::size_t n_questions() const noexcept { return rows_.size(); }
    std::size_t n_attempts() const noexcept { return cols_.size(); }
    const std::string& model_name() const noexcept { return data_->model; }
    const std::string& benchmark_name() const noexcept { return data_->benchmark; }
    bool has_tokens() const noexcept { return data_->input_tokens.has_value(); }

    bool outcome(std::size_t question, std::size_t attempt) const noexcept
    {
        return data_->outcomes[cell(question, attempt)] != 0;
    }
    /// Zero when the matrix has no token data.
    std::uint64_t input_tokens(std::size_t question, std::size_t attempt) const noexcept
    {
        return has_tokens() ? (*data_->input_tokens)[cell(question, attempt)] : 0;
    }
    std::uint64_t output_tokens(std::size_t question, std::size_t attempt) const noexcept
    {
        return has_tokens() ? (*data_->output_tokens)[cell(question, attempt)] : 0;
    }

    std::size_t successes(std::size_t question) const noexcept;

    /// Indices into the underlying stored matrix.
    std::span<const std::size_t> row_order() const noexcept { return rows_; }
    std::span<const std::size_t> column_order() const noexcept { return cols_; }

    /// New view whose row i is this view's row rows[i] (same for columns).
    ResultsMatrix permuted(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;

    /// True when both views share the same stored cells.
    bool shares_storage_with(const ResultsMatrix& other) const noexcept { return data_ == other.data_; }

private:
    struct Storage {
        std::string model;
        std::string benchmark;
        std::size_t n_attempts;
        std::vector<std::uint8_t> outcomes;
        std::optional<std::vector<std::uint64_t>> input_tokens;
        std::optional<std::vector<std::uint64_t>> output_tokens;
    };

    ResultsMatrix() = default;
    std::size_t cell(std::size_t q, std::size_t a) const noexcept { return rows_[q] * data_->n_attempts + cols_[a]; }

    std::shared_ptr<const Storage> data_;
    std::vector<std::size_t> rows_;
    std::vector<std::size_t> cols_;
};

/// Parses the JSON results format:
///   {"model": str, "benchmark": str, "results": [[bool]],
///    "input_tokens": [[int]], "output_tokens": [[int]]}   (token fields optional, both or neither)
ResultsMatrix load_results_matrix(const std::string& path);
ResultsMatrix parse_results_matrix(const std::string& json_text);

/// Writes the view (in its permuted order) in the same JSON format.
void save_results_matrix(const ResultsMatrix& matrix, const std::string& path);
std::string results_matrix_to_json(const ResultsMatrix& matrix);

enum class ShuffleMode { RowsAndColumns, RowsOnly };

/// Random row permutation (and column permutation unless RowsOnly),
/// drawn from a generator seeded with \c seed.
ResultsMatrix shuffle_realization(const ResultsMatrix& matrix, std::uint64_t seed,
                                  ShuffleMode mode = ShuffleMode::RowsAndColumns);

enum class PassEstimator {
    Combinatorial,  ///< 1 - C(n-c, k) / C(n, k), uses every recorded attempt
    Prefix,         ///< success within the first k recorded columns
};

struct EmpiricalPassCurve {
    PassCurve curve;
    std::vector<double> standard_error;  ///< per k; across-question spread / sqrt(N)
};

/// Pool-averaged pass@k for k = 0..max_k.
EmpiricalPassCurve empirical_pass_curve(const ResultsMatrix& matrix, std::size_t max_k,
                                        PassEstimator estimator = PassEstimator::Combinatorial);

/// Per-question combinatorial estimate with n attempts and c successes.
double unbiased_pass_at_k(std::size_t n, std::size_t c, std::size_t k);

struct SyntheticTokenModel {
    /// Prompt length per question, uniform in [input_min, input_max].
    std::uint64_t input_min = 120;
    std::uint64_t input_max = 400;
    /// Completion length per attempt, uniform in [output_min, output_max].
    std::uint64_t output_min = 40;
    std::uint64_t output_max = 300;
};

/// Draws N difficulties from the model, then K Bernoulli outcomes per row.
ResultsMatrix generate_synthetic_matrix(const DifficultyModel& model, std::size_t n_questions,
                                        std::size_t n_attempts, std::uint64_t seed,
                                        const SyntheticTokenModel& tokens = {}, std::string model_name = "synthetic",
                                        std::string benchmark_name = "synthetic");

}  // namespace redkit
