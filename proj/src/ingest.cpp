#include "redkit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "redkit/error.hpp"
#include "redkit/rng.hpp"

namespace redkit {

using nlohmann::json;

ResultsMatrix::ResultsMatrix(std::string model_name, std::string benchmark_name, std::size_t n_questions,
                             std::size_t n_attempts, std::vector<std::uint8_t> outcomes,
                             std::optional<std::vector<std::uint64_t>> input_tokens,
                             std::optional<std::vector<std::uint64_t>> output_tokens)
{
    if (n_questions == 0 || n_attempts == 0) throw ValidationError("results matrix must be at least 1x1");
    const std::size_t cells = n_questions * n_attempts;
    if (outcomes.size() != cells) {
        throw ValidationError(fmt::format("outcome buffer has {} cells, expected {}x{}", outcomes.size(), n_questions,
                                          n_attempts));
    }
    if (input_tokens.has_value() != output_tokens.has_value()) {
        throw ValidationError("input and output token matrices must be given together");
    }
    if (input_tokens && (input_tokens->size() != cells || output_tokens->size() != cells)) {
        throw ValidationError("token matrices must match the outcome dimensions");
    }
    auto storage = std::make_shared<Storage>();
    storage->model = std::move(model_name);
    storage->benchmark = std::move(benchmark_name);
    storage->n_attempts = n_attempts;
    storage->outcomes = std::move(outcomes);
    storage->input_tokens = std::move(input_tokens);
    storage->output_tokens = std::move(output_tokens);
    data_ = std::move(storage);
    rows_.resize(n_questions);
    cols_.resize(n_attempts);
    std::iota(rows_.begin(), rows_.end(), std::size_t{0});
    std::iota(cols_.begin(), cols_.end(), std::size_t{0});
}

std::size_t ResultsMatrix::successes(std::size_t question) const noexcept
{
    std::size_t c = 0;
    for (std::size_t a = 0; a < n_attempts(); ++a) c += outcome(question, a) ? 1 : 0;
    return c;
}

ResultsMatrix ResultsMatrix::permuted(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const
{
    auto check = [](std::span<const std::size_t> perm, std::size_t n, const char* what) {
        if (perm.size() != n) throw ValidationError(fmt::format("{} permutation has wrong length", what));
        std::vector<bool> seen(n, false);
        for (auto i : perm) {
            if (i >= n || seen[i]) throw ValidationError(fmt::format("{} permutation is not a bijection", what));
            seen[i] = true;
        }
    };
    check(rows, n_questions(), "row");
    check(cols, n_attempts(), "column");

    ResultsMatrix view;
    view.data_ = data_;
    view.rows_.reserve(rows.size());
    view.cols_.reserve(cols.size());
    for (auto r : rows) view.rows_.push_back(rows_[r]);
    for (auto c : cols) view.cols_.push_back(cols_[c]);
    return view;
}

//---------------------------------------------------------------------------//
// JSON
//---------------------------------------------------------------------------//

namespace {

template <class T, class Check>
std::vector<T> read_grid(const json& doc, const char* field, std::size_t& rows, std::size_t& cols, Check check)
{
    const auto& grid = doc.at(field);
    if (!grid.is_array() || grid.empty()) throw ValidationError(fmt::format("\"{}\" must be a non-empty array", field));
    const std::size_t n_rows = grid.size();
    std::size_t n_cols = 0;
    std::vector<T> cells;
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto& row = grid[i];
        if (!row.is_array()) throw ValidationError(fmt::format("\"{}\" row {} is not an array", field, i));
        if (i == 0) {
            n_cols = row.size();
            if (n_cols == 0) throw ValidationError(fmt::format("\"{}\" rows must be non-empty", field));
            cells.reserve(n_rows * n_cols);
        } else if (row.size() != n_cols) {
            throw ValidationError(
                fmt::format("ragged \"{}\": row {} has {} entries, row 0 has {}", field, i, row.size(), n_cols));
        }
        for (const auto& v : row) cells.push_back(check(v, field, i));
    }
    rows = n_rows;
    cols = n_cols;
    return cells;
}

std::uint8_t as_outcome(const json& v, const char* field, std::size_t row)
{
    if (!v.is_boolean()) throw ValidationError(fmt::format("\"{}\" row {} holds a non-boolean entry", field, row));
    return v.get<bool>() ? 1 : 0;
}

std::uint64_t as_count(const json& v, const char* field, std::size_t row)
{
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ValidationError(fmt::format("\"{}\" row {} holds a negative or non-integer count", field, row));
}

}  // namespace

ResultsMatrix parse_results_matrix(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("malformed results JSON: {}", e.what()));
    }
    if (!doc.is_object() || !doc.contains("results")) {
        throw ValidationError("results JSON must be an object with a \"results\" field");
    }
    std::string model = doc.contains("model") && doc["model"].is_string() ? doc["model"].get<std::string>() : "";
    std::string bench =
        doc.contains("benchmark") && doc["benchmark"].is_string() ? doc["benchmark"].get<std::string>() : "";

    std::size_t n = 0, k = 0;
    auto outcomes = read_grid<std::uint8_t>(doc, "results", n, k, as_outcome);

    std::optional<std::vector<std::uint64_t>> in, out;
    const bool has_in = doc.contains("input_tokens") && !doc["input_tokens"].is_null();
    const bool has_out = doc.contains("output_tokens") && !doc["output_tokens"].is_null();
    if (has_in != has_out) throw ValidationError("give both \"input_tokens\" and \"output_tokens\", or neither");
    if (has_in) {
        for (const char* field : {"input_tokens", "output_tokens"}) {
            std::size_t tn = 0, tk = 0;
            auto grid = read_grid<std::uint64_t>(doc, field, tn, tk, as_count);
            if (tn != n || tk != k) {
                throw ValidationError(
                    fmt::format("shape mismatch: \"results\" is {}x{} but \"{}\" is {}x{}", n, k, field, tn, tk));
            }
            (field[0] == 'i' ? in : out) = std::move(grid);
        }
    }
    return ResultsMatrix(std::move(model), std::move(bench), n, k, std::move(outcomes), std::move(in), std::move(out));
}

ResultsMatrix load_results_matrix(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError(fmt::format("cannot open results matrix '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_results_matrix(buf.str());
}

std::string results_matrix_to_json(const ResultsMatrix& m)
{
    json doc;
    doc["model"] = m.model_name();
    doc["benchmark"] = m.benchmark_name();
    json results = json::array();
    json in = json::array(), out = json::array();
    for (std::size_t q = 0; q < m.n_questions(); ++q) {
        json row = json::array(), row_in = json::array(), row_out = json::array();
        for (std::size_t a = 0; a < m.n_attempts(); ++a) {
            row.push_back(m.outcome(q, a));
            if (m.has_tokens()) {
                row_in.push_back(m.input_tokens(q, a));
                row_out.push_back(m.output_tokens(q, a));
            }
        }
        results.push_back(std::move(row));
        if (m.has_tokens()) {
            in.push_back(std::move(row_in));
            out.push_back(std::move(row_out));
        }
    }
    doc["results"] = std::move(results);
    if (m.has_tokens()) {
        doc["input_tokens"] = std::move(in);
        doc["output_tokens"] = std::move(out);
    }
    return doc.dump();
}

void save_results_matrix(const ResultsMatrix& matrix, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw ValidationError(fmt::format("cannot write '{}'", path));
    out << results_matrix_to_json(matrix) << '\n';
}

//---------------------------------------------------------------------------//
// Resampling and estimation
//---------------------------------------------------------------------------//

ResultsMatrix shuffle_realization(const ResultsMatrix& matrix, std::uint64_t seed, ShuffleMode mode)
{
    Engine engine(seed);
    std::vector<std::size_t> rows(matrix.n_questions()), cols(matrix.n_attempts());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    std::shuffle(rows.begin(), rows.end(), engine);
    if (mode == ShuffleMode::RowsAndColumns) std::shuffle(cols.begin(), cols.end(), engine);
    return matrix.permuted(rows, cols);
}

double unbiased_pass_at_k(std::size_t n, std::size_t c, std::size_t k)
{
    if (k > n) throw ValidationError(fmt::format("pass@{} needs at least {} recorded attempts, have {}", k, k, n));
    if (c > n) throw ValidationError("more successes than attempts");
    if (n - c < k) return 1.0;
    // C(n-c, k) / C(n, k) = prod_{i=n-c+1..n} (1 - k / i)
    double ratio = 1.0;
    for (std::size_t i = n - c + 1; i <= n; ++i) {
        ratio *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    }
    return 1.0 - ratio;
}

EmpiricalPassCurve empirical_pass_curve(const ResultsMatrix& matrix, std::size_t max_k, PassEstimator estimator)
{
    const std::size_t n = matrix.n_attempts();
    if (max_k > n) {
        throw ValidationError(fmt::format("pass@k up to k = {} needs that many recorded attempts, matrix has {}",
                                          max_k, n));
    }
    const std::size_t questions = matrix.n_questions();
    std::vector<double> sum(max_k + 1, 0.0), sum_sq(max_k + 1, 0.0);

    for (std::size_t q = 0; q < questions; ++q) {
        if (estimator == PassEstimator::Combinatorial) {
            const std::size_t c = matrix.successes(q);
            for (std::size_t k = 1; k <= max_k; ++k) {
                const double e = unbiased_pass_at_k(n, c, k);
                sum[k] += e;
                sum_sq[k] += e * e;
            }
        } else {
            bool hit = false;
            for (std::size_t k = 1; k <= max_k; ++k) {
                hit = hit || matrix.outcome(q, k - 1);
                if (hit) {
                    sum[k] += 1.0;
                    sum_sq[k] += 1.0;
                }
            }
        }
    }

    const double nq = static_cast<double>(questions);
    std::vector<double> values(max_k + 1, 0.0), se(max_k + 1, 0.0);
    for (std::size_t k = 1; k <= max_k; ++k) {
        const double mean = sum[k] / nq;
        values[k] = std::clamp(mean, 0.0, 1.0);
        if (questions > 1) {
            const double var = std::max(0.0, (sum_sq[k] - nq * mean * mean) / (nq - 1.0));
            se[k] = std::sqrt(var / nq);
        }
    }
    return EmpiricalPassCurve{PassCurve(std::move(values)), std::move(se)};
}

ResultsMatrix generate_synthetic_matrix(const DifficultyModel& model, std::size_t n_questions, std::size_t n_attempts,
                                        std::uint64_t seed, const SyntheticTokenModel& tokens, std::string model_name,
                                        std::string benchmark_name)
{
    if (n_questions == 0 || n_attempts == 0) throw ValidationError("synthetic matrix must be at least 1x1");
    if (tokens.input_min > tokens.input_max || tokens.output_min > tokens.output_max) {
        throw ValidationError("synthetic token ranges must satisfy min <= max");
    }
    Engine engine(seed);
    const auto p = sample_difficulties(model, n_questions, engine);
    std::uniform_int_distribution<std::uint64_t> prompt(tokens.input_min, tokens.input_max);
    std::uniform_int_distribution<std::uint64_t> completion(tokens.output_min, tokens.output_max);

    const std::size_t cells = n_questions * n_attempts;
    std::vector<std::uint8_t> outcomes(cells);
    std::vector<std::uint64_t> in(cells), out(cells);
    for (std::size_t q = 0; q < n_questions; ++q) {
        const auto prompt_len = prompt(engine);
        for (std::size_t a = 0; a < n_attempts; ++a) {
            const std::size_t i = q * n_attempts + a;
            outcomes[i] = bernoulli(engine, p[q]) ? 1 : 0;
            in[i] = prompt_len;
            out[i] = completion(engine);
        }
    }
    return ResultsMatrix(std::move(model_name), std::move(benchmark_name), n_questions, n_attempts,
                         std::move(outcomes), std::move(in), std::move(out));
}

}  // namespace redkit
