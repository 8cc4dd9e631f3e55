#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "redkit/rng.hpp"

namespace redkit {

/*!
 * pass@k for k = 0..K, i.e. the CDF F(k) = Pr(T <= k) of the number of
 * attempts T a randomly drawn question needs for its first success.
 *
 * Invariants, checked at construction: F(0) = 0, values in [0, 1],
 * non-decreasing. Round-off decreases below 1e-12 are flattened.
 */
class PassCurve {
public:
    explicit PassCurve(std::vector<double> values);

    /// Largest tabulated index K.
    std::size_t max_index() const noexcept { return values_.size() - 1; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t k) const noexcept { return values_[k]; }
    /// Bounds-checked access; throws ValidationError when k > K.
    double at(std::size_t k) const;

    std::span<const double> values() const noexcept { return values_; }

    /// Leading sub-curve F(0..k_max).
    PassCurve truncated(std::size_t k_max) const;

private:
    std::vector<double> values_;
};

struct PointMass {
    double p;
};

struct BetaDifficulty {
    double alpha;
    double beta;
};

/// Finite mixture of success probabilities; weights are normalized.
struct EmpiricalDifficulty {
    std::vector<double> p;
    std::vector<double> weight;
};

struct TabulatedDifficulty {
    PassCurve curve;
};

/// Distribution of the per-question single-attempt success probability.
class DifficultyModel {
public:
    using Variant = std::variant<PointMass, BetaDifficulty, EmpiricalDifficulty, TabulatedDifficulty>;

    static DifficultyModel point_mass(double p);
    static DifficultyModel beta(double alpha, double beta);
    /// Atoms are (p, weight). Weights must sum to 1 within 1e-9.
    static DifficultyModel empirical(std::span<const std::pair<double, double>> atoms);
    static DifficultyModel tabulated(PassCurve curve);

    const Variant& variant() const noexcept { return model_; }
    bool is_tabulated() const noexcept { return std::holds_alternative<TabulatedDifficulty>(model_); }

    /// Round-trippable text form, e.g. "beta:0.34,2".
    std::string describe() const;

private:
    explicit DifficultyModel(Variant v) : model_(std::move(v)) {}
    Variant model_;
};

/// pass@k = 1 - E[(1-p)^k]. Tabulated models throw when k > K.
double pass_at_k(const DifficultyModel& model, std::size_t k);

/// 1 - pass@k, evaluated directly (no cancellation near pass@k = 1).
double survival_at_k(const DifficultyModel& model, std::size_t k);

/// Small-p tail law P(p) ~ c p^(alpha-1); gives 1 - pass@k ~ c Gamma(alpha) k^-alpha.
struct TailLaw {
    double alpha;
    double coefficient;
};

struct TailEstimate {
    std::optional<TailLaw> law;
    std::string note;
};

/// Analytic tail law where one exists (Beta only).
TailEstimate tail_exponent_and_coefficient(const DifficultyModel& model);

/// n independent draws of p. Tabulated models carry no p-distribution
/// and throw ValidationError.
std::vector<double> sample_difficulties(const DifficultyModel& model, std::size_t n, std::uint64_t seed);
std::vector<double> sample_difficulties(const DifficultyModel& model, std::size_t n, Engine& engine);

/// Tabulate pass@k for k = 0..K.
PassCurve build_pass_curve(const DifficultyModel& model, std::size_t max_k);

/*!
 * Parse a model expression:
 *   point:0.5
 *   beta:0.34,2.0
 *   empirical:0.2/0.5,0.8/0.5        (p/weight pairs)
 *   empirical:@atoms.json            ({"atoms": [[p, w], ...]})
 *   curve:@curve.json                ({"values": [0, 0.5, ...]})
 */
DifficultyModel parse_difficulty_spec(std::string_view text);

PassCurve load_pass_curve(const std::string& path);

}  // namespace redkit
