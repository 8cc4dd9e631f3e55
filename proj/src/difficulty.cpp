#include "redkit/difficulty.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "redkit/error.hpp"

namespace redkit {

namespace {

constexpr double kMonotoneSlack = 1e-12;
constexpr double kWeightSumTolerance = 1e-9;

void check_probability(double p, std::string_view what)
{
    if (!(p > 0.0 && p <= 1.0)) {
        throw ValidationError(fmt::format("{} must satisfy 0 < p <= 1, got {}", what, p));
    }
}

double parse_double(std::string_view text)
{
    // std::from_chars for double is not available in every libstdc++ we target.
    std::string buf(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(buf, &used);
    } catch (const std::exception&) {
        throw ValidationError(fmt::format("expected a number, got '{}'", text));
    }
    if (used != buf.size()) {
        throw ValidationError(fmt::format("trailing characters in number '{}'", text));
    }
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError(fmt::format("cannot open '{}'", path));
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(fmt::format("malformed JSON in '{}': {}", path, e.what()));
    }
}

// E[(1-p)^k] for each variant.
struct SurvivalVisitor {
    std::size_t k;

    double operator()(const PointMass& m) const { return std::pow(1.0 - m.p, static_cast<double>(k)); }

    double operator()(const BetaDifficulty& m) const
    {
        if (k == 0) return 1.0;
        // B(a, b+k) / B(a, b) = [G(b+k)/G(b+k+a)] / [G(b)/G(b+a)]
        const double kk = static_cast<double>(k);
        return boost::math::tgamma_delta_ratio(m.beta + kk, m.alpha) /
               boost::math::tgamma_delta_ratio(m.beta, m.alpha);
    }

    double operator()(const EmpiricalDifficulty& m) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < m.p.size(); ++i) {
            s += m.weight[i] * std::pow(1.0 - m.p[i], static_cast<double>(k));
        }
        return s;
    }

    double operator()(const TabulatedDifficulty& m) const { return 1.0 - m.curve.at(k); }
};

}  // namespace

//---------------------------------------------------------------------------//
// PassCurve
//---------------------------------------------------------------------------//

PassCurve::PassCurve(std::vector<double> values) : values_(std::move(values))
{
    if (values_.empty()) throw ValidationError("pass curve must contain at least F(0)");
    if (values_[0] != 0.0) throw ValidationError(fmt::format("pass curve must start at F(0) = 0, got {}", values_[0]));
    for (std::size_t k = 0; k < values_.size(); ++k) {
        const double v = values_[k];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError(fmt::format("pass curve value F({}) = {} outside [0, 1]", k, v));
        }
        if (k > 0 && v < values_[k - 1]) {
            if (values_[k - 1] - v > kMonotoneSlack) {
                throw ValidationError(
                    fmt::format("pass curve decreases at k = {} ({} < {})", k, v, values_[k - 1]));
            }
            values_[k] = values_[k - 1];
        }
    }
}

double PassCurve::at(std::size_t k) const
{
    if (k >= values_.size()) {
        throw ValidationError(fmt::format("pass curve index {} exceeds tabulated K = {}", k, max_index()));
    }
    return values_[k];
}

PassCurve PassCurve::truncated(std::size_t k_max) const
{
    if (k_max > max_index()) {
        throw ValidationError(fmt::format("cannot truncate curve of K = {} to {}", max_index(), k_max));
    }
    return PassCurve(std::vector<double>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(k_max) + 1));
}

//---------------------------------------------------------------------------//
// DifficultyModel
//---------------------------------------------------------------------------//

DifficultyModel DifficultyModel::point_mass(double p)
{
    check_probability(p, "point-mass probability");
    return DifficultyModel(PointMass{p});
}

DifficultyModel DifficultyModel::beta(double alpha, double beta)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !(beta > 0.0) || !std::isfinite(beta)) {
        throw ValidationError(fmt::format("Beta shape parameters must be positive, got ({}, {})", alpha, beta));
    }
    return DifficultyModel(BetaDifficulty{alpha, beta});
}

DifficultyModel DifficultyModel::empirical(std::span<const std::pair<double, double>> atoms)
{
    if (atoms.empty()) throw ValidationError("empirical model needs at least one atom");
    EmpiricalDifficulty m;
    double total = 0.0;
    for (const auto& [p, w] : atoms) {
        check_probability(p, "empirical atom probability");
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ValidationError(fmt::format("empirical weight must be positive, got {}", w));
        }
        m.p.push_back(p);
        m.weight.push_back(w);
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
        throw ValidationError(fmt::format("empirical weights sum to {}, expected 1", total));
    }
    for (auto& w : m.weight) w /= total;
    return DifficultyModel(std::move(m));
}

DifficultyModel DifficultyModel::tabulated(PassCurve curve)
{
    return DifficultyModel(TabulatedDifficulty{std::move(curve)});
}

std::string DifficultyModel::describe() const
{
    struct Describe {
        std::string operator()(const PointMass& m) const { return fmt::format("point:{}", m.p); }
        std::string operator()(const BetaDifficulty& m) const { return fmt::format("beta:{},{}", m.alpha, m.beta); }
        std::string operator()(const EmpiricalDifficulty& m) const
        {
            std::string out = "empirical:";
            for (std::size_t i = 0; i < m.p.size(); ++i) {
                if (i) out += ',';
                out += fmt::format("{}/{}", m.p[i], m.weight[i]);
            }
            return out;
        }
        std::string operator()(const TabulatedDifficulty& m) const
        {
            return fmt::format("curve:<K={}>", m.curve.max_index());
        }
    };
    return std::visit(Describe{}, model_);
}

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//

double survival_at_k(const DifficultyModel& model, std::size_t k)
{
    return std::visit(SurvivalVisitor{k}, model.variant());
}

double pass_at_k(const DifficultyModel& model, std::size_t k)
{
    if (k == 0) {
        if (const auto* t = std::get_if<TabulatedDifficulty>(&model.variant())) return t->curve[0];
        return 0.0;
    }
    if (const auto* t = std::get_if<TabulatedDifficulty>(&model.variant())) return t->curve.at(k);
    return 1.0 - survival_at_k(model, k);
}

TailEstimate tail_exponent_and_coefficient(const DifficultyModel& model)
{
    struct Tail {
        TailEstimate operator()(const PointMass&) const
        {
            return {std::nullopt, "point mass has p_min > 0: survival decays geometrically, not as a power law"};
        }
        TailEstimate operator()(const BetaDifficulty& m) const
        {
            return {TailLaw{m.alpha, 1.0 / boost::math::beta(m.alpha, m.beta)}, "analytic Beta tail"};
        }
        TailEstimate operator()(const EmpiricalDifficulty&) const
        {
            return {std::nullopt, "empirical atoms have p_min > 0: survival decays geometrically, not as a power law"};
        }
        TailEstimate operator()(const TabulatedDifficulty&) const
        {
            return {std::nullopt, "tabulated curve has no analytic tail; fit it with the log-log estimator"};
        }
    };
    return std::visit(Tail{}, model.variant());
}

std::vector<double> sample_difficulties(const DifficultyModel& model, std::size_t n, Engine& engine)
{
    if (n == 0) throw ValidationError("sample size must be at least 1");
    std::vector<double> out;
    out.reserve(n);

    if (const auto* m = std::get_if<PointMass>(&model.variant())) {
        out.assign(n, m->p);
    } else if (const auto* m = std::get_if<BetaDifficulty>(&model.variant())) {
        std::gamma_distribution<double> ga(m->alpha, 1.0);
        std::gamma_distribution<double> gb(m->beta, 1.0);
        while (out.size() < n) {
            const double x = ga(engine);
            const double y = gb(engine);
            const double p = x / (x + y);
            // Underflow of x can produce p == 0 for small alpha.
            if (p > 0.0 && p <= 1.0) out.push_back(p);
        }
    } else if (const auto* m = std::get_if<EmpiricalDifficulty>(&model.variant())) {
        std::discrete_distribution<std::size_t> pick(m->weight.begin(), m->weight.end());
        for (std::size_t i = 0; i < n; ++i) out.push_back(m->p[pick(engine)]);
    } else {
        throw ValidationError("tabulated pass curves do not define a difficulty distribution to sample from");
    }
    return out;
}

std::vector<double> sample_difficulties(const DifficultyModel& model, std::size_t n, std::uint64_t seed)
{
    Engine engine(seed);
    return sample_difficulties(model, n, engine);
}

PassCurve build_pass_curve(const DifficultyModel& model, std::size_t max_k)
{
    if (max_k < 1) throw ValidationError("pass curve needs K >= 1");
    if (const auto* t = std::get_if<TabulatedDifficulty>(&model.variant())) return t->curve.truncated(max_k);

    std::vector<double> values(max_k + 1);
    values[0] = 0.0;
    for (std::size_t k = 1; k <= max_k; ++k) values[k] = pass_at_k(model, k);
    return PassCurve(std::move(values));
}

//---------------------------------------------------------------------------//
// Text / file forms
//---------------------------------------------------------------------------//

PassCurve load_pass_curve(const std::string& path)
{
    const auto doc = read_json_file(path);
    if (!doc.is_object() || !doc.contains("values") || !doc["values"].is_array()) {
        throw ValidationError(fmt::format("'{}' must be an object with a \"values\" array", path));
    }
    std::vector<double> values;
    for (const auto& v : doc["values"]) {
        if (!v.is_number()) throw ValidationError(fmt::format("non-numeric pass curve entry in '{}'", path));
        values.push_back(v.get<double>());
    }
    return PassCurve(std::move(values));
}

namespace {

DifficultyModel load_empirical(const std::string& path)
{
    const auto doc = read_json_file(path);
    if (!doc.is_object() || !doc.contains("atoms") || !doc["atoms"].is_array()) {
        throw ValidationError(fmt::format("'{}' must be an object with an \"atoms\" array of [p, weight]", path));
    }
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : doc["atoms"]) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
            throw ValidationError(fmt::format("atoms in '{}' must be [p, weight] pairs", path));
        }
        atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
    }
    return DifficultyModel::empirical(atoms);
}

}  // namespace

DifficultyModel parse_difficulty_spec(std::string_view text)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ValidationError(fmt::format("difficulty spec '{}' must look like kind:params", text));
    }
    const auto kind = text.substr(0, colon);
    const auto args = text.substr(colon + 1);

    if (kind == "point") return DifficultyModel::point_mass(parse_double(args));

    if (kind == "beta") {
        const auto parts = split(args, ',');
        if (parts.size() != 2) throw ValidationError(fmt::format("beta spec needs 'beta:alpha,beta', got '{}'", text));
        return DifficultyModel::beta(parse_double(parts[0]), parse_double(parts[1]));
    }

    if (kind == "empirical") {
        if (!args.empty() && args.front() == '@') return load_empirical(std::string(args.substr(1)));
        std::vector<std::pair<double, double>> atoms;
        for (auto atom : split(args, ',')) {
            const auto slash = atom.find('/');
            if (slash == std::string_view::npos) {
                throw ValidationError(fmt::format("empirical atom '{}' must be p/weight", atom));
            }
            atoms.emplace_back(parse_double(atom.substr(0, slash)), parse_double(atom.substr(slash + 1)));
        }
        return DifficultyModel::empirical(atoms);
    }

    if (kind == "curve") {
        if (args.empty() || args.front() != '@') throw ValidationError("curve spec must be curve:@file.json");
        return DifficultyModel::tabulated(load_pass_curve(std::string(args.substr(1))));
    }

    throw ValidationError(fmt::format("unknown difficulty kind '{}'", kind));
}

}  // namespace redkit
