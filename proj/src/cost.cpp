#include "redkit/cost.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "redkit/error.hpp"

namespace redkit {

PricingTable PricingTable::make(std::string model, double input_per_million, double output_per_million)
{
    if (!(input_per_million >= 0.0) || !std::isfinite(input_per_million) || !(output_per_million >= 0.0) ||
        !std::isfinite(output_per_million)) {
        throw ValidationError(fmt::format("prices for '{}' must be finite and non-negative", model));
    }
    return PricingTable{std::move(model), input_per_million, output_per_million};
}

double tokens_to_usd(std::uint64_t input_tokens, std::uint64_t output_tokens, const PricingTable& pricing)
{
    return (static_cast<double>(input_tokens) * pricing.input_usd_per_million +
            static_cast<double>(output_tokens) * pricing.output_usd_per_million) /
           1e6;
}

std::vector<CostPoint> reprice_trajectory(const Trajectory& trajectory, const PricingTable& pricing)
{
    if (trajectory.tokens == TokenSource::None && !trajectory.events.empty()) {
        throw ValidationError(
            "trajectory has no token counters; replay with recorded tokens or enable the synthetic-token fallback");
    }
    std::vector<CostPoint> out;
    out.reserve(trajectory.events.size());
    for (const auto& e : trajectory.events) {
        out.push_back({tokens_to_usd(e.input_tokens, e.output_tokens, pricing), e.coverage});
    }
    return out;
}

std::vector<PricingTable> default_pricing_tables()
{
    return {
        PricingTable::make("llama-3.1-8b-instant", 0.05, 0.08),
        PricingTable::make("llama-3.3-70b-versatile", 0.59, 0.79),
        PricingTable::make("gpt-oss-20b", 0.075, 0.30),
    };
}

namespace {

PricingTable parse_entry(const nlohmann::json& j, const std::string& path)
{
    if (!j.is_object() || !j.contains("model") || !j["model"].is_string() ||
        !j.contains("input_usd_per_million") || !j["input_usd_per_million"].is_number() ||
        !j.contains("output_usd_per_million") || !j["output_usd_per_million"].is_number()) {
        throw ValidationError(fmt::format(
            "pricing entries in '{}' need \"model\", \"input_usd_per_million\", \"output_usd_per_million\"", path));
    }
    return PricingTable::make(j["model"].get<std::string>(), j["input_usd_per_million"].get<double>(),
                              j["output_usd_per_million"].get<double>());
}

}  // namespace

std::vector<PricingTable> load_pricing_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError(fmt::format("cannot open pricing file '{}'", path));
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(fmt::format("malformed JSON in '{}': {}", path, e.what()));
    }
    std::vector<PricingTable> tables;
    if (doc.is_array()) {
        for (const auto& j : doc) tables.push_back(parse_entry(j, path));
    } else {
        tables.push_back(parse_entry(doc, path));
    }
    if (tables.empty()) throw ValidationError(fmt::format("pricing file '{}' is empty", path));
    return tables;
}

PricingTable select_pricing(const std::vector<PricingTable>& tables, std::string_view model)
{
    if (model.empty()) {
        if (tables.size() == 1) return tables.front();
        throw ValidationError("several pricing entries available; name the model");
    }
    for (const auto& t : tables) {
        if (t.model_name == model) return t;
    }
    // Provider-prefixed names such as "openai/gpt-oss-20b".
    for (const auto& t : tables) {
        const auto slash = model.rfind('/');
        if (slash != std::string_view::npos && t.model_name == model.substr(slash + 1)) return t;
    }
    throw ValidationError(fmt::format("no pricing entry for model '{}'", model));
}

}  // namespace redkit
