#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "redkit/trajectory.hpp"

namespace redkit {

/// USD per million tokens for one model.
struct PricingTable {
    std::string model_name;
    double input_usd_per_million = 0.0;
    double output_usd_per_million = 0.0;

    /// Validating constructor; prices must be finite and >= 0.
    static PricingTable make(std::string model, double input_per_million, double output_per_million);
};

/// (input * in_price + output * out_price) / 1e6
double tokens_to_usd(std::uint64_t input_tokens, std::uint64_t output_tokens, const PricingTable& pricing);

struct CostPoint {
    double usd;
    std::uint32_t coverage;
};

/// Cumulative USD at each event. Throws ValidationError when the trajectory
/// carries no token counters.
std::vector<CostPoint> reprice_trajectory(const Trajectory& trajectory, const PricingTable& pricing);

/// Groq prices for the three HumanEval models, shipped as defaults.
std::vector<PricingTable> default_pricing_tables();

/// Reads a pricing JSON file: one object
///   {"model": "...", "input_usd_per_million": 0.05, "output_usd_per_million": 0.08}
/// or an array of such objects.
std::vector<PricingTable> load_pricing_file(const std::string& path);

/// Case-sensitive lookup by model name. An empty name selects the only
/// entry of a single-entry list.
PricingTable select_pricing(const std::vector<PricingTable>& tables, std::string_view model);

/// Environment variable naming the default pricing file.
inline constexpr const char* kPricingEnvVar = "REDKIT_PRICING";

}  // namespace redkit
