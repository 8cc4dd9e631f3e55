#include "redkit/table_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "redkit/error.hpp"

namespace redkit {

using nlohmann::json;

TableFormat parse_table_format(const std::string& text)
{
    if (text == "csv") return TableFormat::Csv;
    if (text == "json") return TableFormat::Json;
    throw ValidationError(fmt::format("unknown output format '{}' (csv | json)", text));
}

const char* axis_name(CostAxis axis)
{
    switch (axis) {
    case CostAxis::Attempts:
        return "attempts";
    case CostAxis::Tokens:
        return "tokens";
    case CostAxis::Usd:
        return "usd";
    }
    return "attempts";
}

CostAxis parse_cost_axis(const std::string& text)
{
    if (text == "attempts") return CostAxis::Attempts;
    if (text == "tokens") return CostAxis::Tokens;
    if (text == "usd") return CostAxis::Usd;
    throw ValidationError(fmt::format("unknown cost axis '{}' (attempts | tokens | usd)", text));
}

std::string coverage_table(const CoveragePrediction& p, double pass_at_1, TableFormat format)
{
    const bool m2 = p.has_second_moment();
    if (format == TableFormat::Json) {
        json doc;
        doc["t_max"] = p.t_max();
        doc["mean"] = p.mean;
        if (m2) {
            doc["second_moment"] = p.second_moment;
            std::vector<double> sd(p.mean.size());
            for (std::size_t t = 0; t < sd.size(); ++t) sd[t] = p.std_dev(t);
            doc["std"] = sd;
        }
        doc["first_round_slope"] = pass_at_1;
        return doc.dump(2) + "\n";
    }
    std::string out = "t,mean,second_moment,std,first_round\n";
    for (std::size_t t = 0; t < p.mean.size(); ++t) {
        const double ref = pass_at_1 * static_cast<double>(t);
        if (m2) {
            out += fmt::format("{},{},{},{},{}\n", t, p.mean[t], p.second_moment[t], p.std_dev(t), ref);
        } else {
            out += fmt::format("{},{},,,{}\n", t, p.mean[t], ref);
        }
    }
    return out;
}

std::string finite_pool_table(std::span<const FinitePoolRound> rows, double pass_at_1, TableFormat format)
{
    if (format == TableFormat::Json) {
        json arr = json::array();
        for (const auto& r : rows) {
            arr.push_back({{"round", r.round},
                           {"attempts", r.mean_attempts},
                           {"coverage", r.mean_coverage},
                           {"remainder", r.mean_remainder},
                           {"first_round", pass_at_1 * r.mean_attempts}});
        }
        return json{{"rounds", arr}}.dump(2) + "\n";
    }
    std::string out = "round,attempts,coverage,remainder,first_round\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{}\n", r.round, r.mean_attempts, r.mean_coverage, r.mean_remainder,
                           pass_at_1 * r.mean_attempts);
    }
    return out;
}

std::string ensemble_table(const EnsembleSummary& s, TableFormat format)
{
    if (format == TableFormat::Json) {
        json doc;
        doc["axis"] = axis_name(s.axis);
        doc["realizations"] = s.realizations;
        doc["master_seed"] = s.master_seed;
        doc["pool_size"] = s.pool_size;
        doc["grid"] = s.grid;
        doc["mean"] = s.mean;
        doc["std"] = s.std_dev;
        if (!s.mean_round_remainders.empty()) {
            doc["mean_round_remainders"] = s.mean_round_remainders;
            doc["mean_round_attempts"] = s.mean_round_attempts;
        }
        return doc.dump(2) + "\n";
    }
    std::string out = "t,mean,std\n";
    for (std::size_t g = 0; g < s.grid.size(); ++g) out += fmt::format("{},{},{}\n", s.grid[g], s.mean[g], s.std_dev[g]);
    return out;
}

namespace {

json trajectory_json(const Trajectory& t)
{
    json events = json::array();
    for (const auto& e : t.events) events.push_back({e.attempts, e.input_tokens, e.output_tokens, e.coverage});
    json doc;
    doc["pool_size"] = t.pool_size;
    doc["columns"] = {"attempts", "input_tokens", "output_tokens", "coverage"};
    doc["events"] = std::move(events);
    doc["round_remainders"] = t.round_remainders;
    doc["exhausted"] = t.exhausted;
    return doc;
}

}  // namespace

std::string trajectory_table(const Trajectory& t, TableFormat format)
{
    if (format == TableFormat::Json) return trajectory_json(t).dump() + "\n";
    std::string out = "attempts,input_tokens,output_tokens,coverage\n";
    for (const auto& e : t.events) {
        out += fmt::format("{},{},{},{}\n", e.attempts, e.input_tokens, e.output_tokens, e.coverage);
    }
    return out;
}

std::string trajectories_table(std::span<const Trajectory> ts, TableFormat format)
{
    if (format == TableFormat::Json) {
        json arr = json::array();
        for (const auto& t : ts) arr.push_back(trajectory_json(t));
        return json{{"trajectories", arr}}.dump() + "\n";
    }
    std::string out = "realization,attempts,input_tokens,output_tokens,coverage\n";
    for (std::size_t r = 0; r < ts.size(); ++r) {
        for (const auto& e : ts[r].events) {
            out += fmt::format("{},{},{},{},{}\n", r, e.attempts, e.input_tokens, e.output_tokens, e.coverage);
        }
    }
    return out;
}

std::string cost_table(std::span<const CostPoint> points, TableFormat format)
{
    if (format == TableFormat::Json) {
        json arr = json::array();
        for (const auto& p : points) arr.push_back({p.usd, p.coverage});
        return json{{"columns", {"usd", "coverage"}}, {"points", arr}}.dump() + "\n";
    }
    std::string out = "usd,coverage\n";
    for (const auto& p : points) out += fmt::format("{},{}\n", p.usd, p.coverage);
    return out;
}

std::string alpha_estimate_json(const AlphaEstimate& e)
{
    json points = json::array();
    for (const auto& p : e.points) points.push_back({{"round", p.round}, {"ratio", p.ratio}, {"fitted", p.fitted}});
    json doc;
    doc["alpha"] = e.alpha;
    doc["stderr_alpha"] = e.stderr_alpha;
    doc["beta_hat"] = e.beta_hat;
    doc["beta_hat_note"] = "low confidence: derived from the intercept";
    doc["slope"] = e.slope;
    doc["intercept"] = e.intercept;
    doc["rounds_used"] = {e.first_round, e.last_round};
    doc["points"] = std::move(points);
    return doc.dump(2) + "\n";
}

std::string round_series_csv(const RoundSeries& s)
{
    std::string out = "n,mean_remainder\n";
    for (std::size_t n = 0; n < s.means.size(); ++n) out += fmt::format("{},{}\n", n, s.means[n]);
    return out;
}

RoundSeries parse_round_series_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::vector<double> means;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (header) {
            header = false;
            if (line.find_first_not_of("0123456789.,-+eE ") != std::string::npos) continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError(fmt::format("round series line {}: expected 'n,mean_remainder'", line_no));
        }
        std::size_t n = 0;
        double v = 0.0;
        try {
            n = std::stoul(line.substr(0, comma));
            v = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("round series line {}: cannot parse '{}'", line_no, line));
        }
        if (n != means.size()) {
            throw ValidationError(fmt::format("round series line {}: expected n = {}, got {}", line_no, means.size(), n));
        }
        means.push_back(v);
    }
    return RoundSeries::make(std::move(means));
}

RoundSeries load_round_series_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError(fmt::format("cannot open round series '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_round_series_csv(buf.str());
}

void write_text_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError(fmt::format("cannot write '{}'", path));
    out << contents;
    if (!out) throw ValidationError(fmt::format("failed writing '{}'", path));
}

}  // namespace redkit
