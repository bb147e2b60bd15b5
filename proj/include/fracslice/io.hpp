#pragma once

// File formats: IFS definitions (JSON), scenarios (TOML), result tables (CSV)
// and summaries (JSON).

#include "fracslice/errors.hpp"
#include "fracslice/experiments.hpp"
#include "fracslice/ifs.hpp"
#include "fracslice/presets.hpp"
#include "fracslice/projection.hpp"
#include "fracslice/rational.hpp"

#include <json.hpp>
#include <toml.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef FRACSLICE_VERSION
#define FRACSLICE_VERSION "0.0.0"
#endif

namespace fracslice {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = FRACSLICE_VERSION;

/// Shortest-safe decimal form: 17 significant digits always round-trips a double.
inline std::string format_double(double x)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return {buf, res.ptr};
}

inline double parse_double(const std::string& text)
{
    double x = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+')
        ++first;
    const auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ValidationError(ErrorCode::Parse, "not a number: '" + text + "'");
    return x;
}

namespace detail {

inline BigInt parse_bigint(const json& v)
{
    if (v.is_number_integer())
        return BigInt(v.get<std::int64_t>());
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        const bool ok = !s.empty() && s.find_first_not_of("0123456789", s[0] == '-' ? 1 : 0) == std::string::npos &&
                        s != "-";
        if (ok)
            return BigInt(s);
    }
    throw ValidationError(ErrorCode::Parse, "rational parts must be integers, got " + v.dump());
}

inline json bigint_json(const BigInt& v)
{
    if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
        return v.convert_to<std::int64_t>();
    return v.str();
}

} // namespace detail

// A scalar is a JSON number, a decimal string, or {"num": i, "den": j}.
struct Scalar {
    double value = 0.0;
    std::optional<Rational> exact;
};

inline Scalar parse_scalar(const json& v)
{
    if (v.is_number())
        return {v.get<double>(), std::nullopt};
    if (v.is_string())
        return {parse_double(v.get<std::string>()), std::nullopt};
    if (v.is_object() && v.contains("num") && v.contains("den")) {
        const BigInt den = detail::parse_bigint(v.at("den"));
        if (den == 0)
            throw ValidationError(ErrorCode::Parse, "zero denominator");
        Rational q(detail::parse_bigint(v.at("num")), den);
        return {to_double(q), q};
    }
    throw ValidationError(ErrorCode::Parse, "unrecognized scalar " + v.dump());
}

inline json scalar_json(const Rational& q)
{
    return json{{"num", detail::bigint_json(boost::multiprecision::numerator(q))},
                {"den", detail::bigint_json(boost::multiprecision::denominator(q))}};
}

inline json scalar_json(double x) { return format_double(x); }

inline IFS ifs_from_json(const json& doc)
{
    if (!doc.is_object() || !doc.contains("maps") || !doc.at("maps").is_array())
        throw ValidationError(ErrorCode::Parse, "IFS document needs a 'maps' array");
    std::vector<Scalar> ratios, xs, ys;
    for (const auto& m : doc.at("maps")) {
        if (!m.is_object() || !m.contains("ratio") || !m.contains("translation"))
            throw ValidationError(ErrorCode::Parse, "each map needs 'ratio' and 'translation'");
        const auto& tr = m.at("translation");
        if (!tr.is_array() || tr.size() != 2)
            throw ValidationError(ErrorCode::Parse, "'translation' must be [x, y]");
        ratios.push_back(parse_scalar(m.at("ratio")));
        xs.push_back(parse_scalar(tr[0]));
        ys.push_back(parse_scalar(tr[1]));
    }
    bool all_exact = true;
    for (std::size_t i = 0; i < ratios.size(); ++i)
        all_exact = all_exact && ratios[i].exact && xs[i].exact && ys[i].exact;
    std::vector<Similitude> maps;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (all_exact)
            maps.push_back(Similitude::from_exact(*ratios[i].exact, *xs[i].exact, *ys[i].exact));
        else
            maps.emplace_back(ratios[i].value, Vec2{xs[i].value, ys[i].value});
    }
    return IFS(std::move(maps));
}

inline json ifs_to_json(const IFS& ifs)
{
    json maps = json::array();
    for (const auto& m : ifs.maps()) {
        if (m.exact)
            maps.push_back({{"ratio", scalar_json(m.exact->ratio)},
                            {"translation", json::array({scalar_json(m.exact->tx), scalar_json(m.exact->ty)})}});
        else
            maps.push_back({{"ratio", scalar_json(m.ratio)},
                            {"translation",
                             json::array({scalar_json(m.translation.x), scalar_json(m.translation.y)})}});
    }
    return json{{"maps", maps}};
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError(ErrorCode::Parse, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError(ErrorCode::Parse, "cannot write " + path.string());
    out << text;
}

inline IFS parse_ifs(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(ErrorCode::Parse, std::string("malformed IFS JSON: ") + e.what());
    }
    return ifs_from_json(doc);
}

inline IFS load_ifs(const std::filesystem::path& path) { return parse_ifs(read_text(path)); }

inline void save_ifs(const std::filesystem::path& path, const IFS& ifs) { write_text(path, ifs_to_json(ifs).dump(2) + "\n"); }

/// Named presets: four_corner, product_cantor, diagonal_pair, unit_square.
inline IFS make_preset(const std::string& name, std::optional<double> rho = std::nullopt)
{
    if (name == "four_corner")
        return presets::four_corner(rho.value_or(0.35));
    if (name == "product_cantor")
        return presets::product_cantor(rho.value_or(0.4), 1.0 - rho.value_or(0.4));
    if (name == "diagonal_pair")
        return presets::diagonal_pair(rho.value_or(0.4));
    if (name == "unit_square")
        return presets::unit_square();
    throw ValidationError(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
}

// ---- scenarios -------------------------------------------------------------

namespace detail {

template <class T>
T toml_get(const toml::table& tbl, std::string_view section, std::string_view key, T fallback)
{
    const auto node = tbl[section][key];
    if (!node)
        return fallback;
    if constexpr (std::is_same_v<T, double>) {
        if (auto v = node.value<double>())
            return *v;
    } else if constexpr (std::is_same_v<T, std::int64_t>) {
        if (auto v = node.value<std::int64_t>())
            return *v;
    } else {
        if (auto v = node.value<T>())
            return *v;
    }
    throw ValidationError(ErrorCode::Parse, "bad value for " + std::string(section) + "." + std::string(key));
}

inline std::vector<double> toml_doubles(const toml::table& tbl, std::string_view section, std::string_view key)
{
    std::vector<double> out;
    const auto* arr = tbl[section][key].as_array();
    if (!arr)
        return out;
    for (const auto& el : *arr) {
        auto v = el.value<double>();
        if (!v)
            throw ValidationError(ErrorCode::Parse, std::string(section) + "." + std::string(key) + " must hold numbers");
        out.push_back(*v);
    }
    return out;
}

} // namespace detail

struct ScenarioFile {
    Scenario scenario;
    std::filesystem::path output_dir;
    std::string source_text; // verbatim TOML, copied into the output manifest
};

/// Parses a scenario; relative paths in [ifs] file resolve against `base_dir`.
inline ScenarioFile parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {})
{
    toml::table tbl;
    try {
        tbl = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw ValidationError(ErrorCode::Parse, std::string("malformed scenario TOML: ") + std::string(e.description()));
    }
    ScenarioFile out;
    out.source_text = text;
    Scenario& sc = out.scenario;

    if (auto file = tbl["ifs"]["file"].value<std::string>()) {
        const std::filesystem::path p = std::filesystem::path(*file).is_absolute() ? std::filesystem::path(*file) : base_dir / *file;
        sc.ifs = load_ifs(p);
        sc.ifs_source = *file;
    } else if (auto preset = tbl["ifs"]["preset"].value<std::string>()) {
        std::optional<double> rho;
        if (tbl["ifs"]["rho"])
            rho = detail::toml_get<double>(tbl, "ifs", "rho", 0.0);
        sc.ifs = make_preset(*preset, rho);
        sc.ifs_source = *preset;
    } else {
        throw ValidationError(ErrorCode::Parse, "[ifs] needs 'preset' or 'file'");
    }

    if (tbl["direction"]["vector"]) {
        const auto v = detail::toml_doubles(tbl, "direction", "vector");
        if (v.size() != 2)
            throw ValidationError(ErrorCode::Parse, "direction.vector must be [x, y]");
        sc.direction = Direction::from_vector(v[0], v[1]);
    } else {
        sc.direction = Direction::from_angle(detail::toml_get<double>(tbl, "direction", "theta", 0.0));
    }

    const auto count = detail::toml_get<std::int64_t>(tbl, "grid", "count", 64);
    if (count < 0)
        throw ValidationError(ErrorCode::InvalidArgument, "grid.count must be non-negative");
    sc.t_count = static_cast<std::size_t>(count);
    const auto weighting = detail::toml_get<std::string>(tbl, "grid", "weighting", "pushforward");
    if (weighting == "pushforward")
        sc.weighting = GridWeighting::Pushforward;
    else if (weighting == "uniform")
        sc.weighting = GridWeighting::Uniform;
    else
        throw ValidationError(ErrorCode::Parse, "grid.weighting must be 'pushforward' or 'uniform'");
    const auto seed = detail::toml_get<std::int64_t>(tbl, "grid", "seed", 1);
    sc.seed = static_cast<std::uint64_t>(seed);

    sc.deltas = detail::toml_doubles(tbl, "ladder", "deltas");
    if (sc.deltas.empty() && tbl["ladder"]["dyadic"]) {
        const auto e = detail::toml_doubles(tbl, "ladder", "dyadic");
        if (e.size() != 2 || e[0] != std::floor(e[0]) || e[1] != std::floor(e[1]) || e[1] < e[0])
            throw ValidationError(ErrorCode::Parse, "ladder.dyadic must be [first, last] exponents");
        for (double k = e[0]; k <= e[1]; k += 1.0)
            sc.deltas.push_back(std::ldexp(1.0, -static_cast<int>(k)));
    }
    sc.r_divisor = detail::toml_get<double>(tbl, "ladder", "r_divisor", 32.0);
    if (tbl["ladder"]["slice_r"])
        sc.dimension_ladder = detail::toml_doubles(tbl, "ladder", "slice_r");

    out.output_dir = detail::toml_get<std::string>(tbl, "output", "dir", "out");
    sc.validate();
    return out;
}

inline ScenarioFile load_scenario(const std::filesystem::path& path)
{
    return parse_scenario(read_text(path), path.parent_path());
}

// ---- outputs -----------------------------------------------------------------

inline std::string results_csv(const TrendReport& rep)
{
    std::string out = "t,delta,premeasure,items\n";
    for (const auto& r : rep.rows)
        out += format_double(r.t) + "," + format_double(r.delta) + "," + format_double(r.premeasure) + "," +
               std::to_string(r.items) + "\n";
    return out;
}

inline std::string dims_csv(const SliceDimReport& rep)
{
    std::string out = "t,slope,residual\n";
    for (const auto& r : rep.rows) {
        if (r.empty)
            out += format_double(r.t) + ",,\n";
        else
            out += format_double(r.t) + "," + format_double(r.slope) + "," + format_double(r.residual) + "\n";
    }
    return out;
}

inline json conditions_json(const ConditionSummary& c)
{
    return json{{"condition_B", c.b_holds},
                {"condition_B_prime", c.b_prime_holds},
                {"ssc_certified", c.ssc_certified},
                {"ssc_gap", format_double(c.ssc_gap)},
                {"warnings", c.warnings}};
}

inline json summary_json(const Scenario& sc, const TrendReport& trend, const SliceDimReport& dims)
{
    json per_delta = json::array();
    for (std::size_t k = 0; k < trend.deltas.size(); ++k) {
        const auto& q = trend.per_delta[k];
        per_delta.push_back({{"delta", format_double(trend.deltas[k])},
                             {"mean", format_double(q.mean)},
                             {"q1", format_double(q.q1)},
                             {"median", format_double(q.median)},
                             {"q3", format_double(q.q3)}});
    }
    json doc;
    doc["version"] = kVersion;
    doc["ifs"] = ifs_to_json(sc.ifs);
    doc["ifs_source"] = sc.ifs_source;
    doc["dimension"] = format_double(trend.dimension);
    doc["direction"] = {{"theta", format_double(sc.direction.theta)},
                        {"unit", json::array({format_double(sc.direction.unit.x), format_double(sc.direction.unit.y)})}};
    doc["grid"] = {{"count", sc.t_count}, {"weighting", to_string(sc.weighting)}, {"seed", sc.seed}};
    doc["cover_resolution"] = format_double(trend.cover_resolution);
    doc["conditions"] = conditions_json(trend.conditions);
    doc["divergence"] = {{"verdict", trend.partial() ? "Incomplete" : to_string(trend.verdict)},
                         {"growth_factor", format_double(trend.growth_factor)},
                         {"growth_threshold", format_double(kGrowthThreshold)},
                         {"medians_monotone", trend.medians_monotone},
                         {"monotone_points", trend.monotone_points},
                         {"points", trend.ts.size()},
                         {"per_delta", per_delta},
                         {"note", "finite-resolution growth trend, not a proof of an infinite measure"}};
    if (trend.partial())
        doc["divergence"]["budget_error"] = trend.budget_error;
    doc["slice_dimension"] = {{"median_slope", format_double(dims.median_slope)},
                              {"q1", format_double(dims.q1)},
                              {"q3", format_double(dims.q3)},
                              {"target", format_double(dims.target)},
                              {"band", format_double(dims.band)},
                              {"within_band", dims.within_band},
                              {"empty_slices", dims.empty_slices}};
    return doc;
}

/// Manifest written next to every output: tool version, command and inputs.
inline json manifest_json(const std::string& command, const json& inputs)
{
    return json{{"tool", "fracslice"}, {"version", kVersion}, {"command", command}, {"inputs", inputs}};
}

struct ExperimentOutcome {
    TrendReport trend;
    SliceDimReport dims;
};

/// Runs both studies and writes results.csv, dims.csv, summary.json,
/// scenario.toml and ifs.json into `dir`. Throws BudgetExceeded after writing
/// whatever completed if the cylinder cap was hit.
inline ExperimentOutcome run_experiment(const ScenarioFile& sf, const std::filesystem::path& dir)
{
    const Scenario& sc = sf.scenario;
    ExperimentOutcome out;
    out.trend = divergence_study(sc);
    std::string dims_error;
    if (!out.trend.partial()) {
        try {
            out.dims = slice_dimension_study(sc);
        } catch (const BudgetExceeded& e) {
            dims_error = e.what();
        }
    }
    std::filesystem::create_directories(dir);
    write_text(dir / "results.csv", results_csv(out.trend));
    write_text(dir / "dims.csv", dims_csv(out.dims));
    write_text(dir / "summary.json", summary_json(sc, out.trend, out.dims).dump(2) + "\n");
    write_text(dir / "scenario.toml", sf.source_text);
    save_ifs(dir / "ifs.json", sc.ifs);
    if (out.trend.partial())
        throw BudgetExceeded(sc.cylinder_cap, "divergence study (partial results written)");
    if (!dims_error.empty())
        throw BudgetExceeded(sc.cylinder_cap, "slice dimension study (partial results written)");
    return out;
}

} // namespace fracslice
