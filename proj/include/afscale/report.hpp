#pragma once

// Result rows, the six-column CSV schema, and the declarative plot sidecar.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "afscale/errors.hpp"

namespace afscale {

enum class Quantity { McMean, McStderr, Quadrature, Asymptotic, BoundLower, BoundUpper, Nu, TStar };

inline std::string_view to_string(Quantity q) {
    switch (q) {
        case Quantity::McMean: return "mc_mean";
        case Quantity::McStderr: return "mc_stderr";
        case Quantity::Quadrature: return "quadrature";
        case Quantity::Asymptotic: return "asymptotic";
        case Quantity::BoundLower: return "bound_lower";
        case Quantity::BoundUpper: return "bound_upper";
        case Quantity::Nu: return "nu";
        case Quantity::TStar: return "t_star";
    }
    return "unknown";
}

inline std::optional<Quantity> parse_quantity(std::string_view s) {
    for (auto q : {Quantity::McMean, Quantity::McStderr, Quantity::Quadrature, Quantity::Asymptotic,
                   Quantity::BoundLower, Quantity::BoundUpper, Quantity::Nu, Quantity::TStar}) {
        if (to_string(q) == s) return q;
    }
    return std::nullopt;
}

struct ResultRow {
    std::string scheme;
    std::uint64_t m = 0;
    std::string policy;
    std::optional<double> threshold;  ///< ALOHA only
    Quantity quantity = Quantity::McMean;
    double value = 0.0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr std::string_view kCsvHeader = "scheme,M,policy,threshold,quantity,value";

/// 15 significant digits, the precision carried by every CSV value.
inline std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        if (!std::isfinite(r.value)) {
            throw NumericalError("non-finite " + std::string(to_string(r.quantity)) + " at M=" + std::to_string(r.m),
                                 r.value);
        }
        os << r.scheme << ',' << r.m << ',' << r.policy << ',' << (r.threshold ? format_value(*r.threshold) : "")
           << ',' << to_string(r.quantity) << ',' << format_value(r.value) << '\n';
    }
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

namespace detail {

inline double parse_double(const std::string& s, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw ParameterError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace detail

inline std::vector<ResultRow> parse_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw ParameterError("csv: missing or unexpected header");
    std::vector<ResultRow> rows;
    int n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 6) throw ParameterError("csv line " + std::to_string(n) + ": expected 6 fields");
        ResultRow r;
        r.scheme = f[0];
        r.m = std::uint64_t(detail::parse_double(f[1], n));
        r.policy = f[2];
        if (!f[3].empty()) r.threshold = detail::parse_double(f[3], n);
        const auto q = parse_quantity(f[4]);
        if (!q) throw ParameterError("csv line " + std::to_string(n) + ": unknown quantity '" + f[4] + "'");
        r.quantity = *q;
        r.value = detail::parse_double(f[5], n);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Plot sidecar

/// One plotted curve: the rows whose columns match every filter entry.
struct PlotSeries {
    std::string label;
    std::string scheme;
    std::string policy;
    Quantity quantity;
    std::optional<Quantity> error_bars;  ///< optional companion quantity for error bars
};

struct PlotSpec {
    std::string title;
    std::string csv;
    std::string x_label = "Number of sensors M";
    std::string y_label = "Expected distortion E[D]";
    bool log_x = true;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

inline nlohmann::json to_json(const PlotSpec& s) {
    nlohmann::json j;
    j["title"] = s.title;
    j["data"] = s.csv;
    j["x"] = {{"column", "M"}, {"label", s.x_label}, {"log", s.log_x}};
    j["y"] = {{"column", "value"}, {"label", s.y_label}, {"log", s.log_y}};
    j["series"] = nlohmann::json::array();
    for (const auto& c : s.series) {
        nlohmann::json e;
        e["label"] = c.label;
        e["filter"] = {{"scheme", c.scheme}, {"policy", c.policy}, {"quantity", std::string(to_string(c.quantity))}};
        if (c.error_bars) e["error_bars"] = {{"quantity", std::string(to_string(*c.error_bars))}};
        j["series"].push_back(std::move(e));
    }
    return j;
}

}  // namespace afscale
