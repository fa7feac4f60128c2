#include "panelcf/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace panelcf {

const char* to_string(OutcomeTransform t) {
    switch (t) {
        case OutcomeTransform::Level: return "level";
        case OutcomeTransform::Log: return "log";
        case OutcomeTransform::Growth: return "growth";
    }
    return "level";
}

std::optional<OutcomeTransform> transform_from_string(const std::string& s) {
    if (s == "level") return OutcomeTransform::Level;
    if (s == "log") return OutcomeTransform::Log;
    if (s == "growth") return OutcomeTransform::Growth;
    return std::nullopt;
}

std::optional<Eigen::Index> Panel::unit_index(const std::string& label) const {
    auto it = std::find(unit_labels.begin(), unit_labels.end(), label);
    if (it == unit_labels.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - unit_labels.begin());
}

std::optional<Eigen::Index> Panel::period_index(const std::string& label) const {
    auto it = std::find(period_labels.begin(), period_labels.end(), label);
    if (it == period_labels.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - period_labels.begin());
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_value(const std::string& tok, int line_no) {
    const std::string t = trim(tok);
    if (t.empty()) throw ParseError("empty value on line " + std::to_string(line_no));
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError("non-numeric value '" + t + "' on line " + std::to_string(line_no));
    if (!std::isfinite(v))
        throw ParseError("non-finite value '" + t + "' on line " + std::to_string(line_no));
    return v;
}

bool is_integer_label(const std::string& s) {
    if (s.empty()) return false;
    std::size_t b = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (b == s.size()) return false;
    return std::all_of(s.begin() + static_cast<long>(b), s.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

/// Chronological order: numeric when every label is an integer, otherwise
/// lexicographic (correct for ISO dates).
void sort_period_labels(std::vector<std::string>& labels) {
    const bool all_int = std::all_of(labels.begin(), labels.end(), is_integer_label);
    if (all_int) {
        std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
            return std::stoll(a) < std::stoll(b);
        });
    } else {
        std::sort(labels.begin(), labels.end());
    }
}

void check_panel_shape(Eigen::Index n, Eigen::Index t) {
    if (n < 2 || t < 2)
        throw IncompletePanel("panel must have at least 2 units and 2 periods, got " +
                              std::to_string(n) + "x" + std::to_string(t));
}

Panel load_long(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty input");
    auto header = split_csv_line(line);
    if (header.size() < 3 || lower(header[0]) != "unit" || lower(header[1]) != "period" ||
        lower(header[2]) != "value")
        throw ParseError("long format requires header 'unit,period,value'");

    struct Row {
        std::string unit, period;
        double value;
    };
    std::vector<Row> rows;
    std::vector<std::string> units;                       // first-appearance order
    std::unordered_map<std::string, std::size_t> unit_ix; // label -> order
    std::vector<std::string> periods;
    std::unordered_map<std::string, std::size_t> period_ix;

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3)
            throw ParseError("expected 3 fields on line " + std::to_string(line_no) + ", got " +
                             std::to_string(f.size()));
        Row r{f[0], f[1], parse_value(f[2], line_no)};
        if (r.unit.empty() || r.period.empty())
            throw ParseError("empty unit or period label on line " + std::to_string(line_no));
        if (unit_ix.emplace(r.unit, units.size()).second) units.push_back(r.unit);
        if (period_ix.emplace(r.period, periods.size()).second) periods.push_back(r.period);
        rows.push_back(std::move(r));
    }

    sort_period_labels(periods);
    period_ix.clear();
    for (std::size_t t = 0; t < periods.size(); ++t) period_ix[periods[t]] = t;

    const auto n = static_cast<Eigen::Index>(units.size());
    const auto t = static_cast<Eigen::Index>(periods.size());
    check_panel_shape(n, t);

    Eigen::MatrixXd values(n, t);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen(n, t);
    seen.setConstant(false);
    for (const auto& r : rows) {
        const auto i = static_cast<Eigen::Index>(unit_ix[r.unit]);
        const auto j = static_cast<Eigen::Index>(period_ix[r.period]);
        if (seen(i, j))
            throw DuplicateCell("duplicate cell (" + r.unit + ", " + r.period + ")");
        seen(i, j) = true;
        values(i, j) = r.value;
    }
    if (!seen.all()) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < t; ++j)
                if (!seen(i, j))
                    throw IncompletePanel("missing cell (" + units[static_cast<std::size_t>(i)] +
                                          ", " + periods[static_cast<std::size_t>(j)] + ")");
    }
    return Panel{std::move(values), std::move(units), std::move(periods),
                 OutcomeTransform::Level};
}

Panel load_wide(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty input");
    auto header = split_csv_line(line);
    if (header.size() < 2 || lower(header[0]) != "unit")
        throw ParseError("wide format requires header 'unit,<p1>,<p2>,...'");
    std::vector<std::string> periods(header.begin() + 1, header.end());
    for (const auto& p : periods)
        if (p.empty()) throw ParseError("empty period label in header");
    {
        auto sorted = periods;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DuplicateCell("duplicate period label in header");
    }

    // Column order of the result is chronological regardless of header order.
    std::vector<std::string> sorted_periods = periods;
    sort_period_labels(sorted_periods);
    std::unordered_map<std::string, std::size_t> dest;
    for (std::size_t t = 0; t < sorted_periods.size(); ++t) dest[sorted_periods[t]] = t;

    std::vector<std::string> units;
    std::unordered_map<std::string, bool> seen_unit;
    std::vector<std::vector<double>> data;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != periods.size() + 1)
            throw IncompletePanel("row on line " + std::to_string(line_no) + " has " +
                                  std::to_string(f.size() - 1) + " values, expected " +
                                  std::to_string(periods.size()));
        if (f[0].empty()) throw ParseError("empty unit label on line " + std::to_string(line_no));
        if (!seen_unit.emplace(f[0], true).second)
            throw DuplicateCell("duplicate unit '" + f[0] + "'");
        units.push_back(f[0]);
        std::vector<double> row(periods.size());
        for (std::size_t c = 0; c < periods.size(); ++c)
            row[dest[periods[c]]] = parse_value(f[c + 1], line_no);
        data.push_back(std::move(row));
    }

    const auto n = static_cast<Eigen::Index>(units.size());
    const auto t = static_cast<Eigen::Index>(sorted_periods.size());
    check_panel_shape(n, t);
    Eigen::MatrixXd values(n, t);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < t; ++j)
            values(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return Panel{std::move(values), std::move(units), std::move(sorted_periods),
                 OutcomeTransform::Level};
}

}  // namespace

Panel load_panel(std::istream& in, PanelFormat format) {
    return format == PanelFormat::Long ? load_long(in) : load_wide(in);
}

Panel load_panel_file(const std::string& path, PanelFormat format) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return load_panel(in, format);
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
    out << "unit,period,value\n";
    char buf[64];
    for (Eigen::Index i = 0; i < panel.n_units(); ++i) {
        for (Eigen::Index t = 0; t < panel.n_periods(); ++t) {
            std::snprintf(buf, sizeof(buf), "%.17g", panel.values(i, t));
            out << panel.unit_labels[static_cast<std::size_t>(i)] << ','
                << panel.period_labels[static_cast<std::size_t>(t)] << ',' << buf << '\n';
        }
    }
}

Panel transform(const Panel& panel, OutcomeTransform kind) {
    switch (kind) {
        case OutcomeTransform::Level:
            return panel;
        case OutcomeTransform::Log: {
            if ((panel.values.array() <= 0.0).any())
                throw DomainError("log transform requires strictly positive values");
            Panel out = panel;
            out.values = panel.values.array().log().matrix();
            out.transform = OutcomeTransform::Log;
            return out;
        }
        case OutcomeTransform::Growth: {
            const Eigen::Index t = panel.n_periods();
            if (t < 3) throw DomainError("growth transform requires at least 3 periods");
            if ((panel.values.leftCols(t - 1).array() == 0.0).any())
                throw DomainError("growth transform requires non-zero values in periods 1..T-1");
            Panel out;
            out.values = 100.0 * (panel.values.rightCols(t - 1) - panel.values.leftCols(t - 1))
                                     .cwiseQuotient(panel.values.leftCols(t - 1));
            out.unit_labels = panel.unit_labels;
            out.period_labels.assign(panel.period_labels.begin() + 1, panel.period_labels.end());
            out.transform = OutcomeTransform::Growth;
            return out;
        }
    }
    throw ConfigError("unknown transform");
}

MaskedPanel restrict(const Panel& panel, Eigen::Index unit, Eigen::Index period) {
    if (unit < 0 || unit >= panel.n_units())
        throw ConfigError("unit index " + std::to_string(unit) + " out of range");
    if (period >= panel.n_periods())
        throw ConfigError("period index " + std::to_string(period) + " out of range");
    if (period < 1)
        throw InsufficientHistory("cannot hide the first period: no earlier observations");

    MaskedPanel mp;
    mp.panel.values = panel.values.leftCols(period + 1);
    mp.panel.unit_labels = panel.unit_labels;
    mp.panel.period_labels.assign(panel.period_labels.begin(),
                                  panel.period_labels.begin() + period + 1);
    mp.panel.transform = panel.transform;
    mp.visible = VisibleMask::Constant(panel.n_units(), period + 1, true);
    mp.visible(unit, period) = false;
    mp.target = CellRef{unit, period};
    return mp;
}

}  // namespace panelcf
