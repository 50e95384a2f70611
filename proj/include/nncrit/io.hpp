#pragma once

// Dataset CSV, key=value config files and report serialization.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nncrit/error.hpp"
#include "nncrit/linalg.hpp"
#include "nncrit/simlab/experiments.hpp"

namespace nncrit::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& text, const std::string& where) {
    const std::string s = trim(text);
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(where + ": '" + s + "' is not a number");
    return v;
}

inline std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& s : split(text, ',')) out.push_back(parse_double(s, what));
    if (out.empty()) throw ParseError(what + ": empty list");
    return out;
}

inline std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (const auto& s : split(text, ',')) {
        const double v = parse_double(s, what);
        if (v != std::floor(v)) throw ParseError(what + ": '" + s + "' is not an integer");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw ParseError(what + ": empty list");
    return out;
}

// ---------------------------------------------------------------- datasets

/// Header x1,...,xd followed by one observation per line.
inline Matrix read_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source + ":1: missing header");
    const auto header = split(line, ',');
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] != "x" + std::to_string(i + 1))
            throw ParseError(source + ":1: header must be x1,...,xd; column " + std::to_string(i + 1) + " is '" +
                             header[i] + "'");
    const std::size_t d = header.size();
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line, ',');
        const std::string where = source + ":" + std::to_string(lineno);
        if (fields.size() != d)
            throw ParseError(where + ": expected " + std::to_string(d) + " fields, got " +
                             std::to_string(fields.size()));
        for (const auto& f : fields) values.push_back(parse_double(f, where));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(values.size() / d);
    if (n == 0) throw ParseError(source + ": no observations");
    Matrix x(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index t = 0; t < n; ++t)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(t, j) = values[static_cast<std::size_t>(t) * d + j];
    return x;
}

inline Matrix read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open data file '" + path + "'");
    return read_csv(in, path);
}

inline void write_csv(std::ostream& out, const Matrix& x) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << 'x' << j + 1;
    out << '\n';
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) out << (j ? "," : "") << format_double(x(t, j));
        out << '\n';
    }
}

// ---------------------------------------------------------------- config

/// key=value lines; '#' starts a comment; later keys replace earlier ones.
inline std::map<std::string, std::string> read_config(std::istream& in, const std::string& source) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
        if (key.empty())
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected key=value, got '" + trim(line) + "'");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    return read_config(in, path);
}

// ---------------------------------------------------------------- reports

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

inline json to_json(const simlab::MeanSd& m) { return {{"mean", number(m.mean)}, {"sd", number(m.sd)}, {"n", m.n}}; }

inline json to_json(const simlab::BiasCurve& c) {
    json pts = json::array();
    for (const auto& p : c.points) {
        json e{{"eps", p.eps}, {"B", to_json(p.B)}, {"B_plain", to_json(p.B_plain)}, {"b_hat1", to_json(p.b_hat1)}};
        if (c.estimator == "nce") e["b_hat2"] = to_json(p.b_hat2);
        e["failures"] = p.failures;
        pts.push_back(e);
    }
    return {{"estimator", c.estimator}, {"N", c.N},          {"M", c.M},
            {"replicates", c.replicates}, {"points", pts}, {"warnings", c.warnings},
            {"incomplete", c.incomplete}};
}

/// include_timing = false leaves out wall-clock numbers, which are the only
/// part of a table that depends on scheduling.
inline json to_json(const simlab::SelectionTable& t, bool include_timing = true) {
    json crit = json::array();
    for (std::size_t c = 0; c < t.criteria.size(); ++c) {
        json cells = json::array();
        for (std::size_t j = 0; j < t.cells.size(); ++j)
            cells.push_back({{"cell", t.cells[j]},
                             {"frequency", t.frequency[c][j]},
                             {"ci", {t.ci[c][j].lo, t.ci[c][j].hi}},
                             {"ci_outside_unit", t.ci[c][j].outside_unit()}});
        json e{{"criterion", t.criteria[c]}, {"counted", t.counted[c]}, {"cells", cells}};
        if (include_timing) e["seconds"] = t.seconds[c];
        crit.push_back(e);
    }
    return {{"experiment", t.experiment},
            {"candidates", t.candidates},
            {"replicates", t.replicates},
            {"failed_replicates", t.failed_replicates},
            {"criteria", crit},
            {"warnings", t.warnings},
            {"incomplete", t.incomplete}};
}

/// One row per (criterion, cell).
inline std::string selection_csv(const simlab::SelectionTable& t) {
    std::ostringstream o;
    o << "criterion,cell,frequency,ci_lo,ci_hi,counted\n";
    for (std::size_t c = 0; c < t.criteria.size(); ++c)
        for (std::size_t j = 0; j < t.cells.size(); ++j)
            o << t.criteria[c] << ",\"" << t.cells[j] << "\"," << format_double(t.frequency[c][j]) << ','
              << format_double(t.ci[c][j].lo) << ',' << format_double(t.ci[c][j].hi) << ',' << t.counted[c] << '\n';
    return o.str();
}

/// Plot data: one row per eps.
inline std::string bias_csv(const simlab::BiasCurve& c) {
    std::ostringstream o;
    o << "eps,B,sd_B,mean_b_hat1,sd_b_hat1,mean_b_hat2,sd_b_hat2,replicates\n";
    for (const auto& p : c.points) {
        const bool two = c.estimator == "nce";
        o << format_double(p.eps) << ',' << format_double(p.B.mean) << ',' << format_double(p.B.sd) << ','
          << format_double(p.b_hat1.mean) << ',' << format_double(p.b_hat1.sd) << ','
          << (two ? format_double(p.b_hat2.mean) : "") << ',' << (two ? format_double(p.b_hat2.sd) : "") << ','
          << p.B.n << '\n';
    }
    return o.str();
}

}  // namespace nncrit::io
