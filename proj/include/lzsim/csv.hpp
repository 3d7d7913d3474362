#pragma once

// Minimal numeric CSV: header row, '.' decimals, LF endings, 12 significant digits.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lzsim/error.hpp"

namespace lzsim {

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return k;
        throw ValidationError("column", "no column named '" + name + "'");
    }

    std::vector<double> series(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

inline std::string write_csv(const CsvTable& t) {
    std::string out;
    for (std::size_t k = 0; k < t.header.size(); ++k) out += (k ? "," : "") + t.header[k];
    out += '\n';
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (k) out += ',';
            out += csv_number(r[k]);
        }
        out += '\n';
    }
    return out;
}

inline CsvTable read_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> f;
        std::stringstream ss(s);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        if (!s.empty() && s.back() == ',') f.emplace_back();
        return f;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != t.header.size())
            throw ParseError(line_no, "expected " + std::to_string(t.header.size()) + " fields");
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            if (f == "nan") {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (f.empty() || end != f.c_str() + f.size()) throw ParseError(line_no, "bad number '" + f + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw ParseError(1, "missing header row");
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return read_csv(ss.str());
}

}  // namespace lzsim
