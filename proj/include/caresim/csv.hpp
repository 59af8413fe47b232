#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace caresim {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace csv {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Reads a CSV file into rows of fields. Skips blank lines.
inline std::vector<std::vector<std::string>> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        rows.push_back(split_line(line));
    }
    return rows;
}

// Formats a double with 6 significant digits, locale-independent.
inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Writes content to path, failing loudly. Output is exactly the bytes given.
inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

} // namespace csv

// "lo-hi" or "lo+" (open-ended). Returns {lo, hi} with hi = 200 for "+".
inline std::pair<int, int> parse_age_band(const std::string& s) {
    try {
        if (!s.empty() && s.back() == '+')
            return {std::stoi(s.substr(0, s.size() - 1)), 200};
        auto dash = s.find('-');
        if (dash == std::string::npos) throw IoError("");
        return {std::stoi(s.substr(0, dash)), std::stoi(s.substr(dash + 1))};
    } catch (const std::exception&) {
        throw IoError("bad age band: '" + s + "'");
    }
}

// Piecewise-constant rate over age bands. Ages not covered get 0.
class AgeBandTable {
public:
    void add_band(int lo, int hi, double value) {
        if (lo > hi || lo < 0) throw IoError("age band bounds out of order");
        for (const auto& b : bands_) {
            if (!(hi < b.lo || lo > b.hi)) throw IoError("overlapping age bands");
        }
        bands_.push_back({lo, hi, value});
    }
    double value_at(int age) const {
        for (const auto& b : bands_)
            if (age >= b.lo && age <= b.hi) return b.value;
        return 0.0;
    }
    bool empty() const { return bands_.empty(); }

private:
    struct Band {
        int lo, hi;
        double value;
    };
    std::vector<Band> bands_;
};

} // namespace caresim
