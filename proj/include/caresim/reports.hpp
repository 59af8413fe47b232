#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "caresim/csv.hpp"

namespace caresim {

struct YearlyMetrics {
    int year = 0;
    int population = 0;
    double taxPayerShare = 0.0;
    double employmentRate = 0.0;
    double informalCareHours = 0.0;
    double privateFormalCareHours = 0.0;
    double publicCareHours = 0.0;
    double unmetSocialCareHours = 0.0;
    double totalSocialCareNeed = 0.0;
    double perCapitaCareBurden = 0.0;
    double publicCareCost = 0.0;
    double hospitalizationCost = 0.0;
    double informalCareShare = 0.0;
    double genderPayGap = 0.0;
    double formalChildCareHours = 0.0;
    double informalChildCareShare = 0.0;
    double hoursOffWork = 0.0;
    double policyDirectCost = 0.0;
};

struct MetricColumn {
    const char* name;
    double YearlyMetrics::* field;
};

// Numeric columns after the leading year and population.
inline const std::vector<MetricColumn>& metric_columns() {
    static const std::vector<MetricColumn> cols = {
        {"taxPayerShare", &YearlyMetrics::taxPayerShare},
        {"employmentRate", &YearlyMetrics::employmentRate},
        {"informalCareHours", &YearlyMetrics::informalCareHours},
        {"privateFormalCareHours", &YearlyMetrics::privateFormalCareHours},
        {"publicCareHours", &YearlyMetrics::publicCareHours},
        {"unmetSocialCareHours", &YearlyMetrics::unmetSocialCareHours},
        {"totalSocialCareNeed", &YearlyMetrics::totalSocialCareNeed},
        {"perCapitaCareBurden", &YearlyMetrics::perCapitaCareBurden},
        {"publicCareCost", &YearlyMetrics::publicCareCost},
        {"hospitalizationCost", &YearlyMetrics::hospitalizationCost},
        {"informalCareShare", &YearlyMetrics::informalCareShare},
        {"genderPayGap", &YearlyMetrics::genderPayGap},
        {"formalChildCareHours", &YearlyMetrics::formalChildCareHours},
        {"informalChildCareShare", &YearlyMetrics::informalChildCareShare},
        {"hoursOffWork", &YearlyMetrics::hoursOffWork},
        {"policyDirectCost", &YearlyMetrics::policyDirectCost},
    };
    return cols;
}

inline std::string metrics_header() {
    std::string h = "year,population";
    for (const auto& c : metric_columns()) {
        h += ',';
        h += c.name;
    }
    h += '\n';
    return h;
}

// Renders the series with a fixed format so identical runs give identical
// bytes: integers for year and population, %.6g for everything else, LF line
// endings.
inline std::string format_metrics_csv(const std::vector<YearlyMetrics>& rows) {
    std::string out = metrics_header();
    for (const auto& r : rows) {
        out += std::to_string(r.year);
        out += ',';
        out += std::to_string(r.population);
        for (const auto& c : metric_columns()) {
            out += ',';
            out += csv::format_real(r.*(c.field));
        }
        out += '\n';
    }
    return out;
}

inline void write_metrics_csv(const std::string& path, const std::vector<YearlyMetrics>& rows) {
    csv::write_file(path, format_metrics_csv(rows));
}

inline std::vector<YearlyMetrics> read_metrics_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw IoError("metrics file " + path + ": empty");
    const auto& cols = metric_columns();
    if (rows[0].size() != cols.size() + 2 || rows[0][0] != "year" || rows[0][1] != "population")
        throw IoError("metrics file " + path + ": unexpected header");
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (rows[0][c + 2] != cols[c].name)
            throw IoError("metrics file " + path + ": unexpected column " + rows[0][c + 2]);
    }
    std::vector<YearlyMetrics> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != cols.size() + 2)
            throw IoError("metrics file " + path + ": malformed row");
        YearlyMetrics m;
        m.year = std::stoi(rows[i][0]);
        m.population = std::stoi(rows[i][1]);
        for (std::size_t c = 0; c < cols.size(); ++c) m.*(cols[c].field) = std::stod(rows[i][c + 2]);
        out.push_back(m);
    }
    return out;
}

// ---- scenario comparison ----------------------------------------------------

struct MismatchedReplicates : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Year-aligned difference a - b for every numeric column.
inline std::vector<YearlyMetrics> diff_series(const std::vector<YearlyMetrics>& a,
                                              const std::vector<YearlyMetrics>& b) {
    if (a.size() != b.size())
        throw MismatchedReplicates("series length differs between paired runs");
    std::vector<YearlyMetrics> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].year != b[i].year)
            throw MismatchedReplicates("paired runs cover different years");
        out[i].year = a[i].year;
        out[i].population = a[i].population - b[i].population;
        for (const auto& c : metric_columns())
            out[i].*(c.field) = a[i].*(c.field) - b[i].*(c.field);
    }
    return out;
}

struct MetricComparison {
    std::string metric;
    double meanDiff = 0.0;       // replicate average of the window-mean difference
    double signConsistency = 0.0; // share of replicates on the majority sign
    int replicates = 0;
};

struct ScenarioComparison {
    std::string scenario;
    int windowFirstYear = 0;
    int windowLastYear = 0;
    std::vector<YearlyMetrics> meanDiffByYear; // replicate-averaged differences
    std::vector<MetricComparison> metrics;
};

// Compares paired replicates of a policy scenario against the benchmark. The
// averaging window starts at the first year any replicate shows any
// difference (policies switch on mid-run; before that the paired runs are
// identical by construction).
inline ScenarioComparison compare_paired(
    const std::string& scenarioName,
    const std::vector<std::vector<YearlyMetrics>>& scenarioReps,
    const std::vector<std::vector<YearlyMetrics>>& benchmarkReps) {
    if (scenarioReps.size() != benchmarkReps.size() || scenarioReps.empty())
        throw MismatchedReplicates("scenario and benchmark replicate counts differ");
    const std::size_t nRep = scenarioReps.size();
    std::vector<std::vector<YearlyMetrics>> diffs;
    diffs.reserve(nRep);
    for (std::size_t r = 0; r < nRep; ++r)
        diffs.push_back(diff_series(scenarioReps[r], benchmarkReps[r]));

    const std::size_t nYears = diffs[0].size();
    std::size_t firstDiff = nYears;
    for (std::size_t y = 0; y < nYears && firstDiff == nYears; ++y) {
        for (const auto& d : diffs) {
            if (d[y].population != 0) {
                firstDiff = y;
                break;
            }
            for (const auto& c : metric_columns()) {
                if (d[y].*(c.field) != 0.0) {
                    firstDiff = y;
                    break;
                }
            }
            if (firstDiff != nYears) break;
        }
    }
    if (firstDiff == nYears) firstDiff = 0; // no difference anywhere

    ScenarioComparison out;
    out.scenario = scenarioName;
    out.windowFirstYear = diffs[0][firstDiff].year;
    out.windowLastYear = diffs[0][nYears - 1].year;

    out.meanDiffByYear.resize(nYears);
    for (std::size_t y = 0; y < nYears; ++y) {
        out.meanDiffByYear[y].year = diffs[0][y].year;
        double popSum = 0.0;
        for (const auto& d : diffs) popSum += d[y].population;
        out.meanDiffByYear[y].population = static_cast<int>(std::lround(popSum / nRep));
        for (const auto& c : metric_columns()) {
            double s = 0.0;
            for (const auto& d : diffs) s += d[y].*(c.field);
            out.meanDiffByYear[y].*(c.field) = s / nRep;
        }
    }

    const std::size_t windowLen = nYears - firstDiff;
    for (const auto& c : metric_columns()) {
        MetricComparison mc;
        mc.metric = c.name;
        mc.replicates = static_cast<int>(nRep);
        int pos = 0, neg = 0;
        double total = 0.0;
        for (const auto& d : diffs) {
            double avg = 0.0;
            for (std::size_t y = firstDiff; y < nYears; ++y) avg += d[y].*(c.field);
            avg /= static_cast<double>(windowLen);
            total += avg;
            if (avg > 0.0) ++pos;
            else if (avg < 0.0) ++neg;
        }
        mc.meanDiff = total / nRep;
        mc.signConsistency = static_cast<double>(std::max(pos, neg)) / static_cast<double>(nRep);
        out.metrics.push_back(mc);
    }
    return out;
}

// ---- directory-level comparison ----------------------------------------------

// Batch output layout: <dir>/<scenario>/rep_<i>.csv
inline std::vector<std::vector<YearlyMetrics>> load_replicates(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::pair<int, std::string>> files;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string name = e.path().filename().string();
        if (name.rfind("rep_", 0) != 0 || e.path().extension() != ".csv") continue;
        int idx = std::stoi(name.substr(4));
        files.emplace_back(idx, e.path().string());
    }
    std::sort(files.begin(), files.end());
    std::vector<std::vector<YearlyMetrics>> reps;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (files[i].first != static_cast<int>(i))
            throw MismatchedReplicates("replicate files in " + dir + " are not rep_0..rep_N-1");
        reps.push_back(read_metrics_csv(files[i].second));
    }
    if (reps.empty()) throw IoError("no replicate files in " + dir);
    return reps;
}

inline std::vector<ScenarioComparison> compare_directory(const std::string& inDir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(inDir)) throw IoError("not a directory: " + inDir);
    std::vector<std::string> scenarios;
    for (const auto& e : fs::directory_iterator(inDir)) {
        if (e.is_directory()) scenarios.push_back(e.path().filename().string());
    }
    std::sort(scenarios.begin(), scenarios.end());
    if (std::find(scenarios.begin(), scenarios.end(), "benchmark") == scenarios.end())
        throw IoError("comparison input " + inDir + " has no benchmark/ directory");
    auto benchReps = load_replicates(inDir + "/benchmark");
    std::vector<ScenarioComparison> out;
    for (const auto& s : scenarios) {
        if (s == "benchmark") continue;
        auto reps = load_replicates(inDir + "/" + s);
        if (reps.size() != benchReps.size())
            throw MismatchedReplicates("scenario " + s + " has " + std::to_string(reps.size()) +
                                       " replicates, benchmark has " +
                                       std::to_string(benchReps.size()));
        out.push_back(compare_paired(s, reps, benchReps));
    }
    return out;
}

inline void write_comparison(const std::string& outDir,
                             const std::vector<ScenarioComparison>& comps) {
    namespace fs = std::filesystem;
    fs::create_directories(outDir);
    std::string summary = "scenario,metric,windowFirstYear,windowLastYear,meanDiff,"
                          "signConsistency,replicates\n";
    for (const auto& c : comps) {
        write_metrics_csv(outDir + "/diff_" + c.scenario + ".csv", c.meanDiffByYear);
        for (const auto& m : c.metrics) {
            summary += c.scenario;
            summary += ',';
            summary += m.metric;
            summary += ',';
            summary += std::to_string(c.windowFirstYear);
            summary += ',';
            summary += std::to_string(c.windowLastYear);
            summary += ',';
            summary += csv::format_real(m.meanDiff);
            summary += ',';
            summary += csv::format_real(m.signConsistency);
            summary += ',';
            summary += std::to_string(m.replicates);
            summary += '\n';
        }
    }
    csv::write_file(outDir + "/summary.csv", summary);
}

// ---- plots --------------------------------------------------------------------

namespace detail {

inline std::string svg_panel(double ox, double oy, double w, double h, const std::string& title,
                             const std::vector<YearlyMetrics>& rows,
                             double YearlyMetrics::* field) {
    double lo = 0.0, hi = 1e-9;
    for (const auto& r : rows) {
        lo = std::min(lo, r.*field);
        hi = std::max(hi, r.*field);
    }
    if (hi <= lo) hi = lo + 1.0;
    const int x0 = static_cast<int>(rows.front().year), x1 = static_cast<int>(rows.back().year);
    std::string s;
    s += "<g>\n";
    s += "<rect x=\"" + csv::format_real(ox) + "\" y=\"" + csv::format_real(oy) + "\" width=\"" +
         csv::format_real(w) + "\" height=\"" + csv::format_real(h) +
         "\" fill=\"none\" stroke=\"#999\"/>\n";
    s += "<text x=\"" + csv::format_real(ox + 6) + "\" y=\"" + csv::format_real(oy + 16) +
         "\" font-size=\"12\" font-family=\"sans-serif\">" + title + "</text>\n";
    s += "<text x=\"" + csv::format_real(ox + 6) + "\" y=\"" + csv::format_real(oy + h - 6) +
         "\" font-size=\"10\" font-family=\"sans-serif\">" + std::to_string(x0) + ".." +
         std::to_string(x1) + ", range " + csv::format_real(lo) + ".." + csv::format_real(hi) +
         "</text>\n";
    s += "<polyline fill=\"none\" stroke=\"#06c\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double px = ox + (static_cast<double>(rows[i].year) - x0) / std::max(1, x1 - x0) * w;
        double py = oy + h - 24.0 - (rows[i].*field - lo) / (hi - lo) * (h - 48.0);
        if (i) s += ' ';
        s += csv::format_real(px);
        s += ',';
        s += csv::format_real(py);
    }
    s += "\"/>\n</g>\n";
    return s;
}

} // namespace detail

// A fixed six-panel overview of one run, written as a standalone SVG.
inline void render_plots(const std::string& path, const std::vector<YearlyMetrics>& rows) {
    if (rows.empty()) throw std::invalid_argument("render_plots: no rows");
    struct Panel {
        const char* title;
        double YearlyMetrics::* field;
    };
    const Panel panels[6] = {
        {"employment rate", &YearlyMetrics::employmentRate},
        {"informal care share", &YearlyMetrics::informalCareShare},
        {"public care hours", &YearlyMetrics::publicCareHours},
        {"formal child care hours", &YearlyMetrics::formalChildCareHours},
        {"hours off work", &YearlyMetrics::hoursOffWork},
        {"unmet social care hours", &YearlyMetrics::unmetSocialCareHours},
    };
    const double W = 960, H = 660, pw = 440, ph = 195;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      csv::format_real(W) + "\" height=\"" + csv::format_real(H) + "\">\n";
    for (int i = 0; i < 6; ++i) {
        double ox = 20 + (i % 2) * (pw + 40);
        double oy = 20 + (i / 2) * (ph + 20);
        svg += detail::svg_panel(ox, oy, pw, ph, panels[i].title, rows, panels[i].field);
    }
    svg += "</svg>\n";
    csv::write_file(path, svg);
}

} // namespace caresim
