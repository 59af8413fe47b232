#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "caresim/csv.hpp"
#include "caresim/rng.hpp"

namespace caresim {

struct GompertzMakehamParams {
    double makeham = 0.0;        // age-independent baseline hazard (1/year)
    double senescentScale = 0.0; // B (1/year)
    double senescenceRate = 0.0; // gamma (1/year)
};

// Annual death probability min(1, A + B*exp(gamma*age)).
inline double gm_hazard(double age, const GompertzMakehamParams& p) {
    if (age < 0.0) throw std::invalid_argument("gm_hazard: age must be >= 0");
    const double h = p.makeham + p.senescentScale * std::exp(p.senescenceRate * age);
    return std::min(1.0, std::max(0.0, h));
}

enum class RateKind { MortalityMale, MortalityFemale, Fertility };

// Rectangular age x year table of annual probabilities.
class RateTable {
public:
    RateTable() = default;
    RateTable(RateKind kind, int firstYear, int lastYear, int maxAge)
        : kind_(kind), firstYear_(firstYear), lastYear_(lastYear), maxAge_(maxAge),
          cells_(static_cast<std::size_t>(maxAge + 1) * yearCount(), 0.0) {
        if (lastYear < firstYear || maxAge < 0)
            throw std::invalid_argument("RateTable: bad axes");
    }

    RateKind kind() const { return kind_; }
    int firstYear() const { return firstYear_; }
    int lastYear() const { return lastYear_; }
    int maxAge() const { return maxAge_; }
    int yearCount() const { return lastYear_ - firstYear_ + 1; }

    double& at(int age, int year) {
        return cells_[index(age, year)];
    }
    // Ages past the top of the table use the top row.
    double rate(int age, int year) const {
        if (age > maxAge_) age = maxAge_;
        return cells_[index(age, year)];
    }
    bool coversYear(int year) const { return year >= firstYear_ && year <= lastYear_; }

    void validate() const {
        for (double c : cells_) {
            if (!(c >= 0.0 && c <= 1.0))
                throw std::invalid_argument("RateTable: cell outside [0,1]");
        }
    }

private:
    std::size_t index(int age, int year) const {
        if (age < 0 || year < firstYear_ || year > lastYear_)
            throw std::out_of_range("RateTable: lookup outside table");
        return static_cast<std::size_t>(age) * yearCount() +
               static_cast<std::size_t>(year - firstYear_);
    }

    RateKind kind_ = RateKind::MortalityMale;
    int firstYear_ = 0, lastYear_ = 0, maxAge_ = 0;
    std::vector<double> cells_;
};

// Loads a rate-table CSV with header `age,year,rate`. The (age, year) pairs
// must form a complete rectangular grid.
inline RateTable load_rate_table_csv(const std::string& path, RateKind kind) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0].size() != 3 || rows[0][0] != "age" || rows[0][1] != "year" ||
        rows[0][2] != "rate")
        throw IoError("rate table " + path + ": expected header age,year,rate");

    int minAge = INT32_MAX, maxAge = INT32_MIN, minYear = INT32_MAX, maxYear = INT32_MIN;
    std::map<std::pair<int, int>, double> grid;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 3) throw IoError("rate table " + path + ": malformed row");
        int age = std::stoi(rows[i][0]);
        int year = std::stoi(rows[i][1]);
        double rate = std::stod(rows[i][2]);
        minAge = std::min(minAge, age);
        maxAge = std::max(maxAge, age);
        minYear = std::min(minYear, year);
        maxYear = std::max(maxYear, year);
        grid[{age, year}] = rate;
    }
    if (grid.empty()) throw IoError("rate table " + path + ": no data rows");
    if (minAge != 0) throw IoError("rate table " + path + ": ages must start at 0");
    const std::size_t expect = static_cast<std::size_t>(maxAge - minAge + 1) *
                               static_cast<std::size_t>(maxYear - minYear + 1);
    if (grid.size() != expect)
        throw IoError("rate table " + path + ": ages and years must form a complete grid");

    RateTable t(kind, minYear, maxYear, maxAge);
    for (const auto& [key, rate] : grid) t.at(key.first, key.second) = rate;
    t.validate();
    return t;
}

struct LeeCarterParams {
    std::vector<double> level;       // a_x, log-rate units
    std::vector<double> sensitivity; // b_x, sums to 1
    std::vector<double> index;       // k_t, sums to 0
    double drift = 0.0;              // per-year change of k
};

// Age x year matrix in row-major (age-major) order.
struct AgeYearMatrix {
    int ages = 0;
    int years = 0;
    std::vector<double> v;

    double& at(int x, int t) { return v[static_cast<std::size_t>(x) * years + t]; }
    double at(int x, int t) const { return v[static_cast<std::size_t>(x) * years + t]; }
};

// Lee-Carter estimator: a_x = row mean of log rates; (b, k) = leading
// singular pair of the centered matrix, rescaled so sum(b)=1 and sum(k)=0;
// drift = (k_last - k_first)/(T-1). The leading pair is extracted with a
// fixed-protocol power iteration so results are reproducible bit for bit.
inline LeeCarterParams lc_fit(const AgeYearMatrix& logRates) {
    const int X = logRates.ages;
    const int T = logRates.years;
    if (X < 2 || T < 3)
        throw std::invalid_argument("lc_fit: need at least 2 ages and 3 years");
    for (double c : logRates.v) {
        if (!std::isfinite(c)) throw std::invalid_argument("lc_fit: non-finite input");
    }

    LeeCarterParams p;
    p.level.resize(X);
    std::vector<double> centered(logRates.v.size());
    for (int x = 0; x < X; ++x) {
        double mean = 0.0;
        for (int t = 0; t < T; ++t) mean += logRates.at(x, t);
        mean /= T;
        p.level[x] = mean;
        for (int t = 0; t < T; ++t)
            centered[static_cast<std::size_t>(x) * T + t] = logRates.at(x, t) - mean;
    }

    double frob = 0.0;
    for (double c : centered) frob += c * c;
    if (frob < 1e-24) {
        // Degenerate: no temporal signal. b uniform, k zero.
        p.sensitivity.assign(X, 1.0 / X);
        p.index.assign(T, 0.0);
        p.drift = 0.0;
        return p;
    }

    auto zrow = [&](int x) { return centered.data() + static_cast<std::size_t>(x) * T; };

    // Start from Z^T applied to the largest row; the all-ones vector is
    // orthogonal to every right singular vector (rows are centered), so a
    // data-derived start is needed.
    int bestRow = 0;
    double bestNorm = -1.0;
    for (int x = 0; x < X; ++x) {
        double n = 0.0;
        for (int t = 0; t < T; ++t) n += zrow(x)[t] * zrow(x)[t];
        if (n > bestNorm) {
            bestNorm = n;
            bestRow = x;
        }
    }
    std::vector<double> v(zrow(bestRow), zrow(bestRow) + T);
    std::vector<double> zv(X), w(T);
    auto normalize = [](std::vector<double>& a) {
        double n = 0.0;
        for (double e : a) n += e * e;
        n = std::sqrt(n);
        if (n > 0.0)
            for (double& e : a) e /= n;
        return n;
    };
    normalize(v);

    for (int iter = 0; iter < 1000; ++iter) {
        for (int x = 0; x < X; ++x) {
            double s = 0.0;
            for (int t = 0; t < T; ++t) s += zrow(x)[t] * v[t];
            zv[x] = s;
        }
        for (int t = 0; t < T; ++t) {
            double s = 0.0;
            for (int x = 0; x < X; ++x) s += zrow(x)[t] * zv[x];
            w[t] = s;
        }
        normalize(w);
        double delta = 0.0;
        for (int t = 0; t < T; ++t) delta = std::max(delta, std::abs(w[t] - v[t]));
        v = w;
        if (delta < 1e-15 && iter > 2) break;
    }

    for (int x = 0; x < X; ++x) {
        double s = 0.0;
        for (int t = 0; t < T; ++t) s += zrow(x)[t] * v[t];
        zv[x] = s;
    }
    std::vector<double> u = zv;
    const double sigma = normalize(u);

    double usum = 0.0;
    for (double e : u) usum += e;
    if (std::abs(usum) < 1e-12) {
        // Sensitivities cancel; cannot satisfy sum(b)=1 meaningfully.
        p.sensitivity.assign(X, 1.0 / X);
        p.index.assign(T, 0.0);
        p.drift = 0.0;
        return p;
    }

    p.sensitivity.resize(X);
    for (int x = 0; x < X; ++x) p.sensitivity[x] = u[x] / usum;
    p.index.resize(T);
    for (int t = 0; t < T; ++t) p.index[t] = sigma * usum * v[t];
    // Identification: remove the (numerically tiny) mean of k and fold it
    // into the level so sum(k) is exactly 0.
    double kmean = 0.0;
    for (double k : p.index) kmean += k;
    kmean /= T;
    for (double& k : p.index) k -= kmean;
    for (int x = 0; x < X; ++x) p.level[x] += p.sensitivity[x] * kmean;

    p.drift = (p.index.back() - p.index.front()) / (T - 1);
    return p;
}

// Random walk with drift on k; rates exp(a + b*k) clamped to [0,1].
// With sigma = 0 the projection is deterministic.
inline AgeYearMatrix lc_project(const LeeCarterParams& params, int horizonYears,
                                RngStream& rng, double sigma) {
    if (horizonYears < 1) throw std::invalid_argument("lc_project: horizon must be >= 1");
    const int X = static_cast<int>(params.level.size());
    AgeYearMatrix out;
    out.ages = X;
    out.years = horizonYears;
    out.v.resize(static_cast<std::size_t>(X) * horizonYears);
    double k = params.index.empty() ? 0.0 : params.index.back();
    for (int j = 0; j < horizonYears; ++j) {
        k += params.drift + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
        for (int x = 0; x < X; ++x) {
            double r = std::exp(params.level[x] + params.sensitivity[x] * k);
            out.at(x, j) = std::min(1.0, std::max(0.0, r));
        }
    }
    return out;
}

// Mortality regimes: Gompertz-Makeham before the data era, tabulated rates in
// the data era, Lee-Carter projected rates afterwards.
struct MortalityModel {
    GompertzMakehamParams gmMale;
    GompertzMakehamParams gmFemale;
    RateTable tableMale;       // data era
    RateTable tableFemale;
    RateTable projectedMale;   // Lee-Carter era
    RateTable projectedFemale;
    int dataEraStart = 1951;
    int projectionStart = 2009;
    double needUplift = 0.15;  // multiplier slope per care-need level
};

inline double annual_mortality(int age, bool female, int careNeedLevel, double sesMultiplier,
                               int year, const MortalityModel& m) {
    double base;
    if (year < m.dataEraStart) {
        base = gm_hazard(static_cast<double>(age), female ? m.gmFemale : m.gmMale);
    } else if (year < m.projectionStart) {
        base = (female ? m.tableFemale : m.tableMale).rate(age, year);
    } else {
        base = (female ? m.projectedFemale : m.projectedMale).rate(age, year);
    }
    double p = base * sesMultiplier * (1.0 + m.needUplift * careNeedLevel);
    return std::min(1.0, std::max(0.0, p));
}

struct BirthCandidate {
    std::int32_t motherId = -1;
    int age = 0;
    double fertilityMultiplier = 1.0;
};

// Each partnered woman of reproductive age independently bears one child with
// the table probability for her age, adjusted by her SES multiplier. Returns
// the mothers who give birth this year, in input order.
inline std::vector<std::int32_t> sample_births(std::span<const BirthCandidate> candidates,
                                               int year, const RateTable& fertility,
                                               RngStream& rng) {
    std::vector<std::int32_t> mothers;
    for (const auto& c : candidates) {
        double p = fertility.rate(c.age, year) * c.fertilityMultiplier;
        p = std::min(1.0, std::max(0.0, p));
        if (rng.bernoulli(p)) mothers.push_back(c.motherId);
    }
    return mothers;
}

} // namespace caresim
