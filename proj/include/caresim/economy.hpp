#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace caresim {

// Hourly wage as a function of cumulative discounted work experience h:
//   w(h) = F * exp(c * exp(-r*h)),  c = ln(I/F)
// where I is the career-start salary and F the asymptotic (final) salary,
// so w(0) = I exactly and w -> F as h grows. Losing experience (h decaying
// faster than it is earned) moves the wage back towards I.
inline double hourly_wage(double initialSalary, double finalSalary, double growthRate,
                          double experience) {
    if (initialSalary <= 0.0 || finalSalary <= 0.0)
        throw std::invalid_argument("hourly_wage: salaries must be positive");
    if (growthRate < 0.0 || experience < 0.0)
        throw std::invalid_argument("hourly_wage: rate and experience must be >= 0");
    const double c = std::log(initialSalary / finalSalary);
    return finalSalary * std::exp(c * std::exp(-growthRate * experience));
}

// Secular real-wage growth: salaries are quoted at the base year and scale
// by (1+g) per year afterwards, while care prices and transfer amounts stay
// fixed. This is what slowly tilts households from providing care themselves
// towards buying it.
inline double era_wage_factor(int year, int growthStartYear, double annualGrowth) {
    if (annualGrowth < 0.0) throw std::invalid_argument("era_wage_factor: negative growth");
    if (year <= growthStartYear) return 1.0;
    return std::pow(1.0 + annualGrowth, year - growthStartYear);
}

// h' = delta*h + workedShare. workedShare in [0,1] is the share of standard
// hours actually worked this year after care-related time off.
inline double update_experience(double experience, double workedShare, double decay) {
    if (workedShare < 0.0 || workedShare > 1.0)
        throw std::invalid_argument("update_experience: workedShare outside [0,1]");
    if (decay < 0.0 || decay >= 1.0)
        throw std::invalid_argument("update_experience: decay outside [0,1)");
    return decay * experience + workedShare;
}

struct EducationLogit {
    double intercept = -1.6;
    double incomeSlope = 0.18;   // on log per-capita household income
    double parentSlope = 0.3;    // on max parental education level (0..4)
};

// Probability of continuing to the next education level at a decision age.
inline double education_continue_probability(double perCapitaIncome, int maxParentEducation,
                                             const EducationLogit& g) {
    const double inc = std::log(std::max(perCapitaIncome, 1.0));
    const double z = g.intercept + g.incomeSlope * inc + g.parentSlope * maxParentEducation;
    return 1.0 / (1.0 + std::exp(-z));
}

// Weekly pension: replacement of final weekly earnings, reduced for each year
// of early (ill-health) retirement.
inline double weekly_pension(double finalWeeklyEarnings, double replacementRate,
                             int yearsEarly, double earlyPenalty) {
    double f = replacementRate - earlyPenalty * std::max(0, yearsEarly);
    f = std::max(0.10, f);
    return std::max(0.0, finalWeeklyEarnings) * f;
}

// Rank-based wealth assignment: agents are ranked by accumulated net salary
// and each decile of the ranking receives that decile's share of total wealth,
// split equally within the decile. Returns per-agent wealth in input order of
// `ranksDescending` (which must hold indices 0..n-1 ordered from richest).
inline std::vector<double> assign_wealth_by_rank(std::size_t n, double totalWealth,
                                                 std::span<const double> decileSharesPoorestFirst,
                                                 std::span<const std::size_t> ranksDescending) {
    if (decileSharesPoorestFirst.size() != 10)
        throw std::invalid_argument("assign_wealth_by_rank: need 10 decile shares");
    if (ranksDescending.size() != n)
        throw std::invalid_argument("assign_wealth_by_rank: rank permutation size mismatch");
    std::vector<double> wealth(n, 0.0);
    if (n == 0) return wealth;
    std::size_t decileCount[10] = {};
    for (std::size_t pos = 0; pos < n; ++pos) ++decileCount[pos * 10 / n];
    for (std::size_t pos = 0; pos < n; ++pos) {
        // pos 0 is the richest; bucket 0 is the top decile.
        std::size_t decileFromTop = pos * 10 / n;
        double share = decileSharesPoorestFirst[9 - decileFromTop];
        wealth[ranksDescending[pos]] =
            totalWealth * share / static_cast<double>(decileCount[decileFromTop]);
    }
    return wealth;
}

// Share of weekly household income a household is willing to spend on care,
// stepped by per-capita income.
inline double care_budget_share(double perCapitaWeeklyIncome) {
    if (perCapitaWeeklyIncome <= 200.0) return 0.10;
    if (perCapitaWeeklyIncome <= 500.0) return 0.20;
    return 0.30;
}

} // namespace caresim
