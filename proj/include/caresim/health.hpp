#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "caresim/csv.hpp"

namespace caresim {

inline constexpr int kCareNeedLevels = 5;

// Weekly social-care hours required at each need level.
inline constexpr double kCareNeedHours[kCareNeedLevels] = {0.0, 8.0, 16.0, 36.0, 84.0};

inline double care_need_hours(int level) {
    if (level < 0 || level >= kCareNeedLevels)
        throw std::invalid_argument("care_need_hours: level outside 0..4");
    return kCareNeedHours[level];
}

// Annual probability of first developing a care need (level 0 -> 1), by sex
// and age band. Loaded from a CSV with header `sex,ageBand,probability`.
struct OnsetTable {
    AgeBandTable male;
    AgeBandTable female;

    double probability(bool isFemale, int age) const {
        return (isFemale ? female : male).value_at(age);
    }
};

inline OnsetTable load_onset_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0].size() != 3 || rows[0][0] != "sex" || rows[0][1] != "ageBand" ||
        rows[0][2] != "probability")
        throw IoError("onset table " + path + ": expected header sex,ageBand,probability");
    OnsetTable t;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 3) throw IoError("onset table " + path + ": malformed row");
        const std::string& sex = rows[i][0];
        auto [lo, hi] = parse_age_band(rows[i][1]);
        double p = std::stod(rows[i][2]);
        if (!(p >= 0.0 && p <= 1.0))
            throw IoError("onset table " + path + ": probability outside [0,1]");
        if (sex == "male")
            t.male.add_band(lo, hi, p);
        else if (sex == "female")
            t.female.add_band(lo, hi, p);
        else
            throw IoError("onset table " + path + ": sex must be male or female");
    }
    if (t.male.empty() || t.female.empty())
        throw IoError("onset table " + path + ": need bands for both sexes");
    return t;
}

struct HealthParams {
    // Baseline annual probability of moving from level L to L+1, L = 1..3.
    // Onset (0 -> 1) comes from the onset table instead.
    double progressionBase[3] = {0.18, 0.16, 0.14};
    double ageSlope = 0.025;      // exponential age gradient
    double pivotAge = 75.0;       // age at which the gradient multiplier is 1
    double unmetSlope = 0.02;    // per 1000 cumulative unmet hours
    double sesStep = 0.92;        // multiplicative advantage per SES level above the lowest
    double sesBase = 1.2;         // multiplier at the lowest SES level

    // Weekly hospitalization probability by need level, plus unmet-need slope.
    double hospitalBase[kCareNeedLevels] = {0.0, 0.01, 0.02, 0.04, 0.07};
    double hospitalUnmetSlope = 0.004; // per weekly unmet hour
    double hospitalMeanWeeks = 2.0;
    double hospitalWeeklyCost = 2000.0;
};

// Annual probability of deteriorating one care-need level (from level 1..3).
// Worsens with age, with accumulated unmet care, and for lower SES groups.
inline double progression_probability(int level, int age, double cumulativeUnmetHours,
                                      int sesLevel, const HealthParams& hp) {
    if (level < 1 || level >= kCareNeedLevels)
        throw std::invalid_argument("progression_probability: level outside 1..4");
    if (level == 4) return 0.0; // top level is absorbing
    const double ageMult = std::exp(hp.ageSlope * (age - hp.pivotAge));
    const double unmetMult = 1.0 + hp.unmetSlope * (cumulativeUnmetHours / 1000.0);
    const double sesMult = hp.sesBase * std::pow(hp.sesStep, sesLevel);
    double p = hp.progressionBase[level - 1] * ageMult * unmetMult * sesMult;
    return std::min(1.0, std::max(0.0, p));
}

// Weekly hospitalization probability given current need level and the unmet
// weekly hours carried from the last allocation round.
inline double hospitalization_probability(int level, double unmetWeeklyHours,
                                          const HealthParams& hp) {
    if (level < 0 || level >= kCareNeedLevels)
        throw std::invalid_argument("hospitalization_probability: level outside 0..4");
    double p = hp.hospitalBase[level] + hp.hospitalUnmetSlope * std::max(0.0, unmetWeeklyHours);
    return std::min(1.0, std::max(0.0, p));
}

inline constexpr double kChildSupervisionWeeklyHours = 56.0; // 8h x 7 days
inline constexpr double kSchoolWeeklyHours = 30.0;

// Weekly hours of state-provided supervision for a child of a given age:
// free early-education hours for ages 3-4 (a policy lever), school for 5-11.
inline double state_child_hours(int age, double freeEarlyHours) {
    if (age >= 5 && age <= 11) return kSchoolWeeklyHours;
    if (age == 3 || age == 4) return std::min(kChildSupervisionWeeklyHours, freeEarlyHours);
    return 0.0;
}

// Weekly child-care need of one child aged 1..11. Newborns (age 0) are kept
// out of the allocation rounds: their mother covers them directly.
inline double child_care_need(int age, double freeEarlyHours) {
    if (age < 1 || age > 11) return 0.0;
    return std::max(0.0, kChildSupervisionWeeklyHours - state_child_hours(age, freeEarlyHours));
}

} // namespace caresim
