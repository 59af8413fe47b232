#include "caresim/health.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

using namespace caresim;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST(CareNeed, WeeklyHoursPerLevel) {
    EXPECT_DOUBLE_EQ(care_need_hours(0), 0.0);
    EXPECT_DOUBLE_EQ(care_need_hours(1), 8.0);
    EXPECT_DOUBLE_EQ(care_need_hours(2), 16.0);
    EXPECT_DOUBLE_EQ(care_need_hours(3), 36.0);
    EXPECT_DOUBLE_EQ(care_need_hours(4), 84.0);
    EXPECT_THROW(care_need_hours(-1), std::invalid_argument);
    EXPECT_THROW(care_need_hours(5), std::invalid_argument);
}

TEST(ChildCare, StateHoursByAge) {
    // toddlers below 3 get nothing from the state
    EXPECT_DOUBLE_EQ(state_child_hours(0, 20.0), 0.0);
    EXPECT_DOUBLE_EQ(state_child_hours(2, 20.0), 0.0);
    // 3-4 year olds get the free early-education entitlement
    EXPECT_DOUBLE_EQ(state_child_hours(3, 20.0), 20.0);
    EXPECT_DOUBLE_EQ(state_child_hours(4, 32.0), 32.0);
    // school covers 5-11
    EXPECT_DOUBLE_EQ(state_child_hours(7, 20.0), 30.0);
    EXPECT_DOUBLE_EQ(state_child_hours(11, 0.0), 30.0);
    EXPECT_DOUBLE_EQ(state_child_hours(12, 20.0), 0.0);
    // the entitlement cannot exceed waking supervision hours
    EXPECT_DOUBLE_EQ(state_child_hours(3, 500.0), 56.0);
}

TEST(ChildCare, WeeklyNeedNetsOutStateProvision) {
    EXPECT_DOUBLE_EQ(child_care_need(2, 20.0), 56.0);
    EXPECT_DOUBLE_EQ(child_care_need(3, 20.0), 36.0);
    // a 3-year-old on 32 free hours plus a 7-year-old at school: 24 + 26
    EXPECT_DOUBLE_EQ(child_care_need(3, 32.0) + child_care_need(7, 32.0), 50.0);
    // newborns are covered by their mother, teenagers by themselves
    EXPECT_DOUBLE_EQ(child_care_need(0, 20.0), 0.0);
    EXPECT_DOUBLE_EQ(child_care_need(12, 20.0), 0.0);
}

TEST(Progression, MatchesClosedFormAtSpot) {
    HealthParams hp;
    // level 2, age 80, 2000 cumulative unmet hours, ses 1
    double expect = hp.progressionBase[1] * std::exp(hp.ageSlope * (80 - hp.pivotAge)) *
                    (1.0 + hp.unmetSlope * 2.0) * hp.sesBase * hp.sesStep;
    EXPECT_NEAR(progression_probability(2, 80, 2000.0, 1, hp), expect, 1e-12);
}

TEST(Progression, BoundsAndAbsorbingTopLevel) {
    HealthParams hp;
    EXPECT_DOUBLE_EQ(progression_probability(4, 90, 0.0, 0, hp), 0.0);
    EXPECT_THROW(progression_probability(0, 70, 0.0, 0, hp), std::invalid_argument);
    EXPECT_THROW(progression_probability(5, 70, 0.0, 0, hp), std::invalid_argument);
    // extremely old and deprived: still a probability
    EXPECT_LE(progression_probability(3, 200, 1e7, 0, hp), 1.0);
    for (int lvl = 1; lvl <= 3; ++lvl)
        EXPECT_GE(progression_probability(lvl, 20, 0.0, 4, hp), 0.0);
}

TEST(Progression, WorsensWithUnmetNeedAgeAndDeprivation) {
    HealthParams hp;
    EXPECT_GT(progression_probability(1, 70, 5000.0, 2, hp),
              progression_probability(1, 70, 0.0, 2, hp));
    EXPECT_GT(progression_probability(1, 85, 0.0, 2, hp),
              progression_probability(1, 70, 0.0, 2, hp));
    // lower SES level means a higher multiplier
    EXPECT_GT(progression_probability(1, 70, 0.0, 0, hp),
              progression_probability(1, 70, 0.0, 4, hp));
}

TEST(Hospitalization, BaseRatesAndUnmetSlope) {
    HealthParams hp;
    EXPECT_DOUBLE_EQ(hospitalization_probability(0, 0.0, hp), 0.0);
    EXPECT_DOUBLE_EQ(hospitalization_probability(1, 0.0, hp), 0.01);
    EXPECT_DOUBLE_EQ(hospitalization_probability(4, 0.0, hp), 0.07);
    // every unmet weekly hour adds to the risk
    EXPECT_NEAR(hospitalization_probability(2, 10.0, hp), 0.02 + 0.04, 1e-12);
    // negative carry-over (cannot happen, but) is ignored rather than credited
    EXPECT_DOUBLE_EQ(hospitalization_probability(2, -5.0, hp), 0.02);
    EXPECT_DOUBLE_EQ(hospitalization_probability(3, 1e6, hp), 1.0);
    EXPECT_THROW(hospitalization_probability(-1, 0.0, hp), std::invalid_argument);
    EXPECT_THROW(hospitalization_probability(5, 0.0, hp), std::invalid_argument);
}

TEST(OnsetTable, LoadsBothSexesAndLooksUp) {
    const std::string path = temp_path("caresim_onset.csv");
    csv::write_file(path,
                    "sex,ageBand,probability\n"
                    "male,65-74,0.02\n"
                    "male,75+,0.05\n"
                    "female,65-74,0.03\n"
                    "female,75+,0.06\n");
    OnsetTable t = load_onset_csv(path);
    EXPECT_DOUBLE_EQ(t.male.value_at(70), 0.02);
    EXPECT_DOUBLE_EQ(t.male.value_at(90), 0.05);
    EXPECT_DOUBLE_EQ(t.female.value_at(70), 0.03);
    // ages below the first band carry no onset risk
    EXPECT_DOUBLE_EQ(t.female.value_at(40), 0.0);
    std::remove(path.c_str());
}

TEST(OnsetTable, RequiresBothSexes) {
    const std::string path = temp_path("caresim_onset_bad.csv");
    csv::write_file(path, "sex,ageBand,probability\nmale,65+,0.02\n");
    EXPECT_THROW(load_onset_csv(path), IoError);
    std::remove(path.c_str());
}
