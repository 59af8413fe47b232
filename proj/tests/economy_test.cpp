#include "caresim/economy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace caresim;

namespace {

// Evaluates the wage curve in extended precision so the production code is
// checked against an independent arithmetic path.
long double wage_oracle(long double initial, long double final_, long double rate,
                        long double experience) {
    long double c = logl(initial / final_);
    return final_ * expl(c * expl(-rate * experience));
}

} // namespace

TEST(HourlyWage, StartsAtInitialSalary) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> sal(1.0, 50.0), rt(0.005, 0.1);
    for (int i = 0; i < 1000; ++i) {
        double I = sal(gen), F = sal(gen), r = rt(gen);
        EXPECT_NEAR(hourly_wage(I, F, r, 0.0), I, 1e-12);
    }
}

TEST(HourlyWage, MatchesOracleAtRandomExperience) {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> sal(1.0, 50.0), rt(0.005, 0.1), ex(0.0, 80.0);
    for (int i = 0; i < 1000; ++i) {
        double I = sal(gen), F = sal(gen), r = rt(gen), h = ex(gen);
        double expect = static_cast<double>(wage_oracle(I, F, r, h));
        EXPECT_NEAR(hourly_wage(I, F, r, h), expect, 1e-9 * std::max(1.0, expect));
    }
}

TEST(HourlyWage, StrictlyMonotoneTowardsFinalSalary) {
    // rising careers rise, and the (unused in practice) falling case falls
    double prev = hourly_wage(8.0, 16.0, 0.02, 0.0);
    for (int h = 1; h <= 80; ++h) {
        double w = hourly_wage(8.0, 16.0, 0.02, h);
        EXPECT_GT(w, prev);
        prev = w;
    }
    prev = hourly_wage(20.0, 10.0, 0.03, 0.0);
    for (int h = 1; h <= 80; ++h) {
        double w = hourly_wage(20.0, 10.0, 0.03, h);
        EXPECT_LT(w, prev);
        prev = w;
    }
}

TEST(HourlyWage, SaturatesAtFinalSalary) {
    EXPECT_NEAR(hourly_wage(8.0, 16.0, 0.02, 5000.0), 16.0, 1e-6);
    EXPECT_NEAR(hourly_wage(3.0, 40.0, 0.05, 5000.0), 40.0, 1e-6);
}

TEST(HourlyWage, SpotValue) {
    // mid-career point on a doubling wage path
    EXPECT_NEAR(hourly_wage(8.0, 16.0, 0.02, 50.0), 12.40, 0.01);
}

TEST(HourlyWage, RejectsBadArguments) {
    EXPECT_THROW(hourly_wage(0.0, 16.0, 0.02, 1.0), std::invalid_argument);
    EXPECT_THROW(hourly_wage(8.0, -1.0, 0.02, 1.0), std::invalid_argument);
    EXPECT_THROW(hourly_wage(8.0, 16.0, -0.1, 1.0), std::invalid_argument);
    EXPECT_THROW(hourly_wage(8.0, 16.0, 0.02, -1.0), std::invalid_argument);
}

TEST(EraWageFactor, CompoundsAfterStartYear) {
    EXPECT_DOUBLE_EQ(era_wage_factor(1950, 1960, 0.015), 1.0);
    EXPECT_DOUBLE_EQ(era_wage_factor(1960, 1960, 0.015), 1.0);
    EXPECT_NEAR(era_wage_factor(1970, 1960, 0.015), std::pow(1.015, 10), 1e-12);
    EXPECT_NEAR(era_wage_factor(2050, 1960, 0.02), std::pow(1.02, 90), 1e-9);
    EXPECT_THROW(era_wage_factor(2000, 1960, -0.01), std::invalid_argument);
}

TEST(Experience, DecaysAndAccumulates) {
    EXPECT_DOUBLE_EQ(update_experience(10.0, 1.0, 0.95), 10.5);
    EXPECT_DOUBLE_EQ(update_experience(10.0, 0.0, 0.95), 9.5);
    EXPECT_DOUBLE_EQ(update_experience(0.0, 0.5, 0.9), 0.5);
    EXPECT_THROW(update_experience(1.0, 1.5, 0.95), std::invalid_argument);
    EXPECT_THROW(update_experience(1.0, 0.5, 1.0), std::invalid_argument);
}

TEST(Experience, FullCareerConvergesBelowCap) {
    // with decay d and full-time work, experience tends to 1/(1-d)
    double h = 0.0;
    for (int y = 0; y < 400; ++y) h = update_experience(h, 1.0, 0.95);
    EXPECT_NEAR(h, 20.0, 1e-6);
}

TEST(Pension, ReplacementWithEarlyPenaltyAndFloor) {
    EXPECT_DOUBLE_EQ(weekly_pension(500.0, 0.6, 0, 0.05), 300.0);
    EXPECT_DOUBLE_EQ(weekly_pension(500.0, 0.6, 3, 0.05), 0.45 * 500.0);
    // penalty can never push the pension below the 10% floor
    EXPECT_DOUBLE_EQ(weekly_pension(500.0, 0.6, 12, 0.05), 50.0);
    // retiring late is not penalised
    EXPECT_DOUBLE_EQ(weekly_pension(500.0, 0.6, -4, 0.05), 300.0);
}

TEST(EducationLogit, MatchesClosedForm) {
    EducationLogit lg; // intercept -1.6, income slope 0.18, parent slope 0.3
    auto expect = [&](double income, int parentEdu) {
        double z = lg.intercept + lg.incomeSlope * std::log(std::max(income, 1.0)) +
                   lg.parentSlope * parentEdu;
        return 1.0 / (1.0 + std::exp(-z));
    };
    EXPECT_NEAR(education_continue_probability(200.0, 2, lg), expect(200.0, 2), 1e-12);
    EXPECT_NEAR(education_continue_probability(0.5, 0, lg), expect(0.5, 0), 1e-12);

    // richer households and educated parents both raise the odds
    EXPECT_GT(education_continue_probability(800.0, 2, lg),
              education_continue_probability(100.0, 2, lg));
    EXPECT_GT(education_continue_probability(200.0, 4, lg),
              education_continue_probability(200.0, 0, lg));
    double p = education_continue_probability(1e9, 4, lg);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
}

TEST(WealthAssignment, DecileSharesSumAndOrder) {
    std::vector<double> shares{0.001, 0.004, 0.010, 0.020, 0.035,
                               0.055, 0.085, 0.130, 0.210, 0.450};
    const std::size_t n = 40;
    std::vector<std::size_t> ranks(n);
    std::iota(ranks.begin(), ranks.end(), 0u); // agent 0 is the richest
    auto w = assign_wealth_by_rank(n, 100000.0, shares, ranks);

    ASSERT_EQ(w.size(), n);
    double sum = 0.0;
    for (double v : w) sum += v;
    EXPECT_NEAR(sum, 100000.0, 1e-6);
    // richest decile (4 agents) split the top share equally
    EXPECT_NEAR(w[0], 100000.0 * 0.450 / 4.0, 1e-9);
    EXPECT_NEAR(w[3], w[0], 1e-9);
    // poorest agent gets the bottom-decile slice
    EXPECT_NEAR(w[n - 1], 100000.0 * 0.001 / 4.0, 1e-9);
    for (std::size_t i = 1; i < n; ++i) EXPECT_LE(w[i], w[i - 1] + 1e-9);
}

TEST(WealthAssignment, RejectsBadInput) {
    std::vector<double> shares(9, 0.1);
    std::vector<std::size_t> ranks{0, 1};
    EXPECT_THROW(assign_wealth_by_rank(2, 100.0, shares, ranks), std::invalid_argument);
}

TEST(CareBudget, SharesStepWithPerCapitaIncome) {
    EXPECT_DOUBLE_EQ(care_budget_share(150.0), 0.10);
    EXPECT_DOUBLE_EQ(care_budget_share(200.0), 0.10);
    EXPECT_DOUBLE_EQ(care_budget_share(350.0), 0.20);
    EXPECT_DOUBLE_EQ(care_budget_share(500.0), 0.20);
    EXPECT_DOUBLE_EQ(care_budget_share(501.0), 0.30);
    EXPECT_DOUBLE_EQ(care_budget_share(5000.0), 0.30);
}
