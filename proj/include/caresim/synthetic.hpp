#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "caresim/csv.hpp"
#include "caresim/demography.hpp"
#include "caresim/population.hpp"
#include "caresim/rng.hpp"

namespace caresim {

// Built-in vital-rate tables used when no CSV inputs are given. Shapes are
// stylised: an infant-mortality spike plus an exponential old-age ramp that
// improves steadily over the data era, and a bell-shaped marital fertility
// schedule whose level falls over the demographic transition with a mid-
// century bump.

inline double synthetic_mortality_rate(int age, int year, bool female) {
    const double improve = std::exp(-0.012 * (year - 1951));
    const double infant = (female ? 0.024 : 0.030) * std::exp(-1.1 * age);
    const double senescent =
        (female ? 3.2e-5 : 4.8e-5) * std::exp((female ? 0.097 : 0.095) * age);
    const double base = (female ? 0.0009 : 0.0012) + infant + senescent;
    return std::min(1.0, base * improve);
}

inline RateTable make_synthetic_mortality(bool female, int firstYear, int lastYear, int maxAge) {
    RateTable t(female ? RateKind::MortalityFemale : RateKind::MortalityMale, firstYear,
                lastYear, maxAge);
    for (int a = 0; a <= maxAge; ++a)
        for (int y = firstYear; y <= lastYear; ++y)
            t.at(a, y) = synthetic_mortality_rate(a, y, female);
    t.validate();
    return t;
}

// Annual birth probability for a *partnered* woman of the given age.
inline double synthetic_fertility_level(int year) {
    // level of the schedule at its peak age
    if (year < 1880) return 0.285;
    if (year < 1920) return 0.285 - 0.0012 * (year - 1880); // long decline
    if (year < 1940) return 0.237 - 0.0028 * (year - 1920);
    if (year < 1946) return 0.181;
    if (year < 1965) return 0.225; // mid-century bump
    if (year < 1978) return 0.225 - 0.0062 * (year - 1965);
    return 0.1444;
}

inline double synthetic_fertility_rate(int age, int year) {
    if (age < 17 || age > 45) return 0.0;
    const double shape = std::exp(-0.5 * std::pow((age - 28.0) / 5.5, 2.0));
    return synthetic_fertility_level(year) * shape;
}

inline RateTable make_synthetic_fertility(int firstYear, int lastYear, int maxAge) {
    RateTable t(RateKind::Fertility, firstYear, lastYear, maxAge);
    for (int a = 0; a <= maxAge; ++a)
        for (int y = firstYear; y <= lastYear; ++y)
            t.at(a, y) = synthetic_fertility_rate(a, y);
    t.validate();
    return t;
}

inline AgeBandTable make_synthetic_divorce() {
    AgeBandTable t;
    t.add_band(0, 29, 0.015);
    t.add_band(30, 44, 0.012);
    t.add_band(45, 59, 0.007);
    t.add_band(60, 200, 0.003);
    return t;
}

inline OnsetTable make_synthetic_onset() {
    OnsetTable t;
    t.male.add_band(0, 49, 0.0008);
    t.male.add_band(50, 64, 0.006);
    t.male.add_band(65, 74, 0.020);
    t.male.add_band(75, 84, 0.055);
    t.male.add_band(85, 200, 0.120);
    t.female.add_band(0, 49, 0.0008);
    t.female.add_band(50, 64, 0.007);
    t.female.add_band(65, 74, 0.024);
    t.female.add_band(75, 84, 0.065);
    t.female.add_band(85, 200, 0.140);
    return t;
}

// Net-wealth decile shares, poorest decile first.
inline std::vector<double> synthetic_wealth_decile_shares() {
    return {0.001, 0.004, 0.010, 0.020, 0.035, 0.055, 0.085, 0.130, 0.210, 0.450};
}

// ---- initial population ----------------------------------------------------

struct SeedParams {
    int initialAgents = 2800;
    double coupleShare = 0.70;        // young couple with children
    double singleShare = 0.15;        // young single adult
    double elderCoupleShare = 0.10;   // the rest splits elder couples/singles
    double sesDistribution[5] = {0.25, 0.27, 0.25, 0.14, 0.09};
    double initialUnemployment = 0.15;
};

namespace detail {

inline int sample_ses(const SeedParams& sp, RngStream& rng) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (int s = 0; s < 5; ++s) {
        acc += sp.sesDistribution[s];
        if (u < acc) return s;
    }
    return 4;
}

inline WorkStatus status_for_age(int age, int ses, RngStream& rng, const SeedParams& sp) {
    if (age < 12) return WorkStatus::Child;
    if (age < 16) return WorkStatus::Teenager;
    if (age >= 65) return WorkStatus::Retired;
    // unemployment falls with social standing
    double u = sp.initialUnemployment * (1.6 - 0.25 * ses);
    return rng.bernoulli(std::min(0.9, std::max(0.02, u))) ? WorkStatus::Unemployed
                                                           : WorkStatus::Employed;
}

inline AgentId seed_adult(Population& pop, HouseholdId hh, bool female, int age, int ses,
                          int startYear, RngStream& rng, const SeedParams& sp) {
    AgentId id = pop.create_agent(female, startYear - age);
    Agent& a = pop.agent(id);
    a.educationLevel = ses;
    a.sesLevel = ses;
    a.status = status_for_age(age, ses, rng, sp);
    int workYears = std::max(0, age - (16 + 2 * ses));
    a.experience = 0.85 * std::min(workYears, 45);
    a.yearsInTown = std::min(age, 10 + static_cast<int>(rng.uniform_index(15)));
    pop.place_agent(id, hh);
    return id;
}

} // namespace detail

// Builds the starting population: mostly young families, a few single adults
// and a small elderly fringe, spread over towns in proportion to their
// density weight. Kinship webs beyond the household accumulate as the run
// progresses.
inline Population seed_population(std::vector<Town> towns, int startYear, const SeedParams& sp,
                                  RngStream& rng) {
    Population pop;
    pop.towns = std::move(towns);

    std::vector<double> townWeights;
    for (const auto& t : pop.towns) townWeights.push_back(t.densityWeight);

    while (pop.agents.size() < static_cast<std::size_t>(sp.initialAgents)) {
        int town = static_cast<int>(rng.categorical(townWeights));
        HouseholdId hh = pop.create_household(town);
        double u = rng.uniform01();
        if (u < sp.coupleShare) {
            int manAge = 19 + static_cast<int>(rng.uniform_index(27)); // 19..45
            int womanAge = std::max(18, manAge - 2 + static_cast<int>(rng.uniform_index(7)) - 3);
            int ses = detail::sample_ses(sp, rng);
            int wses = std::clamp(ses + static_cast<int>(rng.uniform_index(3)) - 1, 0, 4);
            AgentId man = detail::seed_adult(pop, hh, false, manAge, ses, startYear, rng, sp);
            AgentId woman = detail::seed_adult(pop, hh, true, womanAge, wses, startYear, rng, sp);
            pop.agent(man).partner = woman;
            pop.agent(woman).partner = man;
            // children already born to the couple
            int span = std::max(0, womanAge - 19);
            int maxKids = std::min(4, span / 2);
            if (maxKids > 0) {
                int kids = static_cast<int>(rng.uniform_index(maxKids + 1));
                for (int k = 0; k < kids; ++k) {
                    int motherAgeAtBirth =
                        19 + static_cast<int>(rng.uniform_index(std::max(1, span - 1)));
                    int childAge = womanAge - motherAgeAtBirth;
                    if (childAge < 0 || childAge > 15) continue;
                    AgentId c = pop.create_agent(rng.bernoulli(0.5), startYear - childAge);
                    Agent& ch = pop.agent(c);
                    ch.mother = woman;
                    ch.father = man;
                    ch.status = childAge < 12 ? WorkStatus::Child : WorkStatus::Teenager;
                    pop.agent(woman).children.push_back(c);
                    pop.agent(man).children.push_back(c);
                    pop.place_agent(c, hh);
                }
            }
        } else if (u < sp.coupleShare + sp.singleShare) {
            int age = 18 + static_cast<int>(rng.uniform_index(23)); // 18..40
            detail::seed_adult(pop, hh, rng.bernoulli(0.5), age, detail::sample_ses(sp, rng),
                               startYear, rng, sp);
        } else if (u < sp.coupleShare + sp.singleShare + sp.elderCoupleShare) {
            int manAge = 60 + static_cast<int>(rng.uniform_index(16)); // 60..75
            int womanAge = std::max(55, manAge - 2 + static_cast<int>(rng.uniform_index(7)) - 3);
            int ses = detail::sample_ses(sp, rng);
            AgentId man = detail::seed_adult(pop, hh, false, manAge, ses, startYear, rng, sp);
            AgentId woman = detail::seed_adult(pop, hh, true, womanAge, ses, startYear, rng, sp);
            pop.agent(man).partner = woman;
            pop.agent(woman).partner = man;
        } else {
            int age = 65 + static_cast<int>(rng.uniform_index(21)); // 65..85
            detail::seed_adult(pop, hh, rng.bernoulli(0.6), age, detail::sample_ses(sp, rng),
                               startYear, rng, sp);
        }
    }
    return pop;
}

} // namespace caresim
