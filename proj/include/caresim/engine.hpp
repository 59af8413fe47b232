#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "caresim/allocation.hpp"
#include "caresim/config.hpp"
#include "caresim/demography.hpp"
#include "caresim/economy.hpp"
#include "caresim/health.hpp"
#include "caresim/population.hpp"
#include "caresim/reports.hpp"
#include "caresim/rng.hpp"
#include "caresim/synthetic.hpp"

namespace caresim {

struct PopulationExtinct : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool has_resident_newborn(const Population& pop, const Agent& a, int year) {
    if (!a.female) return false;
    for (AgentId c : a.children) {
        const Agent& ch = pop.agent(c);
        if (ch.alive && ch.age(year) == 0 && ch.household == a.household) return true;
    }
    return false;
}

struct SimulationResult {
    std::vector<YearlyMetrics> years;
};

// One full run: 1860-style start, yearly steps to the end year. Care
// processes run on weekly quantities; a year is 52 identical weeks, so the
// weekly allocation is computed once per year and scaled by 52 in the annual
// accounts.
class Simulation {
public:
    Simulation(SimConfig cfg, Scenario scenario, std::uint64_t seed)
        : cfg_(std::move(cfg)), scen_(std::move(scenario)), rng_(seed) {
        cfg_.validate();
    }

    void init() {
        std::vector<Town> towns = cfg_.townMapCsv.empty()
                                      ? make_grid_towns(cfg_.townGridSide, cfg_.townSpacing)
                                      : load_town_csv(cfg_.townMapCsv);
        pop_ = seed_population(std::move(towns), cfg_.startYear, cfg_.seed, rng_.seeding);
        build_mortality();
        build_fertility();
        divorce_ = cfg_.divorceCsv.empty() ? make_synthetic_divorce()
                                           : load_divorce_csv(cfg_.divorceCsv);
        onset_ = cfg_.onsetCsv.empty() ? make_synthetic_onset() : load_onset_csv(cfg_.onsetCsv);
        currentYear_ = cfg_.startYear;
        metrics_.clear();
        metrics_.reserve(cfg_.endYear - cfg_.startYear + 1);
    }

    int current_year() const { return currentYear_; }
    const Population& population() const { return pop_; }
    Population& population() { return pop_; }
    const std::vector<YearlyMetrics>& metrics() const { return metrics_; }
    const MortalityModel& mortality_model() const { return mortality_; }
    const AllocationTotals& last_allocation() const { return totals_; }

    void step_year() {
        const int year = currentYear_;
        deaths_phase(year);
        births_phase(year);
        ageing_phase(year);
        partnership_phase(year);
        relocation_phase(year);
        health_phase(year);
        economy_pre_phase(year);
        allocation_phase(year);
        economy_post_phase(year);
        record_metrics(year);
        ++currentYear_;
    }

    SimulationResult run() {
        init();
        while (currentYear_ <= cfg_.endYear) step_year();
        return {metrics_};
    }

private:
    // -- model construction ---------------------------------------------------

    void build_mortality() {
        const auto& d = cfg_.demography;
        mortality_.gmMale = d.gmMale;
        mortality_.gmFemale = d.gmFemale;
        mortality_.needUplift = d.needMortalityUplift;
        if (cfg_.mortalityMaleCsv.empty()) {
            mortality_.tableMale = make_synthetic_mortality(false, d.mortalityDataStart,
                                                            d.mortalityDataEnd, d.maxAge);
            mortality_.tableFemale = make_synthetic_mortality(true, d.mortalityDataStart,
                                                              d.mortalityDataEnd, d.maxAge);
        } else {
            mortality_.tableMale =
                load_rate_table_csv(cfg_.mortalityMaleCsv, RateKind::MortalityMale);
            mortality_.tableFemale =
                load_rate_table_csv(cfg_.mortalityFemaleCsv, RateKind::MortalityFemale);
        }
        mortality_.dataEraStart = mortality_.tableMale.firstYear();
        const int dataEnd = mortality_.tableMale.lastYear();
        const int horizon = cfg_.endYear - dataEnd;
        if (horizon > 0) {
            mortality_.projectionStart = dataEnd + 1;
            mortality_.projectedMale = project_table(mortality_.tableMale, horizon);
            mortality_.projectedFemale = project_table(mortality_.tableFemale, horizon);
        } else {
            mortality_.projectionStart = cfg_.endYear + 1; // never reached
        }
    }

    RateTable project_table(const RateTable& data, int horizon) {
        AgeYearMatrix logRates;
        logRates.ages = data.maxAge() + 1;
        logRates.years = data.yearCount();
        logRates.v.resize(static_cast<std::size_t>(logRates.ages) * logRates.years);
        for (int a = 0; a <= data.maxAge(); ++a)
            for (int y = data.firstYear(); y <= data.lastYear(); ++y)
                logRates.at(a, y - data.firstYear()) =
                    std::log(std::max(1e-10, data.rate(a, y)));
        lcFit_.push_back(lc_fit(logRates));
        AgeYearMatrix proj =
            lc_project(lcFit_.back(), horizon, rng_.mortality, cfg_.demography.lcSigma);
        RateTable out(data.kind(), data.lastYear() + 1, data.lastYear() + horizon,
                      data.maxAge());
        for (int a = 0; a <= data.maxAge(); ++a)
            for (int j = 0; j < horizon; ++j) out.at(a, data.lastYear() + 1 + j) = proj.at(a, j);
        out.validate();
        return out;
    }

    void build_fertility() {
        if (cfg_.fertilityCsv.empty()) {
            fertility_ =
                make_synthetic_fertility(cfg_.startYear, cfg_.endYear, cfg_.demography.maxAge);
        } else {
            fertility_ = load_rate_table_csv(cfg_.fertilityCsv, RateKind::Fertility);
        }
    }

    int fertility_year(int year) const {
        return std::clamp(year, fertility_.firstYear(), fertility_.lastYear());
    }

    // -- yearly phases ----------------------------------------------------------

    void deaths_phase(int year) {
        const std::size_t n = pop_.agents.size();
        std::vector<AgentId> dead;
        for (std::size_t i = 0; i < n; ++i) {
            Agent& a = pop_.agents[i];
            if (!a.alive) continue;
            double p = annual_mortality(a.age(year), a.female, a.careNeedLevel,
                                        cfg_.demography.sesMortality[a.sesLevel], year,
                                        mortality_);
            if (rng_.mortality.bernoulli(p)) dead.push_back(a.id);
        }
        for (AgentId id : dead) bury(id);
        adopt_orphans(pop_, year, rng_.relocation);
        std::size_t adults = 0;
        for (const auto& a : pop_.agents)
            if (a.alive && a.age(year) >= 17) ++adults;
        if (adults == 0)
            throw PopulationExtinct("no adults left alive in year " + std::to_string(year));
    }

    void bury(AgentId id) {
        Agent& a = pop_.agent(id);
        a.alive = false;
        // estate passes to the partner, else equally to living children
        if (a.partner != kNoAgent && pop_.agent(a.partner).alive) {
            pop_.agent(a.partner).wealth += a.wealth;
            pop_.agent(a.partner).partner = kNoAgent;
        } else {
            std::vector<AgentId> heirs;
            for (AgentId c : a.children)
                if (pop_.agent(c).alive) heirs.push_back(c);
            for (AgentId h : heirs) pop_.agent(h).wealth += a.wealth / heirs.size();
        }
        a.wealth = 0.0;
        a.partner = kNoAgent;
        pop_.remove_from_household(id);
    }

    void births_phase(int year) {
        std::vector<BirthCandidate> candidates;
        for (const auto& a : pop_.agents) {
            if (!a.alive || !a.female || a.partner == kNoAgent) continue;
            if (!pop_.agent(a.partner).alive) continue;
            candidates.push_back(
                {a.id, a.age(year), cfg_.demography.sesFertility[a.sesLevel]});
        }
        auto mothers =
            sample_births(candidates, fertility_year(year), fertility_, rng_.fertility);
        for (AgentId mid : mothers) {
            // create_agent may reallocate the agent store: no references
            // into it may be held across the call
            const AgentId father = pop_.agent(mid).partner;
            const HouseholdId home = pop_.agent(mid).household;
            bool female = rng_.fertility.bernoulli(0.5);
            AgentId cid = pop_.create_agent(female, year);
            Agent& child = pop_.agent(cid);
            child.mother = mid;
            child.father = father;
            child.status = WorkStatus::Child;
            pop_.agent(mid).children.push_back(cid);
            if (father != kNoAgent) pop_.agent(father).children.push_back(cid);
            pop_.place_agent(cid, home);
        }
    }

    double household_per_capita_income(HouseholdId hh) const {
        const Household& h = pop_.household(hh);
        double income = 0.0;
        int n = 0;
        for (AgentId id : h.members) {
            const Agent& a = pop_.agent(id);
            if (!a.alive) continue;
            income += a.weeklyEarnings;
            ++n;
        }
        return n > 0 ? income / n : 0.0;
    }

    int max_parent_education(const Agent& a) const {
        int e = 0;
        if (a.mother != kNoAgent) e = std::max(e, pop_.agent(a.mother).educationLevel);
        if (a.father != kNoAgent) e = std::max(e, pop_.agent(a.father).educationLevel);
        return e;
    }

    void enter_workforce(Agent& a) {
        a.sesLevel = a.educationLevel;
        double loss = cfg_.economy.jobLossBase * cfg_.economy.unemploymentFactor[a.sesLevel];
        double steadyUnemployment = loss / (loss + cfg_.economy.reemploymentProbability);
        a.status = rng_.employment.bernoulli(steadyUnemployment) ? WorkStatus::Unemployed
                                                                 : WorkStatus::Employed;
    }

    double current_hourly_wage(const Agent& a, int year) const {
        const auto& e = cfg_.economy;
        return era_wage_factor(year, e.wageGrowthStartYear, e.wageGrowthAnnual) *
               hourly_wage(e.initialSalaries[a.sesLevel], e.finalSalaries[a.sesLevel],
                           e.salaryGrowth[a.sesLevel], a.experience);
    }

    void retire(Agent& a, int year) {
        int early = std::max(0, cfg_.economy.retirementAge - a.age(year));
        double finalWeekly = current_hourly_wage(a, year) * cfg_.economy.standardWeeklyHours;
        if (a.status == WorkStatus::Unemployed) finalWeekly = cfg_.economy.benefitWeekly;
        a.pensionWeekly = weekly_pension(finalWeekly, cfg_.economy.pensionReplacement, early,
                                         cfg_.economy.earlyRetirementPenalty);
        a.status = WorkStatus::Retired;
        a.retirementYear = year;
    }

    void ageing_phase(int year) {
        const std::size_t n = pop_.agents.size();
        for (std::size_t i = 0; i < n; ++i) {
            Agent& a = pop_.agents[i];
            if (!a.alive) continue;
            ++a.yearsInTown;
            const int age = a.age(year);
            switch (a.status) {
                case WorkStatus::Child:
                    if (age >= 12) a.status = WorkStatus::Teenager;
                    break;
                case WorkStatus::Teenager:
                    if (age >= 16) {
                        double p = education_continue_probability(
                            household_per_capita_income(a.household), max_parent_education(a),
                            cfg_.economy.education);
                        if (rng_.education.bernoulli(p)) {
                            a.status = WorkStatus::Student;
                        } else {
                            enter_workforce(a);
                        }
                    }
                    break;
                case WorkStatus::Student: {
                    // completion ladder: 18 -> level 1, 21 -> 2, 23 -> 3, 25 -> 4
                    int reached = a.educationLevel;
                    if (age == 18) reached = 1;
                    else if (age == 21) reached = 2;
                    else if (age == 23) reached = 3;
                    else if (age >= 25) reached = 4;
                    if (reached != a.educationLevel) {
                        a.educationLevel = reached;
                        bool done = reached >= 4;
                        if (!done) {
                            double p = education_continue_probability(
                                household_per_capita_income(a.household),
                                max_parent_education(a), cfg_.economy.education);
                            done = !rng_.education.bernoulli(p);
                        }
                        if (done) enter_workforce(a);
                    }
                    break;
                }
                case WorkStatus::Employed:
                case WorkStatus::Unemployed:
                    if (age >= cfg_.economy.retirementAge) {
                        retire(a, year);
                    } else if (a.careNeedLevel >= 3 && age >= 50) {
                        retire(a, year); // ill health forces an early exit
                    } else if (a.careNeedLevel >= 2 && a.status == WorkStatus::Employed) {
                        a.status = WorkStatus::Unemployed;
                    } else if (a.status == WorkStatus::Employed) {
                        double loss = cfg_.economy.jobLossBase *
                                      cfg_.economy.unemploymentFactor[a.sesLevel];
                        if (rng_.employment.bernoulli(std::min(1.0, loss)))
                            a.status = WorkStatus::Unemployed;
                    } else {
                        if (rng_.employment.bernoulli(cfg_.economy.reemploymentProbability))
                            a.status = WorkStatus::Employed;
                    }
                    break;
                case WorkStatus::Retired:
                    break;
            }
        }
    }

    void partnership_phase(int year) {
        form_partnerships(pop_, year, cfg_.partnership, rng_.partnership);
        dissolve_partnerships(pop_, year, divorce_, rng_.divorce);
    }

    void relocation_phase(int year) {
        // grown children strike out on their own
        const std::size_t n = pop_.agents.size();
        for (std::size_t i = 0; i < n; ++i) {
            Agent& a = pop_.agents[i];
            if (!a.alive || a.partner != kNoAgent || a.status != WorkStatus::Employed) continue;
            if (a.age(year) < 18) continue;
            bool withParents = false;
            for (AgentId m : pop_.household(a.household).members)
                if (m == a.mother || m == a.father) withParents = true;
            if (!withParents) continue;
            if (rng_.relocation.bernoulli(cfg_.leaveHomeProbability)) {
                HouseholdId fresh = pop_.create_household(pop_.household(a.household).town);
                pop_.place_agent(a.id, fresh);
            }
        }

        // job offers pull whole households towards bigger labour markets
        std::vector<double> densityWeights;
        for (const auto& t : pop_.towns) densityWeights.push_back(t.densityWeight);
        for (std::size_t i = 0; i < n; ++i) {
            Agent& a = pop_.agents[i];
            if (!a.alive || a.status != WorkStatus::Employed) continue;
            if (!rng_.relocation.bernoulli(cfg_.relocation.jobMoveProbability)) continue;
            const int cur = pop_.household(a.household).town;
            std::vector<double> w = densityWeights;
            w[cur] = 0.0;
            double total = 0.0;
            for (double x : w) total += x;
            if (total <= 0.0) continue;
            int dest = static_cast<int>(rng_.relocation.categorical(w));
            move_household(pop_, a.household, dest);
        }

        care_moves(year);
        voluntary_moves(year);
    }

    double household_spare_supply(const Household& hh) const {
        double s = 0.0;
        for (AgentId id : hh.members) {
            const Agent& a = pop_.agent(id);
            if (a.alive && a.careNeedLevel < 2) s += cfg_.allocation.supply.pool(a.status);
        }
        return s;
    }

    // Frail pensioners without an able carer at home move in with an adult
    // child; the child household with the most spare care capacity hosts.
    void care_moves(int year) {
        const std::size_t n = pop_.agents.size();
        for (std::size_t i = 0; i < n; ++i) {
            Agent& a = pop_.agents[i];
            if (!a.alive || a.status != WorkStatus::Retired || a.careNeedLevel < 3) continue;
            bool carerAtHome = false;
            for (AgentId m : pop_.household(a.household).members) {
                const Agent& o = pop_.agent(m);
                if (o.id != a.id && o.alive && o.age(year) >= 16 && o.careNeedLevel < 2)
                    carerAtHome = true;
            }
            if (carerAtHome) continue;
            HouseholdId best = kNoHousehold;
            double bestSpare = -1.0;
            for (AgentId c : a.children) {
                const Agent& child = pop_.agent(c);
                if (!child.alive || child.age(year) < 21 || child.household == a.household)
                    continue;
                double spare = household_spare_supply(pop_.household(child.household));
                if (spare > bestSpare) {
                    bestSpare = spare;
                    best = child.household;
                }
            }
            if (best == kNoHousehold) continue;
            double p = cfg_.relocation.careMoveBase * (a.careNeedLevel - 2) *
                       (1.0 + bestSpare / 56.0);
            if (!rng_.relocation.bernoulli(std::min(1.0, p))) continue;
            AgentId partner = a.partner;
            pop_.place_agent(a.id, best);
            if (partner != kNoAgent && pop_.agent(partner).alive)
                pop_.place_agent(partner, best);
        }
    }

    void voluntary_moves(int year) {
        // per-town adult counts by social group, for the mixing term
        const std::size_t nTowns = pop_.towns.size();
        std::vector<std::array<int, 5>> sesCounts(nTowns, {0, 0, 0, 0, 0});
        std::vector<int> adults(nTowns, 0);
        for (const auto& a : pop_.agents) {
            if (!a.alive || a.age(year) < 17) continue;
            int t = pop_.household(a.household).town;
            ++sesCounts[t][a.sesLevel];
            ++adults[t];
        }
        double maxDensity = 0.0, maxLha = 0.0;
        for (const auto& t : pop_.towns) {
            maxDensity = std::max(maxDensity, t.densityWeight);
            maxLha = std::max(maxLha, t.lhaBand);
        }

        const std::size_t nh = pop_.households.size();
        for (std::size_t hi = 0; hi < nh; ++hi) {
            Household& hh = pop_.households[hi];
            if (hh.empty()) continue;
            int maxSes = 0;
            bool anyAlive = false;
            for (AgentId id : hh.members) {
                const Agent& a = pop_.agent(id);
                if (!a.alive) continue;
                anyAlive = true;
                maxSes = std::max(maxSes, a.sesLevel);
            }
            if (!anyAlive) continue;

            std::vector<int> kinByTown(nTowns, 0);
            std::vector<HouseholdId> seen;
            for (AgentId id : hh.members) {
                if (!pop_.agent(id).alive) continue;
                for (const KinTie& t : kin_of(pop_, id)) {
                    HouseholdId kh = pop_.agent(t.agentId).household;
                    if (kh == hh.id) continue;
                    if (std::find(seen.begin(), seen.end(), kh) != seen.end()) continue;
                    seen.push_back(kh);
                    ++kinByTown[pop_.household(kh).town];
                }
            }

            auto attraction = [&](int town) {
                double share = adults[town] > 0 ? 0.0 : 0.5;
                if (adults[town] > 0) {
                    int atOrAbove = 0;
                    for (int s = maxSes; s < 5; ++s) atOrAbove += sesCounts[town][s];
                    share = static_cast<double>(atOrAbove) / adults[town];
                }
                return town_attraction(pop_.towns[town], kinByTown[town], maxDensity, maxLha,
                                       share, cfg_.relocation);
            };

            const int cur = hh.town;
            double curA = attraction(cur);
            double bestA = curA;
            int bestTown = cur;
            for (std::size_t t = 0; t < nTowns; ++t) {
                if (static_cast<int>(t) == cur) continue;
                double at = attraction(static_cast<int>(t));
                if (at > bestA) {
                    bestA = at;
                    bestTown = static_cast<int>(t);
                }
            }
            if (bestTown == cur) continue;
            double gain = bestA - curA - relocation_cost(pop_, hh, cfg_.relocation);
            if (gain <= 0.0) continue;
            double p = std::min(1.0, cfg_.relocation.voluntaryScale * gain);
            if (rng_.relocation.bernoulli(p)) move_household(pop_, hh.id, bestTown);
        }
    }

    void health_phase(int year) {
        hospitalCostYear_ = 0.0;
        const std::size_t n = pop_.agents.size();
        for (std::size_t i = 0; i < n; ++i) {
            Agent& a = pop_.agents[i];
            if (!a.alive) continue;
            a.cumulativeUnmetHours += 52.0 * a.unmetWeeklyHours;
            const int age = a.age(year);
            if (a.careNeedLevel == 0) {
                double p = onset_.probability(a.female, age);
                if (p > 0.0 && rng_.health.bernoulli(p)) a.careNeedLevel = 1;
            } else if (a.careNeedLevel < 4) {
                double p = progression_probability(a.careNeedLevel, age,
                                                   a.cumulativeUnmetHours, a.sesLevel,
                                                   cfg_.health);
                if (rng_.health.bernoulli(p)) ++a.careNeedLevel;
            }
            if (a.careNeedLevel >= 1) {
                double p = hospitalization_probability(a.careNeedLevel, a.unmetWeeklyHours,
                                                       cfg_.health);
                int weeks = 0;
                for (int w = 0; w < 52;) {
                    if (rng_.health.bernoulli(p)) {
                        int stay = rng_.health.geometric_weeks(cfg_.health.hospitalMeanWeeks);
                        stay = std::min(stay, 52 - w);
                        weeks += stay;
                        w += stay;
                    } else {
                        ++w;
                    }
                }
                hospitalCostYear_ += weeks * cfg_.health.hospitalWeeklyCost;
            }
        }
    }

    void economy_pre_phase(int year) {
        hourlyWage_.assign(pop_.agents.size(), 0.0);
        for (auto& a : pop_.agents) {
            if (!a.alive) continue;
            switch (a.status) {
                case WorkStatus::Employed:
                    hourlyWage_[a.id] = current_hourly_wage(a, year);
                    a.weeklyEarnings = hourlyWage_[a.id] * cfg_.economy.standardWeeklyHours;
                    break;
                case WorkStatus::Unemployed:
                    a.weeklyEarnings = cfg_.economy.benefitWeekly;
                    break;
                case WorkStatus::Retired:
                    a.weeklyEarnings = a.pensionWeekly;
                    break;
                default:
                    a.weeklyEarnings = 0.0;
                    break;
            }
        }
    }

    void allocation_phase(int year) {
        PolicyLevers active = year >= scen_.activationYear ? scen_.levers : benchmark_levers();
        PolicyLevers reference = benchmark_levers();
        if (year < cfg_.careSystemStartYear) {
            // pre-welfare-state era: no subsidy, no free hours, no public offer
            PolicyLevers none;
            none.childSubsidyRate = 0.0;
            none.freeEarlyHours = 0.0;
            none.publicNeedLevel = 5; // above the highest need level
            none.socialDeductionRate = 0.0;
            active = reference = none;
        } else if (year < cfg_.childCareSupportStartYear) {
            // means-tested social care arrived decades before any state help
            // with child care; families paid nurseries in full until then
            active.childSubsidyRate = 0.0;
            active.freeEarlyHours = 0.0;
            reference.childSubsidyRate = 0.0;
            reference.freeEarlyHours = 0.0;
        }
        AllocationParams ap = cfg_.allocation;
        ap.referenceSubsidyRate = reference.childSubsidyRate;
        ap.referenceFreeHours = reference.freeEarlyHours;
        ap.referencePublicNeedLevel = static_cast<int>(reference.publicNeedLevel);
        WeeklyAllocator alloc(pop_, year, active, ap);
        alloc.hourlyWage_ = hourlyWage_;
        totals_ = alloc.run(rng_.allocation);
    }

    void economy_post_phase(int year) {
        const auto& e = cfg_.economy;
        for (auto& a : pop_.agents) {
            if (!a.alive) continue;
            if (a.status == WorkStatus::Employed) {
                double share =
                    std::clamp(1.0 - a.hoursOffWork / e.standardWeeklyHours, 0.0, 1.0);
                if (has_resident_newborn(pop_, a, year)) share = std::min(share, 0.25);
                a.weeklyEarnings = hourlyWage_[a.id] * e.standardWeeklyHours * share;
                a.experience = update_experience(a.experience, share, e.experienceDecay);
            } else {
                a.experience = update_experience(a.experience, 0.0, e.experienceDecay);
            }
            a.accumulatedNetSalary += 52.0 * a.weeklyEarnings * (1.0 - e.taxRate);
        }
        if (year == e.wealthAssignmentYear) {
            assign_wealth(year, /*newRetireesOnly=*/false);
        } else if (year > e.wealthAssignmentYear) {
            assign_wealth(year, /*newRetireesOnly=*/true);
        }
    }

    // Financial wealth is handed out by rank: the population (or the newly
    // retired cohort) is ordered by accumulated net earnings, and decile
    // shares of the total pot go to each tenth of the ranking.
    void assign_wealth(int year, bool newRetireesOnly) {
        std::vector<AgentId> group;
        for (const auto& a : pop_.agents) {
            if (!a.alive) continue;
            if (newRetireesOnly) {
                if (a.retirementYear == year) group.push_back(a.id);
            } else if (a.age(year) >= 17) {
                group.push_back(a.id);
            }
        }
        if (group.empty()) return;
        std::vector<std::size_t> order(group.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            double ax = pop_.agent(group[x]).accumulatedNetSalary;
            double ay = pop_.agent(group[y]).accumulatedNetSalary;
            if (ax != ay) return ax > ay;
            return group[x] < group[y];
        });
        double total = cfg_.economy.wealthPerAdult * cfg_.economy.financialWealthShare *
                       static_cast<double>(group.size());
        auto wealth = assign_wealth_by_rank(group.size(), total,
                                            cfg_.economy.wealthDecileShares, order);
        for (std::size_t i = 0; i < group.size(); ++i) pop_.agent(group[i]).wealth = wealth[i];
    }

    void record_metrics(int year) {
        YearlyMetrics m;
        m.year = year;
        int alive = 0, employed = 0, workingAge = 0;
        double maleWage = 0.0, femaleWage = 0.0;
        int maleN = 0, femaleN = 0;
        for (const auto& a : pop_.agents) {
            if (!a.alive) continue;
            ++alive;
            const int age = a.age(year);
            if (age >= 16 && age < cfg_.economy.retirementAge) ++workingAge;
            if (a.status == WorkStatus::Employed) {
                ++employed;
                if (a.female) {
                    femaleWage += a.weeklyEarnings;
                    ++femaleN;
                } else {
                    maleWage += a.weeklyEarnings;
                    ++maleN;
                }
            }
        }
        m.population = alive;
        m.taxPayerShare = alive > 0 ? static_cast<double>(employed) / alive : 0.0;
        m.employmentRate = workingAge > 0 ? static_cast<double>(employed) / workingAge : 0.0;

        const AllocationTotals& t = totals_;
        m.informalCareHours = 52.0 * (t.childInformal + t.socialInformal);
        m.privateFormalCareHours = 52.0 * (t.childFormalPrivate + t.socialFormalPrivate);
        m.publicCareHours = 52.0 * t.socialPublic;
        m.unmetSocialCareHours = 52.0 * t.socialUnmet;
        m.totalSocialCareNeed = 52.0 * t.socialNeed;
        m.perCapitaCareBurden =
            alive > 0 ? 52.0 * (t.childNeed + t.socialNeed) / alive : 0.0;
        m.publicCareCost = 52.0 * t.publicCareSpend;
        m.hospitalizationCost = hospitalCostYear_;
        double informal = t.childInformal + t.socialInformal;
        double delivered = informal + t.childFormalPrivate + t.socialFormalPrivate + t.socialPublic;
        m.informalCareShare = delivered > 0.0 ? informal / delivered : 0.0;
        // earnings ratio of female to male workers (1 = parity)
        if (maleN > 0 && femaleN > 0 && maleWage > 0.0) {
            m.genderPayGap = (femaleWage / femaleN) / (maleWage / maleN);
        }
        m.formalChildCareHours = 52.0 * t.childFormalPrivate;
        double childDelivered = t.childInformal + t.childFormalPrivate;
        m.informalChildCareShare = childDelivered > 0.0 ? t.childInformal / childDelivered : 0.0;
        m.hoursOffWork = 52.0 * t.hoursOffWork;
        // incremental state cost of the active levers over the reference rules
        m.policyDirectCost =
            52.0 * ((t.childSubsidySpend - t.referenceChildSubsidySpend) +
                    (t.freeHoursSpend - t.referenceFreeHoursSpend) +
                    (t.publicCareSpend - t.referencePublicCareSpend) +
                    t.socialDeductionSpend);
        metrics_.push_back(m);
    }

    SimConfig cfg_;
    Scenario scen_;
    RngSet rng_;
    Population pop_;
    MortalityModel mortality_;
    RateTable fertility_;
    AgeBandTable divorce_;
    OnsetTable onset_;
    std::vector<LeeCarterParams> lcFit_;
    int currentYear_ = 0;
    std::vector<YearlyMetrics> metrics_;
    AllocationTotals totals_;
    double hospitalCostYear_ = 0.0;
    std::vector<double> hourlyWage_;
};

inline SimulationResult run_simulation(const SimConfig& cfg, const Scenario& scen,
                                       std::uint64_t seed) {
    Simulation sim(cfg, scen, seed);
    return sim.run();
}

// Runs every scenario for the given replicate count with common random
// numbers: replicate i uses seed baseSeed+i in every scenario, so paired
// differences isolate the policy effect. Output: <outDir>/<scenario>/rep_<i>.csv
inline void run_batch(const SimConfig& cfg, const std::vector<std::string>& scenarioNames,
                      int replicates, std::uint64_t baseSeed, const std::string& outDir) {
    namespace fs = std::filesystem;
    if (replicates < 1) throw std::invalid_argument("run_batch: replicates must be >= 1");
    for (const auto& name : scenarioNames) {
        Scenario scen = load_scenario(name);
        fs::create_directories(outDir + "/" + scen.name);
        for (int i = 0; i < replicates; ++i) {
            auto result = run_simulation(cfg, scen, baseSeed + static_cast<std::uint64_t>(i));
            write_metrics_csv(outDir + "/" + scen.name + "/rep_" + std::to_string(i) + ".csv",
                              result.years);
        }
    }
}

} // namespace caresim
