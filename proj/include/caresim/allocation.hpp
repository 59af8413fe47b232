#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "caresim/economy.hpp"
#include "caresim/health.hpp"
#include "caresim/population.hpp"
#include "caresim/rng.hpp"

namespace caresim {

// ---- weekly care supply (hours) by supplier status and kinship distance ---

struct CareSupplyTable {
    // columns: distance class 0 (own household), I, II, III
    double teenager[4] = {12.0, 0.0, 0.0, 0.0};
    double student[4] = {16.0, 8.0, 4.0, 0.0};
    double employed[4] = {16.0, 12.0, 8.0, 4.0};
    double retired[4] = {56.0, 28.0, 16.0, 8.0};

    // Per-receiver cap for one supplier at the given distance class. The
    // distance-0 column is also the supplier's total weekly pool across all
    // receivers. The unemployed supply as the employed do; they keep a
    // worker's weekly rhythm rather than a pensioner's.
    double hours(WorkStatus status, int distance) const {
        if (distance < 0 || distance > 3) return 0.0;
        switch (status) {
            case WorkStatus::Child: return 0.0;
            case WorkStatus::Teenager: return teenager[distance];
            case WorkStatus::Student: return student[distance];
            case WorkStatus::Employed:
            case WorkStatus::Unemployed: return employed[distance];
            case WorkStatus::Retired: return retired[distance];
        }
        return 0.0;
    }

    double pool(WorkStatus status) const { return hours(status, 0); }
};

// ---- weighted sampling ----------------------------------------------------

// Sampling without replacement-style updates over a fixed index set: draw an
// index with probability proportional to its weight, then adjust weights as
// supply/need is consumed. Backed by a Fenwick tree so a draw or update is
// O(log n). Zero-weight indices are never drawn.
class WeightedSampler {
public:
    explicit WeightedSampler(std::span<const double> weights)
        : n_(weights.size()), tree_(weights.size() + 1, 0.0),
          weights_(weights.begin(), weights.end()) {
        for (std::size_t i = 0; i < n_; ++i) {
            if (!(weights_[i] >= 0.0))
                throw std::invalid_argument("WeightedSampler: negative weight");
            add(i, weights_[i]);
        }
    }

    std::size_t size() const { return n_; }
    double total() const { return prefix(n_); }
    double weight(std::size_t i) const { return weights_[i]; }

    void set(std::size_t i, double w) {
        if (!(w >= 0.0)) throw std::invalid_argument("WeightedSampler: negative weight");
        add(i, w - weights_[i]);
        weights_[i] = w;
    }

    // Draws an index with probability weight/total. Total must be positive.
    std::size_t sample(RngStream& rng) {
        const double t = total();
        if (!(t > 0.0)) throw std::logic_error("WeightedSampler: no positive weights");
        double r = rng.uniform01() * t;
        std::size_t pos = 0;
        std::size_t step = topBit(n_);
        for (; step > 0; step >>= 1) {
            std::size_t next = pos + step;
            if (next <= n_ && tree_[next] <= r) {
                pos = next;
                r -= tree_[pos];
            }
        }
        // pos = first index whose cumulative weight exceeds the draw; guard
        // the floating-point edges so a zero-weight index is never returned.
        if (pos >= n_) pos = n_ - 1;
        if (weights_[pos] <= 0.0) {
            for (std::size_t d = 1; d < n_; ++d) {
                if (pos >= d && weights_[pos - d] > 0.0) return pos - d;
                if (pos + d < n_ && weights_[pos + d] > 0.0) return pos + d;
            }
            throw std::logic_error("WeightedSampler: no positive weights");
        }
        return pos;
    }

private:
    static std::size_t topBit(std::size_t n) {
        std::size_t b = 1;
        while ((b << 1) <= n) b <<= 1;
        return b;
    }
    void add(std::size_t i, double delta) {
        for (std::size_t j = i + 1; j <= n_; j += j & (~j + 1)) tree_[j] += delta;
    }
    double prefix(std::size_t count) const {
        double s = 0.0;
        for (std::size_t j = count; j > 0; j -= j & (~j + 1)) s += tree_[j];
        return s;
    }

    std::size_t n_;
    std::vector<double> tree_;
    std::vector<double> weights_;
};

// ---- means test -----------------------------------------------------------

struct MeansTestParams {
    double lowerSavings = 14250.0;   // below: income-only contribution
    double upperSavings = 23250.0;   // at or above: self-funder
    double tariffPerStep = 1.0;      // GBP per week ...
    double savingsStep = 250.0;      // ... per this much savings above lower
    double weeklyIncomeGuarantee = 189.0;
};

struct MeansTestResult {
    bool eligible = false;
    double weeklyContribution = 0.0; // user pays
    double statePays = 0.0;
};

// Public funding of social care: savings at or above the upper threshold make
// a self-funder; below it the user contributes income above the guaranteed
// minimum plus a linear tariff on savings between the thresholds.
inline MeansTestResult means_test(double savings, double weeklyIncome, double weeklyCost,
                                  const MeansTestParams& p) {
    MeansTestResult r;
    if (weeklyCost < 0.0) throw std::invalid_argument("means_test: negative cost");
    if (savings >= p.upperSavings) {
        r.eligible = false;
        r.weeklyContribution = weeklyCost;
        r.statePays = 0.0;
        return r;
    }
    r.eligible = true;
    double tariff = 0.0;
    if (savings > p.lowerSavings)
        tariff = (savings - p.lowerSavings) / p.savingsStep * p.tariffPerStep;
    double fromIncome = std::max(0.0, weeklyIncome - p.weeklyIncomeGuarantee);
    r.weeklyContribution = std::min(weeklyCost, tariff + fromIncome);
    r.statePays = weeklyCost - r.weeklyContribution;
    return r;
}

// Annual share of savings a self-funding household is prepared to spend on
// care, stepped by the size of the savings pot.
inline double wealth_care_spend_rate(double wealth) {
    if (wealth < 25000.0) return 0.02;
    if (wealth < 100000.0) return 0.04;
    return 0.06;
}

// ---- policy levers ----------------------------------------------------------

struct PolicyLevers {
    double childSubsidyRate = 0.2;    // alpha: state share of the child-care price
    double freeEarlyHours = 20.0;     // beta: weekly free hours for 3-4 year olds
    double publicNeedLevel = 4.0;     // gamma: lowest level covered by public care
    double socialDeductionRate = 0.0; // theta: state share of private social care
};

struct CarePrices {
    double childHourly = 5.0;
    double socialHourly = 17.5;
};

struct AllocationParams {
    CareSupplyTable supply;
    CarePrices prices;
    MeansTestParams meansTest;
    double quantumHours = 4.0;
    double maxWeeklyTimeOff = 40.0;
    double subsidyCapPerChildYear = 2000.0; // at the reference subsidy rate
    // Reference (pre-reform) lever settings, used to split state spending into
    // a baseline part and the increment attributable to the active scenario.
    double referenceSubsidyRate = 0.2;
    double referenceFreeHours = 20.0;
    int referencePublicNeedLevel = 4;
};

// Value of one parental hour spent on child care: it covers every needing
// child in the household at once, so it substitutes that many hours of
// (subsidised) formal provision.
inline double informal_child_care_value(int childrenNeeding, const PolicyLevers& pol,
                                        const CarePrices& prices) {
    return (1.0 - pol.childSubsidyRate) * prices.childHourly * std::max(0, childrenNeeding);
}

// Household decision between covering care with foregone work hours or with
// purchased provision: time off wins when the cheapest available wage is
// below the formal-equivalent value of the hour.
inline bool informal_or_formal(double cheapestWage, double formalEquivalentValue) {
    return cheapestWage < formalEquivalentValue;
}

// ---- weekly allocation ------------------------------------------------------

struct AllocationTotals {
    // weekly hours
    double childNeed = 0.0;
    double childInformal = 0.0;
    double childFormalPrivate = 0.0;
    double childUnmet = 0.0;
    double childStateHours = 0.0; // free early-education hours in use
    double socialNeed = 0.0;
    double socialInformal = 0.0;
    double socialFormalPrivate = 0.0;
    double socialPublic = 0.0;
    double socialUnmet = 0.0;
    double hoursOffWork = 0.0;
    // weekly money
    double childSubsidySpend = 0.0;  // state share of purchased child care
    double freeHoursSpend = 0.0;     // state cost of free early hours
    double socialDeductionSpend = 0.0; // state share of purchased social care
    double publicCareSpend = 0.0;    // state cost of public social care, net of charges
    double userCharges = 0.0;        // receiver contributions to public care
    double privateSpend = 0.0;       // household money spent on care
    double wealthDrawn = 0.0;        // part of privateSpend funded from savings
    // What the same allocation would have cost the state under the reference
    // levers; the excess of the actual spends over these is the direct cost
    // of the active scenario.
    double referenceChildSubsidySpend = 0.0;
    double referenceFreeHoursSpend = 0.0;
    double referencePublicCareSpend = 0.0;
    // Largest per-receiver gap between initial need and the sum of what was
    // delivered plus what stayed unmet. Should sit at floating-point noise.
    double maxConservationError = 0.0;
};

namespace detail {

struct Offer {
    AgentId supplier;
    double capLeft; // per-pair cap, Table rows by distance
};

struct Receiver {
    bool social = false;
    AgentId person = kNoAgent;      // social receivers
    HouseholdId home = kNoHousehold;
    double need = 0.0;
    double need0 = 0.0;             // need before any care was allocated
    double informal = 0.0;
    double formalPrivate = 0.0;
    double publicHours = 0.0;
    int childrenNeeding = 0;        // child receivers: children behind the need
    std::vector<Offer> offers;
    std::vector<AgentId> timeOffCandidates;  // employed adults who may cut hours
    std::vector<HouseholdId> payers;         // households whose budget may be spent
};

} // namespace detail

// One representative week of care allocation. Child care settles first, then
// adult social care, then the public safety net tops up qualifying residual
// social need. Receivers are drawn in proportion to their remaining need and
// served in quanta; each quantum comes from sampled informal supply while any
// remains, then from the household's money-or-time decision.
class WeeklyAllocator {
public:
    WeeklyAllocator(Population& pop, int year, const PolicyLevers& pol,
                    const AllocationParams& ap)
        : pop_(pop), year_(year), pol_(pol), ap_(ap) {}

    AllocationTotals run(RngStream& rng) {
        prepare_agents();
        build_receivers();
        decide_routing();
        allocate_stage(/*social=*/false, rng);
        allocate_stage(/*social=*/true, rng);
        public_care_pass();
        write_back();
        return totals_;
    }

private:
    // -- preparation --------------------------------------------------------

    bool is_newborn_mother(const Agent& a) const {
        if (!a.female) return false;
        for (AgentId c : a.children) {
            const Agent& ch = pop_.agent(c);
            if (ch.alive && ch.age(year_) == 0 && ch.household == a.household) return true;
        }
        return false;
    }

    bool can_supply(const Agent& a) const {
        return a.alive && a.careNeedLevel < 2 && !newbornMother_[a.id] &&
               ap_.supply.pool(a.status) > 0.0;
    }

    void prepare_agents() {
        const std::size_t n = pop_.agents.size();
        poolLeft_.assign(n, 0.0);
        timeOffLeft_.assign(n, 0.0);
        newbornMother_.assign(n, 0);
        hoursOff_.assign(n, 0.0);
        for (const Agent& a : pop_.agents) {
            if (!a.alive) continue;
            if (is_newborn_mother(a)) {
                newbornMother_[a.id] = 1;
                continue; // her care supply is committed to the newborn
            }
            if (a.careNeedLevel >= 2) continue;
            poolLeft_[a.id] = ap_.supply.pool(a.status);
            if (a.status == WorkStatus::Employed) timeOffLeft_[a.id] = ap_.maxWeeklyTimeOff;
        }

        budgetLeft_.assign(pop_.households.size(), 0.0);
        for (const Household& hh : pop_.households) {
            if (hh.empty()) continue;
            double income = 0.0;
            std::size_t heads = 0;
            for (AgentId id : hh.members) {
                const Agent& a = pop_.agent(id);
                if (!a.alive) continue;
                income += a.weeklyEarnings;
                ++heads;
            }
            if (heads == 0) continue;
            budgetLeft_[hh.id] = income * care_budget_share(income / heads);
        }
    }

    // -- receiver construction -----------------------------------------------

    // Informal help must be close by: own household, or kin households in the
    // same town, with the per-pair cap set by the supply table row for the
    // supplier's status and the distance class.
    void collect_offers(detail::Receiver& r) {
        const Household& home = pop_.household(r.home);
        for (AgentId id : home.members) {
            const Agent& a = pop_.agent(id);
            if (!a.alive || !can_supply(a)) continue;
            if (r.social && id == r.person) continue;
            r.offers.push_back({id, ap_.supply.hours(a.status, 0)});
        }
        // kin offers, nearest class per supplier
        std::vector<std::pair<AgentId, int>> kinDist;
        for (AgentId member : home.members) {
            if (!pop_.agent(member).alive) continue;
            for (const KinTie& t : kin_of(pop_, member)) {
                const Agent& kin = pop_.agent(t.agentId);
                if (kin.household == r.home) continue;
                bool seen = false;
                for (auto& kd : kinDist) {
                    if (kd.first == t.agentId) {
                        kd.second = std::min(kd.second, t.distance);
                        seen = true;
                        break;
                    }
                }
                if (!seen) kinDist.emplace_back(t.agentId, t.distance);
            }
        }
        std::sort(kinDist.begin(), kinDist.end());
        const int homeTown = home.town;
        for (auto [kinId, dist] : kinDist) {
            const Agent& kin = pop_.agent(kinId);
            if (!can_supply(kin)) continue;
            if (pop_.household(kin.household).town != homeTown) continue;
            double cap = ap_.supply.hours(kin.status, dist);
            if (cap > 0.0) r.offers.push_back({kinId, cap});
        }
        // money may come from further away: the receiver's own household
        // always pays first; for social care, households of distance-1 kin
        // chip in whatever their budgets allow.
        r.payers.push_back(r.home);
        if (r.social) {
            std::vector<HouseholdId> extra;
            for (const KinTie& t : kin_of(pop_, r.person)) {
                if (t.distance != 1) continue;
                const Agent& kin = pop_.agent(t.agentId);
                if (kin.household == r.home) continue;
                if (std::find(extra.begin(), extra.end(), kin.household) == extra.end())
                    extra.push_back(kin.household);
            }
            std::sort(extra.begin(), extra.end());
            for (HouseholdId h : extra) r.payers.push_back(h);
        }
        // who may cut work hours: employed adults in the receiver household,
        // and for social care also distance-1 kin living in the same town
        for (AgentId id : home.members) {
            const Agent& a = pop_.agent(id);
            if (a.alive && a.status == WorkStatus::Employed && !newbornMother_[a.id] &&
                a.careNeedLevel < 2 && !(r.social && id == r.person))
                r.timeOffCandidates.push_back(id);
        }
        if (r.social) {
            for (const KinTie& t : kin_of(pop_, r.person)) {
                if (t.distance != 1) continue;
                const Agent& kin = pop_.agent(t.agentId);
                if (kin.household == r.home) continue;
                if (pop_.household(kin.household).town != homeTown) continue;
                if (kin.status == WorkStatus::Employed && !newbornMother_[kin.id] &&
                    kin.careNeedLevel < 2)
                    r.timeOffCandidates.push_back(kin.id);
            }
        }
    }

    void build_receivers() {
        for (const Household& hh : pop_.households) {
            if (hh.empty()) continue;
            double need = 0.0;
            int kids = 0;
            for (AgentId id : hh.members) {
                const Agent& a = pop_.agent(id);
                if (!a.alive) continue;
                int age = a.age(year_);
                double cn = child_care_need(age, pol_.freeEarlyHours);
                if (cn > 0.0) {
                    need += cn;
                    ++kids;
                }
                totals_.childStateHours += state_child_hours(age, pol_.freeEarlyHours);
                if (age == 3 || age == 4) {
                    totals_.freeHoursSpend +=
                        state_child_hours(age, pol_.freeEarlyHours) * ap_.prices.childHourly;
                    totals_.referenceFreeHoursSpend +=
                        state_child_hours(age, ap_.referenceFreeHours) * ap_.prices.childHourly;
                }
            }
            if (need <= 0.0) continue;
            detail::Receiver r;
            r.social = false;
            r.home = hh.id;
            r.need = r.need0 = need;
            r.childrenNeeding = kids;
            collect_offers(r);
            totals_.childNeed += need;
            childReceivers_.push_back(std::move(r));
        }
        for (const Agent& a : pop_.agents) {
            if (!a.alive || a.careNeedLevel == 0) continue;
            detail::Receiver r;
            r.social = true;
            r.person = a.id;
            r.home = a.household;
            r.need = r.need0 = care_need_hours(a.careNeedLevel);
            collect_offers(r);
            totals_.socialNeed += r.need;
            socialReceivers_.push_back(std::move(r));
        }
    }

    // Households torn between the two kinds of need place their time (spare
    // hours and work hours alike) on the side where an informal hour replaces
    // the most formal spending, and their money on the other side. This covers
    // both households housing a frail member next to young children and
    // households whose time or money is claimed by a relative's care from
    // outside: the sandwich constellation.
    void decide_routing() {
        timeToChild_.assign(pop_.households.size(), 1);
        moneyToChild_.assign(pop_.households.size(), 1);
        timeToSocial_.assign(pop_.households.size(), 1);
        moneyToSocial_.assign(pop_.households.size(), 1);
        std::vector<int> kidsNeeding(pop_.households.size(), 0);
        std::vector<char> tornBothWays(pop_.households.size(), 0);
        for (const auto& r : childReceivers_) kidsNeeding[r.home] = r.childrenNeeding;
        for (const auto& r : socialReceivers_) {
            tornBothWays[r.home] = 1;
            for (const auto& o : r.offers) tornBothWays[pop_.agent(o.supplier).household] = 1;
            for (AgentId id : r.timeOffCandidates) tornBothWays[pop_.agent(id).household] = 1;
            for (HouseholdId h : r.payers) tornBothWays[h] = 1;
        }
        const double socialValue =
            (1.0 - pol_.socialDeductionRate) * ap_.prices.socialHourly;
        for (const Household& hh : pop_.households) {
            if (hh.empty()) continue;
            if (kidsNeeding[hh.id] > 0 && tornBothWays[hh.id]) {
                double icv = informal_child_care_value(kidsNeeding[hh.id], pol_, ap_.prices);
                bool childGetsTime = icv >= socialValue;
                timeToChild_[hh.id] = childGetsTime ? 1 : 0;
                timeToSocial_[hh.id] = childGetsTime ? 0 : 1;
                moneyToChild_[hh.id] = childGetsTime ? 0 : 1;
                moneyToSocial_[hh.id] = childGetsTime ? 1 : 0;
            }
        }
    }

    // A supplier or payer household only serves the side its routing allows.
    bool time_allowed(AgentId supplier, bool social) const {
        HouseholdId h = pop_.agent(supplier).household;
        return social ? timeToSocial_[h] != 0 : timeToChild_[h] != 0;
    }
    bool money_allowed(HouseholdId payer, bool social) const {
        return social ? moneyToSocial_[payer] != 0 : moneyToChild_[payer] != 0;
    }

    // -- delivery -------------------------------------------------------------

    double informal_quantum(detail::Receiver& r, double want, RngStream& rng) {
        auto offerWeight = [&](const detail::Offer& o) {
            if (!time_allowed(o.supplier, r.social)) return 0.0;
            return std::min(o.capLeft, poolLeft_[o.supplier]);
        };
        double total = 0.0;
        for (const auto& o : r.offers) total += offerWeight(o);
        if (total <= 0.0) return 0.0;
        double pick = rng.uniform01() * total;
        std::size_t chosen = r.offers.size();
        double acc = 0.0;
        for (std::size_t i = 0; i < r.offers.size(); ++i) {
            double w = offerWeight(r.offers[i]);
            if (w <= 0.0) continue;
            acc += w;
            if (pick < acc) {
                chosen = i;
                break;
            }
        }
        if (chosen == r.offers.size()) {
            for (std::size_t i = r.offers.size(); i-- > 0;) {
                if (offerWeight(r.offers[i]) > 0.0) {
                    chosen = i;
                    break;
                }
            }
            if (chosen == r.offers.size()) return 0.0;
        }
        auto& offer = r.offers[chosen];
        double h = std::min({want, offer.capLeft, poolLeft_[offer.supplier]});
        offer.capLeft -= h;
        poolLeft_[offer.supplier] -= h;
        return h;
    }

    AgentId cheapest_time_off(const detail::Receiver& r, double& wageOut) const {
        AgentId best = kNoAgent;
        double bestWage = 0.0;
        for (AgentId id : r.timeOffCandidates) {
            if (timeOffLeft_[id] <= 0.0) continue;
            if (!time_allowed(id, r.social)) continue;
            double wage = hourlyWage_[id];
            if (best == kNoAgent || wage < bestWage) {
                best = id;
                bestWage = wage;
            }
        }
        wageOut = bestWage;
        return best;
    }

    // Buys `want` hours at `unitFamily` from the receiver's payer households
    // (and, for qualifying social receivers, from the person's savings).
    // Returns hours afforded; charges the money sources.
    double buy_hours(detail::Receiver& r, double want, double unitFamily, bool allowWealth) {
        // sub-penny budget leftovers count as spent, so the loop always makes
        // real progress
        constexpr double kMoneyEps = 1e-6;
        double bought = 0.0;
        for (HouseholdId payer : r.payers) {
            if (bought >= want) break;
            if (!money_allowed(payer, r.social)) continue;
            double canPay = budgetLeft_[payer];
            if (canPay <= kMoneyEps) continue;
            double h = std::min(want - bought, canPay / unitFamily);
            budgetLeft_[payer] -= h * unitFamily;
            totals_.privateSpend += h * unitFamily;
            bought += h;
        }
        if (allowWealth && bought < want && r.social) {
            double& wl = wealthWeeklyLeft_[r.person];
            if (wl > kMoneyEps) {
                double h = std::min(want - bought, wl / unitFamily);
                wl -= h * unitFamily;
                totals_.privateSpend += h * unitFamily;
                totals_.wealthDrawn += h * unitFamily;
                wealthSpent_[r.person] += h * unitFamily;
                bought += h;
            }
        }
        return bought > 1e-9 ? bought : 0.0;
    }

    // One quantum for one receiver. Returns delivered hours; 0 means the
    // receiver is out of options and the rest of the need stays unmet.
    double serve_quantum(detail::Receiver& r, RngStream& rng) {
        const double want = std::min(ap_.quantumHours, r.need);
        double h = informal_quantum(r, want, rng);
        if (h > 0.0) {
            r.informal += h;
            r.need -= h;
            (r.social ? totals_.socialInformal : totals_.childInformal) += h;
            return h;
        }

        // Once free kin supply is exhausted, a receiver the state will provide
        // for has no reason to give up wages or buy privately: the public pass
        // picks up the remainder (net of the means-tested contribution).
        if (publicEligible_(r)) return 0.0;

        const bool child = !r.social;
        const double sideValue =
            child ? informal_child_care_value(r.childrenNeeding, pol_, ap_.prices)
                  : (1.0 - pol_.socialDeductionRate) * ap_.prices.socialHourly;

        {
            double wage = 0.0;
            AgentId carer = cheapest_time_off(r, wage);
            if (carer != kNoAgent && informal_or_formal(wage, sideValue)) {
                double give = std::min(want, timeOffLeft_[carer]);
                timeOffLeft_[carer] -= give;
                hoursOff_[carer] += give;
                totals_.hoursOffWork += give;
                r.informal += give;
                r.need -= give;
                (r.social ? totals_.socialInformal : totals_.childInformal) += give;
                return give;
            }
        }
        {
            double statePerHour = 0.0;
            double familyPerHour = 0.0;
            double capHours = want;
            if (child) {
                // the subsidy applies until the household cap is spent;
                // beyond it the family pays the full price
                double sub = subsidyCapLeft_[r.home] > 1e-9
                                 ? pol_.childSubsidyRate * ap_.prices.childHourly
                                 : 0.0;
                if (sub > 0.0) capHours = std::min(capHours, subsidyCapLeft_[r.home] / sub);
                statePerHour = sub;
                familyPerHour = ap_.prices.childHourly - sub;
            } else {
                statePerHour = pol_.socialDeductionRate * ap_.prices.socialHourly;
                familyPerHour = ap_.prices.socialHourly - statePerHour;
            }
            if (capHours > 0.0 && familyPerHour > 0.0) {
                bool allowWealth = !publicEligible_(r);
                double h2 = buy_hours(r, capHours, familyPerHour, allowWealth);
                if (h2 > 0.0) {
                    r.formalPrivate += h2;
                    r.need -= h2;
                    if (child) {
                        totals_.childFormalPrivate += h2;
                        totals_.childSubsidySpend += h2 * statePerHour;
                        subsidyCapLeft_[r.home] =
                            std::max(0.0, subsidyCapLeft_[r.home] - h2 * statePerHour);
                        double refSub = std::min(
                            h2 * ap_.referenceSubsidyRate * ap_.prices.childHourly,
                            referenceCapLeft_[r.home]);
                        totals_.referenceChildSubsidySpend += refSub;
                        referenceCapLeft_[r.home] -= refSub;
                    } else {
                        totals_.socialFormalPrivate += h2;
                        totals_.socialDeductionSpend += h2 * statePerHour;
                    }
                    return h2;
                }
            }
        }
        return 0.0;
    }

    bool publicEligible_(const detail::Receiver& r) const {
        if (!r.social) return false;
        const Agent& a = pop_.agent(r.person);
        return a.careNeedLevel >= static_cast<int>(pol_.publicNeedLevel) &&
               a.wealth < ap_.meansTest.upperSavings;
    }

    void allocate_stage(bool social, RngStream& rng) {
        auto& receivers = social ? socialReceivers_ : childReceivers_;
        if (receivers.empty()) return;
        if (!social) {
            subsidyCapLeft_.assign(pop_.households.size(), 0.0);
            referenceCapLeft_.assign(pop_.households.size(), 0.0);
            const double weeklyCapPerChild =
                ap_.referenceSubsidyRate > 0.0
                    ? ap_.subsidyCapPerChildYear *
                          (pol_.childSubsidyRate / ap_.referenceSubsidyRate) / 52.0
                    : 0.0;
            for (const auto& r : receivers) {
                subsidyCapLeft_[r.home] = weeklyCapPerChild * r.childrenNeeding;
                referenceCapLeft_[r.home] =
                    ap_.subsidyCapPerChildYear / 52.0 * r.childrenNeeding;
            }
        } else {
            wealthWeeklyLeft_.assign(pop_.agents.size(), 0.0);
            wealthSpent_.assign(pop_.agents.size(), 0.0);
            for (const auto& r : receivers) {
                const Agent& a = pop_.agent(r.person);
                if (!publicEligible_(r))
                    wealthWeeklyLeft_[a.id] = wealth_care_spend_rate(a.wealth) * a.wealth / 52.0;
            }
        }
        std::vector<double> weights(receivers.size());
        for (std::size_t i = 0; i < receivers.size(); ++i) weights[i] = receivers[i].need;
        WeightedSampler sampler(weights);
        // the tree's running total carries float residue once entries are
        // zeroed, so exit on a tolerance rather than exact zero
        while (sampler.total() > 1e-9) {
            std::size_t i = sampler.sample(rng);
            double h = serve_quantum(receivers[i], rng);
            if (h <= 0.0 || receivers[i].need <= 1e-12) {
                receivers[i].need = std::max(0.0, receivers[i].need);
                sampler.set(i, 0.0);
            } else {
                sampler.set(i, receivers[i].need);
            }
        }
    }

    // The safety net: qualifying residual social need is covered in full by
    // the public purse, with the user charged per the means test.
    void public_care_pass() {
        for (auto& r : socialReceivers_) {
            if (r.need <= 0.0 || !publicEligible_(r)) continue;
            const Agent& a = pop_.agent(r.person);
            double cost = r.need * ap_.prices.socialHourly;
            auto mt = means_test(a.wealth, a.weeklyEarnings, cost, ap_.meansTest);
            r.publicHours = r.need;
            r.need = 0.0;
            totals_.socialPublic += r.publicHours;
            totals_.publicCareSpend += mt.statePays;
            if (a.careNeedLevel >= ap_.referencePublicNeedLevel)
                totals_.referencePublicCareSpend += mt.statePays;
            totals_.userCharges += mt.weeklyContribution;
        }
    }

    void write_back() {
        auto conservation = [&](const detail::Receiver& r) {
            double gap = std::abs(r.informal + r.formalPrivate + r.publicHours + r.need -
                                  r.need0);
            totals_.maxConservationError = std::max(totals_.maxConservationError, gap);
        };
        for (auto& r : childReceivers_) {
            totals_.childUnmet += r.need;
            conservation(r);
        }
        for (Agent& a : pop_.agents) {
            if (!a.alive) continue;
            a.unmetWeeklyHours = 0.0;
            a.hoursOffWork = hoursOff_.empty() ? 0.0 : hoursOff_[a.id];
        }
        for (auto& r : socialReceivers_) {
            totals_.socialUnmet += r.need;
            pop_.agent(r.person).unmetWeeklyHours = r.need;
            conservation(r);
        }
        for (std::size_t id = 0; id < wealthSpent_.size(); ++id) {
            if (wealthSpent_[id] > 0.0)
                pop_.agents[id].wealth =
                    std::max(0.0, pop_.agents[id].wealth - 52.0 * wealthSpent_[id]);
        }
    }

public:
    // Hourly wages must be supplied before run(): indexed by agent id.
    std::vector<double> hourlyWage_;

private:
    Population& pop_;
    int year_;
    PolicyLevers pol_;
    AllocationParams ap_;
    AllocationTotals totals_;

    std::vector<detail::Receiver> childReceivers_;
    std::vector<detail::Receiver> socialReceivers_;
    std::vector<double> poolLeft_;
    std::vector<double> timeOffLeft_;
    std::vector<double> hoursOff_;
    std::vector<char> newbornMother_;
    std::vector<double> budgetLeft_;
    std::vector<double> subsidyCapLeft_;
    std::vector<double> referenceCapLeft_;
    std::vector<double> wealthWeeklyLeft_;
    std::vector<double> wealthSpent_;
    std::vector<char> timeToChild_, moneyToChild_, timeToSocial_, moneyToSocial_;
};

} // namespace caresim
