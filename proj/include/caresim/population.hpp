#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "caresim/csv.hpp"
#include "caresim/rng.hpp"

namespace caresim {

using AgentId = std::int32_t;
using HouseholdId = std::int32_t;
inline constexpr AgentId kNoAgent = -1;
inline constexpr HouseholdId kNoHousehold = -1;

enum class WorkStatus : std::uint8_t { Child, Teenager, Student, Employed, Unemployed, Retired };

struct Agent {
    AgentId id = kNoAgent;
    bool female = false;
    bool alive = true;
    int birthYear = 0;
    AgentId mother = kNoAgent;
    AgentId father = kNoAgent;
    AgentId partner = kNoAgent;
    std::vector<AgentId> children;
    HouseholdId household = kNoHousehold;

    WorkStatus status = WorkStatus::Child;
    int educationLevel = 0; // 0..4, fixed once education finishes
    int sesLevel = 0;       // socioeconomic group, = educationLevel once adult
    double experience = 0.0;
    double weeklyEarnings = 0.0;     // gross, last computed year
    double accumulatedNetSalary = 0.0;
    double wealth = 0.0;             // financial wealth (savings)
    double pensionWeekly = 0.0;
    int retirementYear = -1;
    int yearsInTown = 0;

    int careNeedLevel = 0;           // 0..4
    double cumulativeUnmetHours = 0.0;
    double unmetWeeklyHours = 0.0;   // carried from the last allocation round
    double hoursOffWork = 0.0;       // weekly hours off work for care, last round

    int age(int year) const { return year - birthYear; }
};

struct Household {
    HouseholdId id = kNoHousehold;
    int town = 0;
    std::vector<AgentId> members;

    bool empty() const { return members.empty(); }
};

struct Town {
    int id = 0;
    double x = 0.0, y = 0.0;
    double densityWeight = 1.0; // job-market size proxy
    double lhaBand = 1.0;       // housing cost band
};

inline std::vector<Town> load_town_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0].size() != 5 || rows[0][0] != "townId" || rows[0][1] != "x" ||
        rows[0][2] != "y" || rows[0][3] != "densityWeight" || rows[0][4] != "lhaBand")
        throw IoError("town map " + path + ": expected header townId,x,y,densityWeight,lhaBand");
    std::vector<Town> towns;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 5) throw IoError("town map " + path + ": malformed row");
        Town t;
        t.id = std::stoi(rows[i][0]);
        t.x = std::stod(rows[i][1]);
        t.y = std::stod(rows[i][2]);
        t.densityWeight = std::stod(rows[i][3]);
        t.lhaBand = std::stod(rows[i][4]);
        if (t.densityWeight <= 0.0 || t.lhaBand <= 0.0)
            throw IoError("town map " + path + ": densityWeight and lhaBand must be positive");
        towns.push_back(t);
    }
    if (towns.empty()) throw IoError("town map " + path + ": no towns");
    std::sort(towns.begin(), towns.end(), [](const Town& a, const Town& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < towns.size(); ++i) {
        if (towns[i].id != static_cast<int>(i))
            throw IoError("town map " + path + ": townId must be contiguous from 0");
    }
    return towns;
}

inline std::vector<Town> make_grid_towns(int side, double spacing) {
    std::vector<Town> towns;
    for (int gy = 0; gy < side; ++gy) {
        for (int gx = 0; gx < side; ++gx) {
            Town t;
            t.id = gy * side + gx;
            t.x = gx * spacing;
            t.y = gy * spacing;
            // denser, pricier towns towards the grid centre
            double cx = (side - 1) / 2.0, cy = (side - 1) / 2.0;
            double d = std::hypot(gx - cx, gy - cy);
            t.densityWeight = 1.0 + 2.0 * std::exp(-0.5 * d);
            t.lhaBand = 1.0 + 1.5 * std::exp(-0.6 * d);
            towns.push_back(t);
        }
    }
    return towns;
}

class Population {
public:
    std::vector<Agent> agents;         // index == AgentId
    std::vector<Household> households; // index == HouseholdId
    std::vector<Town> towns;

    Agent& agent(AgentId id) { return agents[static_cast<std::size_t>(id)]; }
    const Agent& agent(AgentId id) const { return agents[static_cast<std::size_t>(id)]; }
    Household& household(HouseholdId id) { return households[static_cast<std::size_t>(id)]; }
    const Household& household(HouseholdId id) const {
        return households[static_cast<std::size_t>(id)];
    }

    AgentId create_agent(bool female, int birthYear) {
        Agent a;
        a.id = static_cast<AgentId>(agents.size());
        a.female = female;
        a.birthYear = birthYear;
        agents.push_back(std::move(a));
        return agents.back().id;
    }

    HouseholdId create_household(int town) {
        Household h;
        h.id = static_cast<HouseholdId>(households.size());
        h.town = town;
        households.push_back(std::move(h));
        return households.back().id;
    }

    void place_agent(AgentId id, HouseholdId hh) {
        Agent& a = agent(id);
        if (a.household != kNoHousehold) {
            auto& m = household(a.household).members;
            m.erase(std::remove(m.begin(), m.end(), id), m.end());
        }
        bool townChanged =
            a.household == kNoHousehold || household(a.household).town != household(hh).town;
        a.household = hh;
        household(hh).members.push_back(id);
        if (townChanged) a.yearsInTown = 0;
    }

    void remove_from_household(AgentId id) {
        Agent& a = agent(id);
        if (a.household == kNoHousehold) return;
        auto& m = household(a.household).members;
        m.erase(std::remove(m.begin(), m.end(), id), m.end());
        a.household = kNoHousehold;
    }

    std::size_t alive_count() const {
        std::size_t n = 0;
        for (const auto& a : agents)
            if (a.alive) ++n;
        return n;
    }
};

// ---- kinship ------------------------------------------------------------
//
// Kinship distance classes used by the care-supply table:
//   0   same household
//   1   parents and children living apart
//   2   siblings, grandparents, grandchildren
//   3   aunts/uncles and nieces/nephews
// A partner takes on their partner's blood relations at the same class, and
// blood relatives' partners count at the relative's class.

inline constexpr int kKinUnrelated = 99;

struct KinTie {
    AgentId agentId;
    int distance; // 1..3
};

namespace detail {

inline void add_tie(std::vector<KinTie>& out, const Population& pop, AgentId id, int dist) {
    if (id == kNoAgent) return;
    const Agent& a = pop.agent(id);
    if (!a.alive) return;
    for (auto& t : out) {
        if (t.agentId == id) {
            t.distance = std::min(t.distance, dist);
            return;
        }
    }
    out.push_back({id, dist});
}

// Blood relatives of one person, without partner substitution.
inline void blood_relatives(const Population& pop, AgentId selfId, std::vector<KinTie>& out) {
    const Agent& self = pop.agent(selfId);
    const AgentId parents[2] = {self.mother, self.father};
    for (AgentId p : parents) {
        if (p == kNoAgent) continue;
        add_tie(out, pop, p, 1);
        const Agent& par = pop.agent(p);
        add_tie(out, pop, par.mother, 2); // grandparents
        add_tie(out, pop, par.father, 2);
        for (AgentId sib : par.children) {
            if (sib == selfId) continue;
            add_tie(out, pop, sib, 2); // siblings (incl. half-siblings)
            for (AgentId neph : pop.agent(sib).children) add_tie(out, pop, neph, 3);
        }
        // parents' siblings = aunts/uncles
        const Agent& parAgent = pop.agent(p);
        const AgentId gps[2] = {parAgent.mother, parAgent.father};
        for (AgentId gp : gps) {
            if (gp == kNoAgent) continue;
            for (AgentId unc : pop.agent(gp).children) {
                if (unc == p) continue;
                add_tie(out, pop, unc, 3);
            }
        }
    }
    for (AgentId c : self.children) {
        add_tie(out, pop, c, 1);
        for (AgentId gc : pop.agent(c).children) add_tie(out, pop, gc, 2); // grandchildren
    }
}

} // namespace detail

// All living kin of `selfId` within distance class 3, with partner
// substitution applied on both sides.
inline std::vector<KinTie> kin_of(const Population& pop, AgentId selfId) {
    std::vector<KinTie> ties;
    detail::blood_relatives(pop, selfId, ties);
    const Agent& self = pop.agent(selfId);
    if (self.partner != kNoAgent && pop.agent(self.partner).alive) {
        std::vector<KinTie> viaPartner;
        detail::blood_relatives(pop, self.partner, viaPartner);
        for (const auto& t : viaPartner) {
            if (t.agentId != selfId) detail::add_tie(ties, pop, t.agentId, t.distance);
        }
    }
    // relatives' partners join at the relative's class
    std::vector<KinTie> partners;
    for (const auto& t : ties) {
        AgentId p = pop.agent(t.agentId).partner;
        if (p != kNoAgent && p != selfId && p != self.partner)
            detail::add_tie(partners, pop, p, t.distance);
    }
    for (const auto& t : partners) detail::add_tie(ties, pop, t.agentId, t.distance);
    ties.erase(std::remove_if(ties.begin(), ties.end(),
                              [&](const KinTie& t) { return t.agentId == selfId; }),
               ties.end());
    return ties;
}

// Kinship distance class between one agent and one household: 0 if the agent
// lives there, otherwise the smallest class to any member, kKinUnrelated if
// none.
inline int kinship_distance(const Population& pop, AgentId agentId, HouseholdId hhId) {
    const Agent& a = pop.agent(agentId);
    if (a.household == hhId) return 0;
    int best = kKinUnrelated;
    auto ties = kin_of(pop, agentId);
    for (const auto& t : ties) {
        if (pop.agent(t.agentId).household == hhId) best = std::min(best, t.distance);
    }
    return best;
}

// ---- partnership --------------------------------------------------------

struct PartnershipParams {
    double annualSearchProbability = 0.18; // unpartnered man looks this year
    int minAge = 17;
    double agePreferenceGap = 2.0;  // preferred man-minus-woman age difference
    double ageDecay = 0.12;
    double sesDecay = 0.25;
    double otherTownFactor = 0.4;
    int candidateSample = 40;
};

inline bool partnership_eligible(const Agent& a, int year, const PartnershipParams& p) {
    if (!a.alive || a.partner != kNoAgent) return false;
    if (a.age(year) < p.minAge) return false;
    // students finish education before entering the partnership market
    return a.status == WorkStatus::Employed || a.status == WorkStatus::Unemployed ||
           a.status == WorkStatus::Retired;
}

inline double partnership_weight(const Population& pop, const Agent& man, const Agent& woman,
                                 int year, const PartnershipParams& p) {
    double ageDiff = static_cast<double>(man.age(year) - woman.age(year));
    double w = std::exp(-p.ageDecay * std::abs(ageDiff - p.agePreferenceGap)) *
               std::exp(-p.sesDecay * std::abs(man.sesLevel - woman.sesLevel));
    if (pop.household(man.household).town != pop.household(woman.household).town)
        w *= p.otherTownFactor;
    return w;
}

// Forms partnerships for the year. Men search; a match samples among a fixed
// number of candidate women weighted by age-gap, SES similarity and town.
// Blood relatives within distance class 3 are never matched. The couple
// settles in the man's town: a new household if he still lives with his
// parents, otherwise the woman (with her dependent children) joins his.
inline int form_partnerships(Population& pop, int year, const PartnershipParams& params,
                             RngStream& rng) {
    std::vector<AgentId> men, women;
    for (const auto& a : pop.agents) {
        if (!partnership_eligible(a, year, params)) continue;
        (a.female ? women : men).push_back(a.id);
    }
    int formed = 0;
    std::vector<AgentId> cand;
    std::vector<double> weights;
    for (AgentId mid : men) {
        Agent& man = pop.agent(mid);
        if (man.partner != kNoAgent) continue; // matched earlier this year
        if (!rng.bernoulli(params.annualSearchProbability)) continue;

        cand.clear();
        weights.clear();
        auto kin = kin_of(pop, mid);
        auto isKin = [&](AgentId w) {
            for (const auto& t : kin)
                if (t.agentId == w) return true;
            return false;
        };
        // fixed-size random subsample keeps the search bounded
        const std::size_t n = women.size();
        const std::size_t tries = std::min<std::size_t>(params.candidateSample, n);
        for (std::size_t k = 0; k < tries; ++k) {
            AgentId wid = women[rng.uniform_index(n)];
            const Agent& w = pop.agent(wid);
            if (w.partner != kNoAgent || wid == mid || isKin(wid)) continue;
            if (std::find(cand.begin(), cand.end(), wid) != cand.end()) continue;
            cand.push_back(wid);
            weights.push_back(partnership_weight(pop, man, w, year, params));
        }
        if (cand.empty()) continue;
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) continue;
        AgentId chosen = cand[rng.categorical(weights)];

        Agent& woman = pop.agent(chosen);
        man.partner = chosen;
        woman.partner = mid;
        ++formed;

        bool manWithParents = false;
        for (AgentId m : pop.household(man.household).members) {
            if (m == man.mother || m == man.father) manWithParents = true;
        }
        HouseholdId target = man.household;
        if (manWithParents) {
            target = pop.create_household(pop.household(man.household).town);
            pop.place_agent(mid, target);
        }
        // woman moves in, bringing her resident dependent children
        std::vector<AgentId> movers{chosen};
        for (AgentId c : woman.children) {
            const Agent& ch = pop.agent(c);
            if (ch.alive && ch.age(year) < 16 && ch.household == woman.household)
                movers.push_back(c);
        }
        for (AgentId m : movers) pop.place_agent(m, target);
    }
    return formed;
}

// Loads the divorce CSV (header `ageBand,probability`): annual dissolution
// probability by the man's age band.
inline AgeBandTable load_divorce_csv(const std::string& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows[0].size() != 2 || rows[0][0] != "ageBand" ||
        rows[0][1] != "probability")
        throw IoError("divorce table " + path + ": expected header ageBand,probability");
    AgeBandTable t;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw IoError("divorce table " + path + ": malformed row");
        auto [lo, hi] = parse_age_band(rows[i][0]);
        double p = std::stod(rows[i][1]);
        if (!(p >= 0.0 && p <= 1.0))
            throw IoError("divorce table " + path + ": probability outside [0,1]");
        t.add_band(lo, hi, p);
    }
    if (t.empty()) throw IoError("divorce table " + path + ": no bands");
    return t;
}

// Dissolves partnerships for the year. On divorce the man moves out into a
// new single household in the same town; children stay with their mother.
inline int dissolve_partnerships(Population& pop, int year, const AgeBandTable& divorceRates,
                                 RngStream& rng) {
    int dissolved = 0;
    for (std::size_t i = 0; i < pop.agents.size(); ++i) {
        Agent& man = pop.agents[i];
        if (!man.alive || man.female || man.partner == kNoAgent) continue;
        Agent& woman = pop.agent(man.partner);
        if (!woman.alive) continue;
        double p = divorceRates.value_at(man.age(year));
        if (p <= 0.0 || !rng.bernoulli(p)) continue;
        man.partner = kNoAgent;
        woman.partner = kNoAgent;
        HouseholdId fresh = pop.create_household(pop.household(man.household).town);
        pop.place_agent(man.id, fresh);
        ++dissolved;
    }
    return dissolved;
}

// ---- relocation ---------------------------------------------------------

struct RelocationParams {
    double kinPullWeight = 1.0;     // w1
    double kinSaturation = 0.7;     // lambda, per kin household
    double jobWeight = 0.5;         // w2
    double housingCostWeight = 0.3; // w3
    double sesMixWeight = 0.4;      // w4
    double costPerTenureYear = 0.02; // kappa
    int tenureCap = 20;
    double voluntaryScale = 0.10;   // move probability per unit net gain
    double jobMoveProbability = 0.02;
    double careMoveBase = 0.10;
};

// Attraction of a town for a household: kin pull saturating in the number of
// kin households there, job availability, housing cost, and the share of the
// town at or above the household's social standing.
inline double town_attraction(const Town& town, int kinHouseholdsInTown, double maxDensity,
                              double maxLha, double sesShareAtOrAbove,
                              const RelocationParams& rp) {
    double kinPull = 1.0 - std::exp(-rp.kinSaturation * kinHouseholdsInTown);
    double job = town.densityWeight / maxDensity;
    double housing = town.lhaBand / maxLha;
    return rp.kinPullWeight * kinPull + rp.jobWeight * job - rp.housingCostWeight * housing +
           rp.sesMixWeight * sesShareAtOrAbove;
}

// Moving away gets harder the longer members have lived in the current town.
inline double relocation_cost(const Population& pop, const Household& hh,
                              const RelocationParams& rp) {
    double tenure = 0.0;
    for (AgentId id : hh.members) {
        const Agent& a = pop.agent(id);
        if (a.alive) tenure += std::min(a.yearsInTown, rp.tenureCap);
    }
    return rp.costPerTenureYear * tenure;
}

inline void move_household(Population& pop, HouseholdId hhId, int town) {
    Household& hh = pop.household(hhId);
    hh.town = town;
    for (AgentId id : hh.members) pop.agent(id).yearsInTown = 0;
}

// ---- orphans ------------------------------------------------------------

// Children left in a household with no living adult move to the closest kin
// household that has one (smallest distance class, largest household on a
// tie). With no kin available, a random household with an adult takes them.
inline void adopt_orphans(Population& pop, int year, RngStream& rng) {
    std::vector<AgentId> orphans;
    for (const auto& a : pop.agents) {
        if (!a.alive || a.age(year) >= 16) continue;
        bool hasAdult = false;
        for (AgentId m : pop.household(a.household).members) {
            const Agent& other = pop.agent(m);
            if (other.alive && other.age(year) >= 17) hasAdult = true;
        }
        if (!hasAdult) orphans.push_back(a.id);
    }
    for (AgentId oid : orphans) {
        const Agent& orphan = pop.agent(oid);
        auto ties = kin_of(pop, oid);
        HouseholdId best = kNoHousehold;
        int bestDist = kKinUnrelated;
        std::size_t bestSize = 0;
        for (const auto& t : ties) {
            const Agent& kin = pop.agent(t.agentId);
            if (kin.age(year) < 17 || kin.household == orphan.household) continue;
            const Household& hh = pop.household(kin.household);
            if (t.distance < bestDist ||
                (t.distance == bestDist && hh.members.size() > bestSize)) {
                best = kin.household;
                bestDist = t.distance;
                bestSize = hh.members.size();
            }
        }
        if (best == kNoHousehold) {
            std::vector<HouseholdId> candidates;
            for (const auto& hh : pop.households) {
                if (hh.id == orphan.household) continue;
                for (AgentId m : hh.members) {
                    const Agent& a = pop.agent(m);
                    if (a.alive && a.age(year) >= 17) {
                        candidates.push_back(hh.id);
                        break;
                    }
                }
            }
            if (candidates.empty()) continue;
            best = candidates[rng.uniform_index(candidates.size())];
        }
        pop.place_agent(oid, best);
    }
}

} // namespace caresim
