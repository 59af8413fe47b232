#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "caresim/allocation.hpp"
#include "caresim/demography.hpp"
#include "caresim/health.hpp"
#include "caresim/population.hpp"
#include "caresim/synthetic.hpp"

namespace caresim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownKeyError : ConfigError {
    using ConfigError::ConfigError;
};
struct ParseError : ConfigError {
    using ConfigError::ConfigError;
};
struct InvariantError : ConfigError {
    using ConfigError::ConfigError;
};

struct EconomyParams {
    std::vector<double> initialSalaries{6.0, 8.0, 10.0, 12.0, 16.0};
    std::vector<double> finalSalaries{9.0, 13.0, 19.0, 27.0, 40.0};
    std::vector<double> salaryGrowth{0.035, 0.030, 0.025, 0.020, 0.016};
    double experienceDecay = 0.95;
    double standardWeeklyHours = 40.0;
    std::vector<double> unemploymentFactor{1.6, 1.3, 1.0, 0.75, 0.55};
    double jobLossBase = 0.06;
    double reemploymentProbability = 0.35;
    double benefitWeekly = 80.0;
    int wageGrowthStartYear = 1960;
    double wageGrowthAnnual = 0.015;
    double pensionReplacement = 0.6;
    double earlyRetirementPenalty = 0.05;
    int retirementAge = 65;
    double taxRate = 0.25;
    EducationLogit education;
    double wealthPerAdult = 160000.0;
    double financialWealthShare = 0.40;
    std::vector<double> wealthDecileShares = synthetic_wealth_decile_shares();
    int wealthAssignmentYear = 1951;
};

struct DemographyParams {
    int mortalityDataStart = 1951;
    int mortalityDataEnd = 2008;
    int maxAge = 105;
    GompertzMakehamParams gmMale{0.0020, 6.0e-5, 0.095};
    GompertzMakehamParams gmFemale{0.0016, 4.2e-5, 0.097};
    double lcSigma = 0.0;
    double needMortalityUplift = 0.15;
    std::vector<double> sesMortality{1.15, 1.07, 1.0, 0.93, 0.85};
    std::vector<double> sesFertility{1.15, 1.05, 1.0, 0.90, 0.80};
};

struct SimConfig {
    int startYear = 1860;
    int endYear = 2050;
    int initialAgents = 2800;
    int townGridSide = 5;
    double townSpacing = 10.0;

    // optional CSV inputs; empty means built-in synthetic tables
    std::string mortalityMaleCsv;
    std::string mortalityFemaleCsv;
    std::string fertilityCsv;
    std::string divorceCsv;
    std::string onsetCsv;
    std::string townMapCsv;

    DemographyParams demography;
    EconomyParams economy;
    HealthParams health;
    PartnershipParams partnership;
    RelocationParams relocation;
    AllocationParams allocation;
    SeedParams seed;
    double leaveHomeProbability = 0.3;
    // before this year there is no public care offer, no child-care subsidy
    // and no free early-education hours; households are on their own
    int careSystemStartYear = 1948;
    // the child-care levers (subsidy, free early hours) switch on much later
    // than means-tested social care
    int childCareSupportStartYear = 1998;

    void validate() const {
        auto fail = [](const std::string& m) { throw InvariantError("config: " + m); };
        if (endYear <= startYear) fail("endYear must be after startYear");
        if (initialAgents < 10) fail("initialAgents must be at least 10");
        if (townGridSide < 1) fail("townGridSide must be at least 1");
        if (economy.wageGrowthAnnual < 0 || economy.wageGrowthAnnual > 0.05)
            fail("wageGrowthAnnual outside [0,0.05]");
        if (demography.mortalityDataStart <= startYear)
            fail("mortalityDataStart must be after startYear");
        if (demography.mortalityDataEnd < demography.mortalityDataStart)
            fail("mortalityDataEnd before mortalityDataStart");
        if (economy.initialSalaries.size() != 5 || economy.finalSalaries.size() != 5 ||
            economy.salaryGrowth.size() != 5 || economy.unemploymentFactor.size() != 5)
            fail("salary and unemployment arrays need one entry per social group (5)");
        for (int s = 0; s < 5; ++s) {
            if (economy.initialSalaries[s] <= 0 || economy.finalSalaries[s] <= 0)
                fail("salaries must be positive");
            if (economy.salaryGrowth[s] < 0) fail("salaryGrowth must be non-negative");
        }
        if (economy.experienceDecay < 0 || economy.experienceDecay >= 1)
            fail("experienceDecay outside [0,1)");
        if (economy.wealthDecileShares.size() != 10) fail("wealthDecileShares needs 10 entries");
        double sum = 0;
        for (double d : economy.wealthDecileShares) {
            if (d < 0) fail("wealthDecileShares must be non-negative");
            sum += d;
        }
        if (std::abs(sum - 1.0) > 1e-6) fail("wealthDecileShares must sum to 1");
        if (demography.sesMortality.size() != 5 || demography.sesFertility.size() != 5)
            fail("sesMortality and sesFertility need 5 entries");
        if (allocation.prices.childHourly <= 0 || allocation.prices.socialHourly <= 0)
            fail("care prices must be positive");
        if (allocation.meansTest.upperSavings < allocation.meansTest.lowerSavings)
            fail("means-test thresholds out of order");
        if (allocation.quantumHours <= 0) fail("quantumHours must be positive");
        if (partnership.annualSearchProbability < 0 || partnership.annualSearchProbability > 1)
            fail("partnershipSearch outside [0,1]");
    }
};

// ---- key=value parsing ------------------------------------------------------

namespace detail {

class ConfigBinder {
public:
    explicit ConfigBinder(SimConfig& c) { bind_all(c); }

    void assign(const std::string& key, const std::string& value, int lineNo) {
        auto it = setters_.find(key);
        if (it == setters_.end())
            throw UnknownKeyError("unknown config key '" + key + "' on line " +
                                  std::to_string(lineNo));
        try {
            it->second(value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("bad value for '" + key + "' on line " + std::to_string(lineNo) +
                             ": '" + value + "'");
        }
    }

private:
    static double to_double(const std::string& s) {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
        if (used != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    }
    static int to_int(const std::string& s) {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
        if (used != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    }
    static std::vector<double> to_list(const std::string& s) {
        std::vector<double> out;
        std::string item;
        std::stringstream ss(s);
        while (std::getline(ss, item, ',')) out.push_back(to_double(item));
        return out;
    }

    void num(const std::string& key, double& field) {
        setters_[key] = [&field](const std::string& v) { field = to_double(v); };
    }
    void num(const std::string& key, int& field) {
        setters_[key] = [&field](const std::string& v) { field = to_int(v); };
    }
    void str(const std::string& key, std::string& field) {
        setters_[key] = [&field](const std::string& v) { field = v; };
    }
    void list(const std::string& key, std::vector<double>& field) {
        setters_[key] = [&field](const std::string& v) { field = to_list(v); };
    }
    void arr(const std::string& key, double* field, std::size_t n) {
        setters_[key] = [field, n, key](const std::string& v) {
            auto xs = to_list(v);
            if (xs.size() != n)
                throw ParseError("'" + key + "' needs " + std::to_string(n) + " values");
            std::copy(xs.begin(), xs.end(), field);
        };
    }

    void bind_all(SimConfig& c) {
        num("startYear", c.startYear);
        num("endYear", c.endYear);
        num("initialAgents", c.initialAgents);
        num("townGridSide", c.townGridSide);
        num("townSpacing", c.townSpacing);
        num("careSystemStartYear", c.careSystemStartYear);
        num("childCareSupportStartYear", c.childCareSupportStartYear);
        str("mortalityMaleCsv", c.mortalityMaleCsv);
        str("mortalityFemaleCsv", c.mortalityFemaleCsv);
        str("fertilityCsv", c.fertilityCsv);
        str("divorceCsv", c.divorceCsv);
        str("onsetCsv", c.onsetCsv);
        str("townMapCsv", c.townMapCsv);

        num("mortalityDataStart", c.demography.mortalityDataStart);
        num("mortalityDataEnd", c.demography.mortalityDataEnd);
        num("maxAge", c.demography.maxAge);
        num("gmMakehamMale", c.demography.gmMale.makeham);
        num("gmSenescentScaleMale", c.demography.gmMale.senescentScale);
        num("gmSenescenceRateMale", c.demography.gmMale.senescenceRate);
        num("gmMakehamFemale", c.demography.gmFemale.makeham);
        num("gmSenescentScaleFemale", c.demography.gmFemale.senescentScale);
        num("gmSenescenceRateFemale", c.demography.gmFemale.senescenceRate);
        num("lcSigma", c.demography.lcSigma);
        num("needMortalityUplift", c.demography.needMortalityUplift);
        list("sesMortality", c.demography.sesMortality);
        list("sesFertility", c.demography.sesFertility);

        list("initialSalaries", c.economy.initialSalaries);
        list("finalSalaries", c.economy.finalSalaries);
        list("salaryGrowth", c.economy.salaryGrowth);
        num("experienceDecay", c.economy.experienceDecay);
        num("standardWeeklyHours", c.economy.standardWeeklyHours);
        list("unemploymentFactor", c.economy.unemploymentFactor);
        num("jobLossBase", c.economy.jobLossBase);
        num("reemploymentProbability", c.economy.reemploymentProbability);
        num("benefitWeekly", c.economy.benefitWeekly);
        num("wageGrowthStartYear", c.economy.wageGrowthStartYear);
        num("wageGrowthAnnual", c.economy.wageGrowthAnnual);
        num("pensionReplacement", c.economy.pensionReplacement);
        num("earlyRetirementPenalty", c.economy.earlyRetirementPenalty);
        num("retirementAge", c.economy.retirementAge);
        num("taxRate", c.economy.taxRate);
        num("eduIntercept", c.economy.education.intercept);
        num("eduIncomeSlope", c.economy.education.incomeSlope);
        num("eduParentSlope", c.economy.education.parentSlope);
        num("wealthPerAdult", c.economy.wealthPerAdult);
        num("financialWealthShare", c.economy.financialWealthShare);
        list("wealthDecileShares", c.economy.wealthDecileShares);
        num("wealthAssignmentYear", c.economy.wealthAssignmentYear);

        arr("progressionBase", c.health.progressionBase, 3);
        num("progressionAgeSlope", c.health.ageSlope);
        num("progressionPivotAge", c.health.pivotAge);
        num("unmetProgressionSlope", c.health.unmetSlope);
        num("sesHealthStep", c.health.sesStep);
        num("sesHealthBase", c.health.sesBase);
        arr("hospitalBase", c.health.hospitalBase, 5);
        num("hospitalUnmetSlope", c.health.hospitalUnmetSlope);
        num("hospitalMeanWeeks", c.health.hospitalMeanWeeks);
        num("hospitalWeeklyCost", c.health.hospitalWeeklyCost);

        num("partnershipSearch", c.partnership.annualSearchProbability);
        num("partnershipMinAge", c.partnership.minAge);
        num("agePreferenceGap", c.partnership.agePreferenceGap);
        num("partnershipAgeDecay", c.partnership.ageDecay);
        num("partnershipSesDecay", c.partnership.sesDecay);
        num("otherTownFactor", c.partnership.otherTownFactor);
        num("partnershipCandidates", c.partnership.candidateSample);

        num("kinPullWeight", c.relocation.kinPullWeight);
        num("kinSaturation", c.relocation.kinSaturation);
        num("jobWeight", c.relocation.jobWeight);
        num("housingCostWeight", c.relocation.housingCostWeight);
        num("sesMixWeight", c.relocation.sesMixWeight);
        num("costPerTenureYear", c.relocation.costPerTenureYear);
        num("tenureCap", c.relocation.tenureCap);
        num("voluntaryScale", c.relocation.voluntaryScale);
        num("jobMoveProbability", c.relocation.jobMoveProbability);
        num("careMoveBase", c.relocation.careMoveBase);
        num("leaveHomeProbability", c.leaveHomeProbability);

        num("childCarePrice", c.allocation.prices.childHourly);
        num("socialCarePrice", c.allocation.prices.socialHourly);
        num("quantumHours", c.allocation.quantumHours);
        num("maxWeeklyTimeOff", c.allocation.maxWeeklyTimeOff);
        num("subsidyCapPerChildYear", c.allocation.subsidyCapPerChildYear);
        num("lowerSavingsThreshold", c.allocation.meansTest.lowerSavings);
        num("upperSavingsThreshold", c.allocation.meansTest.upperSavings);
        num("savingsTariffStep", c.allocation.meansTest.savingsStep);
        num("minimumIncomeGuarantee", c.allocation.meansTest.weeklyIncomeGuarantee);

        num("initialAgentsShareCouples", c.seed.coupleShare);
        num("initialAgentsShareSingles", c.seed.singleShare);
        num("initialAgentsShareElderCouples", c.seed.elderCoupleShare);
        num("initialUnemployment", c.seed.initialUnemployment);
        arr("sesDistribution", c.seed.sesDistribution, 5);
    }

    std::map<std::string, std::function<void(const std::string&)>> setters_;
};

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
inline void apply_config_text(SimConfig& cfg, const std::string& text,
                              const std::string& sourceName) {
    detail::ConfigBinder binder(cfg);
    std::stringstream ss(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(ss, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(sourceName + ":" + std::to_string(lineNo) +
                             ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError(sourceName + ":" + std::to_string(lineNo) + ": empty key");
        binder.assign(key, value, lineNo);
    }
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    SimConfig cfg;
    apply_config_text(cfg, buf.str(), path);
    cfg.validate();
    return cfg;
}

// ---- scenarios ----------------------------------------------------------------

struct Scenario {
    std::string name = "benchmark";
    PolicyLevers levers;       // in force from the activation year
    int activationYear = 2020; // benchmark levers apply before it
};

inline PolicyLevers benchmark_levers() {
    return PolicyLevers{0.2, 20.0, 4.0, 0.0};
}

// The named policy variants each move one lever off the benchmark.
inline bool scenario_preset(const std::string& name, Scenario& out) {
    Scenario s;
    s.name = name;
    s.levers = benchmark_levers();
    if (name == "benchmark") {
    } else if (name == "P1") {
        s.levers.childSubsidyRate = 0.8;
    } else if (name == "P2") {
        s.levers.freeEarlyHours = 32.0;
    } else if (name == "P3") {
        s.levers.publicNeedLevel = 3.0;
    } else if (name == "P4") {
        s.levers.socialDeductionRate = 0.5;
    } else {
        return false;
    }
    out = s;
    return true;
}

// A scenario is either a preset name or a file of key = value lines with keys
// alpha, beta, gamma, theta, activationYear and an optional name.
inline Scenario load_scenario(const std::string& nameOrPath) {
    Scenario s;
    if (scenario_preset(nameOrPath, s)) return s;
    std::ifstream in(nameOrPath);
    if (!in)
        throw IoError("scenario '" + nameOrPath +
                      "' is neither a preset (benchmark, P1..P4) nor a readable file");
    s.levers = benchmark_levers();
    auto base = nameOrPath.find_last_of("/\\");
    s.name = base == std::string::npos ? nameOrPath : nameOrPath.substr(base + 1);
    auto dot = s.name.find_last_of('.');
    if (dot != std::string::npos) s.name = s.name.substr(0, dot);

    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(nameOrPath + ":" + std::to_string(lineNo) +
                             ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        try {
            if (key == "alpha")
                s.levers.childSubsidyRate = std::stod(value);
            else if (key == "beta")
                s.levers.freeEarlyHours = std::stod(value);
            else if (key == "gamma")
                s.levers.publicNeedLevel = std::stod(value);
            else if (key == "theta")
                s.levers.socialDeductionRate = std::stod(value);
            else if (key == "activationYear")
                s.activationYear = std::stoi(value);
            else if (key == "name")
                s.name = value;
            else
                throw UnknownKeyError("unknown scenario key '" + key + "' on line " +
                                      std::to_string(lineNo));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError(nameOrPath + ":" + std::to_string(lineNo) + ": bad value '" +
                             value + "'");
        }
    }
    if (s.levers.childSubsidyRate < 0 || s.levers.childSubsidyRate > 1)
        throw InvariantError("scenario: alpha outside [0,1]");
    if (s.levers.freeEarlyHours < 0 || s.levers.freeEarlyHours > 56)
        throw InvariantError("scenario: beta outside [0,56]");
    if (s.levers.publicNeedLevel < 1 || s.levers.publicNeedLevel > 4)
        throw InvariantError("scenario: gamma outside [1,4]");
    if (s.levers.socialDeductionRate < 0 || s.levers.socialDeductionRate > 1)
        throw InvariantError("scenario: theta outside [0,1]");
    return s;
}

} // namespace caresim
