#include "caresim/demography.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

using namespace caresim;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// Row-centered copy of a log-rate matrix (what the rank-1 step operates on).
AgeYearMatrix centered(const AgeYearMatrix& m) {
    AgeYearMatrix c = m;
    for (int x = 0; x < m.ages; ++x) {
        double mean = 0.0;
        for (int t = 0; t < m.years; ++t) mean += m.at(x, t);
        mean /= m.years;
        for (int t = 0; t < m.years; ++t) c.at(x, t) -= mean;
    }
    return c;
}

double frobenius_sq(const AgeYearMatrix& m) {
    double s = 0.0;
    for (double v : m.v) s += v * v;
    return s;
}

// Best rank-1 residual ||C - u v^T||_F^2 over a dense grid of unit directions
// u on the sphere (3 ages only). For a fixed unit u the optimal v is C^T u,
// leaving ||C||^2 - |C^T u|^2. Independent of the estimator under test.
double grid_oracle_rank1_residual_sq(const AgeYearMatrix& c) {
    EXPECT_EQ(c.ages, 3);
    const double total = frobenius_sq(c);
    double best = total;
    const int nTheta = 400, nPhi = 800;
    for (int i = 0; i <= nTheta; ++i) {
        double theta = M_PI * i / nTheta;
        double st = std::sin(theta), ct = std::cos(theta);
        for (int j = 0; j < nPhi; ++j) {
            double phi = 2.0 * M_PI * j / nPhi;
            double u0 = st * std::cos(phi), u1 = st * std::sin(phi), u2 = ct;
            double captured = 0.0;
            for (int t = 0; t < c.years; ++t) {
                double proj = u0 * c.at(0, t) + u1 * c.at(1, t) + u2 * c.at(2, t);
                captured += proj * proj;
            }
            best = std::min(best, total - captured);
        }
    }
    return best;
}

} // namespace

TEST(GompertzMakeham, MatchesHighPrecisionEvaluation) {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> A(0.0, 0.01), B(1e-6, 1e-4), G(0.05, 0.12),
        age(0.0, 105.0);
    for (int i = 0; i < 500; ++i) {
        GompertzMakehamParams p{A(gen), B(gen), G(gen)};
        double a = age(gen);
        long double expect = static_cast<long double>(p.makeham) +
                             static_cast<long double>(p.senescentScale) *
                                 expl(static_cast<long double>(p.senescenceRate) * a);
        if (expect > 1.0L) expect = 1.0L;
        EXPECT_NEAR(gm_hazard(a, p), static_cast<double>(expect), 1e-12);
    }
}

TEST(GompertzMakeham, ClampsAndRejectsNegativeAge) {
    GompertzMakehamParams p{0.001, 6e-5, 0.095};
    EXPECT_DOUBLE_EQ(gm_hazard(200.0, p), 1.0); // hazard explodes, probability capped
    EXPECT_THROW(gm_hazard(-1.0, p), std::invalid_argument);
}

TEST(GompertzMakeham, MonotoneInAge) {
    GompertzMakehamParams p{0.002, 6e-5, 0.095};
    double prev = gm_hazard(0.0, p);
    for (int a = 1; a <= 105; ++a) {
        double h = gm_hazard(a, p);
        EXPECT_GT(h, prev);
        prev = h;
    }
}

TEST(RateTable, LookupAndTopAgeClamp) {
    RateTable t(RateKind::MortalityMale, 1951, 1953, 100);
    t.at(100, 1952) = 0.5;
    t.at(40, 1951) = 0.01;
    EXPECT_DOUBLE_EQ(t.rate(40, 1951), 0.01);
    // ages above the top row reuse the top row
    EXPECT_DOUBLE_EQ(t.rate(104, 1952), 0.5);
    EXPECT_THROW(t.rate(40, 1950), std::out_of_range);
    EXPECT_THROW(t.rate(-1, 1952), std::out_of_range);
}

TEST(RateTable, ValidateRejectsOutOfRangeCells) {
    RateTable t(RateKind::Fertility, 2000, 2001, 10);
    t.validate();
    t.at(3, 2000) = 1.5;
    EXPECT_THROW(t.validate(), std::invalid_argument);
    EXPECT_THROW(RateTable(RateKind::Fertility, 2001, 2000, 10), std::invalid_argument);
}

TEST(RateTableCsv, RoundTripAndShapeErrors) {
    const std::string path = temp_path("caresim_rates.csv");
    {
        std::string s = "age,year,rate\n";
        for (int age = 0; age <= 2; ++age)
            for (int year = 2000; year <= 2001; ++year)
                s += std::to_string(age) + "," + std::to_string(year) + ",0.0" +
                     std::to_string(age + 1) + "\n";
        csv::write_file(path, s);
    }
    RateTable t = load_rate_table_csv(path, RateKind::MortalityFemale);
    EXPECT_EQ(t.firstYear(), 2000);
    EXPECT_EQ(t.lastYear(), 2001);
    EXPECT_EQ(t.maxAge(), 2);
    EXPECT_DOUBLE_EQ(t.rate(1, 2001), 0.02);

    // a hole in the grid must be rejected
    csv::write_file(path, "age,year,rate\n0,2000,0.1\n1,2001,0.1\n");
    EXPECT_THROW(load_rate_table_csv(path, RateKind::MortalityFemale), IoError);

    // ages must start at zero
    csv::write_file(path, "age,year,rate\n5,2000,0.1\n");
    EXPECT_THROW(load_rate_table_csv(path, RateKind::MortalityFemale), IoError);
    std::remove(path.c_str());
}

TEST(LeeCarter, NormalizationConstraintsOnNoisyInput) {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> noise(0.0, 0.3);
    AgeYearMatrix m;
    m.ages = 8;
    m.years = 12;
    m.v.resize(96);
    for (int x = 0; x < m.ages; ++x)
        for (int t = 0; t < m.years; ++t)
            m.at(x, t) = -5.0 + 0.04 * x - 0.02 * t + noise(gen);

    LeeCarterParams p = lc_fit(m);
    double sb = 0.0, sk = 0.0;
    for (double b : p.sensitivity) sb += b;
    for (double k : p.index) sk += k;
    EXPECT_NEAR(sb, 1.0, 1e-9);
    EXPECT_NEAR(sk, 0.0, 1e-9);
    EXPECT_EQ(p.level.size(), 8u);
    EXPECT_EQ(p.index.size(), 12u);
}

TEST(LeeCarter, RecoversExactRankOneStructure) {
    // Build log rates exactly as level + sensitivity * index with the model's
    // own normalization, then check the fit reproduces every component.
    const int X = 6, T = 10;
    std::vector<double> a(X), b(X), k(T);
    double sb = 0.0;
    for (int x = 0; x < X; ++x) {
        a[x] = -6.0 + 0.05 * x;
        b[x] = 1.0 + 0.3 * std::sin(x + 1.0);
        sb += b[x];
    }
    for (int x = 0; x < X; ++x) b[x] /= sb; // sum(b) = 1
    double sk = 0.0;
    for (int t = 0; t < T; ++t) {
        k[t] = -0.8 * t + 0.4 * std::cos(2.0 * t);
        sk += k[t];
    }
    for (int t = 0; t < T; ++t) k[t] -= sk / T; // sum(k) = 0

    AgeYearMatrix m;
    m.ages = X;
    m.years = T;
    m.v.resize(static_cast<std::size_t>(X) * T);
    for (int x = 0; x < X; ++x)
        for (int t = 0; t < T; ++t) m.at(x, t) = a[x] + b[x] * k[t];

    LeeCarterParams p = lc_fit(m);
    for (int x = 0; x < X; ++x) {
        EXPECT_NEAR(p.level[x], a[x], 1e-9);
        EXPECT_NEAR(p.sensitivity[x], b[x], 1e-9);
    }
    for (int t = 0; t < T; ++t) EXPECT_NEAR(p.index[t], k[t], 1e-9);
    EXPECT_NEAR(p.drift, (k[T - 1] - k[0]) / (T - 1), 1e-9);
}

TEST(LeeCarter, BeatsGridOracleOnTinyInstance) {
    // 3x3 instance small enough to scan rank-1 candidates densely. The fitted
    // (b, k) pair reconstructs the centered matrix at least as well as the
    // best grid direction.
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    AgeYearMatrix m;
    m.ages = 3;
    m.years = 3;
    m.v.resize(9);
    for (double& v : m.v) v = -4.0 + u(gen);

    LeeCarterParams p = lc_fit(m);
    double lcResidualSq = 0.0;
    for (int x = 0; x < 3; ++x)
        for (int t = 0; t < 3; ++t) {
            double rec = p.level[x] + p.sensitivity[x] * p.index[t];
            double d = m.at(x, t) - rec;
            lcResidualSq += d * d;
        }

    double gridBest = grid_oracle_rank1_residual_sq(centered(m));
    EXPECT_LE(lcResidualSq, gridBest + 1e-9);
}

TEST(LeeCarter, ProjectionFollowsDriftDeterministically) {
    LeeCarterParams p;
    p.level = {-5.0, -4.0};
    p.sensitivity = {0.4, 0.6};
    p.index = {1.0, 0.0, -1.0};
    p.drift = -0.5;

    RngStream rng(1, "proj");
    AgeYearMatrix out = lc_project(p, 3, rng, 0.0);
    ASSERT_EQ(out.ages, 2);
    ASSERT_EQ(out.years, 3);
    // k continues from the last fitted value: -1.5, -2.0, -2.5
    for (int j = 0; j < 3; ++j) {
        double k = -1.0 - 0.5 * (j + 1);
        EXPECT_NEAR(out.at(0, j), std::exp(-5.0 + 0.4 * k), 1e-12);
        EXPECT_NEAR(out.at(1, j), std::exp(-4.0 + 0.6 * k), 1e-12);
    }
    EXPECT_THROW(lc_project(p, 0, rng, 0.0), std::invalid_argument);
}

TEST(LeeCarter, StochasticProjectionReproducible) {
    LeeCarterParams p;
    p.level = {-5.0};
    p.sensitivity = {1.0};
    p.index = {0.0};
    p.drift = -0.1;
    RngStream r1(77, "lc");
    RngStream r2(77, "lc");
    AgeYearMatrix a = lc_project(p, 20, r1, 0.2);
    AgeYearMatrix b = lc_project(p, 20, r2, 0.2);
    EXPECT_EQ(a.v, b.v);
}

TEST(Mortality, EraSwitchingAndNeedUplift) {
    MortalityModel m;
    m.gmMale = {0.002, 6e-5, 0.095};
    m.gmFemale = {0.0016, 4.2e-5, 0.097};
    m.tableMale = RateTable(RateKind::MortalityMale, 1951, 2008, 105);
    m.tableFemale = RateTable(RateKind::MortalityFemale, 1951, 2008, 105);
    m.projectedMale = RateTable(RateKind::MortalityMale, 2009, 2050, 105);
    m.projectedFemale = RateTable(RateKind::MortalityFemale, 2009, 2050, 105);
    for (int a = 0; a <= 105; ++a) {
        for (int y = 1951; y <= 2008; ++y) {
            m.tableMale.at(a, y) = 0.2;
            m.tableFemale.at(a, y) = 0.1;
        }
        for (int y = 2009; y <= 2050; ++y) {
            m.projectedMale.at(a, y) = 0.4;
            m.projectedFemale.at(a, y) = 0.3;
        }
    }

    // pre-data era: the parametric hazard
    EXPECT_NEAR(annual_mortality(70, false, 0, 1.0, 1900, m),
                gm_hazard(70.0, m.gmMale), 1e-15);
    // data era: tabulated
    EXPECT_DOUBLE_EQ(annual_mortality(70, false, 0, 1.0, 1980, m), 0.2);
    EXPECT_DOUBLE_EQ(annual_mortality(70, true, 0, 1.0, 1980, m), 0.1);
    // projection era
    EXPECT_DOUBLE_EQ(annual_mortality(70, false, 0, 1.0, 2030, m), 0.4);

    // care-need uplift multiplies the base rate: (1 + 0.15 * level)
    EXPECT_NEAR(annual_mortality(70, false, 3, 1.0, 1980, m), 0.2 * 1.45, 1e-12);
    // SES multiplier applies on top, and the product clamps at 1
    EXPECT_NEAR(annual_mortality(70, false, 0, 1.15, 1980, m), 0.23, 1e-12);
    EXPECT_DOUBLE_EQ(annual_mortality(70, false, 4, 10.0, 2030, m), 1.0);
}

TEST(Births, BinomialCountAndOrderPreserved) {
    RateTable fert(RateKind::Fertility, 2000, 2000, 50);
    for (int a = 0; a <= 50; ++a) fert.at(a, 2000) = 0.1;

    std::vector<BirthCandidate> cands;
    const int n = 4000;
    for (int i = 0; i < n; ++i) cands.push_back({i, 30, 1.0});

    RngStream rng(5, "births");
    auto mothers = sample_births(cands, 2000, fert, rng);
    // expectation 400, sd ~ 19; allow 5 sd
    EXPECT_NEAR(static_cast<double>(mothers.size()), 400.0, 95.0);
    for (std::size_t i = 1; i < mothers.size(); ++i) EXPECT_LT(mothers[i - 1], mothers[i]);
}

TEST(Births, MultiplierScalesAndZeroSuppresses) {
    RateTable fert(RateKind::Fertility, 2000, 2000, 50);
    for (int a = 0; a <= 50; ++a) fert.at(a, 2000) = 0.5;

    std::vector<BirthCandidate> none(1000, BirthCandidate{1, 25, 0.0});
    RngStream rng(5, "births2");
    EXPECT_TRUE(sample_births(none, 2000, fert, rng).empty());

    std::vector<BirthCandidate> sure(100, BirthCandidate{1, 25, 2.0}); // p clamps to 1
    EXPECT_EQ(sample_births(sure, 2000, fert, rng).size(), 100u);
}
