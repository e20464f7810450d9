#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "cspqaoa/oracle.hpp"
#include "cspqaoa/rng.hpp"
#include "cspqaoa/success.hpp"

using namespace cspqaoa;

namespace {

PSingleBackend auto_backend(const std::string& table,
                            RepetitionMode mode = RepetitionMode::kWithRepetition) {
    return make_backend(parse_truth_table(table), PolynomialPath::kAuto, mode);
}

TruthTable random_table(int k, Rng& rng) {
    TruthTable table;
    table.k = k;
    table.values.resize(std::size_t{1} << k);
    bool any_true = false;
    for (std::size_t row = 0; row < table.values.size(); ++row) {
        bool v = rng.next_u64() & 1;
        table.values[row] = v;
        any_true = any_true || v;
    }
    if (!any_true) table.values[rng.next_below(table.values.size())] = true;
    return table;
}

}  // namespace

TEST_CASE("zero clause density gives certain success", "[success]") {
    PSingleBackend backend = auto_backend("ksat:3");
    for (int n : {3, 8, 14, 25}) {
        for (QaoaAngles angles : {QaoaAngles{0.9, 0.8}, QaoaAngles{2.7, 4.1}}) {
            SuccessResult poisson =
                success_probability(backend, {n, angles, ClauseCountModel::poisson(0.0)});
            INFO("n=" << n << " gamma=" << angles.gamma << " beta=" << angles.beta);
            CHECK(std::abs(poisson.raw_real - 1.0) < 1e-12);
            CHECK(poisson.imag_residual < 1e-9);
            SuccessResult fixed =
                success_probability(backend, {n, angles, ClauseCountModel::fixed(0)});
            CHECK(std::abs(fixed.raw_real - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("large cancellations fall back to double-double arithmetic", "[success]") {
    PSingleBackend backend = auto_backend("ksat:3");
    SuccessQuery q{25, {0.9, 0.8}, ClauseCountModel::poisson(0.0)};
    SuccessResult res = success_probability(backend, q);
    CHECK(res.precision == PrecisionMode::kDoubleDouble);
    CHECK(std::abs(res.raw_real - 1.0) < 1e-12);

    SuccessQuery small{6, {0.9, 0.8}, ClauseCountModel::poisson(0.0)};
    CHECK(success_probability(backend, small).precision == PrecisionMode::kDouble);
}

TEST_CASE("zero mixing angle gives powers of the satisfied fraction", "[success]") {
    PSingleBackend backend = auto_backend("ksat:3");
    SuccessResult two = success_probability(backend, {7, {1.3, 0.0}, ClauseCountModel::fixed(2)});
    CHECK(two.probability == Catch::Approx(49.0 / 64.0).margin(1e-12));

    double rn = 0.8 * 7;
    SuccessResult poisson =
        success_probability(backend, {7, {1.3, 0.0}, ClauseCountModel::poisson(0.8)});
    CHECK(poisson.probability == Catch::Approx(std::exp(-rn / 8.0)).margin(1e-12));
}

TEST_CASE("success probability is periodic in both angles", "[success]") {
    PSingleBackend backend = auto_backend("nae:4");
    ClauseCountModel model = ClauseCountModel::poisson(1.7);
    const double two_pi = 2.0 * M_PI;
    for (QaoaAngles angles : {QaoaAngles{0.6, 1.1}, QaoaAngles{3.9, 5.2}}) {
        double base = success_probability(backend, {9, angles, model}).probability;
        double beta_shift =
            success_probability(backend, {9, {angles.gamma, angles.beta + two_pi}, model})
                .probability;
        double gamma_shift =
            success_probability(backend, {9, {angles.gamma + 2.0 * two_pi, angles.beta}, model})
                .probability;
        CHECK(std::abs(beta_shift - base) < 1e-10);
        CHECK(std::abs(gamma_shift - base) < 1e-10);
    }
}

TEST_CASE("closed form equals the exhaustive average on tiny instances", "[success][oracle]") {
    Rng rng(71001);
    std::vector<TruthTable> tables;
    tables.push_back(parse_truth_table("ksat:2"));
    tables.push_back(parse_truth_table("1in:2"));
    tables.push_back(parse_truth_table("01"));
    tables.push_back(random_table(2, rng));

    for (const TruthTable& table : tables) {
        PSingleBackend backend =
            make_backend(table, PolynomialPath::kAuto, RepetitionMode::kWithRepetition);
        for (int n : {3, 4})
            for (int m : {1, 2})
                for (int trial = 0; trial < 2; ++trial) {
                    QaoaAngles angles{6.0 * rng.next_unit(), 3.0 * rng.next_unit()};
                    double brute = exact_average_success(n, table, m, angles);
                    SuccessResult closed =
                        success_probability(backend, {n, angles, ClauseCountModel::fixed(m)});
                    INFO("k=" << table.k << " n=" << n << " m=" << m);
                    CHECK(std::abs(closed.probability - brute) < 1e-10);
                }
    }
}

TEST_CASE("closed form sits inside Monte Carlo error bars", "[success][oracle]") {
    Rng seeder(71002);
    struct Setup {
        std::string table;
        RepetitionMode mode;
        double r;
    };
    const Setup setups[] = {
        {"ksat:3", RepetitionMode::kWithRepetition, 1.5},
        {"nae:4", RepetitionMode::kWithRepetition, 2.0},
        {"1in:3", RepetitionMode::kWithoutRepetition, 0.9},
    };
    for (const Setup& s : setups) {
        TruthTable table = parse_truth_table(s.table);
        PSingleBackend backend = make_backend(table, PolynomialPath::kAuto, s.mode);
        QaoaAngles angles{0.9, 0.7};
        int n = 9;
        SuccessResult closed =
            success_probability(backend, {n, angles, ClauseCountModel::poisson(s.r)});
        SamplerConfig sampler = SamplerConfig::poisson(s.r, 0, s.mode);
        MeanStdErr mc = mc_average_success(n, table, sampler, angles, 3000, seeder.next_u64());
        INFO(s.table << ": closed " << closed.probability << " mc " << mc.mean << " +- "
                     << mc.std_error);
        CHECK(std::abs(closed.probability - mc.mean) < 3.0 * mc.std_error + 1e-9);
    }
}

TEST_CASE("closed form matches Monte Carlo on random tables", "[success][oracle]") {
    Rng rng(71003);
    for (int trial = 0; trial < 3; ++trial) {
        TruthTable table = random_table(3, rng);
        PSingleBackend backend =
            make_backend(table, PolynomialPath::kAuto, RepetitionMode::kWithRepetition);
        QaoaAngles angles{6.0 * rng.next_unit(), 3.0 * rng.next_unit()};
        double r = 0.5 + rng.next_unit();
        int n = 8;
        SuccessResult closed =
            success_probability(backend, {n, angles, ClauseCountModel::poisson(r)});
        SamplerConfig sampler = SamplerConfig::poisson(r, 0);
        MeanStdErr mc = mc_average_success(n, table, sampler, angles, 4000, rng.next_u64());
        INFO("trial " << trial << ": closed " << closed.probability << " mc " << mc.mean << " +- "
                      << mc.std_error);
        CHECK(std::abs(closed.probability - mc.mean) < 3.5 * mc.std_error + 1e-9);
    }
}

TEST_CASE("the Poisson form is the Poisson mixture of fixed counts", "[success]") {
    PSingleBackend backend = auto_backend("ksat:3");
    int n = 6;
    double r = 0.8;
    double lambda = r * n;
    QaoaAngles angles{1.1, 0.6};
    SuccessResult poisson = success_probability(backend, {n, angles, ClauseCountModel::poisson(r)});

    double mixture = 0.0, mass = 0.0, pmf = std::exp(-lambda);
    for (std::int64_t m = 0; mass < 1.0 - 1e-12; ++m) {
        mixture +=
            pmf * success_probability(backend, {n, angles, ClauseCountModel::fixed(m)}).probability;
        mass += pmf;
        pmf *= lambda / static_cast<double>(m + 1);
    }
    CHECK(std::abs(poisson.probability - mixture) < 1e-9);
}

TEST_CASE("row evaluation reproduces the full evaluation", "[success]") {
    PSingleBackend backend = auto_backend("nae:4");
    int n = 10;
    double gamma = 1.3;
    ClauseCountModel model = ClauseCountModel::poisson(2.2);
    ConfigEnumeration en = ConfigEnumeration::build(n);
    auto row = p_single_row(backend, en, gamma);
    for (double beta : {0.3, 1.9, 4.4}) {
        SuccessResult fast = success_from_row(en, row, beta, model);
        SuccessResult full = success_probability(backend, en, {n, {gamma, beta}, model});
        if (full.precision == PrecisionMode::kDouble)
            CHECK(fast.probability == full.probability);
        else
            CHECK(std::abs(fast.probability - full.probability) < 1e-9);
    }
    CHECK_THROWS_AS(success_from_row(ConfigEnumeration::build(4), row, 0.3, model), Error);
    CHECK_THROWS_AS(success_probability(backend, en, {4, {0.3, 0.3}, model}), Error);
}

TEST_CASE("the double-path error bound covers the double-double gap", "[success]") {
    Rng rng(71004);
    PSingleBackend backends[] = {auto_backend("ksat:3"), auto_backend("nae:4"),
                                 auto_backend("1in:3", RepetitionMode::kWithoutRepetition)};
    for (PSingleBackend& backend : backends)
        for (int trial = 0; trial < 3; ++trial) {
            int n = 6 + static_cast<int>(rng.next_below(8));
            SuccessQuery q{n,
                           {6.0 * rng.next_unit(), 3.0 * rng.next_unit()},
                           ClauseCountModel::poisson(0.3 + 2.0 * rng.next_unit())};
            ConfigEnumeration en = ConfigEnumeration::build(n);
            auto row = p_single_row(backend, en, q.angles.gamma);
            sdetail::RawSum fast = sdetail::assemble_double(en, row, q.angles.beta, q.model);
            sdetail::RawSum precise = sdetail::assemble_ddouble(backend, en, q);
            INFO("n=" << n << " raw " << fast.re << " precise " << precise.re << " bound "
                      << fast.err_abs);
            CHECK(std::abs(fast.re - precise.re) <= fast.err_abs + 1e-15);
        }
}

TEST_CASE("success probabilities stay physical across angle sweeps", "[success]") {
    PSingleBackend backend = auto_backend("nae:4");
    ClauseCountModel model = ClauseCountModel::poisson(3.0);
    ConfigEnumeration en = ConfigEnumeration::build(12);
    for (int gi = 0; gi < 6; ++gi) {
        double gamma = 4.0 * M_PI * gi / 6.0;
        auto row = p_single_row(backend, en, gamma);
        for (int bi = 0; bi < 6; ++bi) {
            double beta = 2.0 * M_PI * bi / 6.0;
            SuccessResult res = success_from_row(en, row, beta, model);
            CHECK(res.probability >= 0.0);
            CHECK(res.probability <= 1.0);
            CHECK(res.imag_residual <= 1e-9 * std::max(1.0, std::abs(res.raw_real)));
        }
    }
}

TEST_CASE("success curve lists one point per size", "[success]") {
    PSingleBackend backend = auto_backend("nae:4");
    auto points = success_curve(backend, ClauseCountModel::poisson(2.0), {0.9, 0.7}, {6, 8, 10});
    REQUIRE(points.size() == 3);
    CHECK(points[0].n == 6);
    CHECK(points[2].n == 10);
    for (const SuccessPoint& pt : points) {
        CHECK(pt.result.probability > 0.0);
        CHECK(pt.result.probability < 1.0);
    }
    SuccessResult direct =
        success_probability(backend, {8, {0.9, 0.7}, ClauseCountModel::poisson(2.0)});
    CHECK(points[1].result.probability == direct.probability);
}
