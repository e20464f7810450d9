#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cspqaoa/angles.hpp"
#include "cspqaoa/clause_polynomial.hpp"
#include "cspqaoa/cnf.hpp"
#include "cspqaoa/common.hpp"
#include "cspqaoa/instance.hpp"
#include "cspqaoa/oracle.hpp"
#include "cspqaoa/rng.hpp"
#include "cspqaoa/success.hpp"
#include "cspqaoa/truth_table.hpp"

namespace cspqaoa {

/// Fraction of `samples` random Poisson(r n) instances that are satisfiable,
/// by brute-force enumeration.  Instance i uses mix_seed(seed, i).
inline double satisfiable_fraction(const TruthTable& table, int n, double r,
                                   std::int64_t samples, RepetitionMode repetition,
                                   std::uint64_t seed) {
    if (samples < 1) throw Error("satisfiable_fraction needs samples >= 1");
    SamplerConfig cfg = SamplerConfig::poisson(r, 0, repetition);
    std::int64_t satisfiable = 0;
    for (std::int64_t i = 0; i < samples; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        satisfiable += brute_force_satisfiable(sample_instance(n, table, cfg, rng));
    }
    return static_cast<double>(satisfiable) / static_cast<double>(samples);
}

struct ThresholdProbe {
    double r = 0.0;
    double sat_estimate = 0.0;
    std::int64_t samples = 0;
};

struct ThresholdResult {
    double r_star = 0.0;
    std::vector<ThresholdProbe> probe_history;
};

struct ThresholdOptions {
    int n_probe = 12;
    std::int64_t samples = 200;
    double target = 0.5;
    double tol = 0.05;
    RepetitionMode repetition = RepetitionMode::kWithRepetition;
};

/// Locates the clause density where the satisfiable fraction crosses the
/// target, by bracketing from r=1 and bisecting.  Accepts the first probe
/// whose estimate lands within tol of the target.  If the bracket collapses
/// without such a probe (sampling noise versus the assumed monotonicity), the
/// search restarts with more samples, up to four times the initial count.
/// Tables satisfiable at any density are reported as an unbounded threshold;
/// a bracket driven below 1e-9 returns that degenerate density as r_star.
inline ThresholdResult estimate_threshold(const TruthTable& table, const ThresholdOptions& opt,
                                          std::uint64_t seed) {
    if (opt.n_probe < 1 || opt.n_probe > kMaxSimQubits)
        throw Error(strf("threshold probe size must be in [1, %d]", kMaxSimQubits));
    if (opt.samples < 1) throw Error("threshold search needs samples >= 1");
    if (!(opt.target > 0.0 && opt.target < 1.0)) throw Error("threshold target must be in (0, 1)");
    if (!(opt.tol > 0.0)) throw Error("threshold tolerance must be positive");
    if (count_true_rows(table) == static_cast<int>(table.rows()))
        throw Error("threshold is unbounded: the table has no false row, so every instance is "
                    "satisfiable");

    ThresholdResult result;
    std::uint64_t probe_index = 0;
    bool done = false;
    std::int64_t samples = opt.samples;

    auto probe = [&](double r) {
        double est = satisfiable_fraction(table, opt.n_probe, r, samples, opt.repetition,
                                          mix_seed(seed, probe_index++));
        result.probe_history.push_back({r, est, samples});
        if (!done && std::abs(est - opt.target) <= opt.tol) {
            result.r_star = r;
            done = true;
        }
        return est;
    };

    for (int round = 0; round < 3; ++round) {
        double r = 1.0;
        double est = probe(r);
        if (done) return result;

        double lo = 0.0;
        double hi = 0.0;
        if (est > opt.target) {
            lo = r;
            while (true) {
                if (r > 1e4)
                    throw Error(
                        "threshold appears unbounded: instances stay satisfiable beyond "
                        "clause density 10000");
                r *= 2.0;
                est = probe(r);
                if (done) return result;
                if (est < opt.target) {
                    hi = r;
                    break;
                }
                lo = r;
            }
        } else {
            hi = r;
            while (true) {
                r *= 0.5;
                if (r < 1e-9) {
                    result.r_star = r;
                    return result;
                }
                est = probe(r);
                if (done) return result;
                if (est > opt.target) {
                    lo = r;
                    break;
                }
                hi = r;
            }
        }

        for (int iter = 0; iter < 60 && hi - lo > 1e-3 * hi; ++iter) {
            double mid = 0.5 * (lo + hi);
            est = probe(mid);
            if (done) return result;
            (est > opt.target ? lo : hi) = mid;
        }
        samples = std::min(samples * 2, opt.samples * 4);
    }
    throw Error("threshold search did not settle within tolerance; the transition may be "
                "steeper than the sampling resolution");
}

struct OptimizeResult {
    QaoaAngles angles;
    double probability = 0.0;
};

/// Maximizes the closed-form success probability at size n_ref over a uniform
/// grid x grid lattice covering [0, 2pi)^2 in both angles.  Ties break toward
/// the smallest (gamma, beta) pair; the winner is re-evaluated through the
/// full-precision route before returning.
inline OptimizeResult optimize_angles(const PSingleBackend& backend, int n_ref,
                                      const ClauseCountModel& model, int grid = 50) {
    if (grid < 1) throw Error("angle optimization needs grid >= 1");
    ConfigEnumeration en = ConfigEnumeration::build(n_ref);
    const double step = 2.0 * M_PI / grid;

    OptimizeResult best;
    best.angles = {0.0, 0.0};
    best.probability = -1.0;
    for (int gi = 0; gi < grid; ++gi) {
        double gamma = step * gi;
        auto row = p_single_row(backend, en, gamma);
        for (int bi = 0; bi < grid; ++bi) {
            double beta = step * bi;
            SuccessResult res = success_from_row(en, row, beta, model);
            if (res.probability > best.probability) {
                best.angles = {gamma, beta};
                best.probability = res.probability;
            }
        }
    }
    SuccessQuery q{n_ref, best.angles, model};
    best.probability = success_probability(backend, en, q).probability;
    return best;
}

/// Least-squares fit of p = 2^(a + b n).
struct FitResult {
    double a = 0.0;
    double b = 0.0;
    double residual = 0.0;  // RMS of log2 residuals
    int n_min = 0;
    int n_max = 0;
};

/// Ordinary least squares of log2(p) on n.
inline FitResult fit_exponent(const std::vector<std::pair<int, double>>& points) {
    if (points.size() < 3) throw Error("exponent fit needs at least 3 points");
    FitResult fit;
    fit.n_min = points[0].first;
    fit.n_max = points[0].first;
    double mean_n = 0.0;
    double mean_y = 0.0;
    for (const auto& [n, p] : points) {
        if (!(p > 0.0)) throw Error(strf("exponent fit needs p > 0, got %g at n=%d", p, n));
        fit.n_min = std::min(fit.n_min, n);
        fit.n_max = std::max(fit.n_max, n);
        mean_n += n;
        mean_y += std::log2(p);
    }
    if (fit.n_min == fit.n_max) throw Error("exponent fit needs at least two distinct n");
    mean_n /= static_cast<double>(points.size());
    mean_y /= static_cast<double>(points.size());

    double cov = 0.0;
    double var = 0.0;
    for (const auto& [n, p] : points) {
        double dn = n - mean_n;
        cov += dn * (std::log2(p) - mean_y);
        var += dn * dn;
    }
    fit.b = cov / var;
    fit.a = mean_y - fit.b * mean_n;

    double sq = 0.0;
    for (const auto& [n, p] : points) {
        double resid = std::log2(p) - (fit.a + fit.b * n);
        sq += resid * resid;
    }
    fit.residual = std::sqrt(sq / static_cast<double>(points.size()));
    return fit;
}

inline std::vector<std::pair<int, double>> curve_points(const std::vector<SuccessPoint>& curve) {
    std::vector<std::pair<int, double>> points;
    points.reserve(curve.size());
    for (const auto& pt : curve) points.emplace_back(pt.n, pt.result.probability);
    return points;
}

/// One full pipeline pass and its inputs.
struct SweepOptions {
    std::vector<int> n_values;            // sizes for the quantum curve and fit
    std::optional<double> r;              // explicit density; unset = estimate threshold
    ThresholdOptions threshold;
    int n_ref = 12;                       // reference size for angle optimization
    int grid = 50;
    PolynomialPath path = PolynomialPath::kAuto;
    RepetitionMode repetition = RepetitionMode::kWithRepetition;
    std::vector<int> classical_n_values;  // empty = skip the classical comparison
    std::int64_t classical_instances = 500;
    SolverSpec solver;
    std::uint64_t seed = 0;
};

/// Everything the pipeline produced for one table.  `error` is nonempty when
/// the pipeline failed; the remaining fields then hold whatever was completed.
struct TableReport {
    TruthTable table;
    std::string error;
    double r = 0.0;
    bool r_from_threshold = false;
    ThresholdResult threshold;
    QaoaAngles angles;
    double probability_at_ref = 0.0;
    std::vector<SuccessPoint> quantum_curve;
    std::optional<FitResult> quantum_fit;
    std::vector<std::pair<int, double>> classical_medians;
    std::optional<FitResult> classical_fit;
};

/// Threshold (or given r), angle optimization, quantum curve + fit, and the
/// optional classical medians + fit, for one table.
inline TableReport run_table_pipeline(const TruthTable& table, const SweepOptions& opt) {
    TableReport report;
    report.table = table;

    if (opt.r.has_value()) {
        report.r = *opt.r;
    } else {
        ThresholdOptions topt = opt.threshold;
        topt.repetition = opt.repetition;
        report.threshold = estimate_threshold(table, topt, mix_seed(opt.seed, 1));
        report.r = report.threshold.r_star;
        report.r_from_threshold = true;
    }

    PSingleBackend backend = make_backend(table, opt.path, opt.repetition);
    ClauseCountModel model = ClauseCountModel::poisson(report.r);
    OptimizeResult optimum = optimize_angles(backend, opt.n_ref, model, opt.grid);
    report.angles = optimum.angles;
    report.probability_at_ref = optimum.probability;

    report.quantum_curve = success_curve(backend, model, report.angles, opt.n_values);
    if (report.quantum_curve.size() >= 3)
        report.quantum_fit = fit_exponent(curve_points(report.quantum_curve));

    if (!opt.classical_n_values.empty()) {
        for (int n : opt.classical_n_values) {
            std::uint64_t seed = mix_seed(mix_seed(opt.seed, 2), static_cast<std::uint64_t>(n));
            double median = classical_median_runtime(table, n, report.r, opt.classical_instances,
                                                     opt.solver, seed, opt.repetition);
            report.classical_medians.emplace_back(n, median);
        }
        bool positive = report.classical_medians.size() >= 3;
        for (const auto& [n, median] : report.classical_medians) positive &= median > 0.0;
        if (positive) report.classical_fit = fit_exponent(report.classical_medians);
    }
    return report;
}

/// Runs the pipeline over several tables; per-table failures are recorded in
/// the report and the sweep continues.
inline std::vector<TableReport> sweep(const std::vector<TruthTable>& tables,
                                      const SweepOptions& opt) {
    std::vector<TableReport> reports;
    reports.reserve(tables.size());
    for (const TruthTable& table : tables) {
        TableReport report;
        try {
            report = run_table_pipeline(table, opt);
        } catch (const std::exception& e) {
            report.table = table;
            report.error = e.what();
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace cspqaoa
