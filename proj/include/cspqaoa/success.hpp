#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "cspqaoa/angles.hpp"
#include "cspqaoa/clause_polynomial.hpp"
#include "cspqaoa/combinatorics.hpp"
#include "cspqaoa/common.hpp"
#include "cspqaoa/ddouble.hpp"

namespace cspqaoa {

/// How the clause count of a random instance is distributed.
struct ClauseCountModel {
    ClauseCountMode mode = ClauseCountMode::kPoisson;
    double r = 0.0;      // clause density, mean count r * n
    std::int64_t m = 0;  // exact count

    static ClauseCountModel poisson(double r) {
        if (!(r >= 0.0)) throw Error("clause count model needs r >= 0");
        return {ClauseCountMode::kPoisson, r, 0};
    }
    static ClauseCountModel fixed(std::int64_t m) {
        if (m < 0) throw Error("clause count model needs m >= 0");
        return {ClauseCountMode::kFixed, 0.0, m};
    }
};

struct SuccessQuery {
    int n = 0;
    QaoaAngles angles;
    ClauseCountModel model;
};

enum class PrecisionMode { kDouble, kDoubleDouble };

inline const char* precision_mode_name(PrecisionMode mode) {
    return mode == PrecisionMode::kDouble ? "double" : "double-double";
}

/// Instance-averaged success probability with its numeric diagnostics.
struct SuccessResult {
    double probability = 0.0;    // clamped to [0, 1]
    double raw_real = 0.0;       // real part of the sum before clamping
    double imag_residual = 0.0;  // |imaginary part|, ideally ~0
    double err_bound = 0.0;      // estimated absolute error of raw_real
    PrecisionMode precision = PrecisionMode::kDouble;
    bool clamped = false;
    std::int64_t config_count = 0;
};

/// All weight-n reduced configurations with their exact log-multinomials,
/// enumerated once and shared across evaluations at the same n.
struct ConfigEnumeration {
    int n = 0;
    std::vector<ReducedConfigNumbers> configs;
    std::vector<double> log_mult;

    static ConfigEnumeration build(int n) {
        if (n < 1) throw Error("success probability needs n >= 1");
        ConfigEnumeration out;
        out.n = n;
        for (const auto& comp : CompositionRange(n, 4)) {
            ReducedConfigNumbers np;
            for (int c = 0; c < 4; ++c) np.cells[c] = comp[c];
            out.configs.push_back(np);
            out.log_mult.push_back(std::log(multinomial(n, comp).convert_to<double>()));
        }
        return out;
    }
};

/// P_single at every configuration of the enumeration for one gamma; reused
/// across beta values when scanning angle grids.
inline std::vector<std::complex<double>> p_single_row(const PSingleBackend& backend,
                                                      const ConfigEnumeration& en, double gamma) {
    std::vector<std::complex<double>> row;
    row.reserve(en.configs.size());
    for (const auto& np : en.configs) {
        Cx<double> p = p_single<double>(backend, np, gamma);
        row.emplace_back(p.re, p.im);
    }
    return row;
}

namespace sdetail {

inline constexpr double kUnitRound = 1.1102230246251565e-16;  // 2^-53
inline constexpr double kRelTarget = 1e-9;  // relative error demanded of the double path

struct Kahan {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

/// Multiplies (x, y) by i^q in place; exact (component swaps and negations).
inline void rotate_quarter(double& x, double& y, int q) {
    double tx = x;
    switch (q & 3) {
        case 0: break;
        case 1: x = -y; y = tx; break;
        case 2: x = -x; y = -y; break;
        case 3: x = y; y = -tx; break;
    }
}

template <class Real>
void rotate_quarter_cx(Cx<Real>& v, int q) {
    Real tx = v.re;
    switch (q & 3) {
        case 0: break;
        case 1: v.re = -v.im; v.im = tx; break;
        case 2: v.re = -v.re; v.im = -v.im; break;
        case 3: v.re = v.im; v.im = -tx; break;
    }
}

struct RawSum {
    double re = 0.0;
    double im = 0.0;
    double err_abs = 0.0;
};

/// Log-magnitude/phase assembly of the configuration sum in doubles.
/// Each term splits into an exactly-handled quarter-turn (the i-power of the
/// mixer cells) and a residual phase from the clause-count weight; magnitudes
/// are rescaled by the running maximum exponent and summed compensated.
inline RawSum assemble_double(const ConfigEnumeration& en,
                              const std::vector<std::complex<double>>& row, double beta,
                              const ClauseCountModel& model) {
    const std::size_t count = en.configs.size();
    const double ch = std::cos(0.5 * beta);
    const double sh = std::sin(0.5 * beta);
    const double sin_beta = 2.0 * sh * ch;
    const double log_cos2 = std::log(ch * ch);
    const double log_sin2 = std::log(sh * sh);
    const double log_sbh = std::log(std::abs(0.5 * sin_beta));
    const bool negative_sb = sin_beta < 0.0;
    const double rn = model.mode == ClauseCountMode::kPoisson ? model.r * en.n : 0.0;
    const double m = model.mode == ClauseCountMode::kFixed ? static_cast<double>(model.m) : 0.0;
    const double weight_scale = model.mode == ClauseCountMode::kPoisson ? rn : m;

    std::vector<double> log_mag(count);
    std::vector<double> psi(count);
    std::vector<double> err_weight(count);
    std::vector<int> quarter(count);
    double max_log = kLogZero;

    for (std::size_t i = 0; i < count; ++i) {
        const auto& cells = en.configs[i].cells;
        const std::int64_t a = cells[0], b = cells[1], c = cells[2], d = cells[3];
        double lm = en.log_mult[i];
        double abs_logs = lm;
        if (a != 0) { lm += a * log_cos2; abs_logs += std::abs(a * log_cos2); }
        if (c != 0) { lm += c * log_sin2; abs_logs += std::abs(c * log_sin2); }
        if (b + d != 0) { lm += (b + d) * log_sbh; abs_logs += std::abs((b + d) * log_sbh); }

        double phase = 0.0;
        const std::complex<double>& p = row[i];
        if (model.mode == ClauseCountMode::kPoisson) {
            if (rn != 0.0) {
                lm += rn * (p.real() - 1.0);
                phase = rn * p.imag();
            }
        } else if (model.m != 0) {
            double mod = std::abs(p);
            lm += mod == 0.0 ? kLogZero : m * std::log(mod);
            phase = m * std::arg(p);
        }

        log_mag[i] = lm;
        psi[i] = phase;
        err_weight[i] = abs_logs + std::abs(phase) + 64.0 * weight_scale + 8.0;
        quarter[i] = static_cast<int>(((d - b) % 4 + 4) % 4);
        if (negative_sb && ((b + d) & 1)) quarter[i] = (quarter[i] + 2) & 3;
        if (lm > max_log) max_log = lm;
    }

    RawSum out;
    if (max_log == kLogZero) return out;

    Kahan acc_re, acc_im;
    double err_sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double t = std::exp(log_mag[i] - max_log);
        if (t == 0.0) continue;
        double x = t * std::cos(psi[i]);
        double y = t * std::sin(psi[i]);
        rotate_quarter(x, y, quarter[i]);
        acc_re.add(x);
        acc_im.add(y);
        err_sum += t * err_weight[i];
    }
    double scale = std::exp(max_log);
    out.re = scale * acc_re.sum;
    out.im = scale * acc_im.sum;
    out.err_abs = scale * kUnitRound * err_sum;
    return out;
}

/// Linear-domain assembly at double-double precision: exact multinomials,
/// signed mixer magnitude with an exact quarter-turn, weight via dd
/// exponentials or integer powers.
inline RawSum assemble_ddouble(const PSingleBackend& backend, const ConfigEnumeration& en,
                               const SuccessQuery& q) {
    const DDouble beta_half = DDouble(q.angles.beta) * 0.5;
    DDouble sh, ch;
    dd_sincos(beta_half, sh, ch);
    const DDouble cos2 = ch * ch;
    const DDouble sin2 = sh * sh;
    const DDouble sbh = sh * ch;  // sin(beta)/2, sign kept
    const bool poisson = q.model.mode == ClauseCountMode::kPoisson;
    const DDouble rn = DDouble(q.model.r) * dd_from_i64(q.n);

    Cx<DDouble> acc(DDouble(0.0), DDouble(0.0));
    DDouble abs_acc(0.0);
    std::vector<std::int64_t> parts(4);
    for (std::size_t i = 0; i < en.configs.size(); ++i) {
        const auto& cells = en.configs[i].cells;
        for (int c = 0; c < 4; ++c) parts[c] = cells[c];
        DDouble mag = dd_from_bigint(multinomial(en.n, parts));
        if (cells[0] != 0) mag *= dd_pow_int(cos2, cells[0]);
        if (cells[2] != 0) mag *= dd_pow_int(sin2, cells[2]);
        if (cells[1] + cells[3] != 0) mag *= dd_pow_int(sbh, cells[1] + cells[3]);
        Cx<DDouble> term(mag, DDouble(0.0));
        rotate_quarter_cx(term, static_cast<int>(((cells[3] - cells[1]) % 4 + 4) % 4));

        Cx<DDouble> p = p_single<DDouble>(backend, en.configs[i], q.angles.gamma);
        Cx<DDouble> weight(DDouble(1.0), DDouble(0.0));
        if (poisson) {
            if (!(q.model.r == 0.0)) {
                DDouble wre = rn * (p.re - DDouble(1.0));
                DDouble wim = rn * p.im;
                DDouble expo = dd_exp(wre);
                DDouble ws, wc;
                dd_sincos(wim, ws, wc);
                weight = Cx<DDouble>(expo * wc, expo * ws);
            }
        } else {
            weight = cx_pow_int(p, q.model.m);
        }
        term = term * weight;
        acc = acc + term;
        abs_acc += dd_abs(term.re) + dd_abs(term.im);
    }

    RawSum out;
    out.re = acc.re.hi + acc.re.lo;
    out.im = acc.im.hi + acc.im.lo;
    out.err_abs = (abs_acc.hi + std::abs(out.re) + std::abs(out.im)) *
                  (64.0 * q.n + 512.0) * 6.2e-31;  // ~2^-100 per-operation tally
    return out;
}

inline SuccessResult finalize(const RawSum& raw, PrecisionMode precision, std::int64_t count) {
    SuccessResult res;
    res.raw_real = raw.re;
    res.imag_residual = std::abs(raw.im);
    res.err_bound = raw.err_abs;
    res.precision = precision;
    res.config_count = count;
    if (res.imag_residual > 1e-9 * std::max(1.0, std::abs(raw.re)))
        throw NumericError(strf("success probability has imaginary residual %.3e", raw.im));

    double p = raw.re;
    double slack = std::max(raw.err_abs, 1e-12);
    if (p < 0.0) {
        if (-p > slack)
            throw NumericError(strf("success probability %.6e below zero beyond error bound", p));
        p = 0.0;
        res.clamped = true;
    } else if (p > 1.0) {
        if (p - 1.0 > std::max(slack, 1e-9))
            throw NumericError(strf("success probability %.6e above one beyond error bound", p));
        p = 1.0;
        res.clamped = true;
    }
    res.probability = p;
    return res;
}

inline bool double_pass_acceptable(const RawSum& raw) {
    if (!std::isfinite(raw.re) || !std::isfinite(raw.im)) return false;
    if (raw.err_abs > kRelTarget * std::abs(raw.re)) return false;
    if (std::abs(raw.im) > 1e-9 * std::max(1.0, std::abs(raw.re))) return false;
    return true;
}

}  // namespace sdetail

/// Fast double-precision evaluation from a cached P_single row (fixed gamma).
/// No precision fallback: used for angle scans whose winner is re-evaluated
/// strictly afterwards.
inline SuccessResult success_from_row(const ConfigEnumeration& en,
                                      const std::vector<std::complex<double>>& row, double beta,
                                      const ClauseCountModel& model) {
    if (row.size() != en.configs.size()) throw Error("success_from_row: row size mismatch");
    sdetail::RawSum raw = sdetail::assemble_double(en, row, beta, model);
    return sdetail::finalize(raw, PrecisionMode::kDouble, static_cast<std::int64_t>(row.size()));
}

/// Instance-averaged depth-1 success probability:
///   sum over weight-n configurations n' of
///     multinomial(n, n') (cos^2(beta/2))^{n'00} (-i sin(beta)/2)^{n'01}
///     (sin^2(beta/2))^{n'10} (+i sin(beta)/2)^{n'11} W(n'),
/// with W = exp(r n (P_single - 1)) or P_single^m.  The double path tracks a
/// rounding-error bound and the evaluation is redone in double-double
/// arithmetic when that bound (or the imaginary residual) is too large.
inline SuccessResult success_probability(const PSingleBackend& backend,
                                         const ConfigEnumeration& en, const SuccessQuery& q) {
    if (en.n != q.n) throw Error("success_probability: enumeration built for a different n");
    auto row = p_single_row(backend, en, q.angles.gamma);
    sdetail::RawSum raw = sdetail::assemble_double(en, row, q.angles.beta, q.model);
    if (sdetail::double_pass_acceptable(raw))
        return sdetail::finalize(raw, PrecisionMode::kDouble,
                                 static_cast<std::int64_t>(en.configs.size()));
    sdetail::RawSum precise = sdetail::assemble_ddouble(backend, en, q);
    return sdetail::finalize(precise, PrecisionMode::kDoubleDouble,
                             static_cast<std::int64_t>(en.configs.size()));
}

inline SuccessResult success_probability(const PSingleBackend& backend, const SuccessQuery& q) {
    return success_probability(backend, ConfigEnumeration::build(q.n), q);
}

struct SuccessPoint {
    int n = 0;
    SuccessResult result;
};

/// Pointwise success probabilities over several sizes.
inline std::vector<SuccessPoint> success_curve(const PSingleBackend& backend,
                                               const ClauseCountModel& model, QaoaAngles angles,
                                               const std::vector<int>& n_values) {
    std::vector<SuccessPoint> out;
    out.reserve(n_values.size());
    for (int n : n_values) {
        SuccessQuery q{n, angles, model};
        out.push_back({n, success_probability(backend, q)});
    }
    return out;
}

}  // namespace cspqaoa
