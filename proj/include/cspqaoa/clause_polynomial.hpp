#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cspqaoa/combinatorics.hpp"
#include "cspqaoa/common.hpp"
#include "cspqaoa/ddouble.hpp"
#include "cspqaoa/instance.hpp"
#include "cspqaoa/truth_table.hpp"

namespace cspqaoa {

/// Reduced cell of a bit-triplet pattern s = 4*s1 + 2*s0 + sm1: complementary
/// patterns collapse to one of four cells indexed 2*(s0^s1) + (sm1^s1).
inline int reduced_cell_of_pattern(int s) {
    int s1 = (s >> 2) & 1;
    return ((((s >> 1) & 1) ^ s1) << 1) | ((s & 1) ^ s1);
}

/// Joint statistics of a truth table over all 8^k triplets of k-bit rows
/// (w1, w0, wm1): the count of triplets landing in each class keyed by the
/// joint table values y = (T(w1), T(w0), T(wm1)) and the per-position pattern
/// counts of the triplet.
struct ZTableEntry {
    int y = 0;  // 4*y1 + 2*y0 + ym1
    ConfigNumbers config;
    std::int64_t count = 0;

    bool operator==(const ZTableEntry&) const = default;
};

struct ZTable {
    int k = 0;
    std::vector<ZTableEntry> entries;

    std::int64_t total() const {
        std::int64_t sum = 0;
        for (const ZTableEntry& e : entries) sum += e.count;
        return sum;
    }
};

/// Classifies all 8^k row triplets of the table by joint value and pattern
/// counts.  Entries with zero count are omitted; order is deterministic.
inline ZTable build_ztable(const TruthTable& table) {
    int k = table.k;
    if (k > 7) throw Error("build_ztable needs k <= 7");

    std::map<std::pair<int, std::array<std::int64_t, 8>>, std::int64_t> acc;
    std::int64_t total = 1;
    for (int q = 0; q < k; ++q) total *= 8;
    std::vector<int> digit(k, 0);
    for (std::int64_t idx = 0; idx < total; ++idx) {
        std::size_t w1 = 0, w0 = 0, wm1 = 0;
        std::array<std::int64_t, 8> config{};
        for (int q = 0; q < k; ++q) {
            int s = digit[q];
            config[s] += 1;
            w1 |= static_cast<std::size_t>((s >> 2) & 1) << q;
            w0 |= static_cast<std::size_t>((s >> 1) & 1) << q;
            wm1 |= static_cast<std::size_t>(s & 1) << q;
        }
        int y = (int{table.values[w1]} << 2) | (int{table.values[w0]} << 1) | int{table.values[wm1]};
        acc[{y, config}] += 1;
        for (int q = 0; q < k && ++digit[q] == 8; ++q) digit[q] = 0;
    }

    ZTable z;
    z.k = k;
    z.entries.reserve(acc.size());
    for (const auto& [key, count] : acc) {
        ZTableEntry entry;
        entry.y = key.first;
        entry.config.n = key.second;
        entry.count = count;
        z.entries.push_back(entry);
    }
    return z;
}

/// One line per entry: y, the eight pattern counts, the count.
inline std::string dump_ztable(const ZTable& z) {
    std::ostringstream out;
    out << "k " << z.k << '\n';
    for (const ZTableEntry& e : z.entries) {
        out << e.y;
        for (std::int64_t c : e.config.n) out << ' ' << c;
        out << ' ' << e.count << '\n';
    }
    return out.str();
}

inline ZTable parse_ztable(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    ZTable z;
    if (!(in >> tag >> z.k) || tag != "k" || z.k < 1 || z.k > 7)
        throw Error("ztable text: bad header");
    ZTableEntry entry;
    while (in >> entry.y) {
        for (std::int64_t& c : entry.config.n)
            if (!(in >> c)) throw Error("ztable text: truncated entry");
        if (!(in >> entry.count)) throw Error("ztable text: truncated entry");
        z.entries.push_back(entry);
    }
    std::int64_t expected = 1;
    for (int q = 0; q < z.k; ++q) expected *= 8;
    if (z.total() != expected) throw Error("ztable text: counts do not cover the triplet space");
    return z;
}

namespace cpdetail {

/// A polynomial term after folding pattern counts into reduced-cell
/// exponents: coeff * prod_c ratio[c]^exp[c], tagged by the phase class
/// d = y1 - ym1 (only y0-true classes contribute).
struct FoldedTerm {
    std::array<std::int8_t, 4> exp{};
    std::int64_t coeff = 0;
};

using FoldedTerms = std::array<std::vector<FoldedTerm>, 3>;  // index d + 1

inline void fold_into(std::array<std::map<std::array<std::int8_t, 4>, std::int64_t>, 3>& acc,
                      int y, const std::array<std::int64_t, 8>& config, std::int64_t coeff) {
    if (((y >> 1) & 1) == 0) return;
    int d = ((y >> 2) & 1) - (y & 1);
    std::array<std::int8_t, 4> exp{};
    for (int s = 0; s < 8; ++s)
        exp[reduced_cell_of_pattern(s)] += static_cast<std::int8_t>(config[s]);
    acc[d + 1][exp] += coeff;
}

inline FoldedTerms flatten(
    const std::array<std::map<std::array<std::int8_t, 4>, std::int64_t>, 3>& acc) {
    FoldedTerms terms;
    for (int i = 0; i < 3; ++i) {
        terms[i].reserve(acc[i].size());
        for (const auto& [exp, coeff] : acc[i])
            if (coeff != 0) terms[i].push_back({exp, coeff});
    }
    return terms;
}

/// ratio[c]^e lookup tables for one evaluation point, e = 0..k.
template <class Real>
std::array<std::vector<Real>, 4> ratio_powers(const ReducedConfigNumbers& np, int k) {
    std::int64_t n = np.weight();
    if (n < 1) throw Error("p_single needs a configuration of weight >= 1");
    std::array<std::vector<Real>, 4> pw;
    Real inv_n = Real(1.0) / RealOps<Real>::from_i64(n);
    for (int c = 0; c < 4; ++c) {
        Real ratio = RealOps<Real>::from_i64(np.cells[c]) * inv_n;
        pw[c].resize(k + 1);
        pw[c][0] = Real(1.0);
        for (int e = 1; e <= k; ++e) pw[c][e] = pw[c][e - 1] * ratio;
    }
    return pw;
}

/// 2^-k * (A[0] + e^{-i gamma/2} A[+1] + e^{+i gamma/2} A[-1]) from the three
/// phase-class accumulators.
template <class Real>
Cx<Real> assemble(const std::array<Real, 3>& a, int k, double gamma) {
    Real s, c;
    RealOps<Real>::sincos(Real(0.5 * gamma), s, c);
    Cx<Real> sum(a[1] + c * (a[2] + a[0]), s * (a[0] - a[2]));
    return sum * Real(std::ldexp(1.0, -k));
}

template <class Real>
std::array<Real, 3> accumulate(const FoldedTerms& terms,
                               const std::array<std::vector<Real>, 4>& pw) {
    std::array<Real, 3> a{Real(0.0), Real(0.0), Real(0.0)};
    for (int i = 0; i < 3; ++i)
        for (const FoldedTerm& t : terms[i]) {
            Real prod = RealOps<Real>::from_i64(t.coeff);
            for (int c = 0; c < 4; ++c)
                if (t.exp[c] != 0) prod = prod * pw[c][t.exp[c]];
            a[i] = a[i] + prod;
        }
    return a;
}

}  // namespace cpdetail

/// Evaluator for arbitrary truth tables (with-repetition clause
/// distribution), precomputed from a ZTable.
struct GeneralPath {
    int k = 0;
    cpdetail::FoldedTerms terms;

    static GeneralPath build(const ZTable& z) {
        std::array<std::map<std::array<std::int8_t, 4>, std::int64_t>, 3> acc;
        for (const ZTableEntry& e : z.entries) cpdetail::fold_into(acc, e.y, e.config.n, e.count);
        GeneralPath path;
        path.k = z.k;
        path.terms = cpdetail::flatten(acc);
        return path;
    }
};

/// Single-clause polynomial through the general path:
/// 2^-k sum_{y,config} |Z(y,config)| prod_s (n'_{cell(s)}/n)^{config_s}
///     * exp(-i gamma (y1 - ym1) / 2) * y0.
template <class Real>
Cx<Real> p_single_general(const GeneralPath& path, const ReducedConfigNumbers& np, double gamma) {
    auto pw = cpdetail::ratio_powers<Real>(np, path.k);
    return cpdetail::assemble(cpdetail::accumulate(path.terms, pw), path.k, gamma);
}

/// Internal variant taking a full 8-cell configuration; its value depends
/// only on the reduction (each factor reads n_s + n_sbar), which the tests
/// verify directly.
template <class Real>
Cx<Real> p_single_general_config(const ZTable& z, const ConfigNumbers& full, double gamma) {
    std::int64_t n = full.weight();
    if (n < 1) throw Error("p_single needs a configuration of weight >= 1");
    Real inv_n = Real(1.0) / RealOps<Real>::from_i64(n);
    std::array<Real, 3> a{Real(0.0), Real(0.0), Real(0.0)};
    for (const ZTableEntry& e : z.entries) {
        if (((e.y >> 1) & 1) == 0) continue;
        int d = ((e.y >> 2) & 1) - (e.y & 1);
        Real prod = RealOps<Real>::from_i64(e.count);
        for (int s = 0; s < 8; ++s)
            if (e.config.n[s] != 0)
                prod = prod * RealOps<Real>::pow_int(
                                  RealOps<Real>::from_i64(full.n[s] + full.n[7 - s]) * inv_n,
                                  e.config.n[s]);
        a[d + 1] = a[d + 1] + prod;
    }
    return cpdetail::assemble(a, z.k, gamma);
}

/// Evaluator for Hamming-weight tables (with-repetition distribution): the
/// explicit composition sum, folded to reduced-cell exponents at build time.
struct HammingPath {
    int k = 0;
    cpdetail::FoldedTerms terms;

    static HammingPath build(const HammingSpec& spec) {
        int k = spec.k;
        std::array<std::map<std::array<std::int8_t, 4>, std::int64_t>, 3> acc;
        for (const auto& comp : CompositionRange(k, 8)) {
            int h1 = static_cast<int>(comp[4] + comp[5] + comp[6] + comp[7]);
            int h0 = static_cast<int>(comp[2] + comp[3] + comp[6] + comp[7]);
            int hm1 = static_cast<int>(comp[1] + comp[3] + comp[5] + comp[7]);
            int y = (int{spec.weight_values[h1]} << 2) | (int{spec.weight_values[h0]} << 1) |
                    int{spec.weight_values[hm1]};
            std::array<std::int64_t, 8> config;
            std::copy(comp.begin(), comp.end(), config.begin());
            std::int64_t mult = multinomial(k, comp).convert_to<std::int64_t>();
            cpdetail::fold_into(acc, y, config, mult);
        }
        HammingPath path;
        path.k = k;
        path.terms = cpdetail::flatten(acc);
        return path;
    }
};

/// Single-clause polynomial through the Hamming-weight explicit sum:
/// 2^-k sum over compositions of k into the 8 patterns of
/// multinomial * prod_s (n'_{cell(s)}/n)^{k_s}
///     * exp(-i gamma (T(h1) - T(hm1)) / 2) * T(h0),
/// where h_t counts positions whose pattern has bit t set.
template <class Real>
Cx<Real> p_single_hamming(const HammingPath& path, const ReducedConfigNumbers& np, double gamma) {
    auto pw = cpdetail::ratio_powers<Real>(np, path.k);
    return cpdetail::assemble(cpdetail::accumulate(path.terms, pw), path.k, gamma);
}

enum class ExpectationConvention {
    kSatisfaction,  // probabilities that assignments satisfy the clause
    kViolation,     // probabilities that assignments violate the clause
};

/// Single, pairwise, and triple clause expectations of the three assignments
/// (z1, z0, zm1) at one reduced configuration.  By negation symmetry the
/// single-assignment value is shared; pairs are distinguished by which cells
/// make the two assignments agree.
template <class Real>
struct ClauseExpectations {
    ExpectationConvention convention = ExpectationConvention::kViolation;
    Real p1{};      // one assignment
    Real p2_10{};   // pair (z1, z0): agree on cells 00 and 01
    Real p2_1m1{};  // pair (z1, zm1): agree on cells 00 and 10
    Real p2_0m1{};  // pair (z0, zm1): agree on cells 00 and 11
    Real p3{};      // all three assignments
};

/// Inclusion-exclusion conversion of satisfaction expectations to violation
/// expectations (joint "none satisfies" probabilities).
template <class Real>
ClauseExpectations<Real> to_violation(const ClauseExpectations<Real>& e) {
    if (e.convention == ExpectationConvention::kViolation) return e;
    ClauseExpectations<Real> v;
    v.convention = ExpectationConvention::kViolation;
    Real one(1.0);
    Real two_p1 = e.p1 + e.p1;
    v.p1 = one - e.p1;
    v.p2_10 = one - two_p1 + e.p2_10;
    v.p2_1m1 = one - two_p1 + e.p2_1m1;
    v.p2_0m1 = one - two_p1 + e.p2_0m1;
    v.p3 = one - (two_p1 + e.p1) + e.p2_10 + e.p2_1m1 + e.p2_0m1 - e.p3;
    return v;
}

/// Exactly-one-true clause expectations (satisfaction convention) for the
/// distribution drawing k distinct variables; exact binomial-count ratios.
template <class Real>
ClauseExpectations<Real> clause_expectations_1in_k(int k, const ReducedConfigNumbers& np) {
    std::int64_t n = np.weight();
    if (k > n) throw Error("1-in-k expectations need k <= n (distinct variables)");
    const std::int64_t c00 = np.cells[0], c01 = np.cells[1], c10 = np.cells[2], c11 = np.cells[3];
    BigInt den = binomial(n, k) << k;

    auto pair_numerator = [&](std::int64_t eq) {
        std::int64_t df = n - eq;
        return k * binomial(eq, k) + 2 * binomial(eq, k - 2) * binomial(df, 2);
    };
    BigInt triple = k * binomial(c00, k) +
                    2 * binomial(c00, k - 2) *
                        (binomial(c01, 2) + binomial(c10, 2) + binomial(c11, 2)) +
                    c01 * c10 * c11 * binomial(c00, k - 3);

    ClauseExpectations<Real> e;
    e.convention = ExpectationConvention::kSatisfaction;
    Real inv_den = Real(1.0) / RealOps<Real>::from_bigint(den);
    e.p1 = RealOps<Real>::from_bigint(k * binomial(n, k)) * inv_den;
    e.p2_10 = RealOps<Real>::from_bigint(pair_numerator(c00 + c01)) * inv_den;
    e.p2_1m1 = RealOps<Real>::from_bigint(pair_numerator(c00 + c10)) * inv_den;
    e.p2_0m1 = RealOps<Real>::from_bigint(pair_numerator(c00 + c11)) * inv_den;
    e.p3 = RealOps<Real>::from_bigint(triple) * inv_den;
    return e;
}

/// Not-all-equal clause expectations (violation convention), for either
/// clause distribution.  A clause is violated exactly when its literal word
/// is constant, giving binomial ratios (distinct variables) or k-th power
/// ratios (independent variables).
template <class Real>
ClauseExpectations<Real> clause_expectations_nae(int k, const ReducedConfigNumbers& np,
                                                 RepetitionMode repetition) {
    std::int64_t n = np.weight();
    ClauseExpectations<Real> e;
    e.convention = ExpectationConvention::kViolation;
    Real scale = Real(std::ldexp(2.0, -k));  // 2 / 2^k
    e.p1 = scale;

    if (repetition == RepetitionMode::kWithoutRepetition) {
        if (k > n) throw Error("NAE expectations need k <= n for distinct variables");
        Real inv_choose = Real(1.0) / RealOps<Real>::from_bigint(binomial(n, k));
        auto pair_value = [&](std::int64_t eq) {
            return RealOps<Real>::from_bigint(binomial(eq, k) + binomial(n - eq, k)) * inv_choose *
                   scale;
        };
        e.p2_10 = pair_value(np.cells[0] + np.cells[1]);
        e.p2_1m1 = pair_value(np.cells[0] + np.cells[2]);
        e.p2_0m1 = pair_value(np.cells[0] + np.cells[3]);
        BigInt cells = 0;
        for (std::int64_t c : np.cells) cells += binomial(c, k);
        e.p3 = RealOps<Real>::from_bigint(cells) * inv_choose * scale;
    } else {
        Real inv_n = Real(1.0) / RealOps<Real>::from_i64(n);
        auto ratio_pow = [&](std::int64_t part) {
            return RealOps<Real>::pow_int(RealOps<Real>::from_i64(part) * inv_n, k);
        };
        auto pair_value = [&](std::int64_t eq) {
            return (ratio_pow(eq) + ratio_pow(n - eq)) * scale;
        };
        e.p2_10 = pair_value(np.cells[0] + np.cells[1]);
        e.p2_1m1 = pair_value(np.cells[0] + np.cells[2]);
        e.p2_0m1 = pair_value(np.cells[0] + np.cells[3]);
        Real cells(0.0);
        for (std::int64_t c : np.cells) cells = cells + ratio_pow(c);
        e.p3 = cells * scale;
    }
    return e;
}

/// Assembles the single-clause polynomial from violation expectations via the
/// Boolean expansion of exp(-i gamma (y1 - ym1) / 2) y0 in violation
/// indicators u = 1 - y:
///   1 + (e^{+i gamma/2}-1) u1 + (e^{-i gamma/2}-1) um1 + 4 sin^2(gamma/4) u1 um1
///     - u0 - (e^{+i gamma/2}-1) u1 u0 - (e^{-i gamma/2}-1) um1 u0
///     - 4 sin^2(gamma/4) u1 u0 um1.
template <class Real>
Cx<Real> p_single_from_expectations(const ClauseExpectations<Real>& expectations, double gamma) {
    ClauseExpectations<Real> v = to_violation(expectations);
    Real s, c;
    RealOps<Real>::sincos(Real(0.5 * gamma), s, c);
    Real cm1 = c - Real(1.0);
    Cx<Real> plus(cm1, s);         // e^{+i gamma/2} - 1
    Cx<Real> minus(cm1, -s);       // e^{-i gamma/2} - 1
    Real four_sin2 = -(cm1 + cm1); // 4 sin^2(gamma/4) = 2 (1 - cos(gamma/2))

    Cx<Real> p(Real(1.0) - v.p1, Real(0.0));
    p = p + plus * (v.p1 - v.p2_10);
    p = p + minus * (v.p1 - v.p2_0m1);
    p.re = p.re + four_sin2 * (v.p2_1m1 - v.p3);
    return p;
}

enum class PolynomialPath { kAuto, kGeneral, kHamming, kOneInK, kNae };

inline const char* polynomial_path_name(PolynomialPath path) {
    switch (path) {
        case PolynomialPath::kAuto: return "auto";
        case PolynomialPath::kGeneral: return "general";
        case PolynomialPath::kHamming: return "hamming";
        case PolynomialPath::kOneInK: return "1in";
        case PolynomialPath::kNae: return "nae";
    }
    throw Error("unknown polynomial path");
}

inline PolynomialPath parse_polynomial_path(const std::string& name) {
    if (name == "auto") return PolynomialPath::kAuto;
    if (name == "general") return PolynomialPath::kGeneral;
    if (name == "hamming") return PolynomialPath::kHamming;
    if (name == "1in") return PolynomialPath::kOneInK;
    if (name == "nae") return PolynomialPath::kNae;
    throw Error("unknown polynomial path '" + name + "'");
}

/// A resolved single-clause-polynomial evaluator: the chosen path with its
/// precomputed data and the clause distribution it is valid for.
struct PSingleBackend {
    PolynomialPath path = PolynomialPath::kGeneral;
    RepetitionMode repetition = RepetitionMode::kWithRepetition;
    int k = 0;
    GeneralPath general;
    HammingPath hamming;
};

/// Resolves a path request against the table and clause distribution.  Auto
/// prefers the cheapest valid path; the general and Hamming paths cover only
/// the independent-variables distribution, the exactly-one-true analytic path
/// only the distinct-variables distribution.
inline PSingleBackend make_backend(const TruthTable& table, PolynomialPath requested,
                                   RepetitionMode repetition) {
    PSingleBackend backend;
    backend.repetition = repetition;
    backend.k = table.k;

    PolynomialPath path = requested;
    if (path == PolynomialPath::kAuto) {
        if (is_nae(table)) {
            path = PolynomialPath::kNae;
        } else if (repetition == RepetitionMode::kWithoutRepetition) {
            if (is_one_in_k(table))
                path = PolynomialPath::kOneInK;
            else
                throw Error(
                    "no closed-form path for this table under the distinct-variables "
                    "distribution (only exactly-one-true and not-all-equal tables)");
        } else if (try_hamming_spec(table).has_value()) {
            path = PolynomialPath::kHamming;
        } else {
            path = PolynomialPath::kGeneral;
        }
    }

    switch (path) {
        case PolynomialPath::kGeneral:
            if (repetition != RepetitionMode::kWithRepetition)
                throw Error("the general path requires the independent-variables distribution");
            backend.general = GeneralPath::build(build_ztable(table));
            break;
        case PolynomialPath::kHamming: {
            if (repetition != RepetitionMode::kWithRepetition)
                throw Error("the hamming path requires the independent-variables distribution");
            auto spec = try_hamming_spec(table);
            if (!spec) throw Error("the hamming path needs a weight-dependent table");
            backend.hamming = HammingPath::build(*spec);
            break;
        }
        case PolynomialPath::kOneInK:
            if (!is_one_in_k(table))
                throw Error("the 1in path needs the exactly-one-true table");
            if (repetition != RepetitionMode::kWithoutRepetition)
                throw Error(
                    "the 1in path covers the distinct-variables distribution; use the hamming "
                    "path for independent variables");
            break;
        case PolynomialPath::kNae:
            if (!is_nae(table)) throw Error("the nae path needs the not-all-equal table");
            break;
        case PolynomialPath::kAuto:
            throw Error("unreachable");
    }
    backend.path = path;
    return backend;
}

/// Single-clause polynomial P_single at one reduced configuration, through
/// whichever path the backend resolved.
template <class Real>
Cx<Real> p_single(const PSingleBackend& backend, const ReducedConfigNumbers& np, double gamma) {
    switch (backend.path) {
        case PolynomialPath::kGeneral:
            return p_single_general<Real>(backend.general, np, gamma);
        case PolynomialPath::kHamming:
            return p_single_hamming<Real>(backend.hamming, np, gamma);
        case PolynomialPath::kOneInK:
            return p_single_from_expectations(clause_expectations_1in_k<Real>(backend.k, np),
                                              gamma);
        case PolynomialPath::kNae:
            return p_single_from_expectations(
                clause_expectations_nae<Real>(backend.k, np, backend.repetition), gamma);
        case PolynomialPath::kAuto:
            break;
    }
    throw Error("backend path not resolved");
}

}  // namespace cspqaoa
