#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "cspqaoa/angles.hpp"
#include "cspqaoa/common.hpp"
#include "cspqaoa/instance.hpp"
#include "cspqaoa/rng.hpp"

namespace cspqaoa {

inline constexpr int kMaxSimQubits = 26;

/// Dense n-qubit state; amplitude index encodes variable 0 as the LSB.
struct StateVector {
    int n = 0;
    std::vector<std::complex<double>> amplitudes;

    double norm_squared() const {
        double total = 0.0;
        for (const auto& a : amplitudes) total += std::norm(a);
        return total;
    }
};

namespace odetail {

inline void check_norm(const StateVector& state, const char* stage) {
    if (std::abs(state.norm_squared() - 1.0) > 1e-10)
        throw NumericError(strf("statevector norm drifted after %s", stage));
}

}  // namespace odetail

/// Number of violated clauses for every assignment, indexed by assignment.
inline std::vector<std::int32_t> violation_table(const CspInstance& inst) {
    if (inst.n > kMaxSimQubits)
        throw Error(strf("violation table needs n <= %d, got %d", kMaxSimQubits, inst.n));
    std::vector<std::int32_t> violations(std::size_t{1} << inst.n, 0);
    for (const Clause& clause : inst.clauses) {
        std::size_t rows = std::size_t{1} << clause.k();
        std::vector<bool> violated_row(rows);
        for (std::size_t row = 0; row < rows; ++row) violated_row[row] = !inst.table.values[row];
        for (std::uint64_t x = 0; x < violations.size(); ++x) {
            std::size_t row = 0;
            for (int q = 0; q < clause.k(); ++q) {
                const Literal& lit = clause.literals[q];
                bool value = (((x >> lit.var) & 1) != 0) != lit.negated;
                row |= std::size_t{value} << q;
            }
            violations[x] += violated_row[row];
        }
    }
    return violations;
}

/// Depth-1 state from a precomputed violation table: uniform superposition,
/// phase exp(-i gamma C(x) / 2), then the single-qubit mixer exp(-i beta X / 2)
/// on every qubit.
inline StateVector qaoa_state_from_violations(int n, const std::vector<std::int32_t>& violations,
                                              QaoaAngles angles) {
    StateVector state;
    state.n = n;
    std::size_t dim = std::size_t{1} << n;
    if (violations.size() != dim) throw Error("violation table size does not match n");

    double amp0 = std::pow(2.0, -0.5 * n);
    state.amplitudes.resize(dim);
    std::int32_t max_c = 0;
    for (std::int32_t c : violations) max_c = std::max(max_c, c);
    std::vector<std::complex<double>> phase(static_cast<std::size_t>(max_c) + 1);
    for (std::int32_t c = 0; c <= max_c; ++c)
        phase[c] = std::polar(amp0, -0.5 * angles.gamma * c);
    for (std::size_t x = 0; x < dim; ++x) state.amplitudes[x] = phase[violations[x]];
    odetail::check_norm(state, "phase separator");

    const std::complex<double> diag(std::cos(0.5 * angles.beta), 0.0);
    const std::complex<double> off(0.0, -std::sin(0.5 * angles.beta));
    for (int q = 0; q < n; ++q) {
        std::size_t bit = std::size_t{1} << q;
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & bit) continue;
            std::complex<double> a0 = state.amplitudes[base];
            std::complex<double> a1 = state.amplitudes[base | bit];
            state.amplitudes[base] = diag * a0 + off * a1;
            state.amplitudes[base | bit] = off * a0 + diag * a1;
        }
    }
    odetail::check_norm(state, "mixer");
    return state;
}

inline StateVector qaoa_state(const CspInstance& inst, QaoaAngles angles) {
    return qaoa_state_from_violations(inst.n, violation_table(inst), angles);
}

/// Probability that measuring the depth-1 state yields an assignment
/// satisfying every clause.
inline double instance_success(const CspInstance& inst, QaoaAngles angles) {
    std::vector<std::int32_t> violations = violation_table(inst);
    StateVector state = qaoa_state_from_violations(inst.n, violations, angles);
    double total = 0.0;
    for (std::size_t x = 0; x < state.amplitudes.size(); ++x)
        if (violations[x] == 0) total += std::norm(state.amplitudes[x]);
    return total;
}

/// Whether any of the 2^n assignments satisfies every clause.
inline bool brute_force_satisfiable(const CspInstance& inst) {
    if (inst.n > kMaxSimQubits)
        throw Error(strf("brute-force satisfiability needs n <= %d, got %d", kMaxSimQubits,
                         inst.n));
    std::uint64_t dim = std::uint64_t{1} << inst.n;
    for (std::uint64_t x = 0; x < dim; ++x) {
        bool ok = true;
        for (const Clause& clause : inst.clauses)
            if (!evaluate_clause(inst.table, clause, x, inst.n)) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

/// Sample mean with its standard error.
struct MeanStdErr {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo average of instance_success over several angle pairs sharing
/// the same instance stream.  Trial t draws its instance from a generator
/// seeded by mix_seed(seed, t), so results do not depend on batching.
inline std::vector<MeanStdErr> mc_average_success_multi(int n, const TruthTable& table,
                                                        const SamplerConfig& cfg,
                                                        const std::vector<QaoaAngles>& angle_sets,
                                                        std::int64_t n_instances,
                                                        std::uint64_t seed) {
    if (n_instances < 1) throw Error("mc_average_success needs n_instances >= 1");
    std::vector<double> sum(angle_sets.size(), 0.0);
    std::vector<double> sum_sq(angle_sets.size(), 0.0);
    for (std::int64_t trial = 0; trial < n_instances; ++trial) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(trial)));
        CspInstance inst = sample_instance(n, table, cfg, rng);
        std::vector<std::int32_t> violations = violation_table(inst);
        for (std::size_t a = 0; a < angle_sets.size(); ++a) {
            StateVector state = qaoa_state_from_violations(n, violations, angle_sets[a]);
            double p = 0.0;
            for (std::size_t x = 0; x < state.amplitudes.size(); ++x)
                if (violations[x] == 0) p += std::norm(state.amplitudes[x]);
            sum[a] += p;
            sum_sq[a] += p * p;
        }
    }
    std::vector<MeanStdErr> out(angle_sets.size());
    for (std::size_t a = 0; a < angle_sets.size(); ++a) {
        double mean = sum[a] / n_instances;
        double variance = 0.0;
        if (n_instances > 1)
            variance = std::max(0.0, (sum_sq[a] - n_instances * mean * mean) / (n_instances - 1));
        out[a] = {mean, std::sqrt(variance / n_instances)};
    }
    return out;
}

inline MeanStdErr mc_average_success(int n, const TruthTable& table, const SamplerConfig& cfg,
                                     QaoaAngles angles, std::int64_t n_instances,
                                     std::uint64_t seed) {
    return mc_average_success_multi(n, table, cfg, {angles}, n_instances, seed)[0];
}

namespace odetail {

template <class Visit>
void for_each_var_tuple(int n, int k, bool distinct, std::vector<int>& vars, const Visit& visit) {
    if (static_cast<int>(vars.size()) == k) {
        visit(vars);
        return;
    }
    for (int v = 0; v < n; ++v) {
        if (distinct) {
            bool used = false;
            for (int w : vars) used |= (w == v);
            if (used) continue;
        }
        vars.push_back(v);
        for_each_var_tuple(n, k, distinct, vars, visit);
        vars.pop_back();
    }
}

}  // namespace odetail

/// Exhaustive average over every clause of
///   exp(-i gamma/2 (sat(z1) - sat(zm1))) * sat(z0)
/// where sat(z) is the indicator that assignment z satisfies the clause.
/// Variable tuples are uniform with or without repetition; negations uniform.
inline std::complex<double> enumerate_clause_expectation(int n, const TruthTable& table,
                                                         std::uint64_t z1, std::uint64_t z0,
                                                         std::uint64_t zm1, double gamma,
                                                         RepetitionMode repetition) {
    int k = table.k;
    bool distinct = repetition == RepetitionMode::kWithoutRepetition;
    if (distinct && k > n) throw Error("enumerate_clause_expectation needs k <= n");
    double tuples = 1.0;
    for (int q = 0; q < k; ++q) tuples *= distinct ? n - q : n;
    double total = tuples * std::pow(2.0, k);
    if (total > 1e7) throw Error("enumerate_clause_expectation: clause space too large");

    const std::complex<double> up = std::polar(1.0, -0.5 * gamma);
    const std::complex<double> dn = std::polar(1.0, 0.5 * gamma);
    std::complex<double> sum = 0.0;
    std::vector<int> vars;
    vars.reserve(k);
    odetail::for_each_var_tuple(n, k, distinct, vars, [&](const std::vector<int>& tuple) {
        for (std::uint64_t negs = 0; negs < (1ULL << k); ++negs) {
            std::size_t row1 = 0;
            std::size_t row0 = 0;
            std::size_t rowm1 = 0;
            for (int q = 0; q < k; ++q) {
                std::uint64_t neg = (negs >> q) & 1;
                row1 |= static_cast<std::size_t>(((z1 >> tuple[q]) & 1) ^ neg) << q;
                row0 |= static_cast<std::size_t>(((z0 >> tuple[q]) & 1) ^ neg) << q;
                rowm1 |= static_cast<std::size_t>(((zm1 >> tuple[q]) & 1) ^ neg) << q;
            }
            if (!table.values[row0]) continue;
            int d = int{table.values[row1]} - int{table.values[rowm1]};
            if (d > 0)
                sum += up;
            else if (d < 0)
                sum += dn;
            else
                sum += 1.0;
        }
    });
    return sum / total;
}

/// Exact instance-averaged success probability for a fixed clause count,
/// obtained by enumerating every possible instance (with-repetition clause
/// distribution).  Feasible only for tiny n, k, m.
inline double exact_average_success(int n, const TruthTable& table, int m, QaoaAngles angles) {
    int k = table.k;
    double clause_space = std::pow(static_cast<double>(n), k) * std::pow(2.0, k);
    if (std::pow(clause_space, m) > 2e6)
        throw Error("exact_average_success: instance space too large");

    std::vector<Clause> clauses;
    std::vector<int> vars;
    vars.reserve(k);
    odetail::for_each_var_tuple(n, k, false, vars, [&](const std::vector<int>& tuple) {
        for (std::uint64_t negs = 0; negs < (1ULL << k); ++negs) {
            Clause clause;
            for (int q = 0; q < k; ++q)
                clause.literals.push_back({tuple[q], ((negs >> q) & 1) != 0});
            clauses.push_back(std::move(clause));
        }
    });

    CspInstance inst;
    inst.n = n;
    inst.table = table;
    inst.clauses.resize(m);
    double sum = 0.0;
    std::int64_t count = 0;
    std::vector<std::size_t> pick(m, 0);
    while (true) {
        for (int j = 0; j < m; ++j) inst.clauses[j] = clauses[pick[j]];
        sum += instance_success(inst, angles);
        ++count;
        int j = m - 1;
        while (j >= 0 && ++pick[j] == clauses.size()) pick[j--] = 0;
        if (j < 0) break;
    }
    return sum / count;
}

}  // namespace cspqaoa
