#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cspqaoa/common.hpp"
#include "cspqaoa/rng.hpp"
#include "cspqaoa/truth_table.hpp"

namespace cspqaoa {

/// One (variable index, negation) pair of a clause.
struct Literal {
    int var = 0;
    bool negated = false;

    bool operator==(const Literal&) const = default;
};

/// Ordered k-tuple of literals; repeated pairs are kept verbatim.
struct Clause {
    std::vector<Literal> literals;

    int k() const { return static_cast<int>(literals.size()); }

    bool operator==(const Clause&) const = default;
};

/// A CSP instance: n boolean variables, a shared truth table, and clauses.
struct CspInstance {
    int n = 0;
    TruthTable table;
    std::vector<Clause> clauses;

    int m() const { return static_cast<int>(clauses.size()); }

    void check() const {
        if (n < 1) throw Error("instance needs n >= 1");
        for (const Clause& clause : clauses) {
            if (clause.k() != table.k)
                throw Error(strf("clause arity %d does not match table k=%d", clause.k(), table.k));
            for (const Literal& lit : clause.literals)
                if (lit.var < 0 || lit.var >= n)
                    throw Error(strf("variable index %d out of range [0, %d)", lit.var, n));
        }
    }
};

/// Applies the table to the clause's literal values under `assignment`, whose
/// bit v is the value of variable v.
inline bool evaluate_clause(const TruthTable& table, const Clause& clause, std::uint64_t assignment,
                            int n) {
    std::size_t row = 0;
    for (int q = 0; q < clause.k(); ++q) {
        const Literal& lit = clause.literals[q];
        if (lit.var < 0 || lit.var >= n) throw Error("evaluate_clause: variable index out of range");
        bool value = ((assignment >> lit.var) & 1) != 0;
        if (lit.negated) value = !value;
        row |= std::size_t{value} << q;
    }
    return table.values[row];
}

/// Number of clauses of `inst` that assignment leaves unsatisfied.
inline int count_violations(const CspInstance& inst, std::uint64_t assignment) {
    int violated = 0;
    for (const Clause& clause : inst.clauses)
        violated += !evaluate_clause(inst.table, clause, assignment, inst.n);
    return violated;
}

enum class RepetitionMode {
    kWithRepetition,     // each clause position draws its variable independently
    kWithoutRepetition,  // each clause uses k distinct variables
};

enum class ClauseCountMode {
    kPoisson,  // m ~ Poisson(r n)
    kFixed,    // m given directly
};

/// How random instances are drawn.
struct SamplerConfig {
    RepetitionMode repetition = RepetitionMode::kWithRepetition;
    ClauseCountMode m_mode = ClauseCountMode::kPoisson;
    double r = 0.0;     // clause density for kPoisson
    std::int64_t m = 0; // clause count for kFixed
    std::uint64_t seed = 0;

    static SamplerConfig poisson(double r, std::uint64_t seed,
                                 RepetitionMode rep = RepetitionMode::kWithRepetition) {
        SamplerConfig cfg;
        cfg.repetition = rep;
        cfg.m_mode = ClauseCountMode::kPoisson;
        cfg.r = r;
        cfg.seed = seed;
        return cfg;
    }

    static SamplerConfig fixed(std::int64_t m, std::uint64_t seed,
                               RepetitionMode rep = RepetitionMode::kWithRepetition) {
        SamplerConfig cfg;
        cfg.repetition = rep;
        cfg.m_mode = ClauseCountMode::kFixed;
        cfg.m = m;
        cfg.seed = seed;
        return cfg;
    }
};

/// Draws one random instance on n variables.  Clause count comes from the
/// configured mode; every clause picks its variables either i.i.d. uniformly
/// or as a uniform k-subset in random order, and each negation is a fair coin.
inline CspInstance sample_instance(int n, const TruthTable& table, const SamplerConfig& cfg,
                                   Rng& rng) {
    if (n < 1) throw Error("sample_instance needs n >= 1");
    if (cfg.repetition == RepetitionMode::kWithoutRepetition && table.k > n)
        throw Error(strf("without-repetition sampling needs k <= n, got k=%d n=%d", table.k, n));
    if (cfg.m_mode == ClauseCountMode::kPoisson && !(cfg.r >= 0.0))
        throw Error("sample_instance needs r >= 0");
    if (cfg.m_mode == ClauseCountMode::kFixed && cfg.m < 0)
        throw Error("sample_instance needs m >= 0");

    std::int64_t m =
        cfg.m_mode == ClauseCountMode::kPoisson ? rng.next_poisson(cfg.r * n) : cfg.m;

    CspInstance inst;
    inst.n = n;
    inst.table = table;
    inst.clauses.reserve(static_cast<std::size_t>(m));
    for (std::int64_t j = 0; j < m; ++j) {
        Clause clause;
        clause.literals.resize(table.k);
        if (cfg.repetition == RepetitionMode::kWithRepetition) {
            for (int q = 0; q < table.k; ++q)
                clause.literals[q].var = static_cast<int>(rng.next_below(n));
        } else {
            auto subset = rng.next_subset(n, table.k);
            for (int q = 0; q < table.k; ++q)
                clause.literals[q].var = static_cast<int>(subset[q]);
        }
        for (int q = 0; q < table.k; ++q) clause.literals[q].negated = rng.next_u64() & 1;
        inst.clauses.push_back(std::move(clause));
    }
    return inst;
}

/// Writes the instance in the line-based text format: `n k` header, then one
/// clause per line of signed 1-based variable numbers (negative = negated).
inline void write_instance(std::ostream& out, const CspInstance& inst) {
    out << inst.n << ' ' << inst.table.k << '\n';
    for (const Clause& clause : inst.clauses) {
        for (int q = 0; q < clause.k(); ++q) {
            const Literal& lit = clause.literals[q];
            if (q > 0) out << ' ';
            out << (lit.negated ? -(lit.var + 1) : lit.var + 1);
        }
        out << '\n';
    }
}

inline std::string instance_to_string(const CspInstance& inst) {
    std::ostringstream out;
    write_instance(out, inst);
    return out.str();
}

/// Parses the text format written by write_instance.  The truth table is not
/// part of the format and must be supplied.
inline CspInstance read_instance(std::istream& in, const TruthTable& table) {
    CspInstance inst;
    inst.table = table;
    std::string line;
    if (!std::getline(in, line)) throw Error("instance text: missing header");
    {
        std::istringstream head(line);
        int k = 0;
        if (!(head >> inst.n >> k)) throw Error("instance text: bad header '" + line + "'");
        if (k != table.k)
            throw Error(strf("instance text: header k=%d does not match table k=%d", k, table.k));
        std::string extra;
        if (head >> extra) throw Error("instance text: trailing header token '" + extra + "'");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        Clause clause;
        long long signed_var = 0;
        while (row >> signed_var) {
            if (signed_var == 0) throw Error("instance text: literal 0 is invalid");
            Literal lit;
            lit.negated = signed_var < 0;
            lit.var = static_cast<int>((signed_var < 0 ? -signed_var : signed_var) - 1);
            clause.literals.push_back(lit);
        }
        if (!row.eof()) throw Error("instance text: bad clause line '" + line + "'");
        if (clause.k() != table.k)
            throw Error(strf("instance text: clause arity %d does not match k=%d", clause.k(),
                             table.k));
        inst.clauses.push_back(std::move(clause));
    }
    inst.check();
    return inst;
}

inline CspInstance instance_from_string(const std::string& text, const TruthTable& table) {
    std::istringstream in(text);
    return read_instance(in, table);
}

}  // namespace cspqaoa
