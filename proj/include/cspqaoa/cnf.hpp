#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <istream>
#include <limits>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "cspqaoa/common.hpp"
#include "cspqaoa/instance.hpp"
#include "cspqaoa/rng.hpp"

namespace cspqaoa {

/// CNF formula over n variables.  Clauses hold signed 1-based DIMACS literals:
/// +v means variable v-1 true, -v means variable v-1 false.  An empty clause
/// is unsatisfiable.
struct CnfFormula {
    int n = 0;
    std::vector<std::vector<int>> clauses;

    int m() const { return static_cast<int>(clauses.size()); }

    bool operator==(const CnfFormula&) const = default;
};

/// Whether `assignment` (bit v = value of variable v) satisfies every clause.
inline bool cnf_satisfied(const CnfFormula& f, std::uint64_t assignment) {
    for (const auto& clause : f.clauses) {
        bool sat = false;
        for (int lit : clause) {
            int var = (lit < 0 ? -lit : lit) - 1;
            bool value = ((assignment >> var) & 1) != 0;
            if (value == (lit > 0)) {
                sat = true;
                break;
            }
        }
        if (!sat) return false;
    }
    return true;
}

/// Converts a CSP instance to CNF: each clause contributes one disjunction
/// per false table row, forbidding the literal pattern that reads that row.
/// Duplicate literals from repeated variables are merged (first occurrence
/// kept), and disjunctions containing both x and not-x are dropped since the
/// row they forbid is unrealizable.
inline CnfFormula to_cnf(const CspInstance& inst) {
    inst.check();
    CnfFormula f;
    f.n = inst.n;
    int k = inst.table.k;
    for (const Clause& clause : inst.clauses) {
        for (std::size_t row = 0; row < inst.table.values.size(); ++row) {
            if (inst.table.values[row]) continue;
            std::vector<int> lits;
            lits.reserve(k);
            bool tautology = false;
            for (int q = 0; q < k && !tautology; ++q) {
                const Literal& lit = clause.literals[q];
                bool forbidden_value = (((row >> q) & 1) != 0) != lit.negated;
                int signed_lit = forbidden_value ? -(lit.var + 1) : lit.var + 1;
                bool duplicate = false;
                for (int prev : lits) {
                    if (prev == signed_lit) duplicate = true;
                    if (prev == -signed_lit) tautology = true;
                }
                if (!duplicate && !tautology) lits.push_back(signed_lit);
            }
            if (!tautology) f.clauses.push_back(std::move(lits));
        }
    }
    return f;
}

/// Renders the formula in DIMACS: `p cnf <n> <m>` header, then one
/// 0-terminated line of signed literals per clause.
inline std::string export_dimacs(const CnfFormula& f) {
    std::ostringstream out;
    out << "p cnf " << f.n << ' ' << f.clauses.size() << '\n';
    for (const auto& clause : f.clauses) {
        for (int lit : clause) out << lit << ' ';
        out << "0\n";
    }
    return out.str();
}

/// Parses DIMACS text.  Comment lines (`c ...`) and blank lines are skipped;
/// clauses may span lines and end at each 0.  The clause count must match the
/// header and every literal must be in range.
inline CnfFormula parse_dimacs(std::istream& in) {
    CnfFormula f;
    bool have_header = false;
    long long expect_m = 0;
    std::vector<int> current;
    bool clause_open = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'c') continue;
        if (!have_header) {
            std::istringstream head(line);
            std::string p, cnf;
            long long n = 0;
            if (!(head >> p >> cnf >> n >> expect_m) || p != "p" || cnf != "cnf" || n < 0 ||
                n > std::numeric_limits<int>::max() || expect_m < 0)
                throw Error("DIMACS: bad header '" + line + "'");
            std::string extra;
            if (head >> extra) throw Error("DIMACS: trailing header token '" + extra + "'");
            f.n = static_cast<int>(n);
            have_header = true;
            continue;
        }
        std::istringstream row(line);
        long long lit = 0;
        while (row >> lit) {
            if (lit == 0) {
                f.clauses.push_back(current);
                current.clear();
                clause_open = false;
                continue;
            }
            long long var = lit < 0 ? -lit : lit;
            if (var > f.n) throw Error(strf("DIMACS: literal %lld out of range for n=%d",
                                            lit, f.n));
            current.push_back(static_cast<int>(lit));
            clause_open = true;
        }
        if (!row.eof()) throw Error("DIMACS: bad token in line '" + line + "'");
    }
    if (!have_header) throw Error("DIMACS: missing header");
    if (clause_open) throw Error("DIMACS: unterminated clause");
    if (static_cast<long long>(f.clauses.size()) != expect_m)
        throw Error(strf("DIMACS: header declares %lld clauses, found %zu", expect_m,
                         f.clauses.size()));
    return f;
}

inline CnfFormula parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    return parse_dimacs(in);
}

/// Counters reported by a SAT solver run.
struct ClassicalRunStats {
    std::int64_t decisions = 0;
    std::int64_t propagations = 0;
    bool satisfiable = false;

    std::int64_t runtime_proxy() const { return decisions + propagations; }
};

namespace cnfdetail {

struct DpllSearch {
    const std::vector<std::vector<int>>* clauses = nullptr;
    std::vector<std::int8_t> value;  // 1-based; -1 unassigned, else 0/1
    ClassicalRunStats stats;

    bool literal_true(int lit) const {
        std::int8_t v = value[lit < 0 ? -lit : lit];
        return v >= 0 && (v == 1) == (lit > 0);
    }

    // Assigns forced literals until fixpoint.  Returns false on conflict.
    // Clauses that became unit are completed one literal at a time, each
    // counted as one propagation.
    bool propagate(std::vector<int>& trail) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& clause : *clauses) {
                bool sat = false;
                int open = 0;
                int open_lit = 0;
                for (int lit : clause) {
                    std::int8_t v = value[lit < 0 ? -lit : lit];
                    if (v < 0) {
                        ++open;
                        open_lit = lit;
                    } else if ((v == 1) == (lit > 0)) {
                        sat = true;
                        break;
                    }
                }
                if (sat) continue;
                if (open == 0) return false;
                if (open == 1) {
                    int var = open_lit < 0 ? -open_lit : open_lit;
                    value[var] = open_lit > 0 ? 1 : 0;
                    trail.push_back(var);
                    ++stats.propagations;
                    changed = true;
                }
            }
        }
        return true;
    }

    bool all_satisfied() const {
        for (const auto& clause : *clauses) {
            bool sat = false;
            for (int lit : clause)
                if (literal_true(lit)) {
                    sat = true;
                    break;
                }
            if (!sat) return false;
        }
        return true;
    }

    bool search() {
        std::vector<int> trail;
        if (!propagate(trail)) {
            for (int var : trail) value[var] = -1;
            return false;
        }
        if (all_satisfied()) return true;
        int branch_var = 0;
        for (int var = 1; var < static_cast<int>(value.size()); ++var)
            if (value[var] < 0) {
                branch_var = var;
                break;
            }
        for (std::int8_t attempt : {std::int8_t{1}, std::int8_t{0}}) {
            ++stats.decisions;
            value[branch_var] = attempt;
            if (search()) return true;
            value[branch_var] = -1;
        }
        for (int var : trail) value[var] = -1;
        return false;
    }
};

}  // namespace cnfdetail

/// DPLL with unit propagation; branches on the first unassigned variable,
/// true first.  Every branch attempt counts as one decision and every forced
/// assignment as one propagation.
inline ClassicalRunStats solve_dpll(const CnfFormula& f) {
    cnfdetail::DpllSearch search;
    search.clauses = &f.clauses;
    search.value.assign(static_cast<std::size_t>(f.n) + 1, -1);
    search.stats.satisfiable = search.search();
    return search.stats;
}

/// How to run a SAT solver: the built-in DPLL, or an external command given
/// a DIMACS file.  The external command template must contain `{file}`; the
/// pattern strings are ECMAScript regexes whose first capture group extracts
/// the decision and propagation counts from the solver output.
struct SolverSpec {
    enum class Kind { kInternal, kExternal };

    Kind kind = Kind::kInternal;
    std::string command;
    std::string decisions_pattern;
    std::string propagations_pattern;
    double time_limit_seconds = 0.0;  // 0 = no limit

    static SolverSpec internal() { return {}; }

    static SolverSpec external(std::string command, std::string decisions_pattern,
                               std::string propagations_pattern,
                               double time_limit_seconds = 0.0) {
        SolverSpec spec;
        spec.kind = Kind::kExternal;
        spec.command = std::move(command);
        spec.decisions_pattern = std::move(decisions_pattern);
        spec.propagations_pattern = std::move(propagations_pattern);
        spec.time_limit_seconds = time_limit_seconds;
        return spec;
    }
};

namespace cnfdetail {

struct TempFile {
    std::string path;

    ~TempFile() {
        if (!path.empty()) std::remove(path.c_str());
    }
};

inline std::string write_temp_dimacs(const std::string& text) {
    std::string templ = (std::filesystem::temp_directory_path() / "cspqaoa-XXXXXX").string();
    std::vector<char> buf(templ.begin(), templ.end());
    buf.push_back('\0');
    int fd = ::mkstemp(buf.data());
    if (fd < 0) throw Error("could not create a temporary DIMACS file");
    std::size_t written = 0;
    while (written < text.size()) {
        ssize_t got = ::write(fd, text.data() + written, text.size() - written);
        if (got <= 0) {
            ::close(fd);
            std::remove(buf.data());
            throw Error("could not write the temporary DIMACS file");
        }
        written += static_cast<std::size_t>(got);
    }
    ::close(fd);
    return std::string(buf.data());
}

inline std::int64_t extract_counter(const std::string& pattern, const std::string& output,
                                    const char* what) {
    std::regex re(pattern, std::regex::ECMAScript);
    std::smatch match;
    if (!std::regex_search(output, match, re) || match.size() < 2)
        throw Error(strf("external solver output has no %s match for pattern '%s'", what,
                         pattern.c_str()));
    try {
        return std::stoll(match[1].str());
    } catch (const std::exception&) {
        throw Error(strf("external solver %s capture '%s' is not a number", what,
                         match[1].str().c_str()));
    }
}

inline ClassicalRunStats run_external(const CnfFormula& f, const SolverSpec& spec) {
    TempFile file{write_temp_dimacs(export_dimacs(f))};

    std::string cmd = spec.command;
    std::size_t pos = cmd.find("{file}");
    if (pos == std::string::npos)
        throw Error("external solver command needs a {file} placeholder");
    while (pos != std::string::npos) {
        cmd.replace(pos, 6, file.path);
        pos = cmd.find("{file}", pos + file.path.size());
    }
    if (spec.time_limit_seconds > 0.0)
        cmd = strf("timeout %.3f ", spec.time_limit_seconds) + cmd;
    cmd += " 2>&1";

    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw Error("could not launch the external solver");
    std::string output;
    char chunk[4096];
    std::size_t got = 0;
    while ((got = std::fread(chunk, 1, sizeof chunk, pipe)) > 0) output.append(chunk, got);
    int status = ::pclose(pipe);
    int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

    if (spec.time_limit_seconds > 0.0 && exit_code == 124)
        throw Error("external solver hit the time limit");

    ClassicalRunStats stats;
    if (exit_code == 10) {
        stats.satisfiable = true;
    } else if (exit_code == 20) {
        stats.satisfiable = false;
    } else if (output.find("s UNSATISFIABLE") != std::string::npos) {
        stats.satisfiable = false;
    } else if (output.find("s SATISFIABLE") != std::string::npos) {
        stats.satisfiable = true;
    } else {
        throw Error(strf("external solver gave no verdict (exit code %d)", exit_code));
    }
    stats.decisions = extract_counter(spec.decisions_pattern, output, "decisions");
    stats.propagations = extract_counter(spec.propagations_pattern, output, "propagations");
    return stats;
}

}  // namespace cnfdetail

/// Converts the instance to CNF and solves it with the configured solver.
inline ClassicalRunStats run_classical(const CspInstance& inst, const SolverSpec& solver) {
    CnfFormula f = to_cnf(inst);
    if (solver.kind == SolverSpec::Kind::kInternal) return solve_dpll(f);
    return cnfdetail::run_external(f, solver);
}

/// Median of runtime_proxy over `instances` random Poisson(r n) instances.
/// Instance i is drawn from a generator seeded with mix_seed(seed, i), so the
/// result is reproducible and independent of evaluation order.  An even count
/// averages the two middle values.
inline double classical_median_runtime(const TruthTable& table, int n, double r,
                                       std::int64_t instances, const SolverSpec& solver,
                                       std::uint64_t seed,
                                       RepetitionMode repetition = RepetitionMode::kWithRepetition) {
    if (instances < 1) throw Error("classical_median_runtime needs instances >= 1");
    SamplerConfig cfg = SamplerConfig::poisson(r, 0, repetition);
    std::vector<double> proxies;
    proxies.reserve(static_cast<std::size_t>(instances));
    for (std::int64_t i = 0; i < instances; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        CspInstance inst = sample_instance(n, table, cfg, rng);
        proxies.push_back(static_cast<double>(run_classical(inst, solver).runtime_proxy()));
    }
    std::sort(proxies.begin(), proxies.end());
    std::size_t half = proxies.size() / 2;
    if (proxies.size() % 2 == 1) return proxies[half];
    return 0.5 * (proxies[half - 1] + proxies[half]);
}

}  // namespace cspqaoa
