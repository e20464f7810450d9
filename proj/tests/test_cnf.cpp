#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "cspqaoa/cnf.hpp"
#include "cspqaoa/instance.hpp"
#include "cspqaoa/oracle.hpp"
#include "cspqaoa/rng.hpp"
#include "cspqaoa/truth_table.hpp"

using namespace cspqaoa;

namespace {

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

bool satisfies_csp(const CspInstance& inst, std::uint64_t assignment) {
    return count_violations(inst, assignment) == 0;
}

CnfFormula random_formula(Rng& rng) {
    CnfFormula f;
    f.n = 1 + static_cast<int>(rng.next_below(8));
    int m = static_cast<int>(rng.next_below(6));
    for (int j = 0; j < m; ++j) {
        std::vector<int> clause;
        int len = static_cast<int>(rng.next_below(5));
        for (int i = 0; i < len; ++i) {
            int var = 1 + static_cast<int>(rng.next_below(f.n));
            clause.push_back(rng.next_u64() & 1 ? var : -var);
        }
        f.clauses.push_back(std::move(clause));
    }
    return f;
}

/// Writes a shell script and returns a command template invoking it via sh.
std::string fake_solver_command(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << "#!/bin/sh\n" << body;
    out.close();
    return "sh " + path.string() + " {file}";
}

}  // namespace

TEST_CASE("an all-false-row conversion keeps the original literal set", "[cnf]") {
    CspInstance inst;
    inst.n = 5;
    inst.table = parse_truth_table("ksat:3");
    inst.clauses.push_back({{{2, false}, {0, true}, {4, false}}});

    CnfFormula f = to_cnf(inst);
    REQUIRE(f.n == 5);
    REQUIRE(f.clauses.size() == 1);
    CHECK(f.clauses[0] == std::vector<int>{3, -1, 5});
}

TEST_CASE("the not-all-equal table emits one clause per forbidden row", "[cnf]") {
    CspInstance inst;
    inst.n = 4;
    inst.table = parse_truth_table("nae:3");
    inst.clauses.push_back({{{0, false}, {1, true}, {3, false}}});

    CnfFormula f = to_cnf(inst);
    REQUIRE(f.clauses.size() == 2);
    CHECK(f.clauses[0] == std::vector<int>{1, -2, 4});
    CHECK(f.clauses[1] == std::vector<int>{-1, 2, -4});
}

TEST_CASE("repeated variables merge duplicates and drop unrealizable rows", "[cnf]") {
    CspInstance inst;
    inst.n = 2;
    inst.table = parse_truth_table("1in:2");

    SECTION("same sign twice collapses to a unit pair") {
        inst.clauses.push_back({{{0, false}, {0, false}}});
        CnfFormula f = to_cnf(inst);
        REQUIRE(f.clauses.size() == 2);
        CHECK(f.clauses[0] == std::vector<int>{1});
        CHECK(f.clauses[1] == std::vector<int>{-1});
        CHECK(!solve_dpll(f).satisfiable);
        CHECK(!brute_force_satisfiable(inst));
    }

    SECTION("opposite signs make every forbidden row unrealizable") {
        inst.clauses.push_back({{{0, false}, {0, true}}});
        CnfFormula f = to_cnf(inst);
        CHECK(f.clauses.empty());
        CHECK(brute_force_satisfiable(inst));
    }
}

TEST_CASE("a table with no false rows converts to the empty formula", "[cnf]") {
    CspInstance inst;
    inst.n = 3;
    inst.table = parse_truth_table("1111");
    inst.clauses.push_back({{{0, false}, {2, true}}});
    CnfFormula f = to_cnf(inst);
    CHECK(f.n == 3);
    CHECK(f.clauses.empty());
}

TEST_CASE("conversion preserves the satisfying set", "[cnf]") {
    Rng rng(81001);
    for (int trial = 0; trial < 40; ++trial) {
        int k = 1 + static_cast<int>(rng.next_below(4));
        int n = std::max(k, 4 + static_cast<int>(rng.next_below(4)));
        TruthTable table = random_table(k, rng);
        SamplerConfig cfg = SamplerConfig::fixed(1 + rng.next_below(7), 0,
                                                 trial % 2 == 0 ? RepetitionMode::kWithRepetition
                                                                : RepetitionMode::kWithoutRepetition);
        CspInstance inst = sample_instance(n, table, cfg, rng);
        CnfFormula f = to_cnf(inst);
        INFO("trial " << trial << " k=" << k << " n=" << n << " m=" << inst.m());
        for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
            if (satisfies_csp(inst, x) != cnf_satisfied(f, x)) {
                CAPTURE(x);
                REQUIRE(satisfies_csp(inst, x) == cnf_satisfied(f, x));
            }
        }
    }
}

TEST_CASE("DIMACS output matches the standard layout", "[dimacs]") {
    CnfFormula empty;
    empty.n = 3;
    CHECK(export_dimacs(empty) == "p cnf 3 0\n");

    CnfFormula f;
    f.n = 2;
    f.clauses = {{1, -2}};
    CHECK(export_dimacs(f) == "p cnf 2 1\n1 -2 0\n");

    CnfFormula with_empty;
    with_empty.n = 1;
    with_empty.clauses = {{}};
    CHECK(export_dimacs(with_empty) == "p cnf 1 1\n0\n");
}

TEST_CASE("DIMACS round-trips random formulas exactly", "[dimacs]") {
    Rng rng(81002);
    for (int trial = 0; trial < 50; ++trial) {
        CnfFormula f = random_formula(rng);
        CHECK(parse_dimacs(export_dimacs(f)) == f);
    }
}

TEST_CASE("the DIMACS parser accepts comments and split clauses", "[dimacs]") {
    CnfFormula f = parse_dimacs("c a comment\n\np cnf 4 2\nc mid\n1 -3\n4 0 2 0\n");
    CHECK(f.n == 4);
    REQUIRE(f.clauses.size() == 2);
    CHECK(f.clauses[0] == std::vector<int>{1, -3, 4});
    CHECK(f.clauses[1] == std::vector<int>{2});
}

TEST_CASE("the DIMACS parser rejects malformed input", "[dimacs]") {
    CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), Error);
    CHECK_THROWS_AS(parse_dimacs("p cnf -1 0\n"), Error);
    CHECK_THROWS_AS(parse_dimacs("p cnf 2 1 extra\n1 0\n"), Error);
    CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n3 0\n"), Error);
    CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 2\n"), Error);
    CHECK_THROWS_AS(parse_dimacs("p cnf 2 2\n1 0\n"), Error);
    CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 x 0\n"), Error);
    CHECK_THROWS_AS(parse_dimacs("c only comments\n"), Error);
}

TEST_CASE("trivial formulas resolve before any branching", "[dpll]") {
    CnfFormula empty;
    empty.n = 3;
    ClassicalRunStats stats = solve_dpll(empty);
    CHECK(stats.satisfiable);
    CHECK(stats.decisions == 0);
    CHECK(stats.propagations == 0);
    CHECK(stats.runtime_proxy() == 0);

    CnfFormula contradiction;
    contradiction.n = 3;
    contradiction.clauses = {{1, 2}, {}};
    stats = solve_dpll(contradiction);
    CHECK(!stats.satisfiable);
    CHECK(stats.decisions == 0);
}

TEST_CASE("unit chains are settled purely by propagation", "[dpll]") {
    CnfFormula f;
    f.n = 3;
    f.clauses = {{1}, {-1, 2}, {-2, 3}};
    ClassicalRunStats stats = solve_dpll(f);
    CHECK(stats.satisfiable);
    CHECK(stats.decisions == 0);
    CHECK(stats.propagations == 3);
    CHECK(stats.runtime_proxy() == 3);
}

TEST_CASE("verdicts agree with brute-force satisfiability", "[dpll]") {
    Rng rng(81003);
    SamplerConfig cfg = SamplerConfig::poisson(4.0, 0);
    int sat_count = 0;
    for (int trial = 0; trial < 100; ++trial) {
        TruthTable table = random_table(3, rng);
        CspInstance inst = sample_instance(10, table, cfg, rng);
        ClassicalRunStats stats = solve_dpll(to_cnf(inst));
        INFO("trial " << trial);
        REQUIRE(stats.satisfiable == brute_force_satisfiable(inst));
        CHECK(stats.runtime_proxy() == stats.decisions + stats.propagations);
        sat_count += stats.satisfiable;
    }
    CHECK(sat_count > 0);
    CHECK(sat_count < 100);
}

TEST_CASE("the external adapter parses counters and verdicts", "[solver]") {
    std::string cmd = fake_solver_command("cspqaoa-fake-sat.sh",
                                          "test -f \"$1\" || exit 1\n"
                                          "echo 'decisions             : 42'\n"
                                          "echo 'propagations          : 7'\n"
                                          "echo 's SATISFIABLE'\n"
                                          "exit 10\n");
    SolverSpec spec = SolverSpec::external(cmd, "decisions\\s*:\\s*(\\d+)",
                                           "propagations\\s*:\\s*(\\d+)");
    CspInstance inst;
    inst.n = 2;
    inst.table = parse_truth_table("ksat:2");
    inst.clauses.push_back({{{0, false}, {1, false}}});

    ClassicalRunStats stats = run_classical(inst, spec);
    CHECK(stats.satisfiable);
    CHECK(stats.decisions == 42);
    CHECK(stats.propagations == 7);

    std::string unsat_cmd = fake_solver_command("cspqaoa-fake-unsat.sh",
                                                "echo 'decisions : 5'\n"
                                                "echo 'propagations : 6'\n"
                                                "echo 's UNSATISFIABLE'\n"
                                                "exit 20\n");
    spec.command = unsat_cmd;
    stats = run_classical(inst, spec);
    CHECK(!stats.satisfiable);
    CHECK(stats.decisions == 5);
}

TEST_CASE("the external adapter refuses unusable configurations", "[solver]") {
    CspInstance inst;
    inst.n = 2;
    inst.table = parse_truth_table("ksat:2");
    inst.clauses.push_back({{{0, false}, {1, false}}});

    SECTION("missing file placeholder") {
        SolverSpec spec = SolverSpec::external("true", "(\\d+)", "(\\d+)");
        CHECK_THROWS_WITH(run_classical(inst, spec),
                          Catch::Matchers::ContainsSubstring("{file}"));
    }

    SECTION("no verdict in the output") {
        std::string cmd = fake_solver_command("cspqaoa-fake-mute.sh", "exit 0\n");
        SolverSpec spec = SolverSpec::external(cmd, "(\\d+)", "(\\d+)");
        CHECK_THROWS_WITH(run_classical(inst, spec),
                          Catch::Matchers::ContainsSubstring("verdict"));
    }

    SECTION("verdict present but counters missing") {
        std::string cmd = fake_solver_command("cspqaoa-fake-nostat.sh",
                                              "echo 's SATISFIABLE'\nexit 10\n");
        SolverSpec spec = SolverSpec::external(cmd, "decisions\\s*:\\s*(\\d+)", "(\\d+)");
        CHECK_THROWS_WITH(run_classical(inst, spec),
                          Catch::Matchers::ContainsSubstring("decisions"));
    }

    SECTION("time limit exceeded") {
        std::string cmd = fake_solver_command("cspqaoa-fake-slow.sh", "sleep 5\nexit 10\n");
        SolverSpec spec = SolverSpec::external(cmd, "(\\d+)", "(\\d+)", 0.2);
        CHECK_THROWS_WITH(run_classical(inst, spec),
                          Catch::Matchers::ContainsSubstring("time limit"));
    }
}

TEST_CASE("exit codes alone decide the verdict", "[solver]") {
    std::string cmd = fake_solver_command("cspqaoa-fake-exitcode.sh",
                                          "echo 'decisions : 1'\n"
                                          "echo 'propagations : 2'\n"
                                          "exit 20\n");
    SolverSpec spec = SolverSpec::external(cmd, "decisions\\s*:\\s*(\\d+)",
                                           "propagations\\s*:\\s*(\\d+)");
    CspInstance inst;
    inst.n = 1;
    inst.table = parse_truth_table("ksat:1");
    inst.clauses.push_back({{{0, false}}});
    ClassicalRunStats stats = run_classical(inst, spec);
    CHECK(!stats.satisfiable);
}

TEST_CASE("median runtimes are seeded and reproducible", "[solver]") {
    TruthTable table = parse_truth_table("ksat:3");
    SolverSpec solver = SolverSpec::internal();
    double a = classical_median_runtime(table, 8, 4.0, 41, solver, 91001);
    double b = classical_median_runtime(table, 8, 4.0, 41, solver, 91001);
    CHECK(a == b);
    CHECK(a >= 0.0);

    double all_true = classical_median_runtime(parse_truth_table("1111"), 8, 3.0, 20, solver,
                                               91002);
    CHECK(all_true == 0.0);
}
