#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cspqaoa/cnf.hpp"
#include "cspqaoa/experiments.hpp"
#include "cspqaoa/oracle.hpp"
#include "cspqaoa/records.hpp"
#include "cspqaoa/success.hpp"

namespace {

using namespace cspqaoa;

/// Bad flag values or combinations; mapped to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TruthTable table_from_flag(const std::string& spec) {
    try {
        return parse_truth_table(spec);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

PolynomialPath path_from_flag(const std::string& name) {
    try {
        return parse_polynomial_path(name);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

RepetitionMode repetition_from_flag(const std::string& name) {
    if (name == "with") return RepetitionMode::kWithRepetition;
    if (name == "without") return RepetitionMode::kWithoutRepetition;
    throw UsageError("--repetition must be 'with' or 'without'");
}

PSingleBackend backend_from_flags(const TruthTable& table, const std::string& path,
                                  const std::string& repetition) {
    try {
        return make_backend(table, path_from_flag(path), repetition_from_flag(repetition));
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::string quote_arg(const std::string& arg) {
    if (arg.find_first_of(" \t\"'") == std::string::npos) return arg;
    std::string quoted = "'";
    for (char c : arg) {
        if (c == '\'') quoted += "'\\''";
        else quoted += c;
    }
    return quoted + "'";
}

std::string join_command_line(int argc, char** argv) {
    std::string line;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) line += ' ';
        line += quote_arg(argv[i]);
    }
    return line;
}

// ---- shared flag groups ----

struct OutputFlags {
    std::string format = "json";
    std::string out;
};

void add_output_flags(CLI::App* cmd, OutputFlags& flags) {
    cmd->add_option("--format", flags.format, "Record format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--out", flags.out,
                    "Write the record to this file plus a <file>.manifest.json manifest");
}

struct ModelFlags {
    double r = 0.0;
    std::int64_t m = 0;
    bool has_r = false;
    bool has_m = false;
};

void add_model_flags(CLI::App* cmd, ModelFlags& flags) {
    auto* opt_r = cmd->add_option("-r,--r", flags.r,
                                  "Clause density; the clause count is Poisson(r n)");
    auto* opt_m = cmd->add_option("--fixed-m", flags.m, "Exact clause count");
    opt_r->each([&flags](const std::string&) { flags.has_r = true; });
    opt_m->each([&flags](const std::string&) { flags.has_m = true; });
    opt_r->excludes(opt_m);
    opt_m->excludes(opt_r);
}

ClauseCountModel model_from_flags(const ModelFlags& flags) {
    if (flags.has_r == flags.has_m)
        throw UsageError("exactly one of --r or --fixed-m is required");
    try {
        return flags.has_r ? ClauseCountModel::poisson(flags.r) : ClauseCountModel::fixed(flags.m);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

Json model_json(const ClauseCountModel& model) {
    Json j;
    if (model.mode == ClauseCountMode::kPoisson) {
        j["mode"] = "poisson";
        j["r"] = model.r;
    } else {
        j["mode"] = "fixed";
        j["m"] = model.m;
    }
    return j;
}

struct SeedFlag {
    std::uint64_t seed = 0;
    bool given = false;
};

void add_seed_flag(CLI::App* cmd, SeedFlag& flag) {
    cmd->add_option("--seed", flag.seed, "Generator seed; auto-chosen and reported when omitted")
        ->each([&flag](const std::string&) { flag.given = true; });
}

std::uint64_t resolve_seed(SeedFlag& flag) {
    if (!flag.given) {
        std::random_device device;
        flag.seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
    }
    std::fprintf(stderr, "seed: %llu\n", static_cast<unsigned long long>(flag.seed));
    return flag.seed;
}

// ---- record emission ----

struct Emitter {
    std::string command_line;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    int emit(const std::string& subcommand, const Json& parameters, const Json& data,
             const std::vector<std::string>& csv_header,
             const std::vector<std::vector<Json>>& csv_rows, const OutputFlags& out) const {
        double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        std::string id = run_id(subcommand, parameters);
        std::string manifest_path = out.out.empty() ? "" : out.out + ".manifest.json";

        std::string payload;
        if (out.format == "json") {
            Json record;
            record["tool"] = kToolName;
            record["version"] = kVersion;
            record["subcommand"] = subcommand;
            record["run_id"] = id;
            record["manifest"] = out.out.empty() ? Json() : Json(manifest_path);
            record["parameters"] = parameters;
            record["data"] = data;
            payload = record.dump(2) + "\n";
        } else {
            std::vector<std::string> header{"run_id", "manifest"};
            header.insert(header.end(), csv_header.begin(), csv_header.end());
            std::vector<std::vector<Json>> rows;
            rows.reserve(csv_rows.size());
            for (const auto& row : csv_rows) {
                std::vector<Json> full{Json(id),
                                       out.out.empty() ? Json() : Json(manifest_path)};
                full.insert(full.end(), row.begin(), row.end());
                rows.push_back(std::move(full));
            }
            payload = csv_table(header, rows);
        }

        if (out.out.empty()) {
            std::fputs(payload.c_str(), stdout);
        } else {
            write_text_file(out.out, payload);
            RunManifest manifest{subcommand, command_line, parameters, wall_ms, {out.out}};
            write_text_file(manifest_path, manifest.to_json().dump(2) + "\n");
            std::fprintf(stderr, "wrote %s and %s\n", out.out.c_str(), manifest_path.c_str());
        }
        return 0;
    }
};

// ---- psuccess ----

struct PsuccessArgs {
    std::string table;
    int n = 0;
    double gamma = 0.0;
    double beta = 0.0;
    ModelFlags model;
    std::string path = "auto";
    std::string repetition = "with";
    OutputFlags out;
};

int cmd_psuccess(const Emitter& emitter, PsuccessArgs& args) {
    TruthTable table = table_from_flag(args.table);
    ClauseCountModel model = model_from_flags(args.model);
    PSingleBackend backend = backend_from_flags(table, args.path, args.repetition);

    Json parameters;
    parameters["table"] = args.table;
    parameters["n"] = args.n;
    parameters["gamma"] = args.gamma;
    parameters["beta"] = args.beta;
    parameters["model"] = model_json(model);
    parameters["path"] = args.path;
    parameters["repetition"] = args.repetition;

    SuccessQuery query{args.n, {args.gamma, args.beta}, model};
    SuccessResult res = success_probability(backend, query);

    Json data;
    data["probability"] = res.probability;
    data["raw_real"] = res.raw_real;
    data["imag_residual"] = res.imag_residual;
    data["err_bound"] = res.err_bound;
    data["precision"] = precision_mode_name(res.precision);
    data["clamped"] = res.clamped;
    data["config_count"] = res.config_count;
    data["path_used"] = polynomial_path_name(backend.path);

    std::vector<std::string> header{
        "table",     "n",         "gamma",       "beta",       "model",
        "r",         "m",         "probability", "raw_real",   "imag_residual",
        "err_bound", "precision", "clamped",     "config_count", "path_used"};
    std::vector<Json> row{args.table,
                          args.n,
                          args.gamma,
                          args.beta,
                          model.mode == ClauseCountMode::kPoisson ? "poisson" : "fixed",
                          model.mode == ClauseCountMode::kPoisson ? Json(model.r) : Json(),
                          model.mode == ClauseCountMode::kFixed ? Json(model.m) : Json(),
                          res.probability,
                          res.raw_real,
                          res.imag_residual,
                          res.err_bound,
                          precision_mode_name(res.precision),
                          res.clamped,
                          res.config_count,
                          polynomial_path_name(backend.path)};
    return emitter.emit("psuccess", parameters, data, header, {row}, args.out);
}

// ---- curve ----

struct CurveArgs {
    std::string table;
    std::vector<int> n_values;
    double gamma = 0.0;
    double beta = 0.0;
    ModelFlags model;
    std::string path = "auto";
    std::string repetition = "with";
    OutputFlags out;
};

int cmd_curve(const Emitter& emitter, CurveArgs& args) {
    TruthTable table = table_from_flag(args.table);
    ClauseCountModel model = model_from_flags(args.model);
    PSingleBackend backend = backend_from_flags(table, args.path, args.repetition);
    if (args.n_values.empty()) throw UsageError("--n needs at least one size");

    Json parameters;
    parameters["table"] = args.table;
    parameters["n"] = args.n_values;
    parameters["gamma"] = args.gamma;
    parameters["beta"] = args.beta;
    parameters["model"] = model_json(model);
    parameters["path"] = args.path;
    parameters["repetition"] = args.repetition;

    std::vector<SuccessPoint> curve =
        success_curve(backend, model, {args.gamma, args.beta}, args.n_values);

    Json points = Json::array();
    std::vector<std::vector<Json>> rows;
    for (const SuccessPoint& pt : curve) {
        Json p;
        p["n"] = pt.n;
        p["p"] = pt.result.probability;
        p["imag_residual"] = pt.result.imag_residual;
        p["err_bound"] = pt.result.err_bound;
        p["precision"] = precision_mode_name(pt.result.precision);
        points.push_back(p);
        rows.push_back({pt.n, pt.result.probability, pt.result.imag_residual,
                        pt.result.err_bound, precision_mode_name(pt.result.precision)});
    }
    Json data;
    data["path_used"] = polynomial_path_name(backend.path);
    data["points"] = points;
    return emitter.emit("curve", parameters, data,
                        {"n", "p", "imag_residual", "err_bound", "precision"}, rows, args.out);
}

// ---- oracle ----

struct OracleArgs {
    std::string table;
    int n = 0;
    double gamma = 0.0;
    double beta = 0.0;
    ModelFlags model;
    std::int64_t instances = 1000;
    SeedFlag seed;
    std::string path = "auto";
    std::string repetition = "with";
    OutputFlags out;
};

int cmd_oracle(const Emitter& emitter, OracleArgs& args) {
    TruthTable table = table_from_flag(args.table);
    ClauseCountModel model = model_from_flags(args.model);
    PSingleBackend backend = backend_from_flags(table, args.path, args.repetition);
    std::uint64_t seed = resolve_seed(args.seed);
    RepetitionMode repetition = repetition_from_flag(args.repetition);

    Json parameters;
    parameters["table"] = args.table;
    parameters["n"] = args.n;
    parameters["gamma"] = args.gamma;
    parameters["beta"] = args.beta;
    parameters["model"] = model_json(model);
    parameters["instances"] = args.instances;
    parameters["seed"] = seed;
    parameters["path"] = args.path;
    parameters["repetition"] = args.repetition;

    SamplerConfig sampler = model.mode == ClauseCountMode::kPoisson
                                ? SamplerConfig::poisson(model.r, 0, repetition)
                                : SamplerConfig::fixed(model.m, 0, repetition);
    QaoaAngles angles{args.gamma, args.beta};
    MeanStdErr mc = mc_average_success(args.n, table, sampler, angles, args.instances, seed);
    SuccessResult closed = success_probability(backend, {args.n, angles, model});

    Json z = mc.std_error > 0.0 ? Json((closed.probability - mc.mean) / mc.std_error) : Json();
    Json data;
    data["mc_mean"] = mc.mean;
    data["mc_stderr"] = mc.std_error;
    data["closed_form"] = closed.probability;
    data["z_score"] = z;
    data["precision"] = precision_mode_name(closed.precision);
    data["imag_residual"] = closed.imag_residual;
    data["path_used"] = polynomial_path_name(backend.path);

    std::vector<std::string> header{"table",       "n",       "gamma",     "beta",
                                    "instances",   "seed",    "mc_mean",   "mc_stderr",
                                    "closed_form", "z_score", "precision", "path_used"};
    std::vector<Json> row{args.table,
                          args.n,
                          args.gamma,
                          args.beta,
                          args.instances,
                          seed,
                          mc.mean,
                          mc.std_error,
                          closed.probability,
                          z,
                          precision_mode_name(closed.precision),
                          polynomial_path_name(backend.path)};
    return emitter.emit("oracle", parameters, data, header, {row}, args.out);
}

// ---- threshold ----

struct ThresholdArgs {
    std::string table;
    int n_probe = 12;
    std::int64_t samples = 200;
    double target = 0.5;
    double tol = 0.05;
    std::string repetition = "with";
    SeedFlag seed;
    OutputFlags out;
};

int cmd_threshold(const Emitter& emitter, ThresholdArgs& args) {
    TruthTable table = table_from_flag(args.table);
    std::uint64_t seed = resolve_seed(args.seed);

    ThresholdOptions options;
    options.n_probe = args.n_probe;
    options.samples = args.samples;
    options.target = args.target;
    options.tol = args.tol;
    options.repetition = repetition_from_flag(args.repetition);

    Json parameters;
    parameters["table"] = args.table;
    parameters["n_probe"] = args.n_probe;
    parameters["samples"] = args.samples;
    parameters["target"] = args.target;
    parameters["tol"] = args.tol;
    parameters["repetition"] = args.repetition;
    parameters["seed"] = seed;

    ThresholdResult result = estimate_threshold(table, options, seed);

    Json probes = Json::array();
    std::vector<std::vector<Json>> rows;
    for (std::size_t i = 0; i < result.probe_history.size(); ++i) {
        const ThresholdProbe& probe = result.probe_history[i];
        Json p;
        p["r"] = probe.r;
        p["sat_estimate"] = probe.sat_estimate;
        p["samples"] = probe.samples;
        probes.push_back(p);
        rows.push_back({args.table, result.r_star, static_cast<std::int64_t>(i), probe.r,
                        probe.sat_estimate, probe.samples});
    }
    Json data;
    data["r_star"] = result.r_star;
    data["probes"] = probes;
    return emitter.emit("threshold", parameters, data,
                        {"table", "r_star", "probe_index", "r", "sat_estimate", "samples"}, rows,
                        args.out);
}

// ---- optimize ----

struct OptimizeArgs {
    std::string table;
    ModelFlags model;
    int n_ref = 12;
    int grid = 50;
    std::string path = "auto";
    std::string repetition = "with";
    OutputFlags out;
};

int cmd_optimize(const Emitter& emitter, OptimizeArgs& args) {
    TruthTable table = table_from_flag(args.table);
    ClauseCountModel model = model_from_flags(args.model);
    PSingleBackend backend = backend_from_flags(table, args.path, args.repetition);

    Json parameters;
    parameters["table"] = args.table;
    parameters["model"] = model_json(model);
    parameters["n_ref"] = args.n_ref;
    parameters["grid"] = args.grid;
    parameters["grid_convention"] =
        strf("uniform %dx%d lattice on [0,2pi)^2; ties break toward the smallest (gamma, beta)",
             args.grid, args.grid);
    parameters["path"] = args.path;
    parameters["repetition"] = args.repetition;

    OptimizeResult best = optimize_angles(backend, args.n_ref, model, args.grid);

    Json data;
    data["gamma"] = best.angles.gamma;
    data["beta"] = best.angles.beta;
    data["probability"] = best.probability;
    data["path_used"] = polynomial_path_name(backend.path);
    std::vector<Json> row{args.table,        args.n_ref,       args.grid,
                          best.angles.gamma, best.angles.beta, best.probability,
                          polynomial_path_name(backend.path)};
    return emitter.emit("optimize", parameters, data,
                        {"table", "n_ref", "grid", "gamma", "beta", "probability", "path_used"},
                        {row}, args.out);
}

// ---- fit ----

struct FitArgs {
    std::string input;
    std::string n_column = "n";
    std::string p_column = "p";
    int n_min = 0;
    int n_max = 0;
    bool has_n_min = false;
    bool has_n_max = false;
    OutputFlags out;
};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

int cmd_fit(const Emitter& emitter, FitArgs& args) {
    std::ifstream in(args.input);
    if (!in) throw Error("could not open '" + args.input + "'");
    std::string line;
    if (!std::getline(in, line)) throw Error("'" + args.input + "' is empty");
    std::vector<std::string> header = split_csv_line(line);
    std::size_t n_col = header.size();
    std::size_t p_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == args.n_column) n_col = i;
        if (header[i] == args.p_column) p_col = i;
    }
    if (n_col == header.size() || p_col == header.size())
        throw Error(strf("'%s' needs columns '%s' and '%s'", args.input.c_str(),
                         args.n_column.c_str(), args.p_column.c_str()));

    std::vector<std::pair<int, double>> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw Error(strf("'%s' line %zu has %zu cells, expected %zu", args.input.c_str(),
                             line_no, cells.size(), header.size()));
        try {
            int n = std::stoi(cells[n_col]);
            double p = std::stod(cells[p_col]);
            if (args.has_n_min && n < args.n_min) continue;
            if (args.has_n_max && n > args.n_max) continue;
            points.emplace_back(n, p);
        } catch (const std::exception&) {
            throw Error(strf("'%s' line %zu has a non-numeric n or p cell", args.input.c_str(),
                             line_no));
        }
    }

    Json parameters;
    parameters["input"] = args.input;
    parameters["n_column"] = args.n_column;
    parameters["p_column"] = args.p_column;
    parameters["n_min"] = args.has_n_min ? Json(args.n_min) : Json();
    parameters["n_max"] = args.has_n_max ? Json(args.n_max) : Json();

    FitResult fit = fit_exponent(points);

    Json data;
    data["a"] = fit.a;
    data["b"] = fit.b;
    data["residual"] = fit.residual;
    data["n_min"] = fit.n_min;
    data["n_max"] = fit.n_max;
    data["points"] = static_cast<std::int64_t>(points.size());
    std::vector<Json> row{args.input,   fit.a,     fit.b,
                          fit.residual, fit.n_min, fit.n_max,
                          static_cast<std::int64_t>(points.size())};
    return emitter.emit("fit", parameters, data,
                        {"input", "a", "b", "residual", "n_min", "n_max", "points"}, {row},
                        args.out);
}

// ---- classical ----

struct SolverFlags {
    std::string solver = "internal";
    std::string command;
    std::string decisions_pattern = "decisions\\s*:\\s*(\\d+)";
    std::string propagations_pattern = "propagations\\s*:\\s*(\\d+)";
    double time_limit = 0.0;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& flags) {
    cmd->add_option("--solver", flags.solver, "SAT solver: internal DPLL or an external command")
        ->check(CLI::IsMember({"internal", "external"}))
        ->capture_default_str();
    cmd->add_option("--command", flags.command,
                    "External command template containing {file}; defaults to $CSPQAOA_SOLVER");
    cmd->add_option("--decisions-pattern", flags.decisions_pattern,
                    "Regex whose first group captures the decision count")
        ->capture_default_str();
    cmd->add_option("--propagations-pattern", flags.propagations_pattern,
                    "Regex whose first group captures the propagation count")
        ->capture_default_str();
    cmd->add_option("--time-limit", flags.time_limit,
                    "External solver wall limit in seconds (0 = none)");
}

SolverSpec solver_from_flags(const SolverFlags& flags) {
    if (flags.solver == "internal") return SolverSpec::internal();
    std::string command = flags.command;
    if (command.empty()) {
        const char* env = std::getenv("CSPQAOA_SOLVER");
        if (env != nullptr) command = env;
    }
    if (command.empty())
        throw UsageError("--solver external needs --command or the CSPQAOA_SOLVER variable");
    return SolverSpec::external(command, flags.decisions_pattern, flags.propagations_pattern,
                                flags.time_limit);
}

Json solver_json(const SolverSpec& spec) {
    Json j;
    j["kind"] = spec.kind == SolverSpec::Kind::kInternal ? "internal" : "external";
    if (spec.kind == SolverSpec::Kind::kExternal) {
        j["command"] = spec.command;
        j["decisions_pattern"] = spec.decisions_pattern;
        j["propagations_pattern"] = spec.propagations_pattern;
        j["time_limit_seconds"] = spec.time_limit_seconds;
    }
    return j;
}

struct ClassicalArgs {
    std::string table;
    int n = 0;
    double r = 0.0;
    std::int64_t instances = 500;
    SeedFlag seed;
    SolverFlags solver;
    std::string repetition = "with";
    OutputFlags out;
};

int cmd_classical(const Emitter& emitter, ClassicalArgs& args) {
    TruthTable table = table_from_flag(args.table);
    SolverSpec solver = solver_from_flags(args.solver);
    std::uint64_t seed = resolve_seed(args.seed);
    RepetitionMode repetition = repetition_from_flag(args.repetition);

    Json parameters;
    parameters["table"] = args.table;
    parameters["n"] = args.n;
    parameters["r"] = args.r;
    parameters["instances"] = args.instances;
    parameters["seed"] = seed;
    parameters["solver"] = solver_json(solver);
    parameters["repetition"] = args.repetition;

    double median = classical_median_runtime(table, args.n, args.r, args.instances, solver, seed,
                                             repetition);

    Json data;
    data["median_runtime_proxy"] = median;
    std::vector<Json> row{args.table, args.n,
                          args.r,     args.instances,
                          seed,       parameters["solver"]["kind"],
                          median};
    return emitter.emit(
        "classical", parameters, data,
        {"table", "n", "r", "instances", "seed", "solver", "median_runtime_proxy"}, {row},
        args.out);
}

// ---- sweep ----

struct SweepArgs {
    std::vector<std::string> tables;
    std::vector<int> n_values;
    double r = 0.0;
    bool has_r = false;
    int n_probe = 12;
    std::int64_t samples = 200;
    double target = 0.5;
    double tol = 0.05;
    int n_ref = 0;
    bool has_n_ref = false;
    int grid = 50;
    std::string path = "auto";
    std::string repetition = "with";
    std::vector<int> classical_n;
    std::int64_t classical_instances = 500;
    SolverFlags solver;
    SeedFlag seed;
    int jobs = 1;
    OutputFlags out;
};

TableReport guarded_pipeline(const TruthTable& table, const SweepOptions& options) {
    try {
        return run_table_pipeline(table, options);
    } catch (const std::exception& e) {
        TableReport report;
        report.table = table;
        report.error = e.what();
        return report;
    }
}

std::vector<TableReport> run_sweep(const std::vector<TruthTable>& tables,
                                   const SweepOptions& options, int jobs) {
    if (jobs <= 1) return sweep(tables, options);
    std::vector<TableReport> reports(tables.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < tables.size(); i = next.fetch_add(1))
            reports[i] = guarded_pipeline(tables[i], options);
    };
    std::vector<std::thread> pool;
    int workers = std::min(jobs, static_cast<int>(tables.size()));
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return reports;
}

Json fit_json(const std::optional<FitResult>& fit) {
    if (!fit) return Json();
    Json j;
    j["a"] = fit->a;
    j["b"] = fit->b;
    j["residual"] = fit->residual;
    j["n_min"] = fit->n_min;
    j["n_max"] = fit->n_max;
    return j;
}

int cmd_sweep(const Emitter& emitter, SweepArgs& args) {
    if (args.n_values.size() < 3)
        throw UsageError("--n needs at least three sizes for the exponential fit");
    std::vector<TruthTable> tables;
    tables.reserve(args.tables.size());
    for (const std::string& spec : args.tables) tables.push_back(table_from_flag(spec));
    if (args.jobs < 1) throw UsageError("--jobs must be >= 1");

    SweepOptions options;
    options.n_values = args.n_values;
    if (args.has_r) options.r = args.r;
    options.threshold.n_probe = args.n_probe;
    options.threshold.samples = args.samples;
    options.threshold.target = args.target;
    options.threshold.tol = args.tol;
    if (args.has_n_ref) {
        options.n_ref = args.n_ref;
    } else {
        int lo = *std::min_element(args.n_values.begin(), args.n_values.end());
        int hi = *std::max_element(args.n_values.begin(), args.n_values.end());
        int mid = (lo + hi) / 2;
        int best = args.n_values[0];
        for (int n : args.n_values)
            if (std::abs(n - mid) < std::abs(best - mid)) best = n;
        options.n_ref = best;
    }
    options.grid = args.grid;
    options.path = path_from_flag(args.path);
    options.repetition = repetition_from_flag(args.repetition);
    options.classical_n_values = args.classical_n;
    options.classical_instances = args.classical_instances;
    options.solver = solver_from_flags(args.solver);
    options.seed = resolve_seed(args.seed);

    Json parameters;
    parameters["tables"] = args.tables;
    parameters["n"] = args.n_values;
    parameters["r"] = args.has_r ? Json(args.r) : Json();
    parameters["threshold"] = Json{{"n_probe", args.n_probe},
                                   {"samples", args.samples},
                                   {"target", args.target},
                                   {"tol", args.tol}};
    parameters["n_ref"] = options.n_ref;
    parameters["grid"] = args.grid;
    parameters["grid_convention"] =
        strf("uniform %dx%d lattice on [0,2pi)^2; ties break toward the smallest (gamma, beta)",
             args.grid, args.grid);
    parameters["path"] = args.path;
    parameters["repetition"] = args.repetition;
    parameters["classical_n"] = args.classical_n;
    parameters["classical_instances"] = args.classical_instances;
    parameters["solver"] = solver_json(options.solver);
    parameters["seed"] = options.seed;

    std::vector<TableReport> reports = run_sweep(tables, options, args.jobs);

    Json tables_json = Json::array();
    std::vector<std::vector<Json>> rows;
    std::vector<std::string> header{"table", "status", "error", "r",
                                    "gamma", "beta",   "kind",  "n",
                                    "value", "fit_a",  "fit_b", "fit_residual"};
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const TableReport& report = reports[i];
        const std::string& spec = args.tables[i];
        Json t;
        t["table"] = spec;
        if (!report.error.empty()) {
            t["status"] = "error";
            t["error"] = report.error;
            tables_json.push_back(t);
            rows.push_back({spec, "error", report.error, Json(), Json(), Json(), Json(), Json(),
                            Json(), Json(), Json(), Json()});
            continue;
        }
        t["status"] = "ok";
        t["r"] = report.r;
        t["r_from_threshold"] = report.r_from_threshold;
        t["gamma"] = report.angles.gamma;
        t["beta"] = report.angles.beta;
        t["probability_at_ref"] = report.probability_at_ref;
        Json curve = Json::array();
        for (const SuccessPoint& pt : report.quantum_curve) {
            Json p;
            p["n"] = pt.n;
            p["p"] = pt.result.probability;
            p["precision"] = precision_mode_name(pt.result.precision);
            curve.push_back(p);
        }
        t["quantum_curve"] = curve;
        t["quantum_fit"] = fit_json(report.quantum_fit);
        Json classical = Json::array();
        for (const auto& [n, median] : report.classical_medians) {
            Json p;
            p["n"] = n;
            p["median_runtime_proxy"] = median;
            classical.push_back(p);
        }
        t["classical_medians"] = classical;
        t["classical_fit"] = fit_json(report.classical_fit);
        tables_json.push_back(t);

        Json qa = report.quantum_fit ? Json(report.quantum_fit->a) : Json();
        Json qb = report.quantum_fit ? Json(report.quantum_fit->b) : Json();
        Json qres = report.quantum_fit ? Json(report.quantum_fit->residual) : Json();
        for (const SuccessPoint& pt : report.quantum_curve)
            rows.push_back({spec, "ok", Json(), report.r, report.angles.gamma,
                            report.angles.beta, "quantum", pt.n, pt.result.probability, qa, qb,
                            qres});
        Json ca = report.classical_fit ? Json(report.classical_fit->a) : Json();
        Json cb = report.classical_fit ? Json(report.classical_fit->b) : Json();
        Json cres = report.classical_fit ? Json(report.classical_fit->residual) : Json();
        for (const auto& [n, median] : report.classical_medians)
            rows.push_back({spec, "ok", Json(), report.r, report.angles.gamma,
                            report.angles.beta, "classical", n, median, ca, cb, cres});
    }

    Json data;
    data["tables"] = tables_json;
    return emitter.emit("sweep", parameters, data, header, rows, args.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-form depth-1 QAOA success probabilities on random boolean CSPs"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
    app.require_subcommand(1);

    Emitter emitter;
    emitter.command_line = join_command_line(argc, argv);
    int exit_code = 0;

    PsuccessArgs psuccess;
    {
        CLI::App* cmd = app.add_subcommand(
            "psuccess", "Instance-averaged success probability at one (n, gamma, beta)");
        cmd->add_option("--table", psuccess.table, "Truth table spec")->required();
        cmd->add_option("--n", psuccess.n, "Variable count")
            ->required()
            ->check(CLI::PositiveNumber);
        cmd->add_option("--gamma", psuccess.gamma, "Phase angle")->required();
        cmd->add_option("--beta", psuccess.beta, "Mixer angle")->required();
        add_model_flags(cmd, psuccess.model);
        cmd->add_option("--path", psuccess.path, "Clause polynomial path")
            ->capture_default_str();
        cmd->add_option("--repetition", psuccess.repetition,
                        "Draw clause variables with or without repetition")
            ->capture_default_str();
        add_output_flags(cmd, psuccess.out);
        cmd->callback([&] { exit_code = cmd_psuccess(emitter, psuccess); });
    }

    CurveArgs curve;
    {
        CLI::App* cmd = app.add_subcommand(
            "curve", "Success probabilities at fixed angles over a list of sizes");
        cmd->add_option("--table", curve.table, "Truth table spec")->required();
        cmd->add_option("--n", curve.n_values, "Sizes, comma separated or repeated")
            ->required()
            ->delimiter(',');
        cmd->add_option("--gamma", curve.gamma, "Phase angle")->required();
        cmd->add_option("--beta", curve.beta, "Mixer angle")->required();
        add_model_flags(cmd, curve.model);
        cmd->add_option("--path", curve.path, "Clause polynomial path")->capture_default_str();
        cmd->add_option("--repetition", curve.repetition,
                        "Draw clause variables with or without repetition")
            ->capture_default_str();
        add_output_flags(cmd, curve.out);
        cmd->callback([&] { exit_code = cmd_curve(emitter, curve); });
    }

    OracleArgs oracle;
    {
        CLI::App* cmd = app.add_subcommand(
            "oracle", "Check the closed form against brute-force statevector sampling");
        cmd->add_option("--table", oracle.table, "Truth table spec")->required();
        cmd->add_option("--n", oracle.n, "Variable count")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--gamma", oracle.gamma, "Phase angle")->required();
        cmd->add_option("--beta", oracle.beta, "Mixer angle")->required();
        add_model_flags(cmd, oracle.model);
        cmd->add_option("--instances", oracle.instances, "Sampled instances")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        add_seed_flag(cmd, oracle.seed);
        cmd->add_option("--path", oracle.path, "Clause polynomial path")->capture_default_str();
        cmd->add_option("--repetition", oracle.repetition,
                        "Draw clause variables with or without repetition")
            ->capture_default_str();
        add_output_flags(cmd, oracle.out);
        cmd->callback([&] { exit_code = cmd_oracle(emitter, oracle); });
    }

    ThresholdArgs threshold;
    {
        CLI::App* cmd = app.add_subcommand(
            "threshold", "Bracket and bisect the satisfiability threshold density");
        cmd->add_option("--table", threshold.table, "Truth table spec")->required();
        cmd->add_option("--n-probe", threshold.n_probe, "Probe size")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--samples", threshold.samples, "Instances per probe")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--target", threshold.target, "Satisfiable fraction to hit")
            ->capture_default_str();
        cmd->add_option("--tol", threshold.tol, "Accepted fraction tolerance")
            ->capture_default_str();
        cmd->add_option("--repetition", threshold.repetition,
                        "Draw clause variables with or without repetition")
            ->capture_default_str();
        add_seed_flag(cmd, threshold.seed);
        add_output_flags(cmd, threshold.out);
        cmd->callback([&] { exit_code = cmd_threshold(emitter, threshold); });
    }

    OptimizeArgs optimize;
    {
        CLI::App* cmd =
            app.add_subcommand("optimize", "Best angles on a deterministic grid at n-ref");
        cmd->add_option("--table", optimize.table, "Truth table spec")->required();
        add_model_flags(cmd, optimize.model);
        cmd->add_option("--n-ref", optimize.n_ref, "Reference size")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--grid", optimize.grid, "Grid points per angle")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--path", optimize.path, "Clause polynomial path")
            ->capture_default_str();
        cmd->add_option("--repetition", optimize.repetition,
                        "Draw clause variables with or without repetition")
            ->capture_default_str();
        add_output_flags(cmd, optimize.out);
        cmd->callback([&] { exit_code = cmd_optimize(emitter, optimize); });
    }

    FitArgs fit;
    {
        CLI::App* cmd =
            app.add_subcommand("fit", "Fit p = 2^(a + b n) to (n, p) rows of a CSV file");
        cmd->add_option("--input", fit.input, "CSV file with the curve")->required();
        cmd->add_option("--n-column", fit.n_column, "Header name of the size column")
            ->capture_default_str();
        cmd->add_option("--p-column", fit.p_column, "Header name of the probability column")
            ->capture_default_str();
        cmd->add_option("--n-min", fit.n_min, "Smallest size kept")
            ->each([&fit](const std::string&) { fit.has_n_min = true; });
        cmd->add_option("--n-max", fit.n_max, "Largest size kept")
            ->each([&fit](const std::string&) { fit.has_n_max = true; });
        add_output_flags(cmd, fit.out);
        cmd->callback([&] { exit_code = cmd_fit(emitter, fit); });
    }

    ClassicalArgs classical;
    {
        CLI::App* cmd = app.add_subcommand(
            "classical", "Median SAT-solver runtime proxy over random instances");
        cmd->add_option("--table", classical.table, "Truth table spec")->required();
        cmd->add_option("--n", classical.n, "Variable count")
            ->required()
            ->check(CLI::PositiveNumber);
        cmd->add_option("-r,--r", classical.r, "Clause density")->required();
        cmd->add_option("--instances", classical.instances, "Sampled instances")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--repetition", classical.repetition,
                        "Draw clause variables with or without repetition")
            ->capture_default_str();
        add_seed_flag(cmd, classical.seed);
        add_solver_flags(cmd, classical.solver);
        add_output_flags(cmd, classical.out);
        cmd->callback([&] { exit_code = cmd_classical(emitter, classical); });
    }

    SweepArgs sweeper;
    {
        CLI::App* cmd = app.add_subcommand(
            "sweep", "Per-table pipeline: threshold, angles, curve, fits, classical medians");
        cmd->add_option("--table", sweeper.tables, "Truth table specs, repeatable")
            ->required()
            ->take_all();
        cmd->add_option("--n", sweeper.n_values, "Quantum curve sizes, comma separated")
            ->required()
            ->delimiter(',');
        cmd->add_option("-r,--r", sweeper.r,
                        "Fixed clause density; omitted = estimate the threshold per table")
            ->each([&sweeper](const std::string&) { sweeper.has_r = true; });
        cmd->add_option("--n-probe", sweeper.n_probe, "Threshold probe size")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--samples", sweeper.samples, "Threshold instances per probe")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--target", sweeper.target, "Threshold satisfiable fraction")
            ->capture_default_str();
        cmd->add_option("--tol", sweeper.tol, "Threshold fraction tolerance")
            ->capture_default_str();
        cmd->add_option("--n-ref", sweeper.n_ref,
                        "Angle optimization size; omitted = midpoint of --n")
            ->check(CLI::PositiveNumber)
            ->each([&sweeper](const std::string&) { sweeper.has_n_ref = true; });
        cmd->add_option("--grid", sweeper.grid, "Angle grid points per axis")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--path", sweeper.path, "Clause polynomial path")->capture_default_str();
        cmd->add_option("--repetition", sweeper.repetition,
                        "Draw clause variables with or without repetition")
            ->capture_default_str();
        cmd->add_option("--classical-n", sweeper.classical_n,
                        "Classical median sizes, comma separated")
            ->delimiter(',');
        cmd->add_option("--classical-instances", sweeper.classical_instances,
                        "Instances per classical median")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        add_seed_flag(cmd, sweeper.seed);
        add_solver_flags(cmd, sweeper.solver);
        cmd->add_option("--jobs", sweeper.jobs, "Tables processed in parallel")
            ->capture_default_str();
        add_output_flags(cmd, sweeper.out);
        cmd->callback([&] { exit_code = cmd_sweep(emitter, sweeper); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code;
}
