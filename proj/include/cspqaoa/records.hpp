#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cspqaoa/common.hpp"

namespace cspqaoa {

/// Insertion-ordered JSON keeps record layout stable across runs.
using Json = nlohmann::ordered_json;

/// FNV-1a over the canonical parameter text; identifies a run configuration.
inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

inline std::string run_id(const std::string& subcommand, const Json& parameters) {
    return strf("%016llx", static_cast<unsigned long long>(
                               fnv1a64(subcommand + '\n' + parameters.dump())));
}

/// CSV cell: JSON scalars are rendered exactly as their JSON text so the CSV
/// projection matches the JSON record byte for byte; cells needing quoting
/// are wrapped per RFC 4180.
inline std::string csv_cell(const Json& value) {
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<Json>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) out += ',';
        out += csv_cell(Json(header[i]));
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw Error("csv_table: row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out += ',';
            out += csv_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

/// What produced a data file: the command, its full effective parameters, and
/// the wall time.  Written next to the data so every record can point back to
/// it; the data files themselves carry no timing, keeping them byte-identical
/// across reruns of the same seeded command.
struct RunManifest {
    std::string subcommand;
    std::string command_line;
    Json parameters;
    double wall_time_ms = 0.0;
    std::vector<std::string> outputs;

    Json to_json() const {
        Json j;
        j["tool"] = kToolName;
        j["version"] = kVersion;
        j["run_id"] = run_id(subcommand, parameters);
        j["subcommand"] = subcommand;
        j["command_line"] = command_line;
        j["parameters"] = parameters;
        j["wall_time_ms"] = wall_time_ms;
        j["outputs"] = outputs;
        return j;
    }
};

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("could not open '" + path + "' for writing");
    out << text;
    if (!out) throw Error("could not write '" + path + "'");
}

}  // namespace cspqaoa
