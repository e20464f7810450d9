#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cspqaoa/records.hpp"

using namespace cspqaoa;

TEST_CASE("run ids depend only on subcommand and parameters", "[records]") {
    Json params;
    params["table"] = "ksat:3";
    params["n"] = 10;
    std::string id = run_id("psuccess", params);
    REQUIRE(id.size() == 16);
    REQUIRE(id.find_first_not_of("0123456789abcdef") == std::string::npos);
    REQUIRE(run_id("psuccess", params) == id);

    Json reordered;
    reordered["n"] = 10;
    reordered["table"] = "ksat:3";
    REQUIRE(run_id("psuccess", reordered) != id);

    Json changed = params;
    changed["n"] = 11;
    REQUIRE(run_id("psuccess", changed) != id);
    REQUIRE(run_id("oracle", params) != id);
}

TEST_CASE("csv cells render json values verbatim", "[records]") {
    REQUIRE(csv_cell(Json(1.5)) == "1.5");
    REQUIRE(csv_cell(Json(2.0)) == "2.0");
    REQUIRE(csv_cell(Json(0.017924000956404045)) == "0.017924000956404045");
    REQUIRE(csv_cell(Json(42)) == "42");
    REQUIRE(csv_cell(Json(true)) == "true");
    REQUIRE(csv_cell(Json()) == "null");
    REQUIRE(csv_cell(Json("plain")) == "plain");
}

TEST_CASE("csv cells quote separators and quotes", "[records]") {
    REQUIRE(csv_cell(Json("a,b")) == "\"a,b\"");
    REQUIRE(csv_cell(Json("say \"hi\"")) == "\"say \"\"hi\"\"\"");
    REQUIRE(csv_cell(Json("line\nbreak")) == "\"line\nbreak\"");
    REQUIRE(csv_cell(Json("no special chars")) == "no special chars");
}

TEST_CASE("csv tables line up header and rows", "[records]") {
    std::string text = csv_table({"n", "p"}, {{Json(8), Json(0.5)}, {Json(10), Json(0.25)}});
    REQUIRE(text == "n,p\n8,0.5\n10,0.25\n");
    REQUIRE_THROWS_AS(csv_table({"n", "p"}, {{Json(8)}}), Error);
}

TEST_CASE("manifests carry the run identity and outputs", "[records]") {
    Json params;
    params["table"] = "nae:3";
    RunManifest manifest{"threshold", "cspqaoa threshold --table nae:3", params, 12.5,
                         {"out.csv"}};
    Json j = manifest.to_json();
    REQUIRE(j["tool"] == kToolName);
    REQUIRE(j["version"] == kVersion);
    REQUIRE(j["run_id"] == run_id("threshold", params));
    REQUIRE(j["subcommand"] == "threshold");
    REQUIRE(j["command_line"] == "cspqaoa threshold --table nae:3");
    REQUIRE(j["parameters"] == params);
    REQUIRE(j["wall_time_ms"].get<double>() == 12.5);
    REQUIRE(j["outputs"] == Json::array({"out.csv"}));
}

TEST_CASE("text files round-trip bytes", "[records]") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "cspqaoa-records-test.txt";
    std::string text = "a,b\n1,\"x\ny\"\n";
    write_text_file(path.string(), text);
    std::ifstream in(path, std::ios::binary);
    std::string read_back((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    fs::remove(path);
    REQUIRE(read_back == text);
}
