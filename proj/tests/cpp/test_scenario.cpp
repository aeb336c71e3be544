#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "relrate/errors.hpp"
#include "relrate/scenario.hpp"

using namespace relrate;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    fs::path dir = fs::temp_directory_path() / "relrate_scenario_tests";
    fs::create_directories(dir);
    fs::path file = dir / name;
    std::ofstream(file) << content;
    return file;
}

}  // namespace

TEST_CASE("built-in static scenario passes") {
    RunReport rep = run_builtin("static", {});
    CHECK(rep.all_pass());
    CHECK(rep.checks.size() >= 5);
    CHECK_FALSE(rep.tables.empty());
}

TEST_CASE("built-in decompose scenario passes") {
    RunReport rep = run_builtin("decompose", {});
    CHECK(rep.all_pass());
    bool found = false;
    for (const auto& t : rep.tables)
        if (t.name == "decompose_nodes") found = true;
    CHECK(found);
}

TEST_CASE("unknown builtin command is rejected") {
    CHECK_THROWS_AS(run_builtin("nonsense", {}), validation_error);
}

TEST_CASE("scenario files are validated strictly") {
    auto ok = write_temp("ok.json",
                         R"({"version":1,"kind":"static","p_values":[0.5],)"
                         R"("tolerance":1e-12})");
    RunReport rep = run_scenario_file(ok.string(), {});
    CHECK(rep.all_pass());

    // an expected kind must match the file
    CHECK(run_scenario_file(ok.string(), {}, "static").all_pass());
    CHECK_THROWS_AS(run_scenario_file(ok.string(), {}, "decompose"), validation_error);

    auto unknown_key = write_temp("unknown.json",
                                  R"({"version":1,"kind":"static","oops":3})");
    CHECK_THROWS_AS(run_scenario_file(unknown_key.string(), {}), validation_error);

    auto no_version = write_temp("nover.json", R"({"kind":"static"})");
    CHECK_THROWS_AS(run_scenario_file(no_version.string(), {}), validation_error);

    auto bad_version = write_temp("badver.json",
                                  R"({"version":2,"kind":"static"})");
    CHECK_THROWS_AS(run_scenario_file(bad_version.string(), {}), validation_error);

    auto bad_kind = write_temp("badkind.json",
                               R"({"version":1,"kind":"frobnicate"})");
    CHECK_THROWS_AS(run_scenario_file(bad_kind.string(), {}), validation_error);

    auto not_json = write_temp("bad.json", "{[");
    CHECK_THROWS_AS(run_scenario_file(not_json.string(), {}), validation_error);

    CHECK_THROWS_AS(run_scenario_file("/no/such/file.json", {}), validation_error);

    // nested objects are validated too
    auto nested = write_temp("nested.json",
                             R"({"version":1,"kind":"decompose",)"
                             R"("tree":{"type":"explicit","parents":[-1,0,0],)"
                             R"("probabilities":[1.0,0.5,0.5],"bogus":1},)"
                             R"("measure":[0.0,0.5,0.5]})");
    CHECK_THROWS_AS(run_scenario_file(nested.string(), {}), validation_error);
}

TEST_CASE("report outputs are written and well formed") {
    RunReport rep = run_builtin("static", {});
    fs::path out = fs::temp_directory_path() / "relrate_scenario_out";
    fs::remove_all(out);
    write_outputs(rep, out.string());

    REQUIRE(fs::exists(out / "report.json"));
    REQUIRE(fs::exists(out / "summary.txt"));
    REQUIRE(fs::exists(out / "tables" / "counterexamples.csv"));

    std::ifstream in(out / "report.json");
    nlohmann::json doc = nlohmann::json::parse(in);
    CHECK(doc.at("version") == 1);
    CHECK(doc.at("pass") == true);
    CHECK(doc.at("checks").is_array());
    CHECK(doc.at("checks").size() == rep.checks.size());

    std::string summary = render_summary(rep);
    CHECK(summary.find("PASS") != std::string::npos);
    CHECK(summary.find("OK") != std::string::npos);
    CHECK(summary.find("FAIL ") == std::string::npos);
}

TEST_CASE("tolerance scaling loosens every bound") {
    RunOptions opt;
    opt.tol_scale = 1000.0;
    RunReport rep = run_builtin("static", opt);
    CHECK(rep.all_pass());
    CHECK(rep.tol_scale == 1000.0);
}
