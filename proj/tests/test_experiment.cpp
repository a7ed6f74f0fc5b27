#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>

#include "giv/errors.hpp"
#include "giv/experiment.hpp"
#include "giv/rng.hpp"

using namespace giv;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

json two_var_system(const std::string& f_name = "cosine_squared",
                    double separation = kPi / 2.0) {
    return {{"type", "arrow"},
            {"symmetry_level", "isotropic"},
            {"directions", {{"A", 0.0}, {"B", separation}}},
            {"f", f_name}};
}

ExperimentConfig parse(const json& j, bool degrees = false) {
    return ExperimentConfig::from_json(j, degrees, std::nullopt);
}

double cell(const Report& report, std::size_t row, std::size_t col) {
    return std::get<double>(report.rows.at(row).at(col));
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_AS(parse({{"experiment", "probability_table"},
                           {"system", two_var_system()},
                           {"surprise", 1}}),
                    InvalidConfig);
    json sys = two_var_system();
    sys["extra"] = true;
    CHECK_THROWS_AS(
        parse({{"experiment", "probability_table"}, {"system", sys}}),
        InvalidConfig);
    CHECK_THROWS_AS(parse({{"experiment", "probability_table"},
                           {"system", two_var_system()},
                           {"grid", {{"points", 5}, {"step", 2}}}}),
                    InvalidConfig);
    // Keys that belong to other experiments are unknown here.
    CHECK_THROWS_AS(parse({{"experiment", "probability_table"},
                           {"system", two_var_system()},
                           {"trials", 10}}),
                    InvalidConfig);
}

TEST_CASE("experiment name is required and must match an override") {
    CHECK_THROWS_AS(parse({{"seed", 1}}), InvalidConfig);
    CHECK_THROWS_AS(parse({{"experiment", "mystery"}}), InvalidConfig);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json({{"experiment", "sample"}}, false,
                                    ExperimentKind::isotropy_scan),
        InvalidConfig);
    ExperimentConfig cfg = ExperimentConfig::from_json(
        {{"system", two_var_system()}}, false,
        ExperimentKind::probability_table);
    CHECK(cfg.kind() == ExperimentKind::probability_table);
}

TEST_CASE("scalar fields are validated") {
    json base = {{"experiment", "sample"},
                 {"system", two_var_system()},
                 {"variable", "A"}};
    json bad_seed = base;
    bad_seed["seed"] = -4;
    CHECK_THROWS_AS(parse(bad_seed), InvalidConfig);
    json frac_seed = base;
    frac_seed["seed"] = 1.5;
    CHECK_THROWS_AS(parse(frac_seed), InvalidConfig);
    json bad_trials = base;
    bad_trials["trials"] = 0;
    CHECK_THROWS_AS(parse(bad_trials), InvalidConfig);

    CHECK_THROWS_AS(parse({{"experiment", "spin_half"},
                           {"grid", {{"points", 1}}}}),
                    InvalidConfig);
    CHECK_THROWS_AS(parse({{"experiment", "spin_half"},
                           {"grid", {{"min", 1.0}, {"max", 0.5}}}}),
                    InvalidConfig);
    CHECK_THROWS_AS(parse({{"experiment", "isotropy_scan"},
                           {"tolerance", 0.0}}),
                    InvalidConfig);
    CHECK_THROWS_AS(parse({{"experiment", "isotropy_scan"},
                           {"candidates", json::array()}}),
                    InvalidConfig);
    CHECK_THROWS_AS(parse({{"experiment", "isotropy_scan"},
                           {"candidates", {"linear", "no_such"}}}),
                    InvalidConfig);
}

TEST_CASE("system requirements per experiment") {
    CHECK_THROWS_AS(parse({{"experiment", "probability_table"}}),
                    InvalidConfig);
    CHECK_THROWS_AS(parse({{"experiment", "sample"}, {"variable", "A"}}),
                    InvalidConfig);
    json expl = {
        {"type", "explicit"},
        {"variables",
         {{{"id", "a"}, {"outcome_labels", {"p", "m"}}},
          {{"id", "b"}, {"outcome_labels", {"p", "m"}}}}},
        {"embeddings",
         {{{"space", "a"},
           {"of", "b"},
           {"matrix", {{1.0, 0.0}, {0.0, 1.0}}}},
          {{"space", "b"},
           {"of", "a"},
           {"matrix", {{1.0, 0.0}, {0.0, 1.0}}}}}}};
    // Explicit systems work for collapse but not for orientation sweeps.
    CHECK_NOTHROW(parse({{"experiment", "collapse_report"}, {"system", expl}}));
    CHECK_THROWS_AS(
        parse({{"experiment", "probability_table"}, {"system", expl}}),
        InvalidConfig);
}

TEST_CASE("degrees mode converts config angles") {
    json j = {{"experiment", "probability_table"},
              {"system",
               {{"type", "arrow"},
                {"symmetry_level", "isotropic"},
                {"directions", {{"A", 0.0}, {"B", 90.0}}},
                {"f", "cosine_squared"}}},
              {"grid", {{"points", 3}, {"min", 0.0}, {"max", 180.0}}}};
    ExperimentConfig cfg = parse(j, true);
    CHECK(cfg.canonical()["system"]["directions"]["B"].get<double>() ==
          doctest::Approx(kPi / 2.0).epsilon(1e-15));
    CHECK(cfg.canonical()["grid"]["max"].get<double>() ==
          doctest::Approx(kPi).epsilon(1e-15));
}

TEST_CASE("canonical form is insensitive to key order") {
    std::string text_a = R"({"experiment":"probability_table",
        "system":{"type":"arrow","symmetry_level":"isotropic",
                  "directions":{"A":0.0,"B":1.0},"f":"linear"},
        "grid":{"points":11}})";
    std::string text_b = R"({"grid":{"points":11},
        "system":{"f":"linear","directions":{"B":1.0,"A":0.0},
                  "symmetry_level":"isotropic","type":"arrow"},
        "experiment":"probability_table"})";
    ExperimentConfig a = parse(json::parse(text_a));
    ExperimentConfig b = parse(json::parse(text_b));
    CHECK(config_hash_hex(a.canonical()) == config_hash_hex(b.canonical()));

    ExperimentConfig c = parse(json::parse(text_a));
    c.override_seed(9);
    CHECK(config_hash_hex(a.canonical()) != config_hash_hex(c.canonical()));
}

TEST_CASE("probability_table sweeps the orientation grid") {
    json j = {{"experiment", "probability_table"},
              {"system", two_var_system()},
              {"grid", {{"points", 5}}}};
    RunResult result = run(parse(j));
    CHECK(result.exit_code == 0);
    REQUIRE(result.report.columns.size() == 5);
    CHECK(result.report.columns[0] == "orientation_rad");
    CHECK(result.report.columns[1] == "p_A_plus");
    REQUIRE(result.report.rows.size() == 5);
    CHECK(cell(result.report, 0, 0) == 0.0);
    CHECK(cell(result.report, 4, 0) == doctest::Approx(kPi));
    // Orientation along A gives a certain A outcome.
    CHECK(cell(result.report, 0, 1) == doctest::Approx(1.0));
    for (const auto& row : result.report.rows) {
        CHECK(std::get<double>(row[1]) + std::get<double>(row[2]) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("defect_scan covers candidates and explicit pairs") {
    json j = {{"experiment", "defect_scan"},
              {"candidates", {"quadratic"}},
              {"f_pairs",
               {{{"plus", "cosine_squared"}, {"minus", "linear"}}}},
              {"grid", {{"points", 7}}}};
    RunResult result = run(parse(j));
    REQUIRE(result.report.rows.size() == 14);
    bool saw_quadratic_closure = false;
    bool saw_pair_defect = false;
    for (const auto& row : result.report.rows) {
        const std::string& series = std::get<std::string>(row[0]);
        double theta = std::get<double>(row[1]);
        if (series == "quadratic" && std::abs(theta - kPi / 2.0) < 1e-9) {
            CHECK(std::get<double>(row[4]) ==
                  doctest::Approx(0.5).epsilon(1e-12));
            saw_quadratic_closure = true;
        }
        // The two profiles cross at the quarter turn, so probe a third turn,
        // where their values differ and both defects are visibly nonzero.
        if (series == "cosine_squared|linear" &&
            std::abs(theta - kPi / 3.0) < 1e-9) {
            CHECK(std::abs(std::get<double>(row[2])) > 1e-3);
            CHECK(std::get<double>(row[3]) > 1e-3);
            saw_pair_defect = true;
        }
    }
    CHECK(saw_quadratic_closure);
    CHECK(saw_pair_defect);
}

TEST_CASE("interference skips shared-axis separations and peaks at a quarter turn") {
    json j = {{"experiment", "interference"},
              {"system", two_var_system()},
              {"grid", {{"points", 5}}}};
    RunResult result = run(parse(j));
    // Endpoints 0 and pi are shared-axis layouts, so 5 points leave 3 rows.
    REQUIRE(result.report.rows.size() == 3);
    CHECK(result.report.meta["max_abs_deviation"].get<double>() ==
          doctest::Approx(0.5).epsilon(1e-12));
    for (const auto& row : result.report.rows) {
        CHECK(std::get<double>(row[1]) == 0.0);
        double theta = std::get<double>(row[0]);
        CHECK(std::get<double>(row[2]) ==
              doctest::Approx(std::sin(theta) * std::sin(theta) / 2.0)
                  .epsilon(1e-12));
    }
}

TEST_CASE("collapse_report exit codes follow the merge outcome") {
    json ok = {{"experiment", "collapse_report"},
               {"system", two_var_system()}};
    RunResult good = run(parse(ok));
    CHECK(good.exit_code == 0);
    CHECK(good.report.meta["status"] == "collapsed");
    CHECK(good.report.meta["reference"] == "A");

    json bad = {{"experiment", "collapse_report"},
                {"system",
                 {{"type", "arrow"},
                  {"symmetry_level", "isotropic"},
                  {"directions",
                   {{"A", 0.0}, {"B", kPi / 3.0}, {"C", 2.0 * kPi / 3.0}}},
                  {"f", "linear"}}}};
    RunResult failed = run(parse(bad));
    CHECK(failed.exit_code == 3);
    CHECK(failed.report.meta["status"] == "inconsistent_transitions");
    CHECK(failed.report.meta["worst_defect"].get<double>() > 1e-2);
    // The pairwise table is still reported.
    CHECK(failed.report.rows.size() == 6);
}

TEST_CASE("sample reports are byte-stable for a fixed seed") {
    json j = {{"experiment", "sample"},
              {"system", two_var_system()},
              {"variable", "B"},
              {"orientation", 1.0},
              {"trials", 5000},
              {"seed", 11}};
    RunResult a = run(parse(j));
    RunResult b = run(parse(j));
    CHECK(report_to_csv(a.report) == report_to_csv(b.report));
    CHECK(report_to_json(a.report) == report_to_json(b.report));

    json other = j;
    other["seed"] = 12;
    RunResult c = run(parse(other));
    CHECK(report_to_csv(a.report) != report_to_csv(c.report));
    CHECK(a.report.meta["seed"] == 11);
    CHECK(a.report.meta["rng"] == "pcg32");
}

TEST_CASE("spin_half rows match the closed form") {
    json j = {{"experiment", "spin_half"}, {"grid", {{"points", 31}}}};
    RunResult result = run(parse(j));
    REQUIRE(result.report.rows.size() == 31);
    for (const auto& row : result.report.rows) {
        CHECK(std::get<double>(row[3]) <= 1e-12);
    }
    CHECK(result.report.meta["commutator_residual"].get<double>() <= 1e-15);
    CHECK(result.report.meta["max_rotation_mismatch"].get<double>() <= 1e-12);
}

TEST_CASE("isotropy_scan singles out the cosine profile") {
    json j = {{"experiment", "isotropy_scan"}, {"grid", {{"points", 61}}}};
    RunResult result = run(parse(j));
    REQUIRE(result.report.rows.size() == 3);
    json passing = result.report.meta["passing"];
    REQUIRE(passing.size() == 1);
    CHECK(passing[0] == "cosine_squared");
}

TEST_CASE("csv serialization is plain and headed") {
    Report report;
    report.columns = {"name", "value", "count"};
    report.rows.push_back(
        {ReportValue(std::string("x")), ReportValue(0.1),
         ReportValue(static_cast<std::int64_t>(3))});
    std::string csv = report_to_csv(report);
    CHECK(csv == "name,value,count\nx,0.10000000000000001,3\n");

    Report ragged = report;
    ragged.rows.push_back({ReportValue(1.0)});
    CHECK_THROWS_AS(report_to_csv(ragged), Error);
}

TEST_CASE("doubles survive a text round trip") {
    Pcg32 rng(5, 5);
    for (int i = 0; i < 500; ++i) {
        double x = (rng.next_double() - 0.5) * std::ldexp(1.0, i % 64 - 32);
        std::string text = format_double(x);
        CHECK(std::strtod(text.c_str(), nullptr) == x);
    }
}

TEST_CASE("json reports carry meta and typed rows") {
    json j = {{"experiment", "isotropy_scan"}, {"grid", {{"points", 11}}}};
    RunResult result = run(parse(j));
    json doc = json::parse(report_to_json(result.report));
    CHECK(doc["meta"]["experiment"] == "isotropy_scan");
    CHECK(doc["meta"]["config_hash"].is_string());
    REQUIRE(doc["rows"].size() == 3);
    CHECK(doc["rows"][0]["f_name"].is_string());
    CHECK(doc["rows"][0]["max_composition_defect"].is_number());
    CHECK(doc["rows"][0]["passes"].is_number_integer());
}

TEST_CASE("plot data uses the long series format") {
    json grid_j = {{"experiment", "probability_table"},
                   {"system", two_var_system()},
                   {"grid", {{"points", 3}}}};
    RunResult grid_run = run(parse(grid_j));
    std::string plot = emit_plot_data(grid_run.report);
    CHECK(plot.rfind("series,x,y\n", 0) == 0);
    // 4 probability columns times 3 grid rows.
    CHECK(std::count(plot.begin(), plot.end(), '\n') == 13);
    CHECK(plot.find("p_A_plus,0,1\n") != std::string::npos);

    json iso_j = {{"experiment", "isotropy_scan"}, {"grid", {{"points", 11}}}};
    RunResult iso_run = run(parse(iso_j));
    std::string iso_plot = emit_plot_data(iso_run.report);
    CHECK(iso_plot.find("linear,0,") != std::string::npos);
    CHECK(iso_plot.find("linear,1,") != std::string::npos);
}

TEST_CASE("fnv-1a matches the published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("text files round trip and failures surface") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "giv_lab_io_test.txt";
    write_text_file(path.string(), "line one\nline two\n");
    CHECK(read_text_file(path.string()) == "line one\nline two\n");
    fs::remove(path);
    CHECK_THROWS_AS(read_text_file((path / "missing").string()), IoFailure);
}

}  // TEST_SUITE
