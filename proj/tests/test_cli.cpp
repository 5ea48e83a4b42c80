#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "narg/commands.hpp"

using namespace narg;

namespace {

const std::string kData = NARG_TEST_DATA;

std::filesystem::path scratch(const std::string &name) {
    const auto dir = std::filesystem::temp_directory_path() / "narg_unit_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("boson config parsing") {
    const BosonConfig cfg = parse_boson_config(
        R"({"schema_version":1,"frequencies":[2,1],"lambda":0.1,"coupling":0.05,"D":[4,"full"]})");
    CHECK(cfg.model.n_modes() == 2);
    CHECK(cfg.model.dvr_points == 15);
    CHECK(cfg.model.lambdas(1) == 0.1);
    CHECK(cfg.model.couplings(0, 1) == 0.05);
    CHECK(cfg.model.couplings(0, 0) == 0.0);
    CHECK(cfg.retain == std::vector<Index>{4, 0});
    CHECK(cfg.n_levels == 16);

    CHECK_THROWS_AS(parse_boson_config(R"({"frequencies":[1]})"), Error);
    CHECK_THROWS_AS(parse_boson_config(R"({"schema_version":2,"frequencies":[1]})"), Error);
    CHECK_THROWS_AS(parse_boson_config(R"({"schema_version":1,"frequencies":[1],"typo":3})"), Error);
    CHECK_THROWS_AS(parse_boson_config(R"({"schema_version":1,"frequencies":[1,2],"lambdas":[0]})"), Error);
    CHECK_THROWS_AS(parse_boson_config("not json"), Error);
}

TEST_CASE("retain lists") {
    CHECK(parse_retain_list("4,8,full") == std::vector<Index>{4, 8, 0});
    CHECK(parse_retain_list("16") == std::vector<Index>{16});
    CHECK_THROWS_AS(parse_retain_list("8,4"), Error);
    CHECK_THROWS_AS(parse_retain_list("full,4"), Error);
    CHECK_THROWS_AS(parse_retain_list("x"), Error);
    CHECK_THROWS_AS(parse_retain_list(""), Error);
}

TEST_CASE("report rows, drift and CSV format") {
    RunReport report;
    report.add_levels(4, Vector{{-1.0, 0.5}}, Vector{{-1.2, 0.4}});
    report.add_levels(8, Vector{{-1.1, 0.45}}, Vector{{-1.2, 0.4}});
    REQUIRE(report.rows.size() == 4);
    CHECK(!report.rows[0].drift);
    CHECK(std::abs(*report.rows[2].drift - 0.1) < 1e-12);
    CHECK(std::abs(report.rows[1].gap - 1.5) < 1e-15);
    for (const ReportRow &r : report.rows)
        CHECK(std::abs(*r.abs_error() - std::abs(r.energy - *r.oracle)) < 1e-12);

    std::ostringstream csv;
    write_csv(csv, report);
    std::istringstream lines(csv.str());
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header == "D,level,energy,gap,oracle,abs_error,drift,correlation_fraction,n_expect");
    CHECK(first.rfind("4,0,-1.000000000000000e+00,0.000000000000000e+00,-1.200000000000000e+00,", 0) == 0);
    CHECK(first.substr(first.size() - 3) == ",,,");
    CHECK(to_json(report).find("\"drift\": null") != std::string::npos);
}

TEST_CASE("model hash is stable and content sensitive") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    const BosonModel a = BosonModel::uniform({2.0, 1.0}, 0.1, 0.0, 8);
    const BosonModel b = BosonModel::uniform({2.0, 1.0}, 0.1, 0.01, 8);
    CHECK(fnv1a_hex(canonical_model_json(a)) == fnv1a_hex(canonical_model_json(a)));
    CHECK(fnv1a_hex(canonical_model_json(a)) != fnv1a_hex(canonical_model_json(b)));
}

TEST_CASE("decoupled boson run reproduces harmonic sums") {
    BosonCommand cmd;
    cmd.config_path = kData + "/decoupled.json";
    std::ostringstream log;
    const RunReport report = run_boson(cmd, log);
    REQUIRE(report.rows.size() == 12);
    const double expected[] = {1.5, 2.5, 3.5, 3.5, 4.5, 4.5};
    for (const ReportRow &r : report.rows)
        CHECK(std::abs(r.energy - expected[r.level]) < 1e-6);
}

TEST_CASE("boson run with oracle fills the error columns") {
    BosonCommand cmd;
    cmd.config_path = kData + "/three_mode.json";
    cmd.oracle = true;
    std::ostringstream log;
    const RunReport report = run_boson(cmd, log);
    for (const ReportRow &r : report.rows) {
        REQUIRE(r.oracle);
        CHECK(r.energy >= *r.oracle - 1e-10 * std::abs(*r.oracle));
        if (r.retain == 0)
            CHECK(*r.abs_error() / std::abs(*r.oracle) < 1e-8);
    }
}

TEST_CASE("qchem run on a Hubbard chain") {
    const auto fcidump = scratch("hubbard4.fcidump");
    std::ostringstream err;
    REQUIRE(cmd_hubbard_fcidump(4, 1.0, 4.0, fcidump.string(), err) == 0);
    QchemCommand cmd;
    cmd.fcidump_path = fcidump.string();
    cmd.retain = {8, 0};
    cmd.oracle = true;
    cmd.mean_field_energy = -1.0;
    cmd.out = scratch("hubbard4").string();
    std::ostringstream log;
    REQUIRE(cmd_qchem(cmd, log, err) == 0);
    const RunReport report = run_qchem(cmd, log);
    REQUIRE(report.rows.size() == 2);
    CHECK(*report.rows[1].abs_error() < 1e-8);
    CHECK(std::abs(*report.rows[1].correlation_fraction - 1.0) < 1e-6);
    CHECK(std::abs(*report.rows[1].number_expectation - 4.0) < 1e-10);
    CHECK(slurp(cmd.out + ".csv").find("D,level") == 0);
    CHECK(slurp(cmd.out + ".json").find("\"model_hash\"") != std::string::npos);
}

TEST_CASE("letta artifacts pass the residual check") {
    BosonCommand cmd;
    cmd.config_path = kData + "/two_mode.json";
    cmd.letta = true;
    cmd.out = scratch("two_mode").string();
    std::ostringstream log, err;
    REQUIRE(cmd_boson(cmd, log, err) == 0);
    CHECK(cmd_letta_check(cmd.out + "_Dfull.letta.json", log, err) == 0);
    CHECK(cmd_letta_check(kData + "/corrupt.letta.json", log, err) == 1);
}

TEST_CASE("failures return a nonzero exit code") {
    std::ostringstream log, err;
    QchemCommand q;
    q.fcidump_path = kData + "/does_not_exist";
    q.out = scratch("missing").string();
    CHECK(cmd_qchem(q, log, err) != 0);
    CHECK(err.str().find("does_not_exist") != std::string::npos);
    BosonCommand b;
    b.config_path = kData + "/bad_schema.json";
    b.out = scratch("bad").string();
    CHECK(cmd_boson(b, log, err) != 0);
}

}
