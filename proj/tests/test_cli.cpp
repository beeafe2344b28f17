#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "adisweep/idf.hpp"
#include "adisweep/io.hpp"
#include "adisweep/model.hpp"

using namespace adisweep;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nlohmann::ordered_json;

namespace {

std::filesystem::path work_dir() {
    static std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() /
                 ("adisweep_cli_tests_" + std::to_string(::getpid()));
        std::filesystem::remove_all(d);
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

struct CliResult {
    int code;
    std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    auto capture = work_dir() / ("cli_output_" + std::to_string(counter++) + ".txt");
    std::string cmd = "cd " + work_dir().string() + " && " + env_prefix + " " +
                      ADISWEEP_CLI_PATH + " " + args + " > " + capture.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return {code, io::read_text(capture)};
}

ordered_json read_json(const std::string& name) {
    return ordered_json::parse(io::read_text(work_dir() / name));
}

std::vector<std::string> lines_of(const std::string& name) {
    std::string text = io::read_text(work_dir() / name);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

const ModelParams kParams{0.2, 0.1};

} // namespace

TEST_CASE("cli help lists every subcommand") {
    CliResult r = run_cli("--help");
    CHECK(r.code == 0);
    for (const char* name :
         {"fixed-points", "sweep", "hysteresis", "berry", "idf-check", "ensemble"})
        CHECK_THAT(r.output, ContainsSubstring(name));
}

TEST_CASE("cli maps argument mistakes to exit code 2") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("sweep --bogus 1").code == 2);
    CHECK(run_cli("sweep --initial-mode Sideways").code == 2);

    CliResult bad = run_cli("sweep --c 0.1 --delta 0.1 --speed 5e-4");
    CHECK(bad.code == 2);
    CHECK_THAT(bad.output, ContainsSubstring("no bifurcation regime"));
}

TEST_CASE("cli maps an uncommitted crossing to exit code 4") {
    CliResult r = run_cli("sweep --speed 0.05");
    CHECK(r.code == 4);
    CHECK_THAT(r.output, ContainsSubstring("undecided branch"));
}

TEST_CASE("cli maps domain failures to exit code 3") {
    CliResult r = run_cli("ensemble --radius 2.0 --samples 16");
    CHECK(r.code == 3);
    CHECK_THAT(r.output, ContainsSubstring("numerical error"));
}

TEST_CASE("cli fixed-points emits the lattice with the symmetric triple") {
    CliResult r = run_cli("fixed-points --grid-n 11 --out fp.csv");
    CHECK(r.code == 0);
    CHECK_THAT(r.output, ContainsSubstring("25 rows"));

    io::Csv table = io::parse_csv(io::read_text(work_dir() / "fp.csv"));
    REQUIRE(table.cells.size() == 25);
    int at_zero = 0;
    for (const auto& row : table.cells)
        if (io::parse_double(row[0]) == 0.0) ++at_zero;
    CHECK(at_zero == 3);
}

TEST_CASE("cli sweep emits a trajectory and a faithful summary") {
    CliResult r = run_cli("sweep --speed 5e-4 --out s1.csv --summary s1.json");
    CHECK(r.code == 0);
    CHECK_THAT(r.output, ContainsSubstring("branch=Left"));

    ordered_json j = read_json("s1.json");
    CHECK(j.at("command") == "sweep");
    const ordered_json& cfg = j.at("config");
    CHECK(cfg.at("c").get<double>() == 0.2);
    CHECK(cfg.at("delta").get<double>() == 0.1);
    CHECK(cfg.at("dt").get<double>() == 0.05);
    CHECK(cfg.at("stride").get<std::uint64_t>() == 1);
    CHECK(cfg.at("r_from").get<double>() == -0.25);
    CHECK(cfg.at("r_to").get<double>() == 0.25);
    CHECK(cfg.at("speed").get<double>() == 5e-4);
    CHECK(cfg.at("initial_mode") == "OnFixedPoint");

    const ordered_json& res = j.at("results");
    CHECK(res.at("branch") == "Left");
    CHECK_THAT(res.at("q_at_r0").get<double>(), WithinAbs(-0.8532529108097459, 1e-5));
    CHECK_THAT(res.at("idf_prediction_at_start").at("mean_dq").get<double>(),
               WithinRel(closed_form_mean_dq(-0.25, 5e-4, kParams), 1e-12));
    CHECK(res.at("final").at("step_count").get<std::uint64_t>() == 20000);

    auto rows = lines_of("s1.csv");
    REQUIRE(rows.size() == 20002);
    CHECK(rows.front() == "t,r,q,p,energy,dq,dp");
    CHECK(res.at("sample_count").get<std::size_t>() == 20001);
}

TEST_CASE("cli re-run from the echoed config is byte-identical") {
    REQUIRE(run_cli("sweep --speed 5e-4 --out s1.csv --summary s1.json").code == 0);
    std::string csv_before = io::read_text(work_dir() / "s1.csv");
    std::string json_before = io::read_text(work_dir() / "s1.json");

    CliResult r = run_cli("sweep --config s1.json");
    CHECK(r.code == 0);
    CHECK(io::read_text(work_dir() / "s1.csv") == csv_before);
    CHECK(io::read_text(work_dir() / "s1.json") == json_before);
}

TEST_CASE("cli config files override flags and reject unknown keys") {
    io::atomic_write_text(work_dir() / "fp_cfg.json",
                          "{\"grid_n\": 3, \"out\": \"fp3.csv\"}\n");
    CliResult r = run_cli("fixed-points --grid-n 7 --config fp_cfg.json");
    CHECK(r.code == 0);
    io::Csv table = io::parse_csv(io::read_text(work_dir() / "fp3.csv"));
    CHECK(table.cells.size() == 5);  // single, triple at 0, single

    io::atomic_write_text(work_dir() / "bad_cfg.json", "{\"grid_m\": 3}\n");
    CliResult bad = run_cli("fixed-points --config bad_cfg.json");
    CHECK(bad.code == 2);
    CHECK_THAT(bad.output, ContainsSubstring("unknown config key"));

    io::atomic_write_text(work_dir() / "broken.json", "not json at all\n");
    CHECK(run_cli("fixed-points --config broken.json").code == 2);
}

TEST_CASE("cli resume splices a run bit-identically") {
    REQUIRE(run_cli("sweep --speed 5e-4 --out s1.csv --summary s1.json").code == 0);
    CliResult head = run_cli("sweep --speed 5e-4 --r-to -0.1 --out head.csv --summary head.json");
    CHECK(head.code == 0);
    ordered_json hj = read_json("head.json");
    CHECK(hj.at("results").at("branch") == "Undecided");
    CHECK(hj.at("results").at("q_at_r0").is_null());
    CHECK(hj.at("results").at("final").at("step_count").get<std::uint64_t>() == 6000);

    CliResult tail =
        run_cli("sweep --resume head.json --r-to 0.25 --out tail.csv --summary tail.json");
    CHECK(tail.code == 0);

    ordered_json tj = read_json("tail.json");
    ordered_json fj = read_json("s1.json");
    CHECK(tj.at("config").at("r_from").get<double>() == -0.25);
    CHECK(tj.at("config").at("r_to").get<double>() == 0.25);
    CHECK(tj.at("results").at("final") == fj.at("results").at("final"));
    CHECK(tj.at("results").at("branch") == fj.at("results").at("branch"));
    CHECK(tj.at("results").at("q_at_r0").get<double>() ==
          fj.at("results").at("q_at_r0").get<double>());

    // The spliced trajectory file is the tail of the straight-through file.
    auto full_rows = lines_of("s1.csv");
    auto tail_rows = lines_of("tail.csv");
    REQUIRE(full_rows.size() == 20002);
    REQUIRE(tail_rows.size() == 14002);
    CHECK(tail_rows.front() == full_rows.front());
    for (std::size_t i = 1; i < tail_rows.size(); ++i)
        CHECK(tail_rows[i] == full_rows[i + 6000]);

    CHECK(run_cli("sweep --resume head.json --config s1.json").code == 2);
    CHECK(run_cli("sweep --resume head.csv").code == 2);
}

TEST_CASE("cli berry results do not depend on the thread count") {
    CliResult one = run_cli("berry --c-values 0.2,0.25 --speed 1e-4 --summary b1.json",
                            "ADISWEEP_THREADS=1");
    CHECK(one.code == 0);
    CliResult three = run_cli("berry --c-values 0.2,0.25 --speed 1e-4 --summary b3.json",
                              "ADISWEEP_THREADS=3");
    CHECK(three.code == 0);

    ordered_json j1 = read_json("b1.json");
    ordered_json j3 = read_json("b3.json");
    CHECK(j1.at("results") == j3.at("results"));
    REQUIRE(j1.at("results").size() == 2);
    CHECK(j1.at("results")[0].at("c").get<double>() == 0.2);
    CHECK(j1.at("results")[1].at("c").get<double>() == 0.25);
}
