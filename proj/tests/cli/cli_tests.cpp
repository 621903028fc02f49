#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "lorenz/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = LORENZ_CLI;
const std::string kFixtures = LORENZ_FIXTURES;

struct Result {
    int status = -1;
    std::string out;
};

Result run(const std::string& args, const std::string& env = "")
{
    const std::string command = env + (env.empty() ? "" : " ") + kCli + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    std::size_t got = 0;
    while ((got = fread(buffer, 1, sizeof buffer, pipe)) > 0) {
        r.out.append(buffer, got);
    }
    const int status = pclose(pipe);
    r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string work(const std::string& name)
{
    const fs::path dir = fs::current_path() / "cli_work";
    fs::create_directories(dir);
    return (dir / name).string();
}

std::string slurp(const std::string& path)
{
    return lorenz::read_text(path);
}

} // namespace

TEST_CASE("estimate on the three-unit fixture")
{
    const std::string curve = work("three_curve.csv");
    const Result r = run("estimate --sample " + kFixtures + "/three_units.csv --out " + curve);
    CHECK(r.status == 0);
    CHECK(r.out == "gini 0.2222222222222222\n");
    CHECK(slurp(curve) == "p,L\n0,0\n0.3333333333333333,0.16666666666666666\n0.6666666666666666,0.5\n1,1\n");

    const Result w = run("estimate --sample " + kFixtures + "/three_units_weighted.csv --out " + curve);
    CHECK(w.status == 0);
    CHECK(slurp(curve) == "p,L\n0,0\n0.2,0.09090909090909091\n0.6,0.45454545454545453\n1,1\n");
}

TEST_CASE("exit codes")
{
    CHECK(run("").status == 2);
    CHECK(run("estimate --bogus-flag").status == 2);
    CHECK(run("frobnicate").status == 2);
    CHECK(run("sample --population " + kFixtures + "/three_units.csv --n 1 --seed 1 --design cube").status == 2);
    CHECK(run("simulate --reps 10 --M 50").status == 2); // --seed is mandatory
    CHECK(run("estimate --sample " + kFixtures + "/zero_income.csv").status == 3);
    CHECK(run("estimate --sample /nonexistent/sample.csv").status == 3);
    CHECK(run("estimate --sample " + kFixtures + "/three_units.csv --out /nonexistent/curve.csv").status == 3);
    CHECK(run("--help").status == 0);
}

TEST_CASE("pipeline outputs are byte-identical across runs and worker counts")
{
    const std::string pop = work("pop.csv");
    REQUIRE(run("generate --seed 7 --N 400 --out " + pop).status == 0);
    const std::string sample = work("sample.csv");
    REQUIRE(run("sample --population " + pop + " --design sampford --n 80 --seed 8 --out " + sample).status == 0);
    const std::string sample2 = work("sample2.csv");
    REQUIRE(run("sample --population " + pop + " --design pareto --n 80 --seed 9 --out " + sample2).status == 0);

    const std::string pop_again = work("pop_again.csv");
    REQUIRE(run("generate --seed 7 --N 400 --out " + pop_again).status == 0);
    CHECK(slurp(pop) == slurp(pop_again));

    struct Command {
        std::string name;
        std::string args;
    };
    const Command commands[] = {
        {"band", "band --sample " + sample + " --N 400 --M 120 --seed 3 --resample-design sampford"},
        {"ci_normal", "gini-ci --sample " + sample + " --N 400 --M 120 --seed 3 --method normal"},
        {"ci_pivot", "gini-ci --sample " + sample + " --N 400 --M 120 --seed 3 --method pivot"},
        {"dominance", "dominance --sample1 " + sample + " --N1 400 --sample2 " + sample2 +
                          " --N2 400 --M 120 --seed 3"},
        {"estimate", "estimate --sample " + sample + " --grid 50"},
    };
    for (const Command& c : commands) {
        CAPTURE(c.name);
        const std::string a = work(c.name + "_a.csv");
        const std::string b = work(c.name + "_b.csv");
        const std::string d = work(c.name + "_c.csv");
        const Result ra = run(c.args + " --out " + a, "LORENZ_WORKERS=1");
        const Result rb = run(c.args + " --out " + b, "LORENZ_WORKERS=1");
        const Result rc = run(c.args + " --out " + d, "LORENZ_WORKERS=3");
        REQUIRE(ra.status == 0);
        REQUIRE(rb.status == 0);
        REQUIRE(rc.status == 0);
        CHECK(ra.out == rb.out);
        CHECK(ra.out == rc.out);
        CHECK(slurp(a) == slurp(b));
        CHECK(slurp(a) == slurp(d));
        CHECK(!slurp(a).empty());
    }
}

TEST_CASE("simulate smoke run and determinism")
{
    const std::string args = "simulate --seed 5 --reps 10 --M 50 --N-list 100,200";
    const std::string csv1 = work("sim1.csv"), json1 = work("sim1.json");
    const std::string csv2 = work("sim2.csv"), json2 = work("sim2.json");
    REQUIRE(run(args + " --csv " + csv1 + " --json " + json1, "LORENZ_WORKERS=1").status == 0);
    REQUIRE(run(args + " --csv " + csv2 + " --json " + json2, "LORENZ_WORKERS=4").status == 0);
    CHECK(slurp(csv1) == slurp(csv2));
    CHECK(slurp(json1) == slurp(json2));

    const lorenz::CoverageReport report =
        lorenz::coverage_report_from_json(nlohmann::json::parse(slurp(json1)));
    CHECK(report.cells.size() == 4);
    for (const lorenz::CellReport& cell : report.cells) {
        CHECK(cell.ok());
        CHECK(cell.band_super.trials == 10);
        CHECK(cell.band_super.estimate() >= 0.0);
        CHECK(cell.band_super.estimate() <= 1.0);
    }
    CHECK(report.config.seed == 5);
    CHECK(report.config.reps == 10);
    CHECK(run("simulate --seed 5 --reps 2 --M 50 --csv /nonexistent/x.csv --json /nonexistent/x.json").status == 3);
}

TEST_CASE("simulate reads a JSON config")
{
    const std::string config = work("config.json");
    lorenz::write_text(config, R"({"N_list": [120], "designs": ["srswor"], "reps": 4, "M": 30, "reference_size": 10000})");
    const std::string csv = work("cfg.csv"), json = work("cfg.json");
    REQUIRE(run("simulate --seed 1 --config " + config + " --csv " + csv + " --json " + json).status == 0);
    CHECK(slurp(csv).rfind("statistic,srswor_N120_coverage,srswor_N120_se,srswor_N120_width\n", 0) == 0);

    lorenz::write_text(config, R"({"reps": 0})");
    CHECK(run("simulate --seed 1 --config " + config + " --csv " + csv + " --json " + json).status == 2);
    lorenz::write_text(config, "{not json");
    CHECK(run("simulate --seed 1 --config " + config + " --csv " + csv + " --json " + json).status == 2);
}
