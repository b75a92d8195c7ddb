#include <doctest.h>

#include "config.hpp"
#include "experiments.hpp"
#include "output.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lab;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("cocycle_unit_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string body(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    std::ostringstream rest;
    rest << in.rdbuf();
    return rest.str();
}

}  // namespace

TEST_CASE("config sections and typed lookups") {
    const Config cfg = Config::parse_string("experiment = apriori\n# comment\n[cocycle]\nr = 2 ; trailing\n"
                                            "[apriori]\nz = 0.05, 0.1\nflag = true\n");
    CHECK(cfg.get_string("experiment") == "apriori");
    CHECK(cfg.get_int("cocycle.r", 1) == 2);
    CHECK(cfg.get_doubles("apriori.z", {}) == std::vector<double>{0.05, 0.1});
    CHECK(cfg.get_bool("apriori.flag", false));
    CHECK(cfg.get_double("missing.key", 1.5) == 1.5);
    CHECK_NOTHROW(cfg.reject_unused());
}

TEST_CASE("config errors carry line and field") {
    try {
        (void)Config::parse_string("a = 1\n[s]\nb = 2\nb = 3\n", "dup.cfg");
        FAIL("duplicate key accepted");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 4);
        CHECK(e.field() == "s.b");
    }
    CHECK_THROWS_AS((void)Config::parse_string("[s\n"), ConfigError);
    CHECK_THROWS_AS((void)Config::parse_string("novalue =\n"), ConfigError);

    const Config cfg = Config::parse_string("x = 1\n\n[s]\ny = abc\nz = 3\n", "t.cfg");
    try {
        (void)cfg.get_double("s.y", 0.0);
        FAIL("non-numeric value accepted");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 4);
        CHECK(e.field() == "s.y");
    }
    (void)cfg.get_int("x", 0);
    try {
        cfg.reject_unused();
        FAIL("unused keys accepted");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 5);
        CHECK(e.field() == "s.z");
    }
    CHECK_THROWS_AS((void)cfg.get_choice("s.z", {"a", "b"}, "a"), ConfigError);
}

TEST_CASE("catalog lists every experiment with a fixed header") {
    const auto& cat = experiment_catalog();
    CHECK(cat.size() == 10);
    for (const auto& e : cat) CHECK_FALSE(e.columns.empty());
    CHECK(experiment_info("quantization").columns.front() == "n");
    CHECK_THROWS_AS((void)experiment_info("nope"), std::out_of_range);
}

TEST_CASE("exit codes") {
    CHECK(exit_code(Verdict::Pass) == 0);
    CHECK(exit_code(Verdict::GuardStop) == 2);
    CHECK(exit_code(Verdict::Fail) != 0);
    CHECK(exit_code(Verdict::Fail) != 1);
}

TEST_CASE("csv writer checks row width and stamps the first line") {
    const auto dir = temp_dir("csv");
    {
        CsvWriter w(dir / "t.csv", {"a", "b"}, "stamp");
        w.row({1L, 0.5});
        CHECK_THROWS((void)w.row({1L}));
    }
    std::ifstream in(dir / "t.csv");
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    CHECK(l1 == "# stamp");
    CHECK(l2 == "a,b");
    CHECK(l3 == "1,0.5");
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("same config and seed give identical csv bodies") {
    const std::string text = "experiment = cohomology-bench\nseed = 9\n[bench]\ntrials = 5\n";
    RunOptions o1, o2;
    o1.out_dir = temp_dir("det1");
    o2.out_dir = temp_dir("det2");
    const RunResult a = run_experiment(Config::parse_string(text), o1);
    const RunResult b = run_experiment(Config::parse_string(text), o2);
    CHECK(a.verdict == Verdict::Pass);
    CHECK(body(a.csv) == body(b.csv));
    CHECK_FALSE(body(a.csv).empty());
}

TEST_CASE("unknown keys are rejected before any output") {
    RunOptions o;
    o.out_dir = temp_dir("reject");
    CHECK_THROWS_AS((void)run_experiment(Config::parse_string("experiment = apriori\n[apriori]\nzz = 1\n"), o),
                    ConfigError);
    CHECK(std::filesystem::is_empty(*o.out_dir));
}

TEST_CASE("summary echoes the config") {
    RunOptions o;
    o.out_dir = temp_dir("summary");
    const RunResult r = run_experiment(Config::parse_string("experiment = apriori\n[apriori]\nz = 0.05\n"), o);
    std::ifstream in(r.summary);
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("experiment") == "apriori");
    CHECK(j.at("verdict") == "pass");
    CHECK(j.at("config").at("apriori.z") == "0.05");
    CHECK(j.at("rows") == 1);
}
