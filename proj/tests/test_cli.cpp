#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mwlp/config.hpp"
#include "mwlp/parallel.hpp"
#include "mwlp/runner.hpp"

using namespace mwlp;
namespace fs = std::filesystem;

namespace {

bool has_error(const Validation& v, const std::string& needle) {
    for (const auto& e : v.errors)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

// Small grids so every command finishes in about a second.
const char* kSmall = R"(
n = 1
p = 1
grid.T = 32
grid.m = 256
cubes.j_min = -3
cubes.j_max = 3
cubes.X = 8
cubes.q = 16
corpus.size = 6
corpus.R_list = 0.5, 1, 2
sampling.fields = 3
besov.psi.j_lo = -3
besov.psi.j_hi = 3
besov.phi.j_lo = -3
besov.phi.j_hi = 3
besov.T = 256
besov.m = 4096
besov.decay_T = 512
besov.decay_m = 32768
)";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mwlp_test_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small(Command c, const std::string& extra = "") {
    auto v = validate(std::string(kSmall) + extra);
    REQUIRE(v.errors.empty());
    v.config->command = c;
    return *v.config;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MWLP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("validate examples") {
    const auto ok = validate("command = ap-constant\np = 1\n");
    REQUIRE(ok.config);
    CHECK(ok.errors.empty());
    CHECK(ok.config->command == Command::ap_constant);
    CHECK(ok.config->grid.T == 64);
    CHECK(ok.config->weight.kind == WeightKind::identity);

    const auto p0 = validate("p = 0\n");
    CHECK_FALSE(p0.config);
    CHECK(has_error(p0, "p must be positive"));

    const auto grid = validate("grid.m = 100\ngrid.T = 64\n");
    CHECK_FALSE(grid.config);
    CHECK(has_error(grid, "m must be divisible by T"));
}

TEST_CASE("validate accumulates every error") {
    const auto v = validate(
        "p = -1\n"
        "grid.T = 63\n"
        "bogus = 3\n"
        "q = abc\n"
        "just words\n"
        "besov.psi.c2 = 0.4\n"
        "command = fly\n"
        "symbol.kind = square\n");
    CHECK_FALSE(v.config);
    CHECK(has_error(v, "p must be positive"));
    CHECK(has_error(v, "T must be a positive even integer"));
    CHECK(has_error(v, "unknown key 'bogus'"));
    CHECK(has_error(v, "bad value for q"));
    CHECK(has_error(v, "line 5: expected key = value"));
    CHECK(has_error(v, "besov.psi: c1 must satisfy 0 < c1 < c2"));
    CHECK(has_error(v, "unknown command 'fly'"));
    CHECK(has_error(v, "unknown symbol.kind 'square'"));
    CHECK(v.errors.size() >= 8);

    CHECK(has_error(validate("besov.psi.c2 = 1.0\n"), "CoverageGap"));
    CHECK(has_error(validate("weight.kind = diagonal-power\nweight.N = 2\nweight.alpha = -0.5\n"),
                    "weight.alpha needs weight.N entries"));
    CHECK(has_error(validate("weight.file = /nonexistent/w.json\n"), "weight.file not found"));
    CHECK(has_error(validate("besov.inner = 0.01\n"), "covered interiors"));
    CHECK(has_error(validate("sampling.offsets = 0, 0.75\n"), "sampling.offsets"));
}

TEST_CASE("validate builds weights, lists and comments") {
    const auto v = validate(
        "# comment line\n"
        "n = 1   # trailing comment\n"
        "weight.kind = conjugated\n"
        "weight.N = 2\n"
        "weight.alpha = -0.5, -0.25\n"
        "weight.rate = 0.5\n"
        "q = inf\n"
        "corpus.R_list = 0.5, 2\n"
        "cubes.q_trace = 64, 128\n"
        "besov.phi.profile = polynomial\n"
        "besov.phi.shape = 4\n");
    REQUIRE(v.config);
    const auto& c = *v.config;
    CHECK(c.weight.kind == WeightKind::conjugated);
    CHECK(c.weight.exponents == std::vector<double>{-0.5, -0.25});
    CHECK(c.weight.rotation.rate == 0.5);
    CHECK(std::isinf(c.q));
    CHECK(c.R_list == std::vector<double>{0.5, 2.0});
    CHECK(c.cubes.q_trace == std::vector<int>{64, 128});
    CHECK(c.besov.phi.profile == BumpProfile::polynomial);

    const auto dir = scratch("weightfile");
    fs::create_directories(dir);
    std::ofstream(dir / "w.json") << to_json(diagonal_power_weight(1, {-0.5, 0.0})).dump();
    const auto f = validate("weight.file = " + (dir / "w.json").string() + "\n");
    REQUIRE(f.config);
    CHECK(f.config->weight.kind == WeightKind::diagonal_power);
    CHECK(f.config->weight.N == 2);
    CHECK(f.config->weight_file == (dir / "w.json").string());
}

TEST_CASE("load_config errors") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), Error);
    try {
        load_config("/nonexistent/config.txt");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoFailure);
    }
    const auto dir = scratch("load");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.txt") << "p = 0\ngrid.m = 100\n";
    try {
        load_config((dir / "bad.txt").string());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigInvalid);
        CHECK(std::string(e.what()).find("p must be positive") != std::string::npos);
        CHECK(std::string(e.what()).find("m must be divisible by T") != std::string::npos);
    }
}

TEST_CASE("minimal run: identity weight A_1 constant") {
    const auto r = run(small(Command::ap_constant));
    CHECK(r.exit_code == 0);
    CHECK(r.errors.empty());
    CHECK(r.results["ap-constant"]["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(to_json(r)["config"]["command"] == "ap-constant");
}

TEST_CASE("hypothesis violation maps to exit code 3") {
    auto cfg = small(Command::multiplier_bound, "p = 0.5\nsymbol.M = 3\n");
    const auto r = run(cfg);
    CHECK(r.exit_code == 3);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].code == "HypothesisViolated");
    CHECK(r.results["multiplier-bound"].is_null());
    CHECK(to_json(r)["errors"][0]["code"] == "HypothesisViolated");
}

TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(ErrorCode::ConfigInvalid) == 2);
    CHECK(exit_code_for(ErrorCode::IoFailure) == 2);
    CHECK(exit_code_for(ErrorCode::HypothesisViolated) == 3);
    CHECK(exit_code_for(ErrorCode::DivergentFit) == 3);

    auto cfg = small(Command::doubling);
    cfg.p = -1.0;
    const auto r = run(cfg);
    CHECK(r.exit_code == 2);
    CHECK_FALSE(r.errors.empty());
    CHECK(r.errors[0].code == "ConfigInvalid");
}

TEST_CASE("every command reports results") {
    const auto r = run(small(Command::all, "cubes.q_trace = 8, 16\n"));
    CHECK(r.exit_code == 0);
    for (const char* c : {"ap-constant", "doubling", "sampling-check", "multiplier-bound", "besov-equiv"})
        CHECK_FALSE(r.results[c].is_null());
    CHECK(r.results["sampling-check"]["max_relative_discrepancy"].get<double>() < 1e-10);
    CHECK(r.results["multiplier-bound"]["within_bound"].get<bool>());
    CHECK(r.results["besov-equiv"]["within_bound"].get<bool>());
    CHECK(r.results["besov-equiv"]["C_equiv"]["label"] == "assembled");
    CHECK(r.results["ap-constant"]["trace"].size() == 2);
    bool one_sided = false;
    for (const auto& w : r.warnings) one_sided |= w.code == "OneSidedBeta";
    CHECK(one_sided);
    CHECK(r.timings.size() == 5);
}

TEST_CASE("determinism across runs and thread counts") {
    const auto cfg = small(Command::all);
    set_thread_count(1);
    const auto a = run(cfg);
    const auto b = run(cfg);
    set_thread_count(3);
    const auto c = run(cfg);
    set_thread_count(1);
    const auto ja = to_json(a).dump(2);
    CHECK(ja == to_json(b).dump(2));
    CHECK(ja == to_json(c).dump(2));
    REQUIRE(a.tables.size() == c.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(to_csv(a.tables[i]) == to_csv(c.tables[i]));

    auto other = cfg;
    other.seed = 2;
    CHECK(to_json(run(other)).dump(2) != ja);
}

TEST_CASE("report files") {
    const auto dir = scratch("report");
    const auto r = run(small(Command::sampling_check));
    write_report(r, dir.string());
    write_report(r, dir.string());
    CHECK(fs::exists(dir / "report.json"));
    CHECK(slurp(dir / "report.json") == to_json(r).dump(2) + "\n");
    const auto csv = slurp(dir / "sampling.csv");
    CHECK(csv.rfind("field,offset,discrepancy\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 2);
    const auto log = slurp(dir / "run.log");
    CHECK(std::count(log.begin(), log.end(), 'Z') >= 2);

    CHECK(to_csv(Table{"t", {"a", "b"}, {{"1", "2"}}}) == "a,b\n1,2\n");
    CHECK_THROWS_AS(write_report(r, "/proc/mwlp_no_such_dir"), Error);
}

TEST_CASE("command line binary") {
    const auto dir = scratch("binary");
    fs::create_directories(dir);
    std::ofstream(dir / "small.txt") << kSmall;
    std::ofstream(dir / "bad.txt") << "p = 0\n";
    std::ofstream(dir / "violate.txt") << kSmall << "p = 0.5\nsymbol.M = 3\n";
    const std::string out = " --quiet --out " + (dir / "out").string();

    CHECK(run_cli("ap-constant --config " + (dir / "small.txt").string() + out) == 0);
    CHECK(fs::exists(dir / "out" / "report.json"));
    const auto first = slurp(dir / "out" / "report.json");
    CHECK(run_cli("ap-constant --config " + (dir / "small.txt").string() + out + " --threads 2") == 0);
    CHECK(slurp(dir / "out" / "report.json") == first);
    CHECK(run_cli("ap-constant --config " + (dir / "small.txt").string() + out + " --seed 9") == 0);
    CHECK(run_cli("multiplier-bound --config " + (dir / "violate.txt").string() + out) == 3);
    CHECK(run_cli("doubling --config " + (dir / "bad.txt").string() + out) == 2);
    CHECK(run_cli("doubling --config /nonexistent.txt" + out) == 2);
    CHECK(run_cli("no-such-command" + out) == 2);
    CHECK(run_cli("--help") == 0);
}
