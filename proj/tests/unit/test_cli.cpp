#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir()
{
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / ("qmix_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args)
{
    fs::path out = scratch_dir() / "stdout.txt";
    fs::path err = scratch_dir() / "stderr.txt";
    std::string cmd = std::string(QMIX_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_spec(const std::string& name, const std::string& text)
{
    fs::path p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p;
}

json first_json_line(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    return json::parse(line);
}

}  // namespace

TEST_CASE("analyze: depolarizing d = 4")
{
    auto spec = write_spec("dep4.json", R"({"family": "depolarizing", "dim": 4, "gamma": 1.0})");
    auto r = run("analyze " + spec.string() + " --seed 3 --restarts 4 --regularity-probes 4");
    REQUIRE(r.code == 0);
    json rep = json::parse(r.out);
    CHECK(rep["gap"]["lambda"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep["ls"]["alpha2"]["alpha_estimate"].get<double>() == doctest::Approx(1.0 / std::log(3.0)).epsilon(1e-3));
    CHECK(rep["generator"]["family"] == "depolarizing");
    CHECK(rep["provenance"]["seed"] == 3);
    CHECK(rep["provenance"]["version"].is_string());
    CHECK(rep["verdicts"]["alpha1_le_lambda"] == true);
    CHECK(rep["regularity"]["strong_status"] == "h-evidence");
}

TEST_CASE("analyze: identical seeds give identical payloads")
{
    auto spec = write_spec("dep3.json", R"({"family": "depolarizing", "dim": 3, "gamma": 0.5})");
    std::string args = "analyze " + spec.string() + " --seed 11 --restarts 3 --regularity-probes 3";
    auto a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    json ja = json::parse(a.out), jb = json::parse(b.out);
    ja["provenance"].erase("wall_time");
    jb["provenance"].erase("wall_time");
    CHECK(ja.dump() == jb.dump());
}

TEST_CASE("analyze: missing seed is drawn and logged")
{
    auto spec = write_spec("dep2.json", R"({"family": "depolarizing", "dim": 2, "gamma": 1.0})");
    auto r = run("analyze " + spec.string() + " --restarts 2 --skip regularity");
    REQUIRE(r.code == 0);
    json log = first_json_line(r.err);
    CHECK(log["event"] == "seed_selected");
    CHECK(json::parse(r.out)["provenance"]["seed"] == log["seed"]);
    CHECK(json::parse(r.out)["regularity"]["value"].is_null());
}

TEST_CASE("analyze: pure Hamiltonian is not primitive")
{
    auto spec = write_spec("ham.json", R"({"family": "generic", "hamiltonian": [[1, 0], [0, -1]]})");
    auto r = run("analyze " + spec.string() + " --seed 1");
    CHECK(r.code == 2);
    CHECK(first_json_line(r.err)["error"] == "not_primitive");
}

TEST_CASE("analyze: malformed input")
{
    auto broken = write_spec("broken.json", "{\"family\": \"depolarizing\",\n  \"dim\": 3,,\n}");
    auto r = run("analyze " + broken.string() + " --seed 1");
    CHECK(r.code == 1);
    json e = first_json_line(r.err);
    CHECK(e["error"] == "malformed_spec");
    CHECK(e["where"].get<std::string>().rfind("line 2", 0) == 0);

    auto missing = write_spec("missing.json", R"({"family": "depolarizing", "dim": 3})");
    r = run("analyze " + missing.string() + " --seed 1");
    CHECK(r.code == 1);
    CHECK(first_json_line(r.err)["where"] == "gamma");

    auto badrow = write_spec("badrow.json", R"({"family": "generic", "hamiltonian": [[1, 0], [0]]})");
    r = run("analyze " + badrow.string() + " --seed 1");
    CHECK(r.code == 1);
    CHECK(first_json_line(r.err)["where"] == "hamiltonian[1]");

    r = run("analyze " + (scratch_dir() / "absent.json").string() + " --seed 1");
    CHECK(r.code == 1);

    r = run("frobnicate");
    CHECK(r.code == 1);
    CHECK(first_json_line(r.err)["error"] == "malformed_arguments");
}

TEST_CASE("mixing: curve file and summary")
{
    auto spec = write_spec("mix2.json", R"({"family": "depolarizing", "dim": 2, "gamma": 1.0})");
    fs::path csv = scratch_dir() / "curve.csv";
    auto r = run("mixing " + spec.string() + " --seed 2 --restarts 3 --epsilon 0.1 --t-max 5 --grid-n 21 --haar-states 5 --csv " +
                 csv.string());
    REQUIRE(r.code == 0);
    json s = json::parse(r.out);
    CHECK(s["tau_mix"].get<double>() == doctest::Approx(std::log(10.0)).epsilon(1e-6));
    CHECK(s["crossing"]["chi2"].is_number());
    CHECK(s["crossing"]["ls_a1"].is_number());
    CHECK(s["domination_margin"].get<double>() >= -1e-7);

    std::istringstream lines(slurp(csv));
    std::string header;
    std::getline(lines, header);
    CHECK(header == "t,trace_dist,chi2,rel_ent,chi2_bound,ls_bound_a1,ls_bound_a2");
    int rows = 0;
    for (std::string line; std::getline(lines, line);)
        ++rows;
    CHECK(rows == 21);
}

TEST_CASE("mixing: epsilon 2 gives zero mixing time")
{
    auto spec = write_spec("mix3.json", R"({"family": "depolarizing", "dim": 3, "gamma": 1.0})");
    auto r = run("mixing " + spec.string() + " --seed 2 --restarts 2 --epsilon 2 --grid-n 5 --haar-states 3");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["tau_mix"].get<double>() == 0.0);
}

TEST_CASE("mixing: grid refinement moves the mixing time by less than one step")
{
    auto spec = write_spec("mixr.json",
                           R"({"family": "random_unitary", "dim": 3, "D": 2, "seed": 4, "reversible": true})");
    auto coarse = run("mixing " + spec.string() + " --seed 5 --restarts 2 --epsilon 0.05 --t-max 10 --grid-n 51 --haar-states 10");
    auto fine = run("mixing " + spec.string() + " --seed 5 --restarts 2 --epsilon 0.05 --t-max 10 --grid-n 101 --haar-states 10");
    REQUIRE(coarse.code == 0);
    REQUIRE(fine.code == 0);
    double a = json::parse(coarse.out)["tau_mix"].get<double>();
    double b = json::parse(fine.out)["tau_mix"].get<double>();
    CHECK(std::abs(a - b) < 10.0 / 50.0);
}

TEST_CASE("reproduce: targets")
{
    auto r = run("reproduce davies_qubit --seed 1");
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["pass"] == true);
    r = run("reproduce depolarizing_table --seed 1 --restarts 4");
    CHECK(r.code == 0);
    r = run("reproduce nonsense --seed 1");
    CHECK(r.code == 1);
}

TEST_CASE("scan: output is resumable")
{
    fs::path out = scratch_dir() / "scan.jsonl";
    fs::remove(out);
    auto r = run("scan --dims 2 -n 3 --seed 8 --probes 4 -o " + out.string());
    REQUIRE(r.code == 0);
    std::string first = slurp(out);
    r = run("scan --dims 2 -n 5 --seed 8 --probes 4 -o " + out.string());
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["resumed_from"] == 3);
    std::string second = slurp(out);
    CHECK(second.rfind(first, 0) == 0);
    std::istringstream in(second);
    int n = 0;
    for (std::string line; std::getline(in, line); ++n)
        CHECK(json::parse(line)["index"] == n);
    CHECK(n == 5);

    // a fresh run of five lines matches the resumed file
    fs::path fresh = scratch_dir() / "scan_fresh.jsonl";
    fs::remove(fresh);
    run("scan --dims 2 -n 5 --seed 8 --probes 4 --jobs 2 -o " + fresh.string());
    CHECK(slurp(fresh) == second);
}
