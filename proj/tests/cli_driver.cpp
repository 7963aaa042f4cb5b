// End-to-end driver: runs the installed binary as a subprocess and checks
// artifacts, determinism across reruns, and error reporting.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string make_temp_dir() {
    char tmpl[] = "/tmp/bk2f_cli_XXXXXX";
    char* dir = mkdtemp(tmpl);
    REQUIRE(dir != nullptr);
    return std::string(dir);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

RunResult run(const std::string& args, const std::string& dir) {
    const std::string out_log = dir + "/cmd_stdout.log";
    const std::string err_log = dir + "/cmd_stderr.log";
    const std::string cmd =
        std::string("\"") + BK2F_BIN + "\" " + args + " > " + out_log + " 2> " + err_log;
    const int status = std::system(cmd.c_str());
    RunResult r;
    if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    r.out = slurp(out_log);
    r.err = slurp(err_log);
    return r;
}

// Small but non-trivial scale shared by the pipeline runs.
std::string scale_args(const std::string& dir) {
    return "--out " + dir +
           " --params_train.n_steps 6 --params_valid.n_steps 6 --sim.n_steps 6"
           " --sim.branch_depth 4 --sim.n_scenarios 30 --seed 99"
           " --train.max_epochs 15";
}

void run_pipeline(const std::string& dir) {
    RunResult r = run("generate train " + scale_args(dir), dir);
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("wrote") != std::string::npos);
    CHECK(file_exists(dir + "/train.csv"));
    CHECK(file_exists(dir + "/train.meta"));

    r = run("generate valid " + scale_args(dir), dir);
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(file_exists(dir + "/valid.csv"));
    CHECK(file_exists(dir + "/valid.meta"));

    r = run("train " + scale_args(dir), dir);
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(file_exists(dir + "/model.txt"));

    r = run("evaluate " + scale_args(dir), dir);
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(file_exists(dir + "/rmse.csv"));
    CHECK(file_exists(dir + "/cross_section_t3.csv"));
    CHECK(file_exists(dir + "/cross_section_t6.csv"));
    CHECK(file_exists(dir + "/manifest.txt"));
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

// The manifest echoes the full configuration, including output_dir, which
// legitimately differs between the two runs; drop that one line.
std::string without_output_dir(const std::string& text) {
    std::istringstream is(text);
    std::string line, kept;
    while (std::getline(is, line))
        if (line.rfind("output_dir = ", 0) != 0) kept += line + "\n";
    return kept;
}

}  // namespace

TEST_CASE("the full pipeline runs and is byte-identical on a rerun") {
    const std::string a = make_temp_dir();
    const std::string b = make_temp_dir();
    run_pipeline(a);
    run_pipeline(b);
    for (const char* name :
         {"/train.csv", "/train.meta", "/valid.csv", "/valid.meta", "/model.txt",
          "/rmse.csv", "/cross_section_t3.csv", "/cross_section_t6.csv"}) {
        CAPTURE(name);
        const std::string fa = slurp(a + name);
        REQUIRE(!fa.empty());
        CHECK(fa == slurp(b + name));
    }
    CHECK(without_output_dir(slurp(a + "/manifest.txt")) ==
          without_output_dir(slurp(b + "/manifest.txt")));
    const std::string manifest = slurp(a + "/manifest.txt");
    CHECK(contains(manifest, "[config]"));
    CHECK(contains(manifest, "[artifacts]"));
    const RunResult rpt = run("report " + scale_args(a), a);
    CAPTURE(rpt.err);
    CHECK(rpt.code == 0);
    CHECK(!rpt.out.empty());
}

TEST_CASE("the rmse table has the expected shape") {
    const std::string dir = make_temp_dir();
    run_pipeline(dir);
    std::ifstream is(dir + "/rmse.csv");
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "t,nn_in,nn_oos,mom_in,mom_oos");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);  // t = 2..6
    std::ifstream cs(dir + "/cross_section_t3.csv");
    REQUIRE(std::getline(cs, line));
    CHECK(line == "percentile,nn_rel_err,mom_rel_err");
    rows = 0;
    while (std::getline(cs, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 200);
}

TEST_CASE("a missing model file is a loud failure") {
    const std::string dir = make_temp_dir();
    const RunResult r =
        run("evaluate --out " + dir + " --model " + dir + "/absent.txt", dir);
    CHECK(r.code == 1);
    CHECK(contains(r.err, "bk2f: error:"));
}

TEST_CASE("oversized trees are refused without the explicit opt-in") {
    const std::string dir = make_temp_dir();
    const RunResult r = run("generate train --out " + dir + " --depth 12", dir);
    CHECK(r.code == 1);
    CHECK(contains(r.err, "--allow-large"));
    CHECK(contains(r.err, "MiB"));
    CHECK(!file_exists(dir + "/train.csv"));
}

TEST_CASE("command-line mistakes are rejected") {
    const std::string dir = make_temp_dir();
    RunResult r = run("generate train --no-such-flag --out " + dir, dir);
    CHECK(r.code != 0);
    r = run("generate train --sim.branch_depth foo --out " + dir, dir);
    CHECK(r.code != 0);
    CHECK(contains(r.err, "sim.branch_depth"));
    r = run("", dir);
    CHECK(r.code != 0);
    r = run("generate neither --out " + dir, dir);
    CHECK(r.code != 0);
}
