#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef _WIN32
#include <sys/wait.h>
#endif

#include "doctest.h"
#include "test_support.hpp"

#include "mclearn/dtmc.hpp"
#include "mclearn/traces.hpp"

using namespace mclearn;
using namespace testsup;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "mclearn_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Runs the CLI with the given argument string; captures combined output.
CliResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path log = work_dir() / ("out_" + std::to_string(counter++) + ".log");
    std::string cmd = std::string(MCLEARN_CLI_PATH) + " " + args + " > " +
                      log.string() + " 2>&1";
    int raw = std::system(cmd.c_str());
    CliResult r;
#ifdef _WIN32
    r.code = raw;
#else
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
#endif
    r.out = slurp(log);
    return r;
}

} // namespace

TEST_CASE("cli: help exits cleanly, missing subcommand is a usage error") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("").code == 1);
    CHECK(run_cli("frobnicate").code == 1);
}

TEST_CASE("cli: randgen, sample, learn, check, steady pipeline") {
    fs::path model = work_dir() / "gen.dtmc";
    fs::path traces = work_dir() / "train.txt";
    fs::path learned = work_dir() / "learned.dtmc";

    CliResult r = run_cli("randgen --states 3 --density 1.0 --symbols 2 --seed 5 --out " +
                          model.string());
    REQUIRE(r.code == 0);
    Dtmc gen = load_dtmc_file(model.string());
    CHECK(validate_dtmc(gen).ok);
    CHECK(gen.n() == 3);

    r = run_cli("sample --model " + model.string() +
                " --count 50 --fixed-len 8 --seed 3 --out " + traces.string());
    REQUIRE(r.code == 0);
    TraceSet ts = parse_traces_file(traces.string());
    CHECK(ts.traces.size() == 50);
    CHECK(ts.traces[0].size() == 8);

    r = run_cli("learn --algo aalergia --traces " + traces.string() +
                " --epsilon 4.0 --seed 1 --out " + learned.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("states=") != std::string::npos);
    Dtmc m = load_dtmc_file(learned.string());
    CHECK(validate_dtmc(m).ok);

    r = run_cli("check --model " + learned.string() + " --prop 'P=? [ F<=2 \"a\" ]'");
    REQUIRE(r.code == 0);
    double p = std::stod(r.out);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);

    r = run_cli("steady --model " + model.string());
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    int count = 0;
    double mass = 0.0;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        int state;
        std::string label;
        double prob;
        REQUIRE(static_cast<bool>(fields >> state >> label >> prob));
        ++count;
        mass += prob;
    }
    CHECK(count == 3);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cli: learn with epsilon search writes the sweep log") {
    fs::path model = work_dir() / "gen2.dtmc";
    fs::path traces = work_dir() / "train2.txt";
    fs::path learned = work_dir() / "learned2.dtmc";
    fs::path sweep = work_dir() / "sweep2.csv";
    REQUIRE(run_cli("randgen --states 2 --density 1.0 --symbols 2 --seed 9 --out " +
                    model.string())
                .code == 0);
    REQUIRE(run_cli("sample --model " + model.string() +
                    " --count 40 --fixed-len 6 --seed 2 --out " + traces.string())
                .code == 0);
    CliResult r = run_cli("learn --algo aalergia --traces " + traces.string() +
                          " --epsilon-search 0.01 100 --seed 1 --sweep-csv " +
                          sweep.string() + " --out " + learned.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("epsilon=") != std::string::npos);
    CHECK(r.out.find("bic=") != std::string::npos);
    CHECK(slurp(sweep).rfind("epsilon,bic,states,loglik\n", 0) == 0);
}

TEST_CASE("cli: ga and pst learners run end to end") {
    fs::path model = work_dir() / "gen3.dtmc";
    fs::path traces = work_dir() / "train3.txt";
    REQUIRE(run_cli("randgen --states 2 --density 1.0 --symbols 2 --seed 4 --out " +
                    model.string())
                .code == 0);
    REQUIRE(run_cli("sample --model " + model.string() +
                    " --count 30 --fixed-len 6 --seed 2 --out " + traces.string())
                .code == 0);

    fs::path ga_model = work_dir() / "ga.dtmc";
    CliResult r = run_cli("learn --algo ga --traces " + traces.string() +
                          " --pop 8 --gens 3 --seed 1 --out " + ga_model.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("fitness=") != std::string::npos);
    CHECK(validate_dtmc(load_dtmc_file(ga_model.string())).ok);

    // single-execution learners read one long run
    fs::path single = work_dir() / "single.txt";
    REQUIRE(run_cli("sample --model " + model.string() +
                    " --count 1 --fixed-len 120 --seed 6 --out " + single.string())
                .code == 0);
    fs::path pst_model = work_dir() / "pst.dtmc";
    r = run_cli("learn --algo pst --traces " + single.string() +
                " --epsilon 0.01 --max-depth 4 --seed 1 --out " + pst_model.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("contexts=") != std::string::npos);
    CHECK(validate_dtmc(load_dtmc_file(pst_model.string())).ok);

    fs::path gs_model = work_dir() / "gs.dtmc";
    r = run_cli("learn --algo ga-single --traces " + single.string() +
                " --pop 6 --gens 2 --max-depth 3 --seed 1 --out " + gs_model.string());
    REQUIRE(r.code == 0);
    CHECK(validate_dtmc(load_dtmc_file(gs_model.string())).ok);
}

TEST_CASE("cli: smc from a model and from recorded traces") {
    fs::path model = work_dir() / "gen4.dtmc";
    fs::path traces = work_dir() / "runs4.txt";
    REQUIRE(run_cli("randgen --states 2 --density 1.0 --symbols 2 --seed 8 --out " +
                    model.string())
                .code == 0);
    CliResult r = run_cli("smc --model " + model.string() +
                          " --prop 'P=? [ F<=2 \"a\" ]' --confidence 0.05 --samples 200"
                          " --seed 4");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("estimate=") != std::string::npos);
    CHECK(r.out.find("samples=200") != std::string::npos);

    REQUIRE(run_cli("sample --model " + model.string() +
                    " --count 100 --fixed-len 4 --seed 2 --out " + traces.string())
                .code == 0);
    r = run_cli("smc --traces " + traces.string() +
                " --prop 'P=? [ F<=2 \"a\" ]' --confidence 0.05 --samples 100 --seed 1");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("estimate=") != std::string::npos);
}

TEST_CASE("cli: bic-sweep and eval") {
    fs::path model = work_dir() / "gen5.dtmc";
    fs::path traces = work_dir() / "train5.txt";
    fs::path sweep = work_dir() / "sweep5.csv";
    REQUIRE(run_cli("randgen --states 2 --density 1.0 --symbols 2 --seed 2 --out " +
                    model.string())
                .code == 0);
    REQUIRE(run_cli("sample --model " + model.string() +
                    " --count 30 --fixed-len 6 --seed 2 --out " + traces.string())
                .code == 0);
    CliResult r = run_cli("bic-sweep --traces " + traces.string() +
                          " --grid 0.01 10 4 --mu 0.5 --out " + sweep.string());
    REQUIRE(r.code == 0);
    std::string csv = slurp(sweep);
    CHECK(csv.rfind("epsilon,abs_bic,states\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5); // header + 4 rows

    fs::path spec = work_dir() / "exp.toml";
    fs::path out_dir = work_dir() / "eval_out";
    {
        std::ofstream f(spec);
        f << "seed = 3\nrandom_states = 2\nrandom_density = 1.0\nrandom_symbols = 2\n"
          << "sizes = [20]\ntrace_len = 6\nlearners = [\"aalergia\"]\nepsilon = 4.0\n"
          << "metrics = [\"mse_steady\"]\n";
    }
    r = run_cli("eval --spec " + spec.string() + " --out " + out_dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("rows=") != std::string::npos);
    CHECK(fs::exists(out_dir / "results.csv"));
}

TEST_CASE("cli: usage errors exit with code 1") {
    fs::path model = work_dir() / "gen6.dtmc";
    REQUIRE(run_cli("randgen --states 2 --density 1.0 --symbols 2 --seed 1 --out " +
                    model.string())
                .code == 0);
    CHECK(run_cli("learn --algo sorcery --traces x --out y").code == 1);
    CHECK(run_cli("check --model " + model.string() + " --prop 'nonsense'").code == 1);
    CHECK(run_cli("check --model /nonexistent.dtmc --prop 'P=? [ F<=1 \"a\" ]'").code == 1);
    CHECK(run_cli("sample --model " + model.string() + " --count 5 --seed 1").code == 1);
    CHECK(run_cli("smc --model " + model.string() +
                  " --prop 'P=? [ F \"a\" ]' --samples 10 --seed 1")
              .code == 1);
}
