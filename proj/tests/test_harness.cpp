#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "test_support.hpp"

#include "mclearn/aalergia.hpp"
#include "mclearn/errors.hpp"
#include "mclearn/harness.hpp"
#include "mclearn/metrics.hpp"
#include "mclearn/traces.hpp"

using namespace mclearn;
using namespace testsup;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("mclearn_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("parse_experiment_spec: full round trip") {
    std::string text =
        "# comment\n"
        "seed = 42\n"
        "random_states = 4\n"
        "random_density = 0.8\n"
        "random_symbols = 3\n"
        "sizes = [50, 100]\n"
        "trace_len = 12\n"
        "learners = [\"aalergia\", \"ga\"]\n"
        "epsilon = 0.25\n"
        "mu = 0.5\n"
        "population = 16\n"
        "generations = 5\n"
        "select = \"roulette\"\n"
        "xover = \"uniform\"\n"
        "properties = [\"P=? [ F<=3 \"s0\" ]\"]\n"
        "metrics = [\"ard\", \"pred_acc\"]\n"
        "smc = true\n"
        "smc_delta = 0.1\n";
    ExperimentSpec s = parse_experiment_spec(text);
    CHECK(s.seed == 42);
    CHECK(s.random_states == 4);
    CHECK(s.random_density == 0.8);
    CHECK(s.random_symbols == 3);
    CHECK(s.sizes == std::vector<long long>{50, 100});
    CHECK(s.trace_len == 12);
    CHECK(s.learners == std::vector<std::string>{"aalergia", "ga"});
    CHECK(s.epsilon == 0.25);
    CHECK(s.population == 16);
    CHECK(s.generations == 5);
    CHECK(s.select == "roulette");
    CHECK(s.xover == "uniform");
    REQUIRE(s.properties.size() == 1);
    CHECK(s.properties[0] == "P=? [ F<=3 \"s0\" ]");
    CHECK(s.metrics == std::vector<std::string>{"ard", "pred_acc"});
    CHECK(s.smc);
    CHECK(s.smc_delta == 0.1);
}

TEST_CASE("parse_experiment_spec: defaults and epsilon_search") {
    ExperimentSpec s = parse_experiment_spec(
        "seed = 1\nrandom_states = 3\nrandom_density = 1.0\nrandom_symbols = 2\n"
        "sizes = [10]\nlearners = [\"aalergia\"]\n"
        "epsilon_search = [0.01, 100.0]\n");
    CHECK(s.epsilon_search);
    CHECK(s.epsilon_lo == 0.01);
    CHECK(s.epsilon_hi == 100.0);
    CHECK(s.mu == 0.5);
    CHECK(s.trace_len == 10);
    // default metric set
    CHECK(s.metrics == std::vector<std::string>{"ard", "mse_steady", "pred_acc"});
    CHECK_FALSE(s.smc);
    CHECK_FALSE(s.measure_time);
}

TEST_CASE("parse_experiment_spec: rejected inputs") {
    auto bad = [](const std::string& text) {
        CHECK_THROWS_AS(parse_experiment_spec(text), UsageError);
    };
    bad("");                                           // missing seed
    bad("seed = 1\nsizes = [10]\nlearners = [\"aalergia\"]\n"); // no generator
    bad("seed = 1\ngenerator = \"m.dtmc\"\nrandom_states = 3\n"
        "random_density = 1.0\nrandom_symbols = 2\n"
        "sizes = [10]\nlearners = [\"aalergia\"]\n");  // both generators
    bad("seed = 1\nrandom_states = 3\nrandom_density = 1.0\nrandom_symbols = 2\n"
        "sizes = [10, 10]\nlearners = [\"aalergia\"]\n");   // not increasing
    bad("seed = 1\nrandom_states = 3\nrandom_density = 1.0\nrandom_symbols = 2\n"
        "sizes = [10]\nlearners = [\"magic\"]\n");     // unknown learner
    bad("seed = 1\nrandom_states = 3\nrandom_density = 1.0\nrandom_symbols = 2\n"
        "sizes = [10]\nlearners = [\"aalergia\"]\nmetrics = [\"novel\"]\n");
    bad("seed = 1\nrandom_states = 3\nrandom_density = 1.0\nrandom_symbols = 2\n"
        "sizes = []\nlearners = [\"aalergia\"]\n");    // empty sizes
    bad("seed = 1\nrandom_states = 3\nrandom_density = 1.0\nrandom_symbols = 2\n"
        "sizes = [10]\nlearners = [\"aalergia\"]\nwibble = 3\n"); // unknown key
}

TEST_CASE("parse_experiment_spec: errors carry the line number") {
    try {
        parse_experiment_spec("seed = 1\nbogus line without equals\n");
        FAIL("expected UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("geometric_grid: endpoints, spacing, degenerate cases") {
    auto g = geometric_grid(0.01, 100.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.01);
    CHECK(g.back() == 100.0);
    // constant ratio of 10 between neighbors
    for (int i = 0; i + 1 < 5; ++i)
        CHECK(g[static_cast<std::size_t>(i + 1)] / g[static_cast<std::size_t>(i)] ==
              doctest::Approx(10.0).epsilon(1e-9));
    CHECK(geometric_grid(2.0, 8.0, 1) == std::vector<double>{2.0});
    CHECK_THROWS_AS(geometric_grid(0.0, 1.0, 3), UsageError);
    CHECK_THROWS_AS(geometric_grid(1.0, 0.5, 3), UsageError);
    CHECK_THROWS_AS(geometric_grid(1.0, 2.0, 0), UsageError);
}

TEST_CASE("results_csv and bic_sweep_csv: exact layout") {
    std::vector<MetricRow> rows = {{"aalergia", 50, 0.0, "states", "3"},
                                   {"ga", 50, 1.5, "ard[0]", "0.04"}};
    CHECK(results_csv(rows) ==
          "learner,size,wall_ms,metric,value\n"
          "aalergia,50,0,states,3\n"
          "ga,50,1.5,ard[0],0.04\n");

    std::vector<BicSweepRow> sweep = {{0.5, 10.25, 3}};
    CHECK(bic_sweep_csv(sweep) == "epsilon,abs_bic,states\n0.5,10.25,3\n");
}

TEST_CASE("bic_sweep: one aalergia fit per grid point") {
    TraceSet ts = parse_traces("a a a a\na a a a\na a\na a a\na a\na a a a");
    auto rows = bic_sweep(ts, {0.01, 10.0});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].eps == 0.01);
    CHECK(rows[1].eps == 10.0);
    CHECK(rows[0].states > rows[1].states); // merging collapses the chain
    CHECK(rows[1].states == 1);
    for (const auto& r : rows) {
        Dtmc m = learn_aalergia(ts, r.eps);
        CHECK(r.abs_bic ==
              doctest::Approx(std::abs(bic_score(m, ts, 0.5))).epsilon(1e-12));
    }
}

TEST_CASE("run_experiment: end-to-end on a random generator") {
    TempDir dir("harness_e2e");
    ExperimentSpec s = parse_experiment_spec(
        "seed = 7\nrandom_states = 3\nrandom_density = 1.0\nrandom_symbols = 3\n"
        "sizes = [30, 60]\ntrace_len = 8\nlearners = [\"aalergia\"]\n"
        "epsilon = 4.0\nproperties = [\"P=? [ F<=3 \"a\" ]\"]\n"
        "metrics = [\"ard\", \"mse_steady\", \"pred_acc\"]\n");
    auto rows = run_experiment(s, dir.path.string());
    REQUIRE(!rows.empty());

    // one ard row for the single property + mse_steady + pred_acc per size
    int per_size = 0;
    for (const auto& r : rows)
        if (r.size == 30) ++per_size;
    CHECK(per_size == 3);

    // canonical order: sorted by (learner, size, metric)
    auto key = [](const MetricRow& r) {
        return std::make_tuple(r.learner, r.size, r.metric);
    };
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        CHECK(key(rows[i]) < key(rows[i + 1]));

    // artifacts on disk
    CHECK(fs::exists(dir.path / "results.csv"));
    CHECK(fs::exists(dir.path / "model_aalergia_30.dtmc"));
    CHECK(fs::exists(dir.path / "model_aalergia_60.dtmc"));
    Dtmc m = load_dtmc_file((dir.path / "model_aalergia_30.dtmc").string());
    CHECK(validate_dtmc(m).ok);

    // the csv on disk matches the returned rows
    CHECK(slurp(dir.path / "results.csv") == results_csv(rows));

    // byte-reproducible without measure_time
    TempDir dir2("harness_e2e_rerun");
    auto rows2 = run_experiment(s, dir2.path.string());
    CHECK(results_csv(rows) == results_csv(rows2));
    CHECK(slurp(dir.path / "model_aalergia_60.dtmc") ==
          slurp(dir2.path / "model_aalergia_60.dtmc"));
}

TEST_CASE("run_experiment: smc pseudo-learner rows") {
    TempDir dir("harness_smc");
    ExperimentSpec s = parse_experiment_spec(
        "seed = 3\nrandom_states = 2\nrandom_density = 1.0\nrandom_symbols = 2\n"
        "sizes = [40]\ntrace_len = 6\nlearners = [\"aalergia\"]\nepsilon = 4.0\n"
        "properties = [\"P=? [ F<=2 \"a\" ]\", \"P=? [ F \"b\" ]\"]\n"
        "metrics = [\"ard\"]\nsmc = true\n");
    auto rows = run_experiment(s, dir.path.string());
    int smc_rows = 0;
    bool saw_nan = false;
    for (const auto& r : rows)
        if (r.learner == "smc") {
            ++smc_rows;
            if (r.value == "nan") saw_nan = true;
        }
    CHECK(smc_rows == 2);
    CHECK(saw_nan); // the unbounded property cannot be estimated by simulation
}

TEST_CASE("run_experiment: file generator and model-vs-model metrics") {
    TempDir dir("harness_filegen");
    Dtmc gen = make_dtmc({"a", "b"}, {1.0, 0.0}, {{0.2, 0.8}, {0.7, 0.3}});
    std::string gen_path = (dir.path / "gen.dtmc").string();
    save_dtmc_file(gen, gen_path);

    std::ostringstream spec;
    spec << "seed = 11\ngenerator = \"" << gen_path << "\"\n"
         << "sizes = [80]\ntrace_len = 10\nlearners = [\"aalergia\"]\n"
         << "epsilon = 4.0\nmetrics = [\"mse_steady\"]\n";
    auto rows = run_experiment(parse_experiment_spec(spec.str()), dir.path.string());
    bool saw_mse = false;
    for (const auto& r : rows)
        if (r.metric == "mse_steady") {
            saw_mse = true;
            double v = std::stod(r.value);
            CHECK(v >= 0.0);
            CHECK(v < 0.25);
        }
    CHECK(saw_mse);
}
