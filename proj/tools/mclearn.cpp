// mclearn: learn DTMC models from traces and query them.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mclearn/aalergia.hpp"
#include "mclearn/dtmc.hpp"
#include "mclearn/errors.hpp"
#include "mclearn/format.hpp"
#include "mclearn/ga.hpp"
#include "mclearn/ga_single.hpp"
#include "mclearn/harness.hpp"
#include "mclearn/metrics.hpp"
#include "mclearn/property.hpp"
#include "mclearn/pst.hpp"
#include "mclearn/smc.hpp"
#include "mclearn/traces.hpp"

namespace {

using namespace mclearn;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

struct SampleArgs {
    std::string model;
    long long count = 100;
    int len = 0;
    double stop_prob = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_sample(const SampleArgs& a) {
    if ((a.len > 0) == (a.stop_prob > 0.0))
        throw UsageError("give exactly one of --fixed-len and --stop-prob");
    Dtmc d = load_dtmc_file(a.model);
    SampleParams p;
    p.count = a.count;
    p.fixed_len = a.len;
    p.stop_prob = a.stop_prob;
    p.seed = a.seed;
    write_text(a.out, serialize_traces(sample_traces(d, p)));
    return 0;
}

struct LearnArgs {
    std::string algo;
    std::string traces;
    std::string out;
    double epsilon = 0.5;
    std::vector<double> epsilon_search; // LO HI when present
    double mu = 0.5;
    int population = 64;
    int generations = 50;
    std::string select = "tournament";
    double tournament_p = 0.75;
    std::string xover = "two";
    double mutation_rate = 0.0;
    int max_depth = 8;
    int threads = 1;
    std::uint64_t seed = 0;
    std::string sweep_csv_path;
    std::string progress_csv_path;
    std::string dump_pst_path;
};

GaParams ga_params(const LearnArgs& a) {
    GaParams p;
    p.population = a.population;
    p.generation_threshold = a.generations;
    if (a.select == "tournament")
        p.select = SelectStrategy::Tournament;
    else if (a.select == "roulette")
        p.select = SelectStrategy::Roulette;
    else
        throw UsageError("unknown selection strategy '" + a.select + "'");
    p.tournament_p = a.tournament_p;
    if (a.xover == "one")
        p.crossover = CrossoverKind::OnePoint;
    else if (a.xover == "two")
        p.crossover = CrossoverKind::TwoPoint;
    else if (a.xover == "uniform")
        p.crossover = CrossoverKind::Uniform;
    else
        throw UsageError("unknown crossover kind '" + a.xover + "'");
    p.mutation_rate = a.mutation_rate;
    p.mu = a.mu;
    p.threads = a.threads;
    p.seed = a.seed;
    return p;
}

int cmd_learn(const LearnArgs& a) {
    bool single = a.algo == "pst" || a.algo == "ga-single";
    TraceSet pi = parse_traces_file(a.traces,
                                    single ? TraceMode::Single : TraceMode::Multi);

    Dtmc model;
    std::string summary;
    if (a.algo == "aalergia") {
        if (!a.epsilon_search.empty()) {
            EpsilonSearch cfg;
            cfg.lo = a.epsilon_search[0];
            cfg.hi = a.epsilon_search[1];
            cfg.mu = a.mu;
            EpsilonChoice choice = select_epsilon_bic(pi, cfg);
            model = std::move(choice.model);
            if (!a.sweep_csv_path.empty())
                write_text(a.sweep_csv_path, sweep_csv(choice.log));
            summary = "epsilon=" + fmt_double(choice.eps) + " bic=" +
                      fmt_double(choice.bic) + " states=" + std::to_string(model.n());
        } else {
            model = learn_aalergia(pi, a.epsilon);
            summary = "states=" + std::to_string(model.n());
        }
    } else if (a.algo == "ga") {
        GaResult res = learn_ga(pi, ga_params(a));
        model = std::move(res.model);
        if (!a.progress_csv_path.empty())
            write_text(a.progress_csv_path, progress_csv(res.progress));
        summary = "states=" + std::to_string(model.n()) + " fitness=" +
                  fmt_double(res.best_fitness) + " z=" + std::to_string(res.best_z);
    } else if (a.algo == "pst") {
        const Trace& alpha = pi.traces[0];
        Pst t = learn_pst(alpha, pi.alphabet, a.epsilon, a.max_depth);
        if (!a.dump_pst_path.empty()) {
            SuffixStats stats(alpha, pi.alphabet, std::max(t.max_depth(), 1) + 1);
            write_text(a.dump_pst_path, pst_dump(t, stats));
        }
        model = pst_to_dtmc(t, alpha, pi.alphabet);
        summary = "states=" + std::to_string(model.n()) + " contexts=" +
                  std::to_string(static_cast<long long>(t.contexts().size()));
    } else if (a.algo == "ga-single") {
        GaSingleParams p;
        p.ga = ga_params(a);
        p.max_depth = a.max_depth;
        GaSingleResult res = learn_ga_single(pi.traces[0], pi.alphabet, p);
        model = std::move(res.model);
        if (!a.progress_csv_path.empty())
            write_text(a.progress_csv_path, progress_csv(res.progress));
        summary = "states=" + std::to_string(model.n()) + " fitness=" +
                  fmt_double(res.best_fitness);
    } else {
        throw UsageError("unknown algorithm '" + a.algo + "'");
    }

    save_dtmc_file(model, a.out);
    std::cout << summary << '\n';
    return 0;
}

int cmd_check(const std::string& model_path, const std::string& prop_text) {
    Dtmc d = load_dtmc_file(model_path);
    Property p = parse_property(prop_text);
    std::cout << fmt_double(check_property(d, p)) << '\n';
    return 0;
}

int cmd_steady(const std::string& model_path) {
    Dtmc d = load_dtmc_file(model_path);
    std::vector<double> pi = steady_state(d);
    for (int s = 0; s < d.n(); ++s)
        std::cout << s << ' ' << d.alphabet.name(d.labels[static_cast<std::size_t>(s)])
                  << ' ' << fmt_double(pi[static_cast<std::size_t>(s)]) << '\n';
    return 0;
}

struct SmcArgs {
    std::string model;
    std::string traces;
    std::string prop;
    double delta = 0.01;
    long long samples = 0;
    double halfwidth = 0.0;
    std::uint64_t seed = 0;
};

int cmd_smc(const SmcArgs& a) {
    Property p = parse_property(a.prop);
    SmcParams sp;
    sp.delta = a.delta;
    sp.samples = a.samples;
    sp.halfwidth = a.halfwidth;
    sp.seed = a.seed;
    SmcResult res;
    if (!a.traces.empty()) {
        TraceSet source = parse_traces_file(a.traces);
        res = smc_check_traces(source, p, sp);
    } else {
        res = smc_check(load_dtmc_file(a.model), p, sp);
    }
    std::cout << res.line() << '\n';
    return 0;
}

struct RandgenArgs {
    int states = 5;
    double density = 0.5;
    int symbols = 3;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_randgen(const RandgenArgs& a) {
    Dtmc d = random_dtmc(a.states, a.density, a.symbols, a.seed);
    write_text(a.out, save_dtmc(d));
    return 0;
}

int cmd_eval(const std::string& spec_path, const std::string& out_dir) {
    ExperimentSpec spec = parse_experiment_spec_file(spec_path);
    std::vector<MetricRow> rows = run_experiment(spec, out_dir);
    std::cout << "rows=" << rows.size() << '\n';
    return 0;
}

struct SweepArgs {
    std::string traces;
    std::vector<double> grid; // lo hi steps
    double mu = 0.5;
    std::string out;
};

int cmd_bic_sweep(const SweepArgs& a) {
    TraceSet pi = parse_traces_file(a.traces);
    int steps = static_cast<int>(a.grid[2]);
    std::vector<double> grid = geometric_grid(a.grid[0], a.grid[1], steps);
    write_text(a.out, bic_sweep_csv(bic_sweep(pi, grid, a.mu)));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DTMC learning from execution traces"};
    app.require_subcommand(1);

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "Draw traces from a model");
    sample->add_option("--model", sa.model, "model file")->required();
    sample->add_option("--count", sa.count, "number of traces");
    sample->add_option("--fixed-len", sa.len, "fixed trace length");
    sample->add_option("--stop-prob", sa.stop_prob, "geometric stop probability");
    sample->add_option("--seed", sa.seed, "RNG seed");
    sample->add_option("--out", sa.out, "output file (default stdout)");

    LearnArgs la;
    auto* learn = app.add_subcommand("learn", "Learn a model from traces");
    learn->add_option("--algo", la.algo, "aalergia | ga | pst | ga-single")->required();
    learn->add_option("--traces", la.traces, "trace file")->required();
    learn->add_option("--out", la.out, "model output file")->required();
    learn->add_option("--epsilon", la.epsilon, "compatibility / pruning tolerance");
    learn->add_option("--epsilon-search", la.epsilon_search,
                      "LO HI: pick epsilon by BIC (aalergia)")
        ->expected(2);
    learn->add_option("--mu", la.mu, "BIC size penalty weight");
    learn->add_option("--pop", la.population, "GA population size");
    learn->add_option("--gens", la.generations, "GA generations per round");
    learn->add_option("--select", la.select, "tournament | roulette");
    learn->add_option("--tournament-p", la.tournament_p, "tournament win probability");
    learn->add_option("--xover", la.xover, "one | two | uniform");
    learn->add_option("--mutation-rate", la.mutation_rate, "per-gene rate (0 = 1/len)");
    learn->add_option("--max-depth", la.max_depth, "context depth cap (pst, ga-single)");
    learn->add_option("--threads", la.threads, "fitness evaluation threads");
    learn->add_option("--seed", la.seed, "RNG seed");
    learn->add_option("--sweep-csv", la.sweep_csv_path, "epsilon search log (aalergia)");
    learn->add_option("--progress-csv", la.progress_csv_path, "GA progress log");
    learn->add_option("--dump-pst", la.dump_pst_path, "write the learned context tree");

    std::string check_model, check_prop;
    auto* check = app.add_subcommand("check", "Model-check a property");
    check->add_option("--model", check_model, "model file")->required();
    check->add_option("--prop", check_prop, "property, e.g. P=? [ F<=10 \"a\" ]")
        ->required();

    std::string steady_model;
    auto* steady = app.add_subcommand("steady", "Steady-state distribution");
    steady->add_option("--model", steady_model, "model file")->required();

    SmcArgs ma;
    auto* smc = app.add_subcommand("smc", "Statistical model checking");
    smc->add_option("--model", ma.model, "model file (simulation source)");
    smc->add_option("--traces", ma.traces, "trace file (recorded source)");
    smc->add_option("--prop", ma.prop, "bounded property")->required();
    smc->add_option("--confidence", ma.delta, "error probability delta");
    smc->add_option("--samples", ma.samples, "number of runs");
    smc->add_option("--halfwidth", ma.halfwidth, "target half-width (derives N)");
    smc->add_option("--seed", ma.seed, "RNG seed");

    RandgenArgs ra;
    auto* randgen = app.add_subcommand("randgen", "Generate a random model");
    randgen->add_option("--states", ra.states, "state count");
    randgen->add_option("--density", ra.density, "successors per state, as a fraction");
    randgen->add_option("--symbols", ra.symbols, "alphabet size");
    randgen->add_option("--seed", ra.seed, "RNG seed");
    randgen->add_option("--out", ra.out, "output file (default stdout)");

    std::string eval_spec, eval_out;
    auto* eval = app.add_subcommand("eval", "Run an experiment spec");
    eval->add_option("--spec", eval_spec, "experiment file")->required();
    eval->add_option("--out", eval_out, "output directory")->required();

    SweepArgs wa;
    auto* sweep = app.add_subcommand("bic-sweep", "AALERGIA BIC curve over epsilon");
    sweep->add_option("--traces", wa.traces, "trace file")->required();
    sweep->add_option("--grid", wa.grid, "LO HI STEPS (geometric)")
        ->expected(3)
        ->required();
    sweep->add_option("--mu", wa.mu, "BIC size penalty weight");
    sweep->add_option("--out", wa.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // exit 1 on any usage problem, 0 for --help
    }

    try {
        if (sample->parsed()) return cmd_sample(sa);
        if (learn->parsed()) return cmd_learn(la);
        if (check->parsed()) return cmd_check(check_model, check_prop);
        if (steady->parsed()) return cmd_steady(steady_model);
        if (smc->parsed()) {
            if (ma.model.empty() == ma.traces.empty())
                throw mclearn::UsageError("give exactly one of --model and --traces");
            return cmd_smc(ma);
        }
        if (randgen->parsed()) return cmd_randgen(ra);
        if (eval->parsed()) return cmd_eval(eval_spec, eval_out);
        if (sweep->parsed()) return cmd_bic_sweep(wa);
    } catch (const mclearn::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const mclearn::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
