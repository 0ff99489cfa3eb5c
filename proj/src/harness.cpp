#include "mclearn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mclearn/aalergia.hpp"
#include "mclearn/errors.hpp"
#include "mclearn/format.hpp"
#include "mclearn/ga_single.hpp"
#include "mclearn/metrics.hpp"
#include "mclearn/property.hpp"
#include "mclearn/pst.hpp"
#include "mclearn/smc.hpp"
#include "mclearn/traces.hpp"

namespace mclearn {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s, std::size_t lineno) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    if (!s.empty() && (s.front() == '"' || s.back() == '"'))
        throw UsageError("line " + std::to_string(lineno) + ": unbalanced quotes");
    return s;
}

std::vector<std::string> parse_list(const std::string& v, std::size_t lineno) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw UsageError("line " + std::to_string(lineno) + ": expected [list]");
    std::vector<std::string> items;
    std::string inner = v.substr(1, v.size() - 2);
    std::istringstream is(inner);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw UsageError("line " + std::to_string(lineno) + ": empty list item");
        items.push_back(unquote(item, lineno));
    }
    return items;
}

double parse_num(const std::string& v, std::size_t lineno) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw UsageError("line " + std::to_string(lineno) + ": expected a number, got '" +
                         v + "'");
    }
}

bool parse_bool(const std::string& v, std::size_t lineno) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw UsageError("line " + std::to_string(lineno) + ": expected true or false");
}

} // namespace

ExperimentSpec parse_experiment_spec(const std::string& text) {
    ExperimentSpec spec;
    bool saw_seed = false;

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw UsageError("line " + std::to_string(lineno) + ": expected key = value");

        if (key == "seed") {
            spec.seed = static_cast<std::uint64_t>(parse_num(val, lineno));
            saw_seed = true;
        } else if (key == "generator") {
            spec.generator_path = unquote(val, lineno);
        } else if (key == "random_states") {
            spec.random_states = static_cast<int>(parse_num(val, lineno));
        } else if (key == "random_density") {
            spec.random_density = parse_num(val, lineno);
        } else if (key == "random_symbols") {
            spec.random_symbols = static_cast<int>(parse_num(val, lineno));
        } else if (key == "sizes") {
            for (const auto& item : parse_list(val, lineno))
                spec.sizes.push_back(static_cast<long long>(parse_num(item, lineno)));
        } else if (key == "trace_len") {
            spec.trace_len = static_cast<int>(parse_num(val, lineno));
        } else if (key == "stop_prob") {
            spec.stop_prob = parse_num(val, lineno);
        } else if (key == "learners") {
            spec.learners = parse_list(val, lineno);
        } else if (key == "epsilon") {
            spec.epsilon = parse_num(val, lineno);
        } else if (key == "epsilon_search") {
            auto items = parse_list(val, lineno);
            if (items.size() != 2)
                throw UsageError("line " + std::to_string(lineno) +
                                 ": epsilon_search needs [lo, hi]");
            spec.epsilon_search = true;
            spec.epsilon_lo = parse_num(items[0], lineno);
            spec.epsilon_hi = parse_num(items[1], lineno);
        } else if (key == "mu") {
            spec.mu = parse_num(val, lineno);
        } else if (key == "population") {
            spec.population = static_cast<int>(parse_num(val, lineno));
        } else if (key == "generations") {
            spec.generations = static_cast<int>(parse_num(val, lineno));
        } else if (key == "select") {
            spec.select = unquote(val, lineno);
        } else if (key == "xover") {
            spec.xover = unquote(val, lineno);
        } else if (key == "max_depth") {
            spec.max_depth = static_cast<int>(parse_num(val, lineno));
        } else if (key == "threads") {
            spec.threads = static_cast<int>(parse_num(val, lineno));
        } else if (key == "properties") {
            spec.properties = parse_list(val, lineno);
        } else if (key == "metrics") {
            spec.metrics = parse_list(val, lineno);
        } else if (key == "smc") {
            spec.smc = parse_bool(val, lineno);
        } else if (key == "smc_delta") {
            spec.smc_delta = parse_num(val, lineno);
        } else if (key == "measure_time") {
            spec.measure_time = parse_bool(val, lineno);
        } else {
            throw UsageError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }

    if (!saw_seed) throw UsageError("experiment spec needs a seed");
    bool have_path = !spec.generator_path.empty();
    bool have_random = spec.random_states > 0;
    if (have_path == have_random)
        throw UsageError("experiment spec needs exactly one of generator and random_states");
    if (spec.sizes.empty()) throw UsageError("experiment spec needs sizes");
    for (std::size_t i = 1; i < spec.sizes.size(); ++i)
        if (spec.sizes[i] <= spec.sizes[i - 1])
            throw UsageError("sizes must be strictly increasing");
    if (spec.learners.empty() && !spec.smc)
        throw UsageError("experiment spec needs at least one learner (or smc = true)");
    for (const auto& l : spec.learners)
        if (l != "aalergia" && l != "ga" && l != "pst" && l != "ga-single")
            throw UsageError("unknown learner '" + l + "'");
    if (spec.metrics.empty()) spec.metrics = {"ard", "mse_steady", "pred_acc"};
    for (const auto& m : spec.metrics)
        if (m != "ard" && m != "mse_steady" && m != "pred_acc")
            throw UsageError("unknown metric '" + m + "'");
    return spec;
}

ExperimentSpec parse_experiment_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_spec(buf.str());
}

std::string results_csv(const std::vector<MetricRow>& rows) {
    std::ostringstream os;
    os << "learner,size,wall_ms,metric,value\n";
    for (const auto& r : rows)
        os << r.learner << ',' << r.size << ',' << fmt_double(r.wall_ms) << ',' << r.metric
           << ',' << r.value << '\n';
    return os.str();
}

namespace {

std::string metric_value(double v) {
    if (std::isnan(v)) return "nan";
    return fmt_double(v);
}

struct LearnOutcome {
    Dtmc model;
    double wall_ms = 0.0;
};

LearnOutcome run_learner(const ExperimentSpec& spec, const std::string& learner,
                         const Dtmc& generator, long long size, std::size_t size_idx) {
    // Training data: multi-execution learners get `size` traces; the
    // single-execution ones get one run of `size` symbols.
    std::uint64_t data_seed =
        Rng::derive(spec.seed, {stream::kHarness, 1, static_cast<std::uint64_t>(size_idx)})
            .next_u64();

    SampleParams sp;
    sp.seed = data_seed;
    bool single = learner == "pst" || learner == "ga-single";
    if (single) {
        sp.count = 1;
        sp.fixed_len = static_cast<int>(size);
    } else {
        sp.count = size;
        if (spec.stop_prob > 0.0)
            sp.stop_prob = spec.stop_prob;
        else
            sp.fixed_len = spec.trace_len;
    }
    TraceSet train = sample_traces(generator, sp);

    GaParams gp;
    gp.population = spec.population;
    gp.generation_threshold = spec.generations;
    gp.mu = spec.mu;
    gp.threads = spec.threads;
    gp.seed = Rng::derive(spec.seed, {stream::kHarness, 2,
                                      static_cast<std::uint64_t>(size_idx)})
                  .next_u64();
    if (spec.select == "roulette")
        gp.select = SelectStrategy::Roulette;
    else if (spec.select != "tournament")
        throw UsageError("unknown selection strategy '" + spec.select + "'");
    if (spec.xover == "one")
        gp.crossover = CrossoverKind::OnePoint;
    else if (spec.xover == "two")
        gp.crossover = CrossoverKind::TwoPoint;
    else if (spec.xover == "uniform")
        gp.crossover = CrossoverKind::Uniform;
    else
        throw UsageError("unknown crossover kind '" + spec.xover + "'");

    auto started = std::chrono::steady_clock::now();
    LearnOutcome out;
    if (learner == "aalergia") {
        if (spec.epsilon_search) {
            EpsilonSearch es;
            es.lo = spec.epsilon_lo;
            es.hi = spec.epsilon_hi;
            es.mu = spec.mu;
            out.model = select_epsilon_bic(train, es).model;
        } else {
            out.model = learn_aalergia(train, spec.epsilon);
        }
    } else if (learner == "ga") {
        out.model = learn_ga(train, gp).model;
    } else if (learner == "pst") {
        Pst t = learn_pst(train.traces[0], train.alphabet, spec.epsilon, spec.max_depth);
        out.model = pst_to_dtmc(t, train.traces[0], train.alphabet);
    } else if (learner == "ga-single") {
        GaSingleParams sp2;
        sp2.ga = gp;
        sp2.max_depth = spec.max_depth;
        out.model = learn_ga_single(train.traces[0], train.alphabet, sp2).model;
    } else {
        throw UsageError("unknown learner '" + learner + "'");
    }
    if (spec.measure_time) {
        auto elapsed = std::chrono::steady_clock::now() - started;
        out.wall_ms =
            std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count() / 1000.0;
    }
    return out;
}

} // namespace

std::vector<MetricRow> run_experiment(const ExperimentSpec& spec, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    Dtmc generator;
    if (!spec.generator_path.empty()) {
        generator = load_dtmc_file(spec.generator_path);
    } else {
        generator = random_dtmc(spec.random_states, spec.random_density, spec.random_symbols,
                                Rng::derive(spec.seed, {stream::kHarness, 0}).next_u64());
    }

    std::vector<Property> props;
    for (const auto& p : spec.properties) props.push_back(parse_property(p));
    std::vector<double> truth;
    for (const auto& p : props) truth.push_back(check_property(generator, p));

    // Held-out prediction data, shared by every learner and size.
    TraceSet test;
    bool want_pred = std::find(spec.metrics.begin(), spec.metrics.end(), "pred_acc") !=
                     spec.metrics.end();
    if (want_pred) {
        SampleParams tp;
        tp.count = 100;
        tp.fixed_len = spec.trace_len;
        tp.seed = Rng::derive(spec.seed, {stream::kHarness, 3}).next_u64();
        test = sample_traces(generator, tp);
    }

    // Canonical iteration: sorted learners (plus smc), ascending sizes,
    // metric names ascending; rows then need no resorting and the CSV can be
    // flushed as it grows.
    std::vector<std::string> learners = spec.learners;
    if (spec.smc) learners.push_back("smc");
    std::sort(learners.begin(), learners.end());
    std::vector<std::string> metric_names;
    for (std::size_t i = 0; i < props.size(); ++i)
        metric_names.push_back("ard[" + std::to_string(i) + "]");
    bool want_ard = std::find(spec.metrics.begin(), spec.metrics.end(), "ard") !=
                    spec.metrics.end();
    bool want_mse = std::find(spec.metrics.begin(), spec.metrics.end(), "mse_steady") !=
                    spec.metrics.end();
    std::sort(metric_names.begin(), metric_names.end());

    std::ofstream csv(out_dir + "/results.csv", std::ios::binary);
    if (!csv) throw UsageError("cannot write " + out_dir + "/results.csv");
    csv << "learner,size,wall_ms,metric,value\n";
    csv.flush();

    std::vector<MetricRow> rows;
    auto emit = [&rows, &csv](MetricRow row) {
        csv << row.learner << ',' << row.size << ',' << fmt_double(row.wall_ms) << ','
            << row.metric << ',' << row.value << '\n';
        csv.flush();
        rows.push_back(std::move(row));
    };

    for (const auto& learner : learners) {
        for (std::size_t si = 0; si < spec.sizes.size(); ++si) {
            long long size = spec.sizes[si];
            if (learner == "smc") {
                // Reference estimator on the generator itself, one batch of
                // `size` runs per property.
                double wall = 0.0;
                std::vector<std::string> vals;
                auto started = std::chrono::steady_clock::now();
                for (std::size_t pi = 0; pi < props.size(); ++pi) {
                    if (!props[pi].bounded) {
                        vals.push_back("nan");
                        continue;
                    }
                    SmcParams sp;
                    sp.delta = spec.smc_delta;
                    sp.samples = size;
                    sp.seed = Rng::derive(spec.seed, {stream::kHarness, 4,
                                                      static_cast<std::uint64_t>(si),
                                                      static_cast<std::uint64_t>(pi)})
                                  .next_u64();
                    double est = smc_check(generator, props[pi], sp).estimate;
                    vals.push_back(metric_value(ard(est, truth[pi])));
                }
                if (spec.measure_time) {
                    auto elapsed = std::chrono::steady_clock::now() - started;
                    wall = std::chrono::duration_cast<std::chrono::microseconds>(elapsed)
                               .count() /
                           1000.0;
                }
                if (want_ard)
                    for (std::size_t pi = 0; pi < props.size(); ++pi)
                        emit({learner, size, wall, metric_names[pi], vals[pi]});
                continue;
            }

            LearnOutcome lo = run_learner(spec, learner, generator, size, si);
            save_dtmc_file(lo.model,
                           out_dir + "/model_" + learner + "_" + std::to_string(size) +
                               ".dtmc");

            if (want_ard) {
                for (std::size_t pi = 0; pi < props.size(); ++pi) {
                    double est = check_property(lo.model, props[pi]);
                    emit({learner, size, lo.wall_ms, metric_names[pi],
                          metric_value(ard(est, truth[pi]))});
                }
            }
            if (want_mse)
                emit({learner, size, lo.wall_ms, "mse_steady",
                      metric_value(mse_steady(lo.model, generator))});
            if (want_pred)
                emit({learner, size, lo.wall_ms, "pred_acc",
                      metric_value(prediction_accuracy(lo.model, test))});
        }
    }
    return rows;
}

std::vector<BicSweepRow> bic_sweep(const TraceSet& pi, const std::vector<double>& grid,
                                   double mu) {
    if (grid.empty()) throw UsageError("bic sweep needs a non-empty grid");
    std::vector<BicSweepRow> rows;
    for (double eps : grid) {
        Dtmc model = learn_aalergia(pi, eps);
        double bic = bic_score(model, pi, mu);
        rows.push_back({eps, std::abs(bic), model.n()});
    }
    return rows;
}

std::string bic_sweep_csv(const std::vector<BicSweepRow>& rows) {
    std::ostringstream os;
    os << "epsilon,abs_bic,states\n";
    for (const auto& r : rows)
        os << fmt_double(r.eps) << ',' << fmt_double(r.abs_bic) << ',' << r.states << '\n';
    return os.str();
}

std::vector<double> geometric_grid(double lo, double hi, int steps) {
    if (!(lo > 0.0) || !(hi >= lo)) throw UsageError("grid needs 0 < lo <= hi");
    if (steps < 1) throw UsageError("grid needs at least one step");
    std::vector<double> grid;
    if (steps == 1) {
        grid.push_back(lo);
        return grid;
    }
    double la = std::log(lo), lb = std::log(hi);
    grid.push_back(lo);
    for (int i = 1; i + 1 < steps; ++i)
        grid.push_back(std::exp(la + (lb - la) * static_cast<double>(i) /
                                         static_cast<double>(steps - 1)));
    grid.push_back(hi);
    return grid;
}

} // namespace mclearn
