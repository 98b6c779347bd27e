#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wtb/algorithms/epoch_ucb.hpp"
#include "wtb/algorithms/exp3.hpp"
#include "wtb/algorithms/successive_elimination.hpp"
#include "wtb/csv.hpp"
#include "wtb/environment.hpp"
#include "wtb/error.hpp"
#include "wtb/f1fit.hpp"
#include "wtb/instance_json.hpp"
#include "wtb/instances.hpp"
#include "wtb/oracle.hpp"
#include "wtb/rng.hpp"

namespace wtb {

// ---------------------------------------------------------------- config

struct InstanceSpec {
    std::string family;  // synthetic-unweighted | synthetic-weighted | synthetic-alpha | darts | prop1
                         // | adaptivity-pair | f1 | file
    Json parameters = Json::object();
    std::optional<std::uint64_t> seed;  // stream for randomized families; defaults to the master seed
};

enum class AlgorithmKind { se, exp3, exp3_batched, epoch_ucb };

struct AlgorithmSpec {
    std::string id;
    AlgorithmKind kind = AlgorithmKind::se;
    std::size_t memory_bound = 1;  // M; unused by plain EXP3
    double delta = 0.1;
    bool no_horizon = false;
    std::optional<double> learning_rate;
    double exploration_mix = 0.0;
};

enum class RegretMode { exact_cpr, excess_vs_reference };

struct ExperimentConfig {
    std::string name = "experiment";
    InstanceSpec instance;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t horizon = 0;
    std::vector<std::uint64_t> seeds;
    std::uint64_t master_seed = 0;
    RegretMode regret_mode = RegretMode::exact_cpr;
    std::string reference_algorithm;
    std::string output_dir;         // empty: nothing written
    std::size_t checkpoint_stride = 0;  // 0: max(1, T / 200)
    std::size_t threads = 0;            // 0: hardware concurrency
    bool write_traces = true;
    OracleLimits oracle_limits;

    std::size_t stride() const { return checkpoint_stride ? checkpoint_stride : std::max<std::size_t>(1, horizon / 200); }
};

inline const char* to_string(AlgorithmKind k) {
    switch (k) {
        case AlgorithmKind::se: return "se";
        case AlgorithmKind::exp3: return "exp3";
        case AlgorithmKind::exp3_batched: return "exp3-batched";
        case AlgorithmKind::epoch_ucb: return "epoch-ucb";
    }
    return "?";
}

inline AlgorithmKind algorithm_kind_from(const std::string& s) {
    if (s == "se") return AlgorithmKind::se;
    if (s == "exp3") return AlgorithmKind::exp3;
    if (s == "exp3-batched") return AlgorithmKind::exp3_batched;
    if (s == "epoch-ucb") return AlgorithmKind::epoch_ucb;
    throw ConfigError("unknown algorithm kind '" + s + "'");
}

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.horizon == 0) throw ConfigError("horizon must be positive");
    if (cfg.seeds.empty()) throw ConfigError("seeds must be nonempty");
    if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size()) {
        throw ConfigError("seeds must be distinct");
    }
    if (cfg.algorithms.empty()) throw ConfigError("no algorithms configured");
    std::set<std::string> ids;
    for (const auto& a : cfg.algorithms) {
        if (a.id.empty()) throw ConfigError("algorithm id must be nonempty");
        if (a.id.find_first_of("/\\") != std::string::npos) throw ConfigError("algorithm id may not contain '/'");
        if (!ids.insert(a.id).second) throw ConfigError("duplicate algorithm id '" + a.id + "'");
        if (a.kind != AlgorithmKind::exp3 && a.memory_bound == 0) throw ConfigError(a.id + ": M must be positive");
    }
    if (cfg.regret_mode == RegretMode::excess_vs_reference && !ids.count(cfg.reference_algorithm)) {
        throw ConfigError("reference algorithm '" + cfg.reference_algorithm + "' is not among the algorithms");
    }
}

inline ExperimentConfig config_from_json(const Json& j) {
    try {
        ExperimentConfig cfg;
        cfg.name = j.value("name", cfg.name);
        const Json& inst = j.at("instance");
        cfg.instance.family = inst.at("family").get<std::string>();
        if (inst.contains("parameters")) cfg.instance.parameters = inst.at("parameters");
        if (inst.contains("seed") && !inst.at("seed").is_null()) cfg.instance.seed = inst.at("seed").get<std::uint64_t>();
        for (const Json& a : j.at("algorithms")) {
            AlgorithmSpec spec;
            spec.kind = algorithm_kind_from(a.at("kind").get<std::string>());
            spec.id = a.value("id", std::string(to_string(spec.kind)));
            spec.memory_bound = a.value("M", spec.memory_bound);
            spec.delta = a.value("delta", spec.delta);
            spec.no_horizon = a.value("no_horizon", spec.no_horizon);
            if (a.contains("learning_rate") && !a.at("learning_rate").is_null()) {
                spec.learning_rate = a.at("learning_rate").get<double>();
            }
            spec.exploration_mix = a.value("exploration_mix", spec.exploration_mix);
            cfg.algorithms.push_back(std::move(spec));
        }
        cfg.horizon = j.at("horizon").get<std::size_t>();
        const Json& seeds = j.at("seeds");
        if (seeds.is_object()) {
            const std::uint64_t first = seeds.value("first", std::uint64_t{0});
            const std::uint64_t count = seeds.at("count").get<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(first + i);
        } else {
            cfg.seeds = seeds.get<std::vector<std::uint64_t>>();
        }
        cfg.master_seed = j.value("master_seed", cfg.master_seed);
        const std::string mode = j.value("regret_mode", std::string("exact-cpr"));
        if (mode == "exact-cpr") {
            cfg.regret_mode = RegretMode::exact_cpr;
        } else if (mode == "excess-vs-reference") {
            cfg.regret_mode = RegretMode::excess_vs_reference;
        } else {
            throw ConfigError("unknown regret_mode '" + mode + "'");
        }
        cfg.reference_algorithm = j.value("reference_algorithm", std::string());
        cfg.output_dir = j.value("output_dir", std::string());
        cfg.checkpoint_stride = j.value("checkpoint_stride", std::size_t{0});
        cfg.threads = j.value("threads", std::size_t{0});
        cfg.write_traces = j.value("write_traces", true);
        if (j.contains("oracle_budget")) cfg.oracle_limits.dp_budget = j.at("oracle_budget").get<double>();
        validate(cfg);
        return cfg;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------- instances

namespace detail {

inline std::size_t param_size(const Json& p, const char* key) {
    if (!p.contains(key)) throw ConfigError(std::string("instance parameter '") + key + "' is required");
    return p.at(key).get<std::size_t>();
}

// Every eligible pair across the races of a lap data set whose fitted means
// are strictly decreasing over the first m laps.
inline std::vector<WtbInstance> f1_instances(const std::vector<f1::LapRecord>& laps, std::size_t m) {
    std::vector<WtbInstance> out;
    for (const auto& race : f1::fit_races(laps)) {
        for (const auto& [a, b] : race.pairs) {
            const auto fa = std::find_if(race.fits.begin(), race.fits.end(), [a = a](const auto& f) { return f.driver_id == a; });
            const auto fb = std::find_if(race.fits.begin(), race.fits.end(), [b = b](const auto& f) { return f.driver_id == b; });
            try {
                out.push_back(f1::make_f1_instance(*fa, *fb, m));
            } catch (const ParameterError&) {
                // not decreasing or too short: not usable as a WTB instance
            }
        }
    }
    return out;
}

}  // namespace detail

// Builds the instance for one seed. Randomized families draw from a stream
// keyed on (spec seed or master seed, family, run seed), so every algorithm
// sees the same instance for a given run seed.
inline WtbInstance make_instance(const InstanceSpec& spec, std::uint64_t master_seed, std::uint64_t run_seed) {
    const Json& p = spec.parameters;
    Rng rng = make_rng(spec.seed.value_or(master_seed), "instance:" + spec.family, run_seed);
    std::optional<WtbInstance> inst;
    try {
        const std::string& f = spec.family;
        if (f == "synthetic-unweighted") {
            inst = make_synthetic_unweighted(detail::param_size(p, "K"), detail::param_size(p, "m"));
        } else if (f == "synthetic-weighted") {
            inst = make_synthetic_weighted(detail::param_size(p, "K"), detail::param_size(p, "m"));
        } else if (f == "synthetic-alpha") {
            inst = make_synthetic_alpha(detail::param_size(p, "K"), detail::param_size(p, "m"));
        } else if (f == "darts") {
            inst = make_darts(p.value("K", std::size_t{20}), rng);
        } else if (f == "prop1") {
            const std::size_t m = detail::param_size(p, "m");
            std::vector<int> y;
            if (p.contains("y_star")) {
                y = p.at("y_star").get<std::vector<int>>();
            } else {
                for (std::size_t i = 0; i + 1 < m; ++i) y.push_back(uniform01(rng) < 0.5 ? 1 : 0);
            }
            inst = make_prop1(m, y);
        } else if (f == "adaptivity-pair") {
            auto pair = make_adaptivity_pair(detail::param_size(p, "M"), detail::param_size(p, "K"));
            const std::string which = p.value("which", std::string("B"));
            if (which == "A") {
                inst = std::move(pair.tb_a);
            } else if (which == "B") {
                inst = std::move(pair.tb_b);
            } else {
                throw ConfigError("adaptivity-pair 'which' must be A or B");
            }
        } else if (f == "f1") {
            const std::size_t m = p.value("m", std::size_t{10});
            std::vector<WtbInstance> pool;
            if (p.contains("laps_csv")) {
                pool = detail::f1_instances(f1::parse_lap_csv(p.at("laps_csv").get<std::string>()), m);
            } else {
                f1::SyntheticLapOptions opt;
                opt.races = p.value("races", std::size_t{10});
                opt.drivers = p.value("drivers", std::size_t{20});
                opt.laps = p.value("laps", std::max<std::size_t>(opt.laps, m + 10));
                // the sigma^2 eligibility window is narrow, so most draws have no pair; keep drawing
                // from the same stream
                for (int attempt = 0; attempt < 200 && pool.empty(); ++attempt) {
                    pool = detail::f1_instances(f1::generate_synthetic_laps(opt, rng), m);
                }
            }
            if (pool.empty()) throw ConfigError("f1: no eligible driver pair with decreasing fitted means");
            // Synthetic data is redrawn per seed; a fixed CSV cycles through its pairs.
            inst = std::move(pool[p.contains("laps_csv") ? run_seed % pool.size() : 0]);
        } else if (f == "file") {
            if (!p.contains("path")) throw ConfigError("file instance needs parameters.path");
            inst = load_instance(p.at("path").get<std::string>());
        } else {
            throw ConfigError("unknown instance family '" + f + "'");
        }
        if (p.contains("permutation_seed")) {
            inst = shuffle_actions(*inst, p.at("permutation_seed").get<std::uint64_t>());
        } else if (p.value("shuffle_per_seed", false)) {
            inst = shuffle_actions(*inst, run_seed);
        }
    } catch (const Json::exception& e) {
        throw ConfigError("instance parameters: " + std::string(e.what()));
    } catch (const ParameterError& e) {
        throw ConfigError("instance parameters: " + std::string(e.what()));
    }
    return std::move(*inst);
}

// ---------------------------------------------------------------- runs

// Runs one configured algorithm for T steps. Two streams per run, both keyed
// on (master seed, algorithm id, run seed): one for the algorithm's own
// sampling, one for the feedback noise.
inline RunTrace run_algorithm(const AlgorithmSpec& spec, const WtbInstance& inst, std::size_t T,
                              std::uint64_t master_seed, std::uint64_t run_seed) {
    SimulatedEnvironment env(inst, make_rng(master_seed, spec.id + "/feedback", run_seed));
    Rng rng = make_rng(master_seed, spec.id, run_seed);
    Exp3Options eo{spec.learning_rate, spec.exploration_mix};
    RunTrace trace;
    try {
        switch (spec.kind) {
            case AlgorithmKind::se:
                trace = run_se(env, T, SeOptions{spec.memory_bound, spec.delta, spec.no_horizon}, spec.id).trace;
                break;
            case AlgorithmKind::exp3: trace = run_exp3(env, T, rng, eo, spec.id); break;
            case AlgorithmKind::exp3_batched:
                trace = run_exp3_batched(env, T, spec.memory_bound, rng, eo, spec.id);
                break;
            case AlgorithmKind::epoch_ucb: trace = run_epoch_ucb(env, T, spec.memory_bound, spec.id); break;
        }
    } catch (const ParameterError& e) {
        throw ConfigError(spec.id + ": " + e.what());
    }
    trace.seed = run_seed;
    return trace;
}

// Runs job(0..n-1) on a small worker pool; the first exception is rethrown.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& job) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::vector<std::size_t> checkpoints(std::size_t T, std::size_t stride) {
    std::vector<std::size_t> out;
    for (std::size_t t = stride; t <= T; t += stride) out.push_back(t);
    if (out.empty() || out.back() != T) out.push_back(T);
    return out;
}

struct AggregateCurve {
    std::string algorithm_id;
    std::size_t num_seeds = 0;
    std::vector<std::size_t> timesteps;
    std::vector<double> mean;
    std::vector<double> std_error;  // sample std / sqrt(num_seeds); 0 for one seed

    double terminal_mean() const { return mean.back(); }
    double terminal_std_error() const { return std_error.back(); }
};

struct MeanAndError {
    double mean = 0.0;
    double std_error = 0.0;
};

inline MeanAndError mean_and_error(const std::vector<double>& xs) {
    MeanAndError r;
    if (xs.empty()) return r;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) r.mean += x;
    r.mean /= n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return r;
}

struct ExperimentResult {
    std::vector<std::size_t> timesteps;
    std::vector<AggregateCurve> curves;                  // config order
    std::vector<std::vector<double>> per_seed_terminal;  // [algorithm][seed]
    std::vector<std::vector<double>> per_seed_total_loss;

    const AggregateCurve& curve(const std::string& id) const {
        for (const auto& c : curves) {
            if (c.algorithm_id == id) return c;
        }
        throw Error("no curve for algorithm '" + id + "'");
    }
    std::size_t index_of(const std::string& id) const {
        for (std::size_t i = 0; i < curves.size(); ++i) {
            if (curves[i].algorithm_id == id) return i;
        }
        throw Error("no curve for algorithm '" + id + "'");
    }
};

inline void write_trace_csv(std::ostream& out, const RunTrace& trace) {
    out << "t,action,observed_loss,expected_loss\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << (i + 1) << ',' << trace.actions[i] << ',' << csv::format(trace.observed_losses[i]) << ','
            << csv::format(trace.expected_losses[i]) << '\n';
    }
}

inline void write_aggregate_csv(std::ostream& out, const AggregateCurve& c) {
    out << "t,mean,std_error\n";
    for (std::size_t i = 0; i < c.timesteps.size(); ++i) {
        out << c.timesteps[i] << ',' << csv::format(c.mean[i]) << ',' << csv::format(c.std_error[i]) << '\n';
    }
}

inline std::string trace_file_name(const std::string& algorithm_id, std::uint64_t seed) {
    return algorithm_id + "_seed" + std::to_string(seed) + ".csv";
}

namespace detail {
inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    body(out);
    if (!out) throw Error("write failed for " + path.string());
}
}  // namespace detail

// Runs every (algorithm, seed) pair, reduces the per-run cumulative curves to
// one aggregate per algorithm and, with an output directory, writes
//   traces/<algorithm>_seed<seed>.csv, aggregates/<algorithm>.csv, summary.csv
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const std::size_t T = cfg.horizon;
    const std::size_t num_seeds = cfg.seeds.size();
    const std::size_t num_algs = cfg.algorithms.size();
    const auto marks = checkpoints(T, cfg.stride());

    std::vector<std::optional<WtbInstance>> instances(num_seeds);
    for (std::size_t s = 0; s < num_seeds; ++s) {
        instances[s] = make_instance(cfg.instance, cfg.master_seed, cfg.seeds[s]);
    }

    // OPT(t) at the checkpoints, computed once per distinct instance.
    std::vector<std::vector<double>> opt(num_seeds);
    if (cfg.regret_mode == RegretMode::exact_cpr) {
        std::vector<std::size_t> source(num_seeds);
        for (std::size_t s = 0; s < num_seeds; ++s) {
            source[s] = s;
            for (std::size_t r = 0; r < s; ++r) {
                if (*instances[r] == *instances[s]) {
                    source[s] = source[r];
                    break;
                }
            }
        }
        parallel_for(num_seeds, cfg.threads, [&](std::size_t s) {
            if (source[s] != s) return;
            std::vector<double> curve;
            try {
                curve = optimal_value_curve(*instances[s], T, cfg.oracle_limits);
            } catch (const CapacityError& e) {
                throw CapacityError(std::string(e.what()) +
                                    "; exact-cpr is out of reach here, set \"regret_mode\": \"excess-vs-reference\"");
            }
            opt[s].reserve(marks.size());
            for (std::size_t t : marks) opt[s].push_back(curve[t - 1]);
        });
        for (std::size_t s = 0; s < num_seeds; ++s) {
            if (source[s] != s) opt[s] = opt[source[s]];
        }
    }

    std::filesystem::path out_dir(cfg.output_dir);
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(out_dir / "aggregates");
        if (cfg.write_traces) std::filesystem::create_directories(out_dir / "traces");
    }

    // cumulative expected loss at each checkpoint, [alg][seed][mark]
    std::vector<std::vector<std::vector<double>>> cum(num_algs, std::vector<std::vector<double>>(num_seeds));
    std::vector<std::vector<double>> totals(num_algs, std::vector<double>(num_seeds, 0.0));
    parallel_for(num_algs * num_seeds, cfg.threads, [&](std::size_t job) {
        const std::size_t a = job / num_seeds;
        const std::size_t s = job % num_seeds;
        const RunTrace trace = run_algorithm(cfg.algorithms[a], *instances[s], T, cfg.master_seed, cfg.seeds[s]);
        const auto running = trace.cumulative_expected_loss();
        cum[a][s].reserve(marks.size());
        for (std::size_t t : marks) cum[a][s].push_back(running[t - 1]);
        totals[a][s] = running.back();
        if (!cfg.output_dir.empty() && cfg.write_traces) {
            detail::write_file(out_dir / "traces" / trace_file_name(cfg.algorithms[a].id, cfg.seeds[s]),
                               [&](std::ostream& o) { write_trace_csv(o, trace); });
        }
    });

    ExperimentResult res;
    res.timesteps = marks;
    res.per_seed_total_loss = totals;
    std::size_t ref = 0;
    if (cfg.regret_mode == RegretMode::excess_vs_reference) {
        for (std::size_t a = 0; a < num_algs; ++a) {
            if (cfg.algorithms[a].id == cfg.reference_algorithm) ref = a;
        }
    }
    for (std::size_t a = 0; a < num_algs; ++a) {
        AggregateCurve c;
        c.algorithm_id = cfg.algorithms[a].id;
        c.num_seeds = num_seeds;
        c.timesteps = marks;
        std::vector<double> terminal(num_seeds);
        for (std::size_t i = 0; i < marks.size(); ++i) {
            std::vector<double> xs(num_seeds);
            for (std::size_t s = 0; s < num_seeds; ++s) {
                const double base = cfg.regret_mode == RegretMode::exact_cpr ? opt[s][i] : cum[ref][s][i];
                xs[s] = cum[a][s][i] - base;
            }
            const auto me = mean_and_error(xs);
            c.mean.push_back(me.mean);
            c.std_error.push_back(me.std_error);
            if (i + 1 == marks.size()) terminal = xs;
        }
        res.per_seed_terminal.push_back(std::move(terminal));
        res.curves.push_back(std::move(c));
    }

    if (!cfg.output_dir.empty()) {
        for (const auto& c : res.curves) {
            detail::write_file(out_dir / "aggregates" / (c.algorithm_id + ".csv"),
                               [&](std::ostream& o) { write_aggregate_csv(o, c); });
        }
        detail::write_file(out_dir / "summary.csv", [&](std::ostream& o) {
            o << "algorithm,num_seeds,terminal_mean,terminal_std_error\n";
            for (const auto& c : res.curves) {
                o << c.algorithm_id << ',' << c.num_seeds << ',' << csv::format(c.terminal_mean()) << ','
                  << csv::format(c.terminal_std_error()) << '\n';
            }
        });
    }
    return res;
}

// ---------------------------------------------------------------- M sweep

struct SweepPoint {
    std::size_t memory_bound = 0;
    double mean = 0.0;
    double std_error = 0.0;
};

// Terminal regret of SE as a function of its memory bound M. Uses the
// config's SE entries (or a default SE when there are none); each M runs a
// full experiment writing to <output_dir>/M<value>.
inline std::vector<SweepPoint> m_scaling_sweep(const ExperimentConfig& base, const std::vector<std::size_t>& M_values) {
    if (M_values.empty()) throw ConfigError("M sweep needs at least one value");
    const std::size_t m = make_instance(base.instance, base.master_seed, base.seeds.front()).memory_capacity();
    std::vector<AlgorithmSpec> se;
    for (const auto& a : base.algorithms) {
        if (a.kind == AlgorithmKind::se) se.push_back(a);
    }
    if (se.empty()) se.push_back(AlgorithmSpec{"se", AlgorithmKind::se, m, 0.1, false, std::nullopt, 0.0});
    std::vector<SweepPoint> out;
    for (std::size_t M : M_values) {
        if (M < m) throw ConfigError("sweep value M = " + std::to_string(M) + " is below m = " + std::to_string(m));
        ExperimentConfig cfg = base;
        cfg.algorithms = {se.front()};
        cfg.algorithms[0].memory_bound = M;
        cfg.regret_mode = RegretMode::exact_cpr;
        if (!base.output_dir.empty()) cfg.output_dir = (std::filesystem::path(base.output_dir) / ("M" + std::to_string(M))).string();
        const auto res = run_experiment(cfg);
        out.push_back({M, res.curves[0].terminal_mean(), res.curves[0].terminal_std_error()});
    }
    if (!base.output_dir.empty()) {
        std::filesystem::create_directories(base.output_dir);
        detail::write_file(std::filesystem::path(base.output_dir) / "sweep_m.csv", [&](std::ostream& o) {
            o << "M,mean,std_error\n";
            for (const auto& p : out) o << p.memory_bound << ',' << csv::format(p.mean) << ',' << csv::format(p.std_error) << '\n';
        });
    }
    return out;
}

// ---------------------------------------------------------------- adaptivity

// True when `actions` contains a run of at least `len` consecutive plays of `a`.
inline bool has_run(const std::vector<Action>& actions, Action a, std::size_t len) {
    std::size_t run = 0;
    for (Action x : actions) {
        run = x == a ? run + 1 : 0;
        if (run >= len) return true;
    }
    return false;
}

struct AdaptivityRow {
    std::string policy;
    bool triggered_on_a = false;    // played x2 M times in a row on tb_A
    bool identical_observations = false;
    double loss_a = 0.0;            // cumulative expected loss
    double loss_b = 0.0;
    bool consistent() const { return triggered_on_a || identical_observations; }
};

// Runs the four algorithms (input M) plus the two constant policies on tb_A
// and tb_B with identical seeds.
inline std::vector<AdaptivityRow> adaptivity_demo(std::size_t M, std::size_t K, std::size_t T, std::uint64_t master_seed = 0) {
    if (!(T > 4 * M)) throw ParameterError("adaptivity demo needs T > 4M");
    const auto pair = make_adaptivity_pair(M, K);
    std::vector<AlgorithmSpec> algs = {
        {"se", AlgorithmKind::se, M, 0.1, false, std::nullopt, 0.0},
        {"exp3", AlgorithmKind::exp3, M, 0.1, false, std::nullopt, 0.0},
        {"exp3-batched", AlgorithmKind::exp3_batched, M, 0.1, false, std::nullopt, 0.0},
        {"epoch-ucb", AlgorithmKind::epoch_ucb, M, 0.1, false, std::nullopt, 0.0},
    };
    auto row_of = [&](const std::string& name, const RunTrace& a, const RunTrace& b) {
        AdaptivityRow r;
        r.policy = name;
        r.triggered_on_a = has_run(a.actions, 1, M);
        r.identical_observations = a.observed_losses == b.observed_losses;
        r.loss_a = a.total_expected_loss();
        r.loss_b = b.total_expected_loss();
        return r;
    };
    std::vector<AdaptivityRow> rows;
    for (const auto& spec : algs) {
        rows.push_back(row_of(spec.id, run_algorithm(spec, pair.tb_a, T, master_seed, 0),
                              run_algorithm(spec, pair.tb_b, T, master_seed, 0)));
    }
    for (Action x : {Action{0}, Action{1}}) {
        const std::vector<Action> seq(T, x);
        SimulatedEnvironment ea(pair.tb_a, make_rng(master_seed, "fixed", x));
        SimulatedEnvironment eb(pair.tb_b, make_rng(master_seed, "fixed", x));
        const std::string name = x == 0 ? "always-x1" : "always-x2";
        rows.push_back(row_of(name, run_fixed_sequence(ea, seq, name), run_fixed_sequence(eb, seq, name)));
    }
    return rows;
}

}  // namespace wtb
