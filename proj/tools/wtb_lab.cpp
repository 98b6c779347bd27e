// wtb_lab: command-line front end for the simulation lab.
//
//   wtb_lab run <config.json>
//   wtb_lab sweep-m <config.json> [--M 4,8,16,32]
//   wtb_lab adaptivity --M 10 --K 3 --T 2000
//   wtb_lab fit-f1 <laps.csv> [--out DIR] [--m 10]
//   wtb_lab gen-f1 --out laps.csv [--races 3 --drivers 6 --laps 20 --seed 0]
//   wtb_lab check-reo <instance.json>
//   wtb_lab oracle <instance.json> --T 50
//   wtb_lab make-instance <family> --out inst.json [--K --m --M --seed]
//
// Exit codes: 0 ok, 1 other failure, 2 config/parameter error, 3 capacity error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "wtb/wtb.hpp"

namespace {

int cmd_run(const std::string& path, const std::string& out_override, std::size_t threads) {
    auto cfg = wtb::load_config(path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (threads) cfg.threads = threads;
    const auto res = wtb::run_experiment(cfg);
    const char* what = cfg.regret_mode == wtb::RegretMode::exact_cpr ? "CPR" : "excess loss";
    std::printf("%s: T=%zu, %zu seeds, terminal %s\n", cfg.name.c_str(), cfg.horizon, cfg.seeds.size(), what);
    for (const auto& c : res.curves) {
        std::printf("  %-16s %12.3f +- %.3f\n", c.algorithm_id.c_str(), c.terminal_mean(), c.terminal_std_error());
    }
    if (!cfg.output_dir.empty()) std::printf("wrote %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_sweep(const std::string& path, std::vector<std::size_t> Ms, const std::string& out_override) {
    auto cfg = wtb::load_config(path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (Ms.empty()) {
        const std::size_t m = wtb::make_instance(cfg.instance, cfg.master_seed, cfg.seeds.front()).memory_capacity();
        Ms = {m, 2 * m, 4 * m, 8 * m};
    }
    const auto points = wtb::m_scaling_sweep(cfg, Ms);
    std::printf("%8s %12s %10s %8s\n", "M", "mean CPR", "std err", "ratio");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (i == 0) {
            std::printf("%8zu %12.3f %10.3f %8s\n", p.memory_bound, p.mean, p.std_error, "-");
        } else {
            std::printf("%8zu %12.3f %10.3f %8.3f\n", p.memory_bound, p.mean, p.std_error, p.mean / points[i - 1].mean);
        }
    }
    return 0;
}

int cmd_adaptivity(std::size_t M, std::size_t K, std::size_t T, std::uint64_t seed) {
    const auto rows = wtb::adaptivity_demo(M, K, T, seed);
    std::printf("tb_A vs tb_B, M=%zu K=%zu T=%zu\n", M, K, T);
    std::printf("%-14s %10s %10s %12s %12s\n", "policy", "x2 run>=M", "same obs", "loss tb_A", "loss tb_B");
    bool ok = true;
    for (const auto& r : rows) {
        std::printf("%-14s %10s %10s %12.1f %12.1f\n", r.policy.c_str(), r.triggered_on_a ? "yes" : "no",
                    r.identical_observations ? "yes" : "no", r.loss_a, r.loss_b);
        ok = ok && r.consistent();
    }
    if (!ok) {
        std::fprintf(stderr, "a policy that never triggered tb_B saw different observations\n");
        return 1;
    }
    return 0;
}

int cmd_fit_f1(const std::string& path, const std::string& out_dir, std::size_t m) {
    const auto laps = wtb::f1::parse_lap_csv(path);
    const auto races = wtb::f1::fit_races(laps);
    std::vector<wtb::f1::LapModelFit> fits;
    std::vector<wtb::f1::RacePairs> pairs;
    for (const auto& r : races) {
        for (const auto& f : r.fits) {
            fits.push_back(f);
            if (!f.means_in_range()) {
                std::fprintf(stderr, "warning: race %ld driver %ld has fitted means outside [-0.5,1.5]\n", f.race_id,
                             f.driver_id);
            }
            if (m <= f.num_laps && wtb::f1::means_clamped(f, m)) {
                std::fprintf(stderr, "note: race %ld driver %ld means clamped to [0,1] for m=%zu\n", f.race_id,
                             f.driver_id, m);
            }
        }
        pairs.push_back({r.series.race_id, r.pairs});
        std::printf("race %ld: %zu drivers kept, %zu laps each, %zu eligible pairs\n", r.series.race_id,
                    r.series.drivers.size(), r.series.drivers.empty() ? 0 : r.series.drivers.front().values.size(),
                    r.pairs.size());
    }
    std::filesystem::create_directories(out_dir);
    std::ofstream fo(std::filesystem::path(out_dir) / "fits.csv", std::ios::binary);
    wtb::f1::write_fits_csv(fo, fits);
    std::ofstream po(std::filesystem::path(out_dir) / "pairs.csv", std::ios::binary);
    wtb::f1::write_pairs_csv(po, pairs);
    std::printf("wrote %s/fits.csv and %s/pairs.csv\n", out_dir.c_str(), out_dir.c_str());
    return 0;
}

int cmd_gen_f1(const std::string& out, const wtb::f1::SyntheticLapOptions& opt, std::uint64_t seed) {
    wtb::Rng rng = wtb::make_rng(seed, "gen-f1", 0);
    const auto laps = wtb::f1::generate_synthetic_laps(opt, rng);
    std::ofstream o(out, std::ios::binary);
    if (!o) throw wtb::Error("cannot write " + out);
    wtb::f1::write_lap_csv(o, laps);
    std::printf("wrote %zu laps to %s\n", laps.size(), out.c_str());
    return 0;
}

int cmd_check_reo(const std::string& path, std::size_t cap) {
    const auto inst = wtb::load_instance(path);
    inst.validate();
    const auto reo = wtb::minimal_reo_alpha(inst, cap);
    std::printf("K=%zu m=%zu\n", inst.num_actions(), inst.memory_capacity());
    for (wtb::Action x = 0; x < inst.num_actions(); ++x) {
        std::printf("  mu(%zu) = %s\n", x, wtb::csv::format(wtb::eventual_loss(inst, x)).c_str());
    }
    std::printf("best action %zu, minimal alpha %s\n", reo.best_action, wtb::csv::format(reo.alpha).c_str());
    return 0;
}

int cmd_oracle(const std::string& path, std::size_t T, bool show_sequence) {
    const auto inst = wtb::load_instance(path);
    const auto pv = wtb::optimal_value_dp(inst, T, {}, show_sequence);
    std::printf("OPT(%zu) = %s\n", T, wtb::csv::format(pv.value).c_str());
    if (show_sequence && !pv.optimal_sequence.empty()) {
        std::printf("sequence:");
        for (auto a : pv.optimal_sequence) std::printf(" %zu", a);
        std::printf("\n");
    }
    return 0;
}

int cmd_make_instance(const std::string& family, const std::string& out, std::size_t K, std::size_t m, std::size_t M,
                      std::uint64_t seed, const std::string& which) {
    wtb::InstanceSpec spec;
    spec.family = family;
    spec.parameters = {{"K", K}, {"m", m}, {"M", M}, {"which", which}};
    const auto inst = wtb::make_instance(spec, seed, 0);
    wtb::save_instance(inst, out);
    std::printf("wrote %s (%s, K=%zu, m=%zu)\n", out.c_str(), inst.name().c_str(), inst.num_actions(),
                inst.memory_capacity());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted tallying bandit simulation lab"};
    app.require_subcommand(1);

    std::string config, out_dir;
    std::size_t threads = 0;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config, "experiment JSON")->required();
    run->add_option("--out", out_dir, "override output_dir");
    run->add_option("--threads", threads, "worker threads (0 = all cores)");

    std::vector<std::size_t> Ms;
    auto* sweep = app.add_subcommand("sweep-m", "terminal CPR of SE as a function of M");
    sweep->add_option("config", config, "experiment JSON")->required();
    sweep->add_option("--M", Ms, "M values (default m,2m,4m,8m)")->delimiter(',');
    sweep->add_option("--out", out_dir, "override output_dir");

    std::size_t M = 10, K = 3, T = 2000, m = 10;
    std::uint64_t seed = 0;
    auto* adapt = app.add_subcommand("adaptivity", "paired runs on the two indistinguishable instances");
    adapt->add_option("--M", M)->capture_default_str();
    adapt->add_option("--K", K)->capture_default_str();
    adapt->add_option("--T", T)->capture_default_str();
    adapt->add_option("--seed", seed)->capture_default_str();

    std::string laps_path, fit_out = ".";
    auto* fit = app.add_subcommand("fit-f1", "fit lap-time models and list eligible driver pairs");
    fit->add_option("laps", laps_path, "lap CSV")->required();
    fit->add_option("--out", fit_out, "directory for fits.csv and pairs.csv")->capture_default_str();
    fit->add_option("--m", m, "window used to report mean clamping")->capture_default_str();

    wtb::f1::SyntheticLapOptions lap_opt;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-f1", "write a synthetic lap CSV");
    gen->add_option("--out", gen_out, "output CSV")->required();
    gen->add_option("--races", lap_opt.races)->capture_default_str();
    gen->add_option("--drivers", lap_opt.drivers)->capture_default_str();
    gen->add_option("--laps", lap_opt.laps)->capture_default_str();
    gen->add_option("--seed", seed)->capture_default_str();

    std::string inst_path;
    std::size_t cap = wtb::kDefaultReoCap;
    auto* reo = app.add_subcommand("check-reo", "minimal alpha for which an instance is alpha-REO");
    reo->add_option("instance", inst_path, "instance JSON")->required();
    reo->add_option("--cap", cap, "largest m to enumerate")->capture_default_str();

    bool show_sequence = false;
    auto* oracle = app.add_subcommand("oracle", "exact optimal cumulative loss");
    oracle->add_option("instance", inst_path, "instance JSON")->required();
    oracle->add_option("--T", T, "horizon")->required();
    oracle->add_flag("--sequence", show_sequence, "print the lexicographically first optimal sequence");

    std::string family, which = "B";
    auto* make = app.add_subcommand("make-instance", "write a generated instance as JSON");
    make->add_option("family", family, "instance family")->required();
    make->add_option("--out", inst_path, "output JSON")->required();
    make->add_option("--K", K)->capture_default_str();
    make->add_option("--m", m)->capture_default_str();
    make->add_option("--M", M)->capture_default_str();
    make->add_option("--seed", seed)->capture_default_str();
    make->add_option("--which", which, "A or B for adaptivity-pair")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(config, out_dir, threads);
        if (*sweep) return cmd_sweep(config, Ms, out_dir);
        if (*adapt) return cmd_adaptivity(M, K, T, seed);
        if (*fit) return cmd_fit_f1(laps_path, fit_out, m);
        if (*gen) return cmd_gen_f1(gen_out, lap_opt, seed);
        if (*reo) return cmd_check_reo(inst_path, cap);
        if (*oracle) return cmd_oracle(inst_path, T, show_sequence);
        if (*make) return cmd_make_instance(family, inst_path, K, m, M, seed, which);
    } catch (const wtb::CapacityError& e) {
        std::fprintf(stderr, "capacity error: %s\n", e.what());
        return 3;
    } catch (const wtb::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const wtb::ParameterError& e) {
        std::fprintf(stderr, "parameter error: %s\n", e.what());
        return 2;
    } catch (const wtb::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
