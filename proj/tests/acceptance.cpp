// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wtb/wtb.hpp"

using namespace wtb;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %-34s %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Desk-scale comparison: K=5, m=3, M=3, T=1e4, 20 seeds.
Json desk_config() {
    return Json::parse(R"({
        "name": "desk-compare",
        "instance": {"family": "synthetic-unweighted", "parameters": {"K": 5, "m": 3}},
        "algorithms": [
            {"id": "se", "kind": "se", "M": 3, "delta": 0.1},
            {"id": "exp3", "kind": "exp3"},
            {"id": "exp3-batched", "kind": "exp3-batched", "M": 3},
            {"id": "epoch-ucb", "kind": "epoch-ucb", "M": 3}
        ],
        "horizon": 10000,
        "seeds": {"count": 20},
        "master_seed": 2022,
        "regret_mode": "exact-cpr"
    })");
}

void criterion_1_and_2() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = config_from_json(desk_config());
    const auto res = run_experiment(cfg);
    const double secs = seconds_since(t0);

    const double K = 5, m = 3, M = 3, T = 10000, delta = 0.1;
    const double bound = 4 * K * M + K * m * std::log(T) + 800 * std::sqrt(K * T * std::log(2 * K * std::log(T) / delta));
    const auto& se_runs = res.per_seed_terminal[res.index_of("se")];
    const double worst = *std::max_element(se_runs.begin(), se_runs.end());
    report(1, "CPR upper envelope", worst <= bound && secs < 60,
           fmt("max seed CPR %.1f <= bound %.1f, %.1f s", worst, bound, secs));

    const auto& se = res.curve("se");
    bool ok = true;
    std::string detail = fmt("SE %.1f+-%.1f", se.terminal_mean(), se.terminal_std_error());
    for (const char* other : {"exp3", "exp3-batched", "epoch-ucb"}) {
        const auto& c = res.curve(other);
        const double pooled = std::sqrt(se.terminal_std_error() * se.terminal_std_error() +
                                        c.terminal_std_error() * c.terminal_std_error());
        const double gap = c.terminal_mean() - se.terminal_mean();
        const bool this_ok = gap > 2 * pooled;
        ok = ok && this_ok;
        detail += std::string("; ") + other + fmt(" %.1f+-%.1f", c.terminal_mean(), c.terminal_std_error()) +
                  (this_ok ? "" : " (not above SE)");
    }
    report(2, "desk-scale ordering SE < baselines", ok, detail);
}

WtbInstance random_table_instance(std::size_t K, std::size_t m, Rng& rng) {
    std::vector<std::vector<double>> w(K, std::vector<double>(m));
    std::vector<LossFunction> h;
    for (std::size_t x = 0; x < K; ++x) {
        for (auto& v : w[x]) v = 0.05 + 0.95 * uniform01(rng);
        LossFunction f;
        for_each_context_tally(w[x], [&](double z) { f.add_entry(z, uniform01(rng)); });
        h.push_back(f);
    }
    return WtbInstance(m, std::move(w), std::move(h), FeedbackLaw::bernoulli());
}

void criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng = make_rng(2022, "acceptance-oracle", 0);
    double worst = 0.0;
    const int n = 60;
    for (int i = 0; i < n; ++i) {
        const std::size_t K = 1 + static_cast<std::size_t>(uniform01(rng) * 3);
        const std::size_t m = 1 + static_cast<std::size_t>(uniform01(rng) * 3);
        const std::size_t T = 1 + static_cast<std::size_t>(uniform01(rng) * 10);
        const auto inst = random_table_instance(K, m, rng);
        worst = std::max(worst, std::abs(optimal_value_dp(inst, T).value - optimal_value_bruteforce(inst, T).value));
    }
    const auto tiny = make_synthetic_unweighted(2, 2);
    const double dp = optimal_value_dp(tiny, 5).value, bf = optimal_value_bruteforce(tiny, 5).value;
    const double secs = seconds_since(t0);
    const bool ok = worst <= 1e-12 && std::abs(dp - 1.9) <= 1e-12 && std::abs(bf - 1.9) <= 1e-12 && secs < 60;
    report(3, "oracle DP == brute force", ok,
           fmt("%.0f random instances, max |diff| %.2e; K=2 m=2 T=5 value %.15g; %.1f s", n, worst, dp, secs));
}

void criterion_4() {
    std::size_t checked = 0;
    bool ok = true;
    std::string bad;
    for (const auto& ni : bundled_instances()) {
        if (ni.instance.memory_capacity() > 6 || minimal_reo_alpha(ni.instance).alpha != 0.0) continue;
        for (std::size_t T : {1u, 2u, 10u, 100u, 500u}) {
            ++checked;
            if (!reo_floor_check(ni.instance, T)) {
                ok = false;
                bad += " " + ni.name + " T=" + std::to_string(T);
            }
        }
    }
    report(4, "REO floor on bundled instances", ok,
           std::to_string(checked) + " instance/horizon pairs" + (bad.empty() ? "" : "; failed:" + bad));
}

void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::vector<std::uint64_t> values;
    for (std::size_t m = 2; m <= 20; ++m) {
        values.clear();
        std::vector<int> y(m, 0);
        y[0] = 1;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (m - 1)); ++mask) {
            for (std::size_t i = 1; i < m; ++i) y[i] = (mask >> (i - 1)) & 1;
            values.push_back(dyadic_numerator(y));
        }
        std::sort(values.begin(), values.end());
        if (std::adjacent_find(values.begin(), values.end()) != values.end()) ok = false;
    }
    const double secs = seconds_since(t0);
    report(5, "dyadic tally injectivity m=2..20", ok && secs < 10, fmt("exhaustive, %.2f s", secs));
}

void criterion_6() {
    const std::size_t M = 10, K = 3, T = 500;
    const auto pair = make_adaptivity_pair(M, K);
    Rng rng = make_rng(2022, "acceptance-adaptivity", 0);
    int identical = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Action> seq;
        std::size_t run = 0;
        while (seq.size() < T) {
            Action a = static_cast<Action>(uniform01(rng) * static_cast<double>(K));
            if (a == 1 && run + 1 >= M) a = 0;
            run = a == 1 ? run + 1 : 0;
            seq.push_back(a);
        }
        SimulatedEnvironment ea(pair.tb_a, make_rng(0, "a", trial)), eb(pair.tb_b, make_rng(0, "b", trial));
        const auto ta = run_fixed_sequence(ea, seq), tb = run_fixed_sequence(eb, seq);
        bool same = ta.observed_losses.size() == tb.observed_losses.size();
        for (std::size_t i = 0; same && i < T; ++i) {
            same = std::memcmp(&ta.observed_losses[i], &tb.observed_losses[i], sizeof(double)) == 0;
        }
        identical += same;
    }
    const double always_x2 = sequence_loss(pair.tb_b, std::vector<Action>(T, 1));
    report(6, "tb_A / tb_B indistinguishability", identical == 100 && always_x2 == 9.0,
           fmt("%.0f/100 sequences bit-identical; always-x2 on tb_B loses %.17g", identical, always_x2));
}

void criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto inst = make_synthetic_unweighted(5, 3);
    const std::size_t T = 1000000;
    int retained = 0;
    int gap_ok = 0;
    double worst_gap_ratio = 0.0;
    for (int i = 0; i < 100; ++i) {
        SimulatedEnvironment env(inst, make_rng(2022, "acceptance-se-feedback", i));
        const auto r = run_se(env, T, SeOptions{3, 0.1, false});
        const bool keeps = std::find(r.survivors.begin(), r.survivors.end(), Action{0}) != r.survivors.end();
        if (!keeps) continue;
        ++retained;
        const std::size_t S = r.schedule.num_epochs;
        // C_{S-1}: the radius used in epoch S-1 (the last one when fewer ran)
        const auto& rec = r.epochs[std::min<std::size_t>(S >= 2 ? S - 2 : 0, r.epochs.size() - 1)];
        const double limit = 4 * rec.radius;
        bool all = true;
        for (Action x : r.survivors) {
            const double gap = eventual_loss(inst, x) - eventual_loss(inst, 0);
            worst_gap_ratio = std::max(worst_gap_ratio, gap / limit);
            all = all && gap <= limit;
        }
        gap_ok += all;
    }
    const double secs = seconds_since(t0);
    report(7, "best-arm retention and gap", retained >= 85 && gap_ok == retained,
           fmt("T=1e6: x* kept in %.0f/100 runs, gap bound held in %.0f of them (max gap/4C %.3f), %.0f s", retained,
               gap_ok, worst_gap_ratio, secs));
}

void criterion_8() {
    double worst = 0.0;
    std::string values;
    for (std::size_t m = 2; m <= 10; ++m) {
        const double md = static_cast<double>(m);
        const double got = minimal_reo_alpha(make_synthetic_alpha(5, m)).alpha;
        const double want = std::max(0.0, -0.2 + (2 * md - 3) / (4 * md));
        worst = std::max(worst, std::abs(got - want));
        if (m == 2 || m == 4 || m == 10) values += fmt(" m=%.0f: %.6g vs %.6g;", md, got, want);
    }
    const double at4 = minimal_reo_alpha(make_synthetic_alpha(5, 4)).alpha;
    report(8, "alpha closed form", worst <= 1e-12 && std::abs(at4 - 0.1125) <= 1e-12,
           "measured vs stated" + values + fmt(" max |diff| %.4g", worst));
}

void criterion_9() {
    const auto t0 = std::chrono::steady_clock::now();
    auto truth = [](double k) { return 0.6 * std::exp(-0.8 * k) - 0.01 * k; };
    Rng rng = make_rng(2022, "acceptance-f1", 0);
    const auto clean = f1::fit_lap_model(f1::generate_series(0.8, 0.6, 0.01, 0.0, 10, rng));
    double worst = 0.0;
    for (int k = 1; k <= 10; ++k) worst = std::max(worst, std::abs(clean.mean_at(k) - truth(k)));

    std::vector<double> errs;
    int fit_failures = 0;
    for (int s = 0; s < 1000; ++s) {
        Rng r = make_rng(2022, "acceptance-f1-noisy", s);
        try {
            const auto f = f1::fit_lap_model(f1::generate_series(0.8, 0.6, 0.01, 0.02, 10, r));
            errs.push_back(std::abs(f.terminal_mean - truth(10)));
        } catch (const f1::FitError& e) {
            ++fit_failures;
            errs.push_back(std::abs(e.best_so_far().terminal_mean - truth(10)));
        }
    }
    std::sort(errs.begin(), errs.end());
    const double median = 0.5 * (errs[499] + errs[500]);
    report(9, "lap-model fit recovery", worst <= 1e-6 && median < 0.02,
           fmt("noiseless max |mean err| %.2e; sigma=0.02 median |terminal err| %.4f over 1000 seeds "
               "(%.0f non-converged); %.1f s",
               worst, median, fit_failures, seconds_since(t0)));
}

void criterion_10() {
    auto j = desk_config();
    j["instance"]["parameters"] = {{"K", 5}, {"m", 4}};
    j["algorithms"] = Json::array({Json{{"id", "se"}, {"kind", "se"}, {"M", 4}, {"delta", 0.1}}});
    const auto points = m_scaling_sweep(config_from_json(j), {4, 8, 16, 32});
    bool ok = true;
    std::string detail = "CPR";
    for (std::size_t i = 0; i < points.size(); ++i) {
        detail += fmt(" M=%.0f:%.1f", static_cast<double>(points[i].memory_bound), points[i].mean);
        if (i > 0) {
            const double ratio = points[i].mean / points[i - 1].mean;
            detail += fmt("(x%.2f)", ratio);
            ok = ok && ratio <= 2.5;
        }
    }
    report(10, "M-scaling at most linear", ok, detail);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion_11() {
    const fs::path root = fs::temp_directory_path() / "wtb_acceptance_determinism";
    fs::remove_all(root);
    auto j = desk_config();
    j["instance"] = {{"family", "darts"}, {"parameters", {{"K", 20}}}};
    j["algorithms"][0]["M"] = 2;
    j["algorithms"][2]["M"] = 2;
    j["algorithms"][3]["M"] = 2;
    j["horizon"] = 5000;
    j["seeds"] = {{"count", 5}};
    for (const char* run : {"a", "b"}) {
        j["output_dir"] = (root / run).string();
        run_experiment(config_from_json(j));
    }
    std::size_t files = 0, same = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        same += slurp(e.path()) == slurp(root / "b" / fs::relative(e.path(), root / "a"));
    }
    fs::remove_all(root);
    report(11, "byte-identical reruns", files > 0 && same == files,
           fmt("%.0f/%.0f trace and aggregate files identical", same, files));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::pair<int, void (*)()> checks[] = {{1, criterion_1_and_2}, {3, criterion_3}, {4, criterion_4},
                                                 {5, criterion_5},       {6, criterion_6}, {7, criterion_7},
                                                 {8, criterion_8},       {9, criterion_9}, {10, criterion_10},
                                                 {11, criterion_11}};
    for (const auto& [id, fn] : checks) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, "raised an exception", false, e.what());
        }
    }
    std::printf("%d criterion(s) failed, %.1f s total\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
