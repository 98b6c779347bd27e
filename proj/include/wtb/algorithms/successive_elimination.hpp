#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "wtb/algorithms/schedule.hpp"
#include "wtb/environment.hpp"

namespace wtb {

struct SeOptions {
    std::size_t memory_bound = 1;  // M >= m for the regret guarantee; never compared to m here
    double delta = 0.1;
    bool no_horizon = false;
};

struct SeEpochRecord {
    std::size_t epoch = 0;
    std::size_t pulls = 0;  // n_s
    double radius = 0.0;    // C_s
    std::vector<Action> survivors;  // A_s, ascending
    std::vector<double> estimates;  // mu_hat_s, aligned with survivors
    Action incumbent = 0;
    std::vector<Action> survivors_after;  // A_{s+1}
    bool completed = true;                // false for a sweep cut short by the horizon
};

struct SeResult {
    RunTrace trace;
    EpochSchedule schedule;
    std::vector<SeEpochRecord> epochs;
    std::vector<Action> survivors;  // final surviving set
    Action incumbent = 0;           // action played after exploration
};

// Successive elimination with warm-up: every surviving action is played n_s
// times unrecorded (filling its memory window), then n_s times recorded; the
// recorded mean estimates its eventual loss. Actions whose estimate exceeds the
// incumbent's by more than 2 C_s are dropped. After the last epoch, or once the
// next epoch no longer fits in the horizon, the incumbent is played to the end.
//
// If the very first epoch does not fit, and in no-horizon mode, the sweep is
// cut at the horizon and no elimination happens for that partial epoch.
template <Environment Env>
SeResult run_se(Env& env, std::size_t T, const SeOptions& opts, std::string id = "se") {
    const std::size_t K = env.num_actions();
    SeResult res;
    res.schedule = se_schedule(T, opts.memory_bound, K, opts.delta, opts.no_horizon);
    res.trace.algorithm_id = std::move(id);
    res.trace.reserve(T);

    std::vector<Action> alive(K);
    for (Action x = 0; x < K; ++x) alive[x] = x;
    Action incumbent = 0;
    std::size_t t = 0;

    for (std::size_t s = 1; t < T; ++s) {
        if (!opts.no_horizon && s > res.schedule.num_epochs) break;
        const std::size_t n = res.schedule.pulls(s, alive.size());
        const std::size_t budget = 2 * alive.size() * n;
        const bool fits = budget <= T - t;
        if (!fits && !opts.no_horizon && !res.epochs.empty()) break;

        SeEpochRecord rec;
        rec.epoch = s;
        rec.pulls = n;
        rec.radius = res.schedule.radius(n);
        rec.survivors = alive;
        rec.completed = fits;
        for (Action x : alive) {
            double sum = 0.0;
            std::size_t stored = 0;
            for (std::size_t k = 0; k < n && t < T; ++k, ++t) play_and_record(env, res.trace, x);
            for (; stored < n && t < T; ++stored, ++t) {
                sum += play_and_record(env, res.trace, x).observed_loss;
            }
            // A cut sweep may leave later actions with no recorded plays.
            rec.estimates.push_back(stored > 0 ? sum / static_cast<double>(stored)
                                               : std::numeric_limits<double>::quiet_NaN());
        }
        if (!fits) {
            rec.incumbent = incumbent;
            rec.survivors_after = alive;
            res.epochs.push_back(std::move(rec));
            break;
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < alive.size(); ++i) {
            if (rec.estimates[i] < rec.estimates[best]) best = i;
        }
        incumbent = alive[best];
        const double threshold = rec.estimates[best] + 2.0 * rec.radius;
        std::vector<Action> next;
        for (std::size_t i = 0; i < alive.size(); ++i) {
            if (rec.estimates[i] <= threshold) next.push_back(alive[i]);
        }
        rec.incumbent = incumbent;
        rec.survivors_after = next;
        alive = std::move(next);
        res.epochs.push_back(std::move(rec));
    }
    for (; t < T; ++t) play_and_record(env, res.trace, incumbent);
    res.survivors = alive;
    res.incumbent = incumbent;
    return res;
}

}  // namespace wtb
