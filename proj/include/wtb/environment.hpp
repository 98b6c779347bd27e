#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "wtb/history.hpp"
#include "wtb/instance.hpp"
#include "wtb/rng.hpp"

namespace wtb {

// What an algorithm may touch: the action count and the play() feedback.
template <class E>
concept Environment = requires(E env, const E cenv, Action a) {
    { cenv.num_actions() } -> std::convertible_to<std::size_t>;
    { env.play(a) } -> std::same_as<Observation>;
};

// Live simulation of one instance. Owns the per-run history and feedback rng.
class SimulatedEnvironment {
public:
    SimulatedEnvironment(const WtbInstance& instance, Rng rng)
        : instance_(&instance), history_(instance.memory_capacity()), rng_(std::move(rng)) {}

    std::size_t num_actions() const noexcept { return instance_->num_actions(); }
    Observation play(Action x) { return step(*instance_, history_, x, rng_); }

    const WtbInstance& instance() const noexcept { return *instance_; }
    const HistoryWindow& history() const noexcept { return history_; }

private:
    const WtbInstance* instance_;
    HistoryWindow history_;
    Rng rng_;
};

// Per-timestep record of one run. All three sequences have length T.
struct RunTrace {
    std::string algorithm_id;
    std::uint64_t seed = 0;
    std::vector<Action> actions;
    std::vector<double> observed_losses;
    std::vector<double> expected_losses;

    std::size_t size() const noexcept { return actions.size(); }

    void reserve(std::size_t n) {
        actions.reserve(n);
        observed_losses.reserve(n);
        expected_losses.reserve(n);
    }

    void record(Action a, const Observation& obs) {
        actions.push_back(a);
        observed_losses.push_back(obs.observed_loss);
        expected_losses.push_back(obs.expected_loss);
    }

    double total_expected_loss() const {
        return std::accumulate(expected_losses.begin(), expected_losses.end(), 0.0);
    }

    // Running sums of expected loss; element t-1 covers steps 1..t.
    std::vector<double> cumulative_expected_loss() const {
        std::vector<double> out(expected_losses.size());
        std::partial_sum(expected_losses.begin(), expected_losses.end(), out.begin());
        return out;
    }
};

// Plays `env` with action `a` and appends the outcome to `trace`.
template <Environment Env>
Observation play_and_record(Env& env, RunTrace& trace, Action a) {
    Observation obs = env.play(a);
    trace.record(a, obs);
    return obs;
}

// Open-loop policy: plays a fixed action sequence.
template <Environment Env>
RunTrace run_fixed_sequence(Env& env, const std::vector<Action>& actions, std::string id = "fixed") {
    RunTrace trace;
    trace.algorithm_id = std::move(id);
    trace.reserve(actions.size());
    for (Action a : actions) play_and_record(env, trace, a);
    return trace;
}

}  // namespace wtb
