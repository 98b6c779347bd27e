#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wtb/environment.hpp"
#include "wtb/error.hpp"
#include "wtb/rng.hpp"

namespace wtb {

// Exponential weights over importance-weighted loss estimates.
//   p = (1 - mix) * softmax(-eta * L_hat) + mix / K
// Cumulative estimates are kept instead of weights; the softmax is shifted by
// the minimum so it never overflows.
class Exp3 {
public:
    Exp3(std::size_t num_actions, double learning_rate, double exploration_mix = 0.0)
        : eta_(learning_rate), mix_(exploration_mix), loss_est_(num_actions, 0.0), probs_(num_actions) {
        if (num_actions == 0) throw ParameterError("EXP3 needs at least one action");
        if (!(learning_rate >= 0.0)) throw ParameterError("learning rate must be >= 0");
        if (!(exploration_mix >= 0.0 && exploration_mix <= 1.0)) {
            throw ParameterError("exploration mix must lie in [0,1]");
        }
        recompute();
    }

    // sqrt(2 ln K / (rounds * K)).
    static double default_learning_rate(std::size_t num_actions, std::size_t rounds) {
        const double K = static_cast<double>(num_actions);
        return std::sqrt(2.0 * std::log(K) / (static_cast<double>(std::max<std::size_t>(rounds, 1)) * K));
    }

    std::size_t num_actions() const noexcept { return probs_.size(); }
    double learning_rate() const noexcept { return eta_; }
    double exploration_mix() const noexcept { return mix_; }
    const std::vector<double>& probabilities() const noexcept { return probs_; }
    const std::vector<double>& loss_estimates() const noexcept { return loss_est_; }

    Action sample(Rng& rng) const {
        const double u = uniform01(rng);
        double acc = 0.0;
        for (Action a = 0; a < probs_.size(); ++a) {
            acc += probs_[a];
            if (u < acc) return a;
        }
        // Rounding left acc slightly below 1; take the last action with mass.
        for (Action a = probs_.size(); a-- > 0;) {
            if (probs_[a] > 0.0) return a;
        }
        return 0;
    }

    // Unbiased estimate loss / p_a charged to the played action.
    void update(Action a, double loss) {
        if (a >= probs_.size()) throw InvalidActionError("EXP3 update on unknown action");
        if (loss == 0.0) return;
        loss_est_[a] += loss / probs_[a];
        recompute();
    }

private:
    void recompute() {
        const double lo = *std::min_element(loss_est_.begin(), loss_est_.end());
        double total = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            probs_[i] = std::exp(-eta_ * (loss_est_[i] - lo));
            total += probs_[i];
        }
        const double K = static_cast<double>(probs_.size());
        for (double& p : probs_) p = (1.0 - mix_) * p / total + mix_ / K;
    }

    double eta_;
    double mix_;
    std::vector<double> loss_est_;
    std::vector<double> probs_;
};

struct Exp3Options {
    std::optional<double> learning_rate;  // default: Exp3::default_learning_rate
    double exploration_mix = 0.0;
};

// Plain EXP3, one update per timestep.
template <Environment Env>
RunTrace run_exp3(Env& env, std::size_t T, Rng& rng, const Exp3Options& opts = {}, std::string id = "exp3") {
    const std::size_t K = env.num_actions();
    Exp3 learner(K, opts.learning_rate.value_or(Exp3::default_learning_rate(K, T)), opts.exploration_mix);
    RunTrace trace;
    trace.algorithm_id = std::move(id);
    trace.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        const Action a = learner.sample(rng);
        learner.update(a, play_and_record(env, trace, a).observed_loss);
    }
    return trace;
}

// Batched EXP3: the horizon is cut into blocks of 2M steps. Each block plays a
// single sampled action throughout; the learner is fed the mean observed loss
// of the block's last M steps, the first M acting as warm-up. A trailing
// partial block plays a fresh sample without an update. The default learning
// rate is tuned for the number of full blocks.
template <Environment Env>
RunTrace run_exp3_batched(Env& env, std::size_t T, std::size_t M, Rng& rng, const Exp3Options& opts = {},
                          std::string id = "exp3-batched") {
    if (M == 0) throw ParameterError("batch warm-up M must be positive");
    const std::size_t block = 2 * M;
    if (block > T) throw ParameterError("batch length 2M exceeds the horizon");
    const std::size_t K = env.num_actions();
    const std::size_t blocks = T / block;
    Exp3 learner(K, opts.learning_rate.value_or(Exp3::default_learning_rate(K, blocks)), opts.exploration_mix);
    RunTrace trace;
    trace.algorithm_id = std::move(id);
    trace.reserve(T);
    for (std::size_t b = 0; b < blocks; ++b) {
        const Action a = learner.sample(rng);
        double tail = 0.0;
        for (std::size_t k = 0; k < block; ++k) {
            const double obs = play_and_record(env, trace, a).observed_loss;
            if (k >= M) tail += obs;
        }
        learner.update(a, tail / static_cast<double>(M));
    }
    if (trace.size() < T) {
        const Action a = learner.sample(rng);
        while (trace.size() < T) play_and_record(env, trace, a);
    }
    return trace;
}

}  // namespace wtb
