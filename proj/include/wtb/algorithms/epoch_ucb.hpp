#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wtb/environment.hpp"
#include "wtb/error.hpp"

namespace wtb {

// UCB run in epochs of M consecutive plays of one action. Only the last
// observation of each epoch is recorded, as an estimate of the eventual loss.
// At the start of each epoch, with t the 1-based timestep about to be played,
// the chosen action minimizes
//   mean_x - sqrt(2 ln t / n_x),
// with never-tried actions taken first in index order and ties broken by the
// lowest index. A trailing partial epoch records nothing.
template <Environment Env>
RunTrace run_epoch_ucb(Env& env, std::size_t T, std::size_t M, std::string id = "epoch-ucb") {
    if (M == 0) throw ParameterError("epoch length M must be positive");
    if (M > T) throw ParameterError("epoch length M exceeds the horizon");
    const std::size_t K = env.num_actions();
    std::vector<double> sum(K, 0.0);
    std::vector<std::size_t> count(K, 0);
    RunTrace trace;
    trace.algorithm_id = std::move(id);
    trace.reserve(T);

    while (trace.size() < T) {
        Action pick = K;
        for (Action x = 0; x < K; ++x) {
            if (count[x] == 0) {
                pick = x;
                break;
            }
        }
        if (pick == K) {
            const double log_t = std::log(static_cast<double>(trace.size() + 1));
            double best = 0.0;
            for (Action x = 0; x < K; ++x) {
                const double n = static_cast<double>(count[x]);
                const double index = sum[x] / n - std::sqrt(2.0 * log_t / n);
                if (pick == K || index < best) {
                    best = index;
                    pick = x;
                }
            }
        }
        const bool full = T - trace.size() >= M;
        double last = 0.0;
        for (std::size_t k = 0; k < M && trace.size() < T; ++k) {
            last = play_and_record(env, trace, pick).observed_loss;
        }
        if (full) {
            sum[pick] += last;
            ++count[pick];
        }
    }
    return trace;
}

}  // namespace wtb
