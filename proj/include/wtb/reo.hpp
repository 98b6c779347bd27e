#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>

#include "wtb/instance.hpp"

namespace wtb {

struct ReoResult {
    Action best_action = 0;
    double alpha = 0.0;
};

inline constexpr std::size_t kDefaultReoCap = 20;

// Smallest alpha for which the instance is alpha-REO, and the action x* that
// attains it. Exact enumeration of all y in {1}x{0,1}^{m-1}.
//
// alpha(x*) = max(0, mu(x*) - min_{x,y} h_x(w_x^T y)), so the minimizing x*
// is the action with the smallest eventual loss (lowest index on ties).
inline ReoResult minimal_reo_alpha(const WtbInstance& inst, std::size_t cap = kDefaultReoCap) {
    const std::size_t m = inst.memory_capacity();
    if (m > cap) {
        throw CapacityError("minimal_reo_alpha enumerates 2^(m-1) contexts; m=" + std::to_string(m) +
                            " exceeds cap " + std::to_string(cap));
    }
    double global_min = std::numeric_limits<double>::infinity();
    for (Action x = 0; x < inst.num_actions(); ++x) {
        for_each_context_tally(inst.weights(x), [&](double z) {
            global_min = std::min(global_min, detail::checked_loss(inst, x, z));
        });
    }
    ReoResult best;
    double best_mu = std::numeric_limits<double>::infinity();
    for (Action x = 0; x < inst.num_actions(); ++x) {
        const double mu = eventual_loss(inst, x);
        if (mu < best_mu) {
            best_mu = mu;
            best.best_action = x;
        }
    }
    best.alpha = std::max(0.0, best_mu - global_min);
    return best;
}

}  // namespace wtb
