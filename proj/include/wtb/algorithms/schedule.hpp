#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "wtb/error.hpp"

namespace wtb {

// Epoch constants of successive elimination: S epochs, n_s plays per
// surviving action (each half), confidence radius C_s.
//
//   S   = max(1, floor(log2(T / (4 K M) + 1)))
//   n_s = ceil(K M 2^s / |A_s|)
//   C_s = sqrt(32 / n_s * ln(2 K S / delta))
//
// In no-horizon mode epochs run until T is exhausted and
// C_s = sqrt(64 / n_s * ln(2 K / delta)), which requires delta < 0.009.
struct EpochSchedule {
    std::size_t horizon = 0;
    std::size_t memory_bound = 0;  // M
    std::size_t num_actions = 0;   // K
    double delta = 0.1;
    bool no_horizon = false;
    std::size_t num_epochs = 1;  // S; unused in no-horizon mode
    bool degenerate = false;     // 4KM >= T, S forced to 1

    std::size_t pulls(std::size_t epoch, std::size_t survivors) const {
        if (survivors == 0 || epoch == 0 || epoch > 62) throw ParameterError("bad epoch/survivor count");
        const long double total =
            static_cast<long double>(num_actions) * memory_bound * std::ldexp(1.0L, static_cast<int>(epoch));
        return static_cast<std::size_t>(std::ceil(total / survivors));
    }

    double radius(std::size_t pulls) const {
        const double n = static_cast<double>(pulls);
        const double K = static_cast<double>(num_actions);
        if (no_horizon) return std::sqrt(64.0 / n * std::log(2.0 * K / delta));
        return std::sqrt(32.0 / n * std::log(2.0 * K * static_cast<double>(num_epochs) / delta));
    }
};

inline EpochSchedule se_schedule(std::size_t T, std::size_t M, std::size_t K, double delta,
                                 bool no_horizon = false) {
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
    if (T == 0 || M == 0 || K == 0) throw ParameterError("T, M, K must be positive");
    if (M > T) throw ParameterError("memory bound M exceeds the horizon");
    if (no_horizon && !(delta < 0.009)) throw ParameterError("no-horizon mode requires delta < 0.009");
    EpochSchedule sched;
    sched.horizon = T;
    sched.memory_bound = M;
    sched.num_actions = K;
    sched.delta = delta;
    sched.no_horizon = no_horizon;
    const double ratio = static_cast<double>(T) / (4.0 * static_cast<double>(K) * static_cast<double>(M));
    const double s = std::floor(std::log2(ratio + 1.0));
    sched.degenerate = 4 * K * M >= T;
    sched.num_epochs = s < 1.0 ? 1 : static_cast<std::size_t>(s);
    return sched;
}

}  // namespace wtb
