#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wtb/csv.hpp"
#include "wtb/environment.hpp"
#include "wtb/error.hpp"
#include "wtb/instance.hpp"
#include "wtb/reo.hpp"

namespace wtb {

// Minimum cumulative expected loss over all length-T action sequences.
struct PolicyValue {
    double value = 0.0;
    std::size_t horizon = 0;
    std::vector<Action> optimal_sequence;  // empty when not requested or too large to store
};

struct OracleLimits {
    double dp_budget = 1e8;          // K^m * T
    double bruteforce_budget = 1e6;  // K^T
    double sequence_memory_bytes = 2e8;
};

namespace detail {

inline double checked_pow(double base, double exp) { return std::pow(base, exp); }

// Deterministic transition table of the windowed-history MDP. A state is the
// ordered tuple of the last m-1 actions, most recent first, written in base
// K+1 with digit K standing for "no play yet" (zero-padding at game start).
struct WindowMdp {
    std::size_t num_actions = 0;
    std::size_t num_states = 0;
    std::size_t initial_state = 0;
    std::vector<std::size_t> next;  // [state * K + a]
    std::vector<double> loss;       // [state * K + a]

    explicit WindowMdp(const WtbInstance& inst) {
        const std::size_t K = inst.num_actions();
        const std::size_t m = inst.memory_capacity();
        const std::size_t base = K + 1;
        const std::size_t digits = m - 1;
        num_actions = K;
        num_states = 1;
        for (std::size_t i = 0; i < digits; ++i) num_states *= base;
        const std::size_t keep = num_states / base;  // states of the first m-2 digits
        initial_state = 0;
        for (std::size_t i = 0, p = 1; i < digits; ++i, p *= base) initial_state += K * p;

        next.resize(num_states * K);
        loss.assign(num_states * K, std::numeric_limits<double>::quiet_NaN());
        std::vector<std::size_t> d(digits);
        for (std::size_t s = 0; s < num_states; ++s) {
            std::size_t rest = s;
            for (std::size_t i = 0; i < digits; ++i) {
                d[i] = rest % base;
                rest /= base;
            }
            for (Action a = 0; a < K; ++a) {
                const auto& w = inst.weights(a);
                double z = w[0];
                for (std::size_t i = 0; i < digits; ++i) {
                    if (d[i] == a) z += w[i + 1];
                }
                next[s * K + a] = digits == 0 ? 0 : a + base * (s % keep);
                loss[s * K + a] = checked_loss(inst, a, z);
            }
        }
    }
};

inline void check_dp_budget(const WtbInstance& inst, std::size_t T, const OracleLimits& limits) {
    const double work = checked_pow(static_cast<double>(inst.num_actions()),
                                    static_cast<double>(inst.memory_capacity())) *
                        static_cast<double>(T);
    if (work > limits.dp_budget) {
        throw CapacityError("exact oracle needs K^m*T = " + csv::format(work) +
                            " transitions, budget is " + csv::format(limits.dp_budget));
    }
}

}  // namespace detail

// OPT(t) for every t = 1..T in one forward pass: element t-1 is the minimum
// cumulative expected loss over all length-t sequences.
inline std::vector<double> optimal_value_curve(const WtbInstance& inst, std::size_t T,
                                               const OracleLimits& limits = {}) {
    if (T == 0) throw ParameterError("horizon must be positive");
    detail::check_dp_budget(inst, T, limits);
    const detail::WindowMdp mdp(inst);
    const std::size_t K = mdp.num_actions;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> cost(mdp.num_states, inf), nxt(mdp.num_states, inf);
    cost[mdp.initial_state] = 0.0;
    std::vector<double> curve(T);
    for (std::size_t t = 0; t < T; ++t) {
        std::fill(nxt.begin(), nxt.end(), inf);
        for (std::size_t s = 0; s < mdp.num_states; ++s) {
            if (cost[s] == inf) continue;
            for (Action a = 0; a < K; ++a) {
                const std::size_t i = s * K + a;
                const double c = cost[s] + mdp.loss[i];
                if (c < nxt[mdp.next[i]]) nxt[mdp.next[i]] = c;
            }
        }
        cost.swap(nxt);
        curve[t] = *std::min_element(cost.begin(), cost.end());
    }
    return curve;
}

// Exact optimal policy value by dynamic programming over the last m-1
// actions. When memory allows, also returns the lexicographically smallest
// optimal sequence.
inline PolicyValue optimal_value_dp(const WtbInstance& inst, std::size_t T, const OracleLimits& limits = {},
                                    bool want_sequence = true) {
    PolicyValue pv;
    pv.horizon = T;
    pv.value = optimal_value_curve(inst, T, limits).back();

    const detail::WindowMdp mdp(inst);
    const std::size_t K = mdp.num_actions;
    const double bytes = static_cast<double>(T + 1) * static_cast<double>(mdp.num_states) * sizeof(double);
    if (!want_sequence || bytes > limits.sequence_memory_bytes) return pv;

    // Backward cost-to-go, then a forward walk picking the smallest action
    // that stays optimal.
    std::vector<std::vector<double>> togo(T + 1, std::vector<double>(mdp.num_states, 0.0));
    for (std::size_t t = T; t-- > 0;) {
        for (std::size_t s = 0; s < mdp.num_states; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (Action a = 0; a < K; ++a) {
                const std::size_t i = s * K + a;
                best = std::min(best, mdp.loss[i] + togo[t + 1][mdp.next[i]]);
            }
            togo[t][s] = best;
        }
    }
    constexpr double tie_tol = 1e-12;
    std::size_t s = mdp.initial_state;
    pv.optimal_sequence.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        for (Action a = 0; a < K; ++a) {
            const std::size_t i = s * K + a;
            if (mdp.loss[i] + togo[t + 1][mdp.next[i]] <= togo[t][s] + tie_tol) {
                pv.optimal_sequence.push_back(a);
                s = mdp.next[i];
                break;
            }
        }
    }
    return pv;
}

// Cumulative expected loss of an explicit action sequence, simulated through
// the history window.
inline double sequence_loss(const WtbInstance& inst, const std::vector<Action>& seq) {
    HistoryWindow h(inst.memory_capacity());
    double total = 0.0;
    for (Action a : seq) {
        h.push(inst.checked(a));
        total += expected_loss(inst, h, a);
    }
    return total;
}

// Exhaustive enumeration of all K^T sequences in lexicographic order.
inline PolicyValue optimal_value_bruteforce(const WtbInstance& inst, std::size_t T,
                                            const OracleLimits& limits = {}) {
    if (T == 0) throw ParameterError("horizon must be positive");
    const std::size_t K = inst.num_actions();
    const double count = detail::checked_pow(static_cast<double>(K), static_cast<double>(T));
    if (count > limits.bruteforce_budget) {
        throw CapacityError("brute force needs K^T = " + csv::format(count) + " sequences, budget is " +
                            csv::format(limits.bruteforce_budget));
    }
    std::vector<Action> seq(T, 0);
    PolicyValue pv;
    pv.horizon = T;
    pv.value = std::numeric_limits<double>::infinity();
    while (true) {
        const double v = sequence_loss(inst, seq);
        if (v < pv.value - 1e-12) {
            pv.value = v;
            pv.optimal_sequence = seq;
        }
        std::size_t pos = T;
        while (pos > 0 && seq[pos - 1] + 1 == K) {
            seq[pos - 1] = 0;
            --pos;
        }
        if (pos == 0) break;
        ++seq[pos - 1];
    }
    return pv;
}

// Complete policy regret of a run: its cumulative expected loss minus the
// optimal value at the same horizon.
inline double cpr(const RunTrace& trace, const PolicyValue& optimal) {
    if (trace.size() != optimal.horizon || trace.expected_losses.size() != trace.size()) {
        throw ShapeError("trace length " + std::to_string(trace.size()) + " differs from oracle horizon " +
                         std::to_string(optimal.horizon));
    }
    const double r = trace.total_expected_loss() - optimal.value;
    if (r < -1e-9) {
        throw Error("trace beats the optimal value by " + std::to_string(-r) +
                    "; oracle and trace come from different instances");
    }
    return std::max(0.0, r);
}

// Checks sum_t l_t(pi*) >= T mu(x*) - alpha T with (x*, alpha) from
// minimal_reo_alpha. Holds for every valid instance.
inline bool reo_floor_check(const WtbInstance& inst, std::size_t T, const OracleLimits& limits = {}) {
    const ReoResult reo = minimal_reo_alpha(inst);
    const double opt = optimal_value_dp(inst, T, limits, false).value;
    const double mu = eventual_loss(inst, reo.best_action);
    const double floor = static_cast<double>(T) * (mu - reo.alpha);
    return opt >= floor - 1e-9;
}

}  // namespace wtb
