#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wtb/error.hpp"
#include "wtb/instance.hpp"
#include "wtb/rng.hpp"

// Generators for every instance family used in the experiments and in the
// lower-bound constructions. x* is action 0 unless a permutation is applied.
namespace wtb {

namespace detail {
inline double ordered_sum(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) s += v;
    return s;
}
}  // namespace detail

// Relabels actions: new action i is old action perm[i].
inline WtbInstance permute_actions(const WtbInstance& inst, const std::vector<Action>& perm) {
    const std::size_t K = inst.num_actions();
    if (perm.size() != K) throw ParameterError("permutation length differs from K");
    std::vector<bool> seen(K, false);
    for (Action a : perm) {
        if (a >= K || seen[a]) throw ParameterError("not a permutation");
        seen[a] = true;
    }
    std::vector<std::vector<double>> w;
    std::vector<LossFunction> h;
    FeedbackLaw fb = inst.feedback();
    if (fb.kind == FeedbackKind::clamped_gaussian) fb.stddev.clear();
    for (Action a : perm) {
        w.push_back(inst.weights(a));
        h.push_back(inst.loss(a));
        if (inst.feedback().kind == FeedbackKind::clamped_gaussian) fb.stddev.push_back(inst.feedback().stddev[a]);
    }
    WtbInstance out(inst.memory_capacity(), std::move(w), std::move(h), std::move(fb), inst.horizon_hint());
    out.set_name(inst.name());
    return out;
}

// Uniformly random relabeling drawn from `permutation_seed`.
inline WtbInstance shuffle_actions(const WtbInstance& inst, std::uint64_t permutation_seed) {
    std::vector<Action> perm(inst.num_actions());
    std::iota(perm.begin(), perm.end(), Action{0});
    Rng rng = make_rng(permutation_seed, "permutation", 0);
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i))]);
    }
    return permute_actions(inst, perm);
}

// Unweighted tallies; every loss is 0.5 except h_{x*}(m) = 0.35. Satisfies 0-REO.
inline WtbInstance make_synthetic_unweighted(std::size_t K, std::size_t m) {
    if (K < 2) throw ParameterError("synthetic-unweighted needs K >= 2");
    if (m < 1) throw ParameterError("m must be positive");
    std::vector<std::vector<double>> w(K, std::vector<double>(m, 1.0));
    std::vector<LossFunction> h(K, LossFunction::constant(0.5));
    h[0].add_entry(static_cast<double>(m), 0.35);
    WtbInstance inst(m, std::move(w), std::move(h), FeedbackLaw::bernoulli());
    inst.set_name("synthetic-unweighted");
    return inst;
}

// w = v / (2 ||v||_1) with v_i = 2^-i; h_x(z) = 1 - z, and x* earns an extra
// 0.15 off on a full window. Satisfies 0-REO.
inline WtbInstance make_synthetic_weighted(std::size_t K, std::size_t m) {
    if (K < 2) throw ParameterError("synthetic-weighted needs K >= 2");
    if (m < 2) throw ParameterError("synthetic-weighted needs m >= 2");
    // Distinct tallies differ by at least w_m ~ 2^-m; keep that far above the lookup tolerance.
    if (m > 24) throw ParameterError("synthetic-weighted supports m <= 24");
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
    const double vnorm = detail::ordered_sum(v);
    std::vector<double> wx(m);
    for (std::size_t i = 0; i < m; ++i) wx[i] = v[i] / (2.0 * vnorm);
    const double full = detail::ordered_sum(wx);
    std::vector<std::vector<double>> w(K, wx);
    std::vector<LossFunction> h(K, LossFunction::affine(1.0, -1.0));
    h[0].add_entry(full, 1.0 - full - 0.15);
    WtbInstance inst(m, std::move(w), std::move(h), FeedbackLaw::bernoulli());
    inst.set_name("synthetic-weighted");
    return inst;
}

// w_x = 1/(4m) for all x; h_x(z) = 1 - z, except
//   x* (action 0) on a full window:      1 - z - 0.15
//   x** (action 1) on y = (1,0,...,0):   1 - z - (m-1)/(2m) - 0.2
inline WtbInstance make_synthetic_alpha(std::size_t K, std::size_t m) {
    if (K < 3) throw ParameterError("synthetic-alpha needs K >= 3");
    if (m < 2) throw ParameterError("synthetic-alpha needs m >= 2");
    const double md = static_cast<double>(m);
    const std::vector<double> wx(m, 1.0 / (4.0 * md));
    const double full = detail::ordered_sum(wx);
    const double single = wx[0];
    std::vector<std::vector<double>> w(K, wx);
    std::vector<LossFunction> h(K, LossFunction::affine(1.0, -1.0));
    h[0].add_entry(full, 1.0 - full - 0.15);
    h[1].add_entry(single, 1.0 - single - (md - 1.0) / (2.0 * md) - 0.2);
    WtbInstance inst(m, std::move(w), std::move(h), FeedbackLaw::bernoulli());
    inst.set_name("synthetic-alpha");
    return inst;
}

// Dart tournament, m = 2, w = (1,1): a first toss costs Unif[0.68,0.72], a
// calibrated toss Unif[0.58,0.62], drawn per player in that order.
inline WtbInstance make_darts(std::size_t K, Rng& rng) {
    if (K < 2) throw ParameterError("darts needs K >= 2");
    std::vector<std::vector<double>> w(K, std::vector<double>{1.0, 1.0});
    std::vector<LossFunction> h;
    h.reserve(K);
    for (std::size_t x = 0; x < K; ++x) {
        const double first = 0.68 + 0.04 * uniform01(rng);
        const double calibrated = 0.58 + 0.04 * uniform01(rng);
        h.push_back(LossFunction::from_table({{1.0, first}, {2.0, calibrated}}));
    }
    WtbInstance inst(2, std::move(w), std::move(h), FeedbackLaw::bernoulli());
    inst.set_name("darts");
    return inst;
}

// w^T y scaled by 2^m, for w_i = 2^-i: sum_i y_i 2^(m-i). Exact integer.
inline std::uint64_t dyadic_numerator(const std::vector<int>& y) {
    const std::size_t m = y.size();
    if (m == 0 || m > 63) throw ParameterError("dyadic tallies need 1 <= m <= 63");
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (y[i]) n |= std::uint64_t{1} << (m - 1 - i);
    }
    return n;
}

// Hidden-string instance: K = 2, w_i = 2^-i for both actions, h_{x1} = 1, and
// h_{x2} = 0 exactly when the tally equals w^T (1, y*), else 1. Deterministic.
inline WtbInstance make_prop1(std::size_t m, const std::vector<int>& y_star) {
    if (m < 2) throw ParameterError("prop1 needs m >= 2");
    if (m > 52) throw ParameterError("prop1 needs m <= 52 for exact dyadic tallies");
    if (y_star.size() != m - 1) throw ParameterError("y_star must have length m-1");
    std::vector<int> full(m, 1);
    std::copy(y_star.begin(), y_star.end(), full.begin() + 1);
    std::vector<double> wx(m);
    for (std::size_t i = 0; i < m; ++i) wx[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
    std::vector<std::vector<double>> w(2, wx);
    std::vector<LossFunction> h{
        LossFunction::constant(1.0),
        LossFunction::from_rule(DyadicMatchRule{static_cast<int>(m), dyadic_numerator(full), 0.0, 1.0})};
    WtbInstance inst(m, std::move(w), std::move(h), FeedbackLaw::deterministic());
    inst.set_name("prop1");
    return inst;
}

// Action order of the cyclic near-optimal policy (v_{m-1}, ..., v_1, x2),
// where v_i = x2 if y*_i = 1 else x1.
inline std::vector<Action> prop1_cycle(const std::vector<int>& y_star) {
    std::vector<Action> cycle;
    for (std::size_t i = y_star.size(); i-- > 0;) cycle.push_back(y_star[i] ? 1 : 0);
    cycle.push_back(1);
    return cycle;
}

struct AdaptivityPair {
    WtbInstance tb_a;
    WtbInstance tb_b;
};

// Two deterministic unweighted instances that agree on every observation
// unless x2 (action 1) is played M times in a row.
//   tb_A: m = 1, x1 costs 1/2, everything else 1.
//   tb_B: m = M, x1 costs 1/2, x2 costs 1 below a full window and 0 on it, others 1.
inline AdaptivityPair make_adaptivity_pair(std::size_t M, std::size_t K) {
    if (K < 2) throw ParameterError("adaptivity pair needs K >= 2");
    if (M < 2) throw ParameterError("adaptivity pair needs M >= 2");
    std::vector<LossFunction> ha(K, LossFunction::constant(1.0));
    ha[0] = LossFunction::constant(0.5);
    WtbInstance a(1, std::vector<std::vector<double>>(K, {1.0}), ha, FeedbackLaw::deterministic());
    a.set_name("tb_A");

    std::vector<LossFunction> hb(K, LossFunction::constant(1.0));
    hb[0] = LossFunction::constant(0.5);
    hb[1].add_entry(static_cast<double>(M), 0.0);
    WtbInstance b(M, std::vector<std::vector<double>>(K, std::vector<double>(M, 1.0)), hb,
                  FeedbackLaw::deterministic());
    b.set_name("tb_B");
    return {std::move(a), std::move(b)};
}

struct NamedInstance {
    std::string name;
    WtbInstance instance;
};

// The instance families at the sizes used by the experiments, plus the
// lower-bound constructions at small sizes.
inline std::vector<NamedInstance> bundled_instances() {
    std::vector<NamedInstance> out;
    out.push_back({"synthetic-unweighted K=5 m=3", make_synthetic_unweighted(5, 3)});
    out.push_back({"synthetic-unweighted K=2 m=1", make_synthetic_unweighted(2, 1)});
    out.push_back({"synthetic-unweighted K=3 m=6", make_synthetic_unweighted(3, 6)});
    out.push_back({"synthetic-weighted K=5 m=4", make_synthetic_weighted(5, 4)});
    out.push_back({"synthetic-weighted K=3 m=6", make_synthetic_weighted(3, 6)});
    out.push_back({"synthetic-alpha K=5 m=4", make_synthetic_alpha(5, 4)});
    out.push_back({"synthetic-alpha K=3 m=6", make_synthetic_alpha(3, 6)});
    Rng rng = make_rng(0, "darts", 0);
    out.push_back({"darts K=20", make_darts(20, rng)});
    out.push_back({"prop1 m=3 y*=(1,0)", make_prop1(3, {1, 0})});
    auto pair = make_adaptivity_pair(4, 3);
    out.push_back({"tb_A M=4 K=3", pair.tb_a});
    out.push_back({"tb_B M=4 K=3", pair.tb_b});
    return out;
}

}  // namespace wtb
