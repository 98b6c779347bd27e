#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wtb/error.hpp"
#include "wtb/history.hpp"
#include "wtb/loss_function.hpp"
#include "wtb/rng.hpp"

namespace wtb {

enum class FeedbackKind { deterministic, bernoulli, clamped_gaussian };

inline const char* to_string(FeedbackKind k) {
    switch (k) {
        case FeedbackKind::deterministic: return "deterministic";
        case FeedbackKind::bernoulli: return "bernoulli";
        case FeedbackKind::clamped_gaussian: return "clamped-gaussian";
    }
    return "?";
}

// How the observed loss is drawn around the expected loss.
// clamped-gaussian: N(expected, stddev[x]^2) clipped to [0,1]; clipping
// biases the mean slightly near the boundaries.
struct FeedbackLaw {
    FeedbackKind kind = FeedbackKind::deterministic;
    std::vector<double> stddev;  // per action, clamped-gaussian only

    static FeedbackLaw deterministic() { return {FeedbackKind::deterministic, {}}; }
    static FeedbackLaw bernoulli() { return {FeedbackKind::bernoulli, {}}; }
    static FeedbackLaw clamped_gaussian(std::vector<double> stddev) {
        return {FeedbackKind::clamped_gaussian, std::move(stddev)};
    }

    bool operator==(const FeedbackLaw&) const = default;
};

struct Observation {
    double observed_loss = 0.0;
    double expected_loss = 0.0;
    double weighted_tally = 0.0;
};

// Full environment description: K actions, memory capacity m, weight vector
// w_x in (0,1]^m and loss function h_x per action, and a feedback law.
// Immutable after construction.
class WtbInstance {
public:
    WtbInstance(std::size_t memory_capacity,
                std::vector<std::vector<double>> weights,
                std::vector<LossFunction> losses,
                FeedbackLaw feedback,
                std::optional<std::size_t> horizon_hint = std::nullopt)
        : m_(memory_capacity),
          weights_(std::move(weights)),
          losses_(std::move(losses)),
          feedback_(std::move(feedback)),
          horizon_hint_(horizon_hint) {
        check_shape();
    }

    std::size_t num_actions() const noexcept { return weights_.size(); }
    std::size_t memory_capacity() const noexcept { return m_; }
    const std::vector<double>& weights(Action x) const { return weights_[checked(x)]; }
    const LossFunction& loss(Action x) const { return losses_[checked(x)]; }
    const std::vector<std::vector<double>>& all_weights() const noexcept { return weights_; }
    const std::vector<LossFunction>& all_losses() const noexcept { return losses_; }
    const FeedbackLaw& feedback() const noexcept { return feedback_; }
    std::optional<std::size_t> horizon_hint() const noexcept { return horizon_hint_; }

    // Free-form label; not part of the environment semantics.
    const std::string& name() const noexcept { return name_; }
    WtbInstance& set_name(std::string name) {
        name_ = std::move(name);
        return *this;
    }

    Action checked(Action x) const {
        if (x >= weights_.size()) {
            throw InvalidActionError("action " + std::to_string(x) + " out of range for K=" +
                                     std::to_string(weights_.size()));
        }
        return x;
    }

    double l1_norm(Action x) const {
        double s = 0.0;
        for (double w : weights(x)) s += w;
        return s;
    }

    // Throws if any loss on a context y in {1}x{0,1}^{m-1} leaves [0,1] or is
    // undefined. Skipped for m above `enumeration_cap`.
    void validate(std::size_t enumeration_cap = 16) const;

    bool operator==(const WtbInstance& o) const {
        return m_ == o.m_ && weights_ == o.weights_ && losses_ == o.losses_ &&
               feedback_ == o.feedback_ && horizon_hint_ == o.horizon_hint_;
    }

private:
    void check_shape() const {
        if (m_ == 0) throw ParameterError("memory capacity m must be positive");
        if (weights_.empty()) throw ParameterError("need at least one action");
        if (losses_.size() != weights_.size()) {
            throw ParameterError("weights and loss functions disagree on K");
        }
        for (const auto& w : weights_) {
            if (w.size() != m_) throw ParameterError("weight vector length differs from m");
            for (double v : w) {
                if (!(v > 0.0 && v <= 1.0)) throw ParameterError("weight entries must lie in (0,1]");
            }
        }
        if (feedback_.kind == FeedbackKind::clamped_gaussian) {
            if (feedback_.stddev.size() != weights_.size()) {
                throw ParameterError("clamped-gaussian feedback needs one stddev per action");
            }
            for (double s : feedback_.stddev) {
                if (!(s >= 0.0) || !std::isfinite(s)) throw ParameterError("stddev must be >= 0");
            }
        }
        if (horizon_hint_ && *horizon_hint_ == 0) throw ParameterError("horizon hint must be positive");
    }

    std::size_t m_;
    std::vector<std::vector<double>> weights_;
    std::vector<LossFunction> losses_;
    FeedbackLaw feedback_;
    std::optional<std::size_t> horizon_hint_;
    std::string name_;
};

// y^{t,x,m}: component i (0-based here) is 1 iff the (i+1)-th most recent
// play exists and equals x. The current play must already be in `history`.
inline std::vector<int> tally_vector(const HistoryWindow& history, Action x, std::size_t m,
                                     std::size_t num_actions) {
    if (x >= num_actions) {
        throw InvalidActionError("action " + std::to_string(x) + " out of range");
    }
    std::vector<int> y(m, 0);
    const std::size_t n = std::min(m, history.size());
    for (std::size_t i = 1; i <= n; ++i) {
        y[i - 1] = history.recent(i) == x ? 1 : 0;
    }
    return y;
}

inline std::vector<int> tally_vector(const WtbInstance& inst, const HistoryWindow& history, Action x) {
    return tally_vector(history, x, inst.memory_capacity(), inst.num_actions());
}

// w_x^T y^{t,x,m}.
inline double weighted_tally(const WtbInstance& inst, const HistoryWindow& history, Action x) {
    const auto& w = inst.weights(x);
    const std::size_t n = std::min(w.size(), history.size());
    double z = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (history.recent(i) == x) z += w[i - 1];
    }
    return z;
}

namespace detail {
inline double checked_loss(const WtbInstance& inst, Action x, double z) {
    const double h = inst.loss(x)(z);
    if (!(h >= 0.0 && h <= 1.0)) {
        throw Error("expected loss " + std::to_string(h) + " of action " + std::to_string(x) +
                    " outside [0,1]");
    }
    return h;
}
}  // namespace detail

// h_x(w_x^T y^{t,x,m}); `history` already holds the current play of x.
inline double expected_loss(const WtbInstance& inst, const HistoryWindow& history, Action x) {
    return detail::checked_loss(inst, x, weighted_tally(inst, history, x));
}

// h_x(w_x^T y) for an explicit tally vector y (length m, entries 0/1).
inline double loss_at_context(const WtbInstance& inst, Action x, const std::vector<int>& y) {
    const auto& w = inst.weights(x);
    if (y.size() != w.size()) throw ShapeError("context length differs from m");
    double z = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i]) z += w[i];
    }
    return detail::checked_loss(inst, x, z);
}

// mu(x) = h_x(||w_x||_1): the loss after m consecutive plays of x.
inline double eventual_loss(const WtbInstance& inst, Action x) {
    return detail::checked_loss(inst, x, inst.l1_norm(x));
}

inline double sample_feedback(const FeedbackLaw& law, Action x, double expected, Rng& rng) {
    switch (law.kind) {
        case FeedbackKind::deterministic:
            return expected;
        case FeedbackKind::bernoulli:
            return uniform01(rng) < expected ? 1.0 : 0.0;
        case FeedbackKind::clamped_gaussian: {
            const double sd = law.stddev[x];
            if (sd == 0.0) return expected;
            std::normal_distribution<double> normal(expected, sd);
            return std::clamp(normal(rng), 0.0, 1.0);
        }
    }
    return expected;
}

// Appends x to the history, then draws the observation for the resulting context.
inline Observation step(const WtbInstance& inst, HistoryWindow& history, Action x, Rng& rng) {
    inst.checked(x);
    history.push(x);
    Observation obs;
    obs.weighted_tally = weighted_tally(inst, history, x);
    obs.expected_loss = detail::checked_loss(inst, x, obs.weighted_tally);
    obs.observed_loss = sample_feedback(inst.feedback(), x, obs.expected_loss, rng);
    return obs;
}

// Calls fn(z) for the tally z = w^T y of every y in {1}x{0,1}^{m-1}.
template <class Fn>
void for_each_context_tally(const std::vector<double>& w, Fn&& fn) {
    const std::size_t m = w.size();
    const std::uint64_t count = std::uint64_t{1} << (m - 1);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        double z = w[0];
        for (std::size_t i = 1; i < m; ++i) {
            if (mask >> (i - 1) & 1u) z += w[i];
        }
        fn(z);
    }
}

inline void WtbInstance::validate(std::size_t enumeration_cap) const {
    if (m_ > enumeration_cap) {
        for (Action x = 0; x < num_actions(); ++x) {
            for (const auto& e : losses_[x].table()) {
                if (!(e.loss >= 0.0 && e.loss <= 1.0)) throw Error("table loss outside [0,1]");
            }
        }
        return;
    }
    for (Action x = 0; x < num_actions(); ++x) {
        for_each_context_tally(weights_[x], [&](double z) { detail::checked_loss(*this, x, z); });
    }
}

}  // namespace wtb
