#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wtb/error.hpp"

namespace wtb {

// h(z) = intercept + slope * z. A constant loss is slope == 0.
struct AffineRule {
    double intercept = 0.0;
    double slope = 0.0;

    double operator()(double z) const noexcept { return intercept + slope * z; }
    bool operator==(const AffineRule&) const = default;
};

// Exact equality test on dyadic tallies: z * 2^scale_log2 is an integer for
// every reachable tally when weights are multiples of 2^-scale_log2, and the
// scaling is exact in binary floating point, so comparing to `target` is exact.
struct DyadicMatchRule {
    int scale_log2 = 0;
    std::uint64_t target = 0;
    double hit = 0.0;
    double miss = 1.0;

    double operator()(double z) const noexcept {
        const double scaled = std::ldexp(z, scale_log2);
        return scaled == static_cast<double>(target) ? hit : miss;
    }
    bool operator==(const DyadicMatchRule&) const = default;
};

using LossRule = std::variant<AffineRule, DyadicMatchRule>;

struct TableEntry {
    double tally = 0.0;
    double loss = 0.0;
    bool operator==(const TableEntry&) const = default;
};

// Expected-loss map h_x from weighted tally to [0,1]. Explicit table entries
// take precedence over the fallback rule; tally lookup matches within
// `tolerance`.
class LossFunction {
public:
    static constexpr double kDefaultTolerance = 1e-9;

    LossFunction() = default;

    static LossFunction constant(double c) { return from_rule(AffineRule{c, 0.0}); }

    static LossFunction affine(double intercept, double slope) {
        return from_rule(AffineRule{intercept, slope});
    }

    static LossFunction from_rule(LossRule rule) {
        LossFunction f;
        f.rule_ = rule;
        return f;
    }

    static LossFunction from_table(std::vector<TableEntry> entries,
                                   std::optional<LossRule> fallback = std::nullopt,
                                   double tolerance = kDefaultTolerance) {
        LossFunction f;
        f.rule_ = fallback;
        f.tolerance_ = tolerance;
        for (const auto& e : entries) {
            f.add_entry(e.tally, e.loss);
        }
        return f;
    }

    // Adds or replaces the entry matching `tally`.
    LossFunction& add_entry(double tally, double loss) {
        if (auto* hit = find(tally)) {
            hit->loss = loss;
            return *this;
        }
        auto pos = std::lower_bound(table_.begin(), table_.end(), tally,
                                    [](const TableEntry& e, double z) { return e.tally < z; });
        table_.insert(pos, TableEntry{tally, loss});
        return *this;
    }

    double operator()(double z) const {
        if (const auto* hit = find(z)) {
            return hit->loss;
        }
        if (rule_) {
            return std::visit([z](const auto& r) { return r(z); }, *rule_);
        }
        throw Error("loss function undefined at tally " + std::to_string(z));
    }

    const std::vector<TableEntry>& table() const noexcept { return table_; }
    const std::optional<LossRule>& rule() const noexcept { return rule_; }
    double tolerance() const noexcept { return tolerance_; }

    bool operator==(const LossFunction&) const = default;

private:
    const TableEntry* find(double z) const {
        auto it = std::lower_bound(table_.begin(), table_.end(), z - tolerance_,
                                   [](const TableEntry& e, double v) { return e.tally < v; });
        if (it != table_.end() && std::fabs(it->tally - z) <= tolerance_) {
            return &*it;
        }
        return nullptr;
    }
    TableEntry* find(double z) {
        return const_cast<TableEntry*>(std::as_const(*this).find(z));
    }

    std::vector<TableEntry> table_;
    std::optional<LossRule> rule_;
    double tolerance_ = kDefaultTolerance;
};

}  // namespace wtb
