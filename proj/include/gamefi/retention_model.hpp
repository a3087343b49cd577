// Continuous-rewards economy: each iteration the top fraction of players by
// trailing-window contribution split a share of the window's total value.
// Players who go unrewarded for more than their tolerance leave for good.
#pragma once

#include "gamefi/econ_core.hpp"
#include "gamefi/records.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace gamefi::retention {

enum class PayoutSplit { proportional, equal };

struct RetentionParams {
    double top_fraction = 0.2;
    double pool_share = 0.8;
    int window = 5;
    int tolerance_min = 3;
    int tolerance_max = 10;
    std::int64_t n0 = 200;
    double alpha = 1.02;
    PayoutSplit split = PayoutSplit::proportional;
};

/// Throws std::invalid_argument with a "retention.<field>" message.
void validate(const RetentionParams& params);

/// Trailing contributions per active player, at most `window` per player.
class ContributionLedger {
public:
    explicit ContributionLedger(int window = 5);

    void record(PlayerId id, double contribution);
    void erase(PlayerId id);

    [[nodiscard]] int window() const { return window_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool contains(PlayerId id) const { return entries_.contains(id); }

    /// Oldest-first entries for one player.
    [[nodiscard]] std::vector<double> entries(PlayerId id) const;

    [[nodiscard]] const auto& raw() const { return entries_; }

private:
    struct Ring {
        std::vector<double> slots;
        std::size_t next = 0;
        std::size_t filled = 0;
    };
    int window_;
    std::map<PlayerId, Ring> entries_;
};

struct RetentionPlayer {
    PlayerCore core;
    int tolerance = 1;
    int consecutive_misses = 0;
};

struct RetentionState {
    RetentionParams params;
    EconCoreParams econ;
    std::vector<RetentionPlayer> players;  // active, join order
    ContributionLedger ledger;
    int iteration = 1;
    std::uint64_t next_id = 0;

    RetentionState(RetentionParams p, EconCoreParams e) : params(p), econ(e), ledger(p.window) {}
};

using Totals = std::map<PlayerId, ValueAmount>;
using Payouts = std::map<PlayerId, ValueAmount>;

Totals window_totals(const ContributionLedger& ledger);

/// Winners in ascending id order. Count is max(1, floor(top_fraction * N));
/// ranking is by total descending, then id ascending.
std::vector<PlayerId> select_top(const Totals& totals, double top_fraction);

/// Pool is pool_share times the sum of all window totals, split among winners.
Payouts payout(const Totals& totals, const std::vector<PlayerId>& winners, double pool_share,
               PayoutSplit split = PayoutSplit::proportional);

/// Bumps or resets miss counters, removes players whose misses exceed their
/// tolerance, and returns the departed ids. `winners` must be sorted.
std::vector<PlayerId> update_churn(std::vector<RetentionPlayer>& players, const std::vector<PlayerId>& winners);

struct StepAudit {
    Totals totals;
    std::vector<PlayerId> winners;
    Payouts payouts;
};

IterationRecord step_retention(RetentionState& state, RngStream& rng);
IterationRecord step_retention(RetentionState& state, RngStream& rng, StepAudit& audit);

}  // namespace gamefi::retention
