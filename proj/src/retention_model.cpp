#include "gamefi/retention_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gamefi::retention {

void validate(const RetentionParams& p) {
    if (!(p.top_fraction > 0.0 && p.top_fraction <= 1.0))
        throw std::invalid_argument("retention.top_fraction must be in (0, 1]");
    if (!(p.pool_share >= 0.0 && p.pool_share <= 1.0))
        throw std::invalid_argument("retention.pool_share must be in [0, 1]");
    if (p.window < 1) throw std::invalid_argument("retention.window must be at least 1");
    if (p.tolerance_min < 1) throw std::invalid_argument("retention.tolerance_min must be at least 1");
    if (p.tolerance_max < p.tolerance_min)
        throw std::invalid_argument("retention.tolerance_max must be at least retention.tolerance_min");
    if (p.n0 < 0) throw std::invalid_argument("retention.n0 must be non-negative");
    if (!(p.alpha > 1.0)) throw std::invalid_argument("retention.alpha must exceed 1");
}

ContributionLedger::ContributionLedger(int window) : window_(window) {
    if (window < 1) throw std::invalid_argument("ContributionLedger: window must be at least 1");
}

void ContributionLedger::record(PlayerId id, double contribution) {
    auto [it, inserted] = entries_.try_emplace(id);
    Ring& ring = it->second;
    if (inserted) ring.slots.assign(static_cast<std::size_t>(window_), 0.0);
    ring.slots[ring.next] = contribution;
    ring.next = (ring.next + 1) % ring.slots.size();
    ring.filled = std::min(ring.filled + 1, ring.slots.size());
}

void ContributionLedger::erase(PlayerId id) { entries_.erase(id); }

std::vector<double> ContributionLedger::entries(PlayerId id) const {
    std::vector<double> out;
    auto it = entries_.find(id);
    if (it == entries_.end()) return out;
    const Ring& ring = it->second;
    const std::size_t n = ring.slots.size();
    for (std::size_t i = 0; i < ring.filled; ++i) out.push_back(ring.slots[(ring.next + n - ring.filled + i) % n]);
    return out;
}

Totals window_totals(const ContributionLedger& ledger) {
    Totals totals;
    for (const auto& [id, ring] : ledger.raw()) {
        double sum = 0.0;
        const std::size_t n = ring.slots.size();
        for (std::size_t i = 0; i < ring.filled; ++i) sum += ring.slots[(ring.next + n - ring.filled + i) % n];
        totals.emplace_hint(totals.end(), id, ValueAmount{sum});
    }
    return totals;
}

std::vector<PlayerId> select_top(const Totals& totals, double top_fraction) {
    if (totals.empty()) return {};
    const auto n = totals.size();
    const auto count = std::min<std::size_t>(
        n, std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(top_fraction * static_cast<double>(n)))));

    std::vector<std::pair<ValueAmount, PlayerId>> ranked;
    ranked.reserve(n);
    for (const auto& [id, v] : totals) ranked.emplace_back(v, id);
    auto better = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(count), ranked.end(), better);

    std::vector<PlayerId> winners;
    winners.reserve(count);
    for (std::size_t i = 0; i < count; ++i) winners.push_back(ranked[i].second);
    std::sort(winners.begin(), winners.end());
    return winners;
}

Payouts payout(const Totals& totals, const std::vector<PlayerId>& winners, double pool_share, PayoutSplit split) {
    Payouts out;
    if (winners.empty()) return out;

    double all = 0.0;
    for (const auto& [id, v] : totals) all += v.value();
    const double pool = pool_share * all;

    double winner_sum = 0.0;
    for (PlayerId w : winners) {
        auto it = totals.find(w);
        if (it == totals.end()) throw std::invalid_argument("payout: winner is not in totals");
        winner_sum += it->second.value();
    }

    const bool equal = split == PayoutSplit::equal || winner_sum <= 0.0;
    for (PlayerId w : winners) {
        double amount = equal ? pool / static_cast<double>(winners.size())
                              : pool * (totals.at(w).value() / winner_sum);
        out.emplace(w, ValueAmount{amount});
    }
    return out;
}

std::vector<PlayerId> update_churn(std::vector<RetentionPlayer>& players, const std::vector<PlayerId>& winners) {
    std::vector<PlayerId> departed;
    std::erase_if(players, [&](RetentionPlayer& pl) {
        if (std::binary_search(winners.begin(), winners.end(), pl.core.id)) {
            pl.consecutive_misses = 0;
            return false;
        }
        ++pl.consecutive_misses;
        if (pl.consecutive_misses > pl.tolerance) {
            pl.core.active = false;
            departed.push_back(pl.core.id);
            return true;
        }
        return false;
    });
    return departed;
}

namespace {

IterationRecord step_impl(RetentionState& state, RngStream& rng, StepAudit* audit) {
    const RetentionParams& p = state.params;
    IterationRecord rec;
    rec.iteration = state.iteration;

    // (1) arrivals, ungated
    const std::int64_t joins = cohort_size(state.iteration, p.n0, p.alpha);
    for (std::int64_t j = 0; j < joins; ++j) {
        ValueAmount v = init_productivity(rng, state.econ);
        int tol = static_cast<int>(rng.uniform_int(p.tolerance_min, p.tolerance_max));
        state.players.push_back({PlayerCore{PlayerId{state.next_id++}, v, state.iteration, true}, tol, 0});
    }
    rec.joins = joins;

    // (2) contributions
    double total = 0.0;
    for (const auto& pl : state.players) {
        total += pl.core.productivity.value();
        state.ledger.record(pl.core.id, pl.core.productivity.value());
    }
    rec.total_value = total;
    rec.active_players = static_cast<std::int64_t>(state.players.size());

    // (3) ranking and payout
    Totals totals = window_totals(state.ledger);
    std::vector<PlayerId> winners = select_top(totals, p.top_fraction);
    Payouts paid = payout(totals, winners, p.pool_share, p.split);
    double payout_total = 0.0;
    for (const auto& [id, amt] : paid) payout_total += amt.value();

    // (4) churn
    const auto departed = update_churn(state.players, winners);
    for (PlayerId id : departed) state.ledger.erase(id);
    rec.departures = static_cast<std::int64_t>(departed.size());

    // (5) mutation
    for (auto& pl : state.players) pl.core.productivity = mutate_productivity(pl.core.productivity, rng, state.econ);

    rec.extra = RetentionExtra{payout_total, static_cast<std::int64_t>(winners.size())};
    if (audit) {
        audit->totals = std::move(totals);
        audit->winners = std::move(winners);
        audit->payouts = std::move(paid);
    }
    ++state.iteration;
    return rec;
}

}  // namespace

IterationRecord step_retention(RetentionState& state, RngStream& rng) { return step_impl(state, rng, nullptr); }

IterationRecord step_retention(RetentionState& state, RngStream& rng, StepAudit& audit) {
    return step_impl(state, rng, &audit);
}

}  // namespace gamefi::retention
