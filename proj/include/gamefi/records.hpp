#pragma once

#include <cstdint>
#include <variant>

namespace gamefi {

struct ServerFiExtra {
    std::int64_t nfts_minted = 0;   // this iteration
    std::int64_t staked_total = 0;
    double per_nft_reward = 0.0;
    friend bool operator==(const ServerFiExtra&, const ServerFiExtra&) = default;
};

struct RetentionExtra {
    double payout_total = 0.0;
    std::int64_t winner_count = 0;
    friend bool operator==(const RetentionExtra&, const RetentionExtra&) = default;
};

/// Observables of one iteration. active_players and total_value describe the
/// population that contributed in that iteration (after arrivals, before churn).
struct IterationRecord {
    int iteration = 0;
    double total_value = 0.0;
    std::int64_t active_players = 0;
    std::int64_t joins = 0;
    std::int64_t departures = 0;
    std::variant<ServerFiExtra, RetentionExtra> extra;

    friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

}  // namespace gamefi
