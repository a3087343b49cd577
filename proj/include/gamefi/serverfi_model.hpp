// ServerFi economy: contributed value buys lottery draws, draws yield one of
// k fragment types, a full set synthesizes an NFT, and staked NFTs share a
// fraction of each iteration's total contributed value.
#pragma once

#include "gamefi/econ_core.hpp"
#include "gamefi/records.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gamefi::serverfi {

struct ServerFiParams {
    double lambda = 2.0;         // value per lottery draw
    int k = 8;                   // fragment types
    std::int64_t n0 = 200;       // first-iteration arrivals
    double alpha = 1.02;         // arrival decay base
    double staking_share = 0.1;  // fraction of T_i paid to staked NFTs
    int payoff_horizon = 50;     // iterations of per-NFT reward a player projects
};

/// Throws std::invalid_argument with a "serverfi.<field>" message.
void validate(const ServerFiParams& params);

struct FragmentInventory {
    std::vector<std::uint32_t> counts;  // size k
    double draw_credit = 0.0;           // in [0, lambda)

    explicit FragmentInventory(int k = 0) : counts(static_cast<std::size_t>(k), 0) {}

    [[nodiscard]] int missing_types() const;
    [[nodiscard]] std::uint64_t total() const;
};

struct ServerFiPlayer {
    PlayerCore core;
    FragmentInventory inventory;
    std::int64_t staked_nfts = 0;
};

struct ServerFiState {
    ServerFiParams params;
    EconCoreParams econ;
    std::vector<ServerFiPlayer> players;  // active players, join order
    int iteration = 1;                    // the iteration the next step executes
    std::uint64_t next_id = 0;
    // Empty until the staking pool has held at least one NFT.
    std::optional<double> last_per_nft_reward;

    // Lifetime fragment bookkeeping for the conservation invariant.
    std::uint64_t fragments_drawn = 0;
    std::uint64_t fragments_forfeited = 0;  // inventories of departed players
    std::int64_t nfts_minted = 0;

    ServerFiState(ServerFiParams p, EconCoreParams e) : params(p), econ(e) {}
};

struct DrawConversion {
    std::int64_t num_draws = 0;
    double new_credit = 0.0;
};

DrawConversion draws_for_contribution(double credit, ValueAmount v, double lambda);

std::vector<int> draw_fragments(RngStream& rng, std::int64_t num_draws, int k);

struct Synthesis {
    std::int64_t minted = 0;
    FragmentInventory inventory;
};

/// Mints as many complete sets as the inventory holds.
Synthesis synthesize(FragmentInventory inventory, int k);

/// lambda * k * H_k
ValueAmount expected_collection_cost(int k, double lambda);

/// lambda * k * H_missing: expected value still needed for the missing types.
ValueAmount expected_remaining_cost(int missing, int k, double lambda);

ValueAmount per_nft_reward(ValueAmount total_value, double staking_share, std::int64_t staked_count);

/// Open iff reward * horizon >= cost. No reward history means open.
bool entry_gate(ValueAmount expected_cost, std::optional<ValueAmount> last_per_nft_reward, int payoff_horizon);

std::int64_t arrivals(int iteration, std::int64_t n0, double alpha, bool gate_open);

/// True when the player leaves. Holders never leave; without reward history
/// nobody leaves.
bool churn_serverfi(const ServerFiPlayer& player, std::optional<ValueAmount> last_per_nft_reward,
                    const ServerFiParams& params);

/// Per-player view of phase 3, recorded only when an audit is requested.
struct ConversionAudit {
    PlayerId id;
    double credit_before = 0.0;
    double contribution = 0.0;
    std::int64_t num_draws = 0;
    double credit_after = 0.0;
};

struct StepAudit {
    std::vector<ConversionAudit> conversions;
    std::vector<double> contributions;  // phase-2 contributions, player order
};

/// Runs one iteration in phase order: arrivals, contributions, lottery and
/// synthesis, staking payout, churn, mutation.
IterationRecord step_serverfi(ServerFiState& state, RngStream& rng);
IterationRecord step_serverfi(ServerFiState& state, RngStream& rng, StepAudit& audit);

}  // namespace gamefi::serverfi
