#include "gamefi/serverfi_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gamefi::serverfi {

namespace {

double harmonic(int m) {
    double h = 0.0;
    for (int i = m; i >= 1; --i) h += 1.0 / i;
    return h;
}

// Fills audit only when non-null.
IterationRecord step_impl(ServerFiState& state, RngStream& rng, StepAudit* audit) {
    const ServerFiParams& p = state.params;
    IterationRecord rec;
    rec.iteration = state.iteration;

    // (1) arrivals
    std::optional<ValueAmount> last;
    if (state.last_per_nft_reward) last = ValueAmount{*state.last_per_nft_reward};
    const ValueAmount full_cost = expected_collection_cost(p.k, p.lambda);
    const bool gate_open = entry_gate(full_cost, last, p.payoff_horizon);
    const std::int64_t joins = arrivals(state.iteration, p.n0, p.alpha, gate_open);
    for (std::int64_t j = 0; j < joins; ++j) {
        ServerFiPlayer player{PlayerCore{PlayerId{state.next_id++}, init_productivity(rng, state.econ), state.iteration, true},
                              FragmentInventory(p.k), 0};
        state.players.push_back(std::move(player));
    }
    rec.joins = joins;

    // (2) contributions
    double total = 0.0;
    for (const auto& pl : state.players) total += pl.core.productivity.value();
    rec.total_value = total;
    rec.active_players = static_cast<std::int64_t>(state.players.size());
    if (audit) {
        audit->contributions.clear();
        audit->conversions.clear();
        for (const auto& pl : state.players) audit->contributions.push_back(pl.core.productivity.value());
    }

    // (3) draws, lottery, synthesis; minted NFTs are staked immediately
    std::int64_t minted_now = 0;
    for (auto& pl : state.players) {
        const double credit_before = pl.inventory.draw_credit;
        const auto conv = draws_for_contribution(credit_before, pl.core.productivity, p.lambda);
        pl.inventory.draw_credit = conv.new_credit;
        if (conv.num_draws > 0) {
            for (int idx : draw_fragments(rng, conv.num_draws, p.k)) ++pl.inventory.counts[static_cast<std::size_t>(idx)];
            state.fragments_drawn += static_cast<std::uint64_t>(conv.num_draws);
            auto syn = synthesize(std::move(pl.inventory), p.k);
            pl.inventory = std::move(syn.inventory);
            pl.staked_nfts += syn.minted;
            minted_now += syn.minted;
        }
        if (audit) {
            audit->conversions.push_back(
                {pl.core.id, credit_before, pl.core.productivity.value(), conv.num_draws, conv.new_credit});
        }
    }
    state.nfts_minted += minted_now;

    // (4) staking payout
    std::int64_t staked = 0;
    for (const auto& pl : state.players) staked += pl.staked_nfts;
    const ValueAmount reward = per_nft_reward(ValueAmount{total}, p.staking_share, staked);
    if (staked > 0) state.last_per_nft_reward = reward.value();

    // (5) churn
    last.reset();
    if (state.last_per_nft_reward) last = ValueAmount{*state.last_per_nft_reward};
    std::int64_t departures = 0;
    std::erase_if(state.players, [&](const ServerFiPlayer& pl) {
        if (!churn_serverfi(pl, last, p)) return false;
        state.fragments_forfeited += pl.inventory.total();
        ++departures;
        return true;
    });
    rec.departures = departures;

    // (6) mutation
    for (auto& pl : state.players) pl.core.productivity = mutate_productivity(pl.core.productivity, rng, state.econ);

    rec.extra = ServerFiExtra{minted_now, staked, reward.value()};
    ++state.iteration;
    return rec;
}

}  // namespace

void validate(const ServerFiParams& p) {
    if (!(p.lambda > 1.0)) throw std::invalid_argument("serverfi.lambda must exceed 1");
    if (p.k < 1 || p.k > 64) throw std::invalid_argument("serverfi.k must be in [1, 64]");
    if (p.n0 < 0) throw std::invalid_argument("serverfi.n0 must be non-negative");
    if (!(p.alpha > 1.0)) throw std::invalid_argument("serverfi.alpha must exceed 1");
    if (!(p.staking_share >= 0.0 && p.staking_share <= 1.0))
        throw std::invalid_argument("serverfi.staking_share must be in [0, 1]");
    if (p.payoff_horizon < 1) throw std::invalid_argument("serverfi.payoff_horizon must be at least 1");
}

int FragmentInventory::missing_types() const {
    return static_cast<int>(std::count(counts.begin(), counts.end(), 0u));
}

std::uint64_t FragmentInventory::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

DrawConversion draws_for_contribution(double credit, ValueAmount v, double lambda) {
    const double pooled = credit + v.value();
    auto n = static_cast<std::int64_t>(std::floor(pooled / lambda));
    // The rounded quotient can be off by one near exact multiples of lambda.
    double rem = pooled - static_cast<double>(n) * lambda;
    if (rem < 0.0) {
        --n;
        rem = pooled - static_cast<double>(n) * lambda;
    } else if (rem >= lambda) {
        ++n;
        rem = pooled - static_cast<double>(n) * lambda;
    }
    return {n, rem};
}

std::vector<int> draw_fragments(RngStream& rng, std::int64_t num_draws, int k) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(num_draws, 0)));
    for (std::int64_t d = 0; d < num_draws; ++d) {
        out.push_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k))));
    }
    return out;
}

Synthesis synthesize(FragmentInventory inventory, int k) {
    if (k < 1 || inventory.counts.size() != static_cast<std::size_t>(k)) {
        throw std::invalid_argument("synthesize: inventory does not hold k fragment types");
    }
    const std::uint32_t sets = *std::min_element(inventory.counts.begin(), inventory.counts.end());
    for (auto& c : inventory.counts) c -= sets;
    return {static_cast<std::int64_t>(sets), std::move(inventory)};
}

ValueAmount expected_collection_cost(int k, double lambda) {
    return expected_remaining_cost(k, k, lambda);
}

ValueAmount expected_remaining_cost(int missing, int k, double lambda) {
    if (missing < 0 || missing > k) throw std::invalid_argument("expected_remaining_cost: missing must be in [0, k]");
    return ValueAmount{lambda * k * harmonic(missing)};
}

ValueAmount per_nft_reward(ValueAmount total_value, double staking_share, std::int64_t staked_count) {
    if (staked_count <= 0) return ValueAmount{0.0};
    return ValueAmount{staking_share * total_value.value() / static_cast<double>(staked_count)};
}

bool entry_gate(ValueAmount expected_cost, std::optional<ValueAmount> last_per_nft_reward, int payoff_horizon) {
    if (!last_per_nft_reward) return true;
    return last_per_nft_reward->value() * payoff_horizon >= expected_cost.value();
}

std::int64_t arrivals(int iteration, std::int64_t n0, double alpha, bool gate_open) {
    if (!gate_open) return 0;
    return cohort_size(iteration, n0, alpha);
}

bool churn_serverfi(const ServerFiPlayer& player, std::optional<ValueAmount> last_per_nft_reward,
                    const ServerFiParams& params) {
    if (player.staked_nfts > 0 || !last_per_nft_reward) return false;
    const ValueAmount remaining = expected_remaining_cost(player.inventory.missing_types(), params.k, params.lambda);
    return remaining.value() > last_per_nft_reward->value() * params.payoff_horizon;
}

IterationRecord step_serverfi(ServerFiState& state, RngStream& rng) {
    return step_impl(state, rng, nullptr);
}

IterationRecord step_serverfi(ServerFiState& state, RngStream& rng, StepAudit& audit) {
    return step_impl(state, rng, &audit);
}

}  // namespace gamefi::serverfi
