// Shared agent primitives: value amounts, player identity, productivity
// sampling and mutation, and per-repeat deterministic random streams.
#pragma once

#include <compare>
#include <cstdint>
#include <random>

namespace gamefi {

/// Non-negative quantity of contributed value. Construction from a negative
/// or non-finite number throws std::domain_error.
class ValueAmount {
public:
    constexpr ValueAmount() = default;
    explicit ValueAmount(double amount);

    [[nodiscard]] constexpr double value() const { return amount_; }

    friend ValueAmount operator+(ValueAmount a, ValueAmount b) { return ValueAmount{a.amount_ + b.amount_}; }
    ValueAmount& operator+=(ValueAmount other) { amount_ += other.amount_; return *this; }
    friend constexpr auto operator<=>(ValueAmount, ValueAmount) = default;

private:
    double amount_ = 0.0;
};

struct PlayerId {
    std::uint64_t value = 0;
    friend constexpr auto operator<=>(PlayerId, PlayerId) = default;
};

struct PlayerCore {
    PlayerId id;
    ValueAmount productivity;
    int joined_at = 0;
    bool active = true;
};

struct EconCoreParams {
    double productivity_init_mean = 1.0;   // median of the log-normal
    double productivity_init_sigma = 0.5;
    double mutation_sigma = 0.05;
    double productivity_floor = 0.01;
};

/// Deterministic pseudo-random stream for one repeat.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here rather than with the
/// <random> distribution classes, whose algorithms are implementation
/// defined. Integer and uniform draws are bit-identical across platforms;
/// normal draws go through std::log/std::sqrt/std::cos and inherit whatever
/// last-ulp differences the host libm has.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t repeat_index);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution; one engine call.
    double uniform01();

    /// Uniform on {0, ..., n-1}; exactly one engine call. n must be >= 1.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Box-Muller, two engine calls per sample, no cached spare.
    double normal(double mean, double stddev);

private:
    std::mt19937_64 engine_;
};

RngStream derive_stream(std::uint64_t master_seed, std::int64_t repeat_index);

/// Throws std::invalid_argument naming the offending field.
void validate(const EconCoreParams& params);

/// Log-normal with median productivity_init_mean, clamped below at the floor.
ValueAmount init_productivity(RngStream& rng, const EconCoreParams& params);

/// Multiplicative noise v * (1 + eps), eps ~ Normal(0, mutation_sigma)
/// truncated to [-0.9, 0.9] by resampling, clamped below at the floor.
ValueAmount mutate_productivity(ValueAmount v, RngStream& rng, const EconCoreParams& params);

/// Applies an already-drawn noise term; exposed for clamp tests.
ValueAmount apply_mutation(ValueAmount v, double eps, const EconCoreParams& params);

/// Arrival law shared by both economies: floor(n0 / alpha^(iteration-1)).
std::int64_t cohort_size(int iteration, std::int64_t n0, double alpha);

}  // namespace gamefi
