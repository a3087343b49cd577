#include "gamefi/econ_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gamefi {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t master_seed, std::uint64_t repeat_index) {
    // seed_seq's mixing algorithm is specified by the standard, so the
    // derived engine state is portable.
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed),
        static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(repeat_index),
        static_cast<std::uint32_t>(repeat_index >> 32),
        0x67616d65u,  // stream tag
    };
    return std::mt19937_64(seq);
}

constexpr double kMutationBound = 0.9;

}  // namespace

ValueAmount::ValueAmount(double amount) : amount_(amount) {
    if (!(amount >= 0.0) || !std::isfinite(amount)) {
        throw std::domain_error("ValueAmount must be finite and non-negative, got " + std::to_string(amount));
    }
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t repeat_index)
    : engine_(seeded_engine(master_seed, repeat_index)) {}

double RngStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be >= 1");
    auto idx = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
    return std::min(idx, n - 1);
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(uniform_index(span));
}

double RngStream::normal(double mean, double stddev) {
    // 1 - u keeps the log argument in (0, 1].
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

RngStream derive_stream(std::uint64_t master_seed, std::int64_t repeat_index) {
    if (repeat_index < 0) throw std::invalid_argument("derive_stream: repeat_index must be >= 0");
    return RngStream(master_seed, static_cast<std::uint64_t>(repeat_index));
}

void validate(const EconCoreParams& p) {
    if (!(p.productivity_init_mean > 0.0))
        throw std::invalid_argument("econ.productivity_init_mean must be positive");
    if (!(p.productivity_init_sigma >= 0.0))
        throw std::invalid_argument("econ.productivity_init_sigma must be non-negative");
    if (!(p.mutation_sigma >= 0.0))
        throw std::invalid_argument("econ.mutation_sigma must be non-negative");
    if (!(p.productivity_floor > 0.0))
        throw std::invalid_argument("econ.productivity_floor must be positive");
}

ValueAmount init_productivity(RngStream& rng, const EconCoreParams& params) {
    if (params.productivity_init_sigma == 0.0) {
        return ValueAmount{std::max(params.productivity_init_mean, params.productivity_floor)};
    }
    double z = rng.normal(0.0, 1.0);
    double v = std::exp(std::log(params.productivity_init_mean) + params.productivity_init_sigma * z);
    return ValueAmount{std::max(v, params.productivity_floor)};
}

ValueAmount apply_mutation(ValueAmount v, double eps, const EconCoreParams& params) {
    eps = std::clamp(eps, -kMutationBound, kMutationBound);
    return ValueAmount{std::max(v.value() * (1.0 + eps), params.productivity_floor)};
}

ValueAmount mutate_productivity(ValueAmount v, RngStream& rng, const EconCoreParams& params) {
    if (params.mutation_sigma == 0.0) return v;
    double eps;
    do {
        eps = rng.normal(0.0, params.mutation_sigma);
    } while (std::abs(eps) > kMutationBound);
    return apply_mutation(v, eps, params);
}

std::int64_t cohort_size(int iteration, std::int64_t n0, double alpha) {
    if (iteration < 1) throw std::invalid_argument("cohort_size: iteration must be >= 1");
    double n = static_cast<double>(n0) / std::pow(alpha, iteration - 1);
    return static_cast<std::int64_t>(std::floor(n));
}

}  // namespace gamefi
