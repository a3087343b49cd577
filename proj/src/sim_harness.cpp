#include "gamefi/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace gamefi {

namespace {

struct Compact {
    std::vector<double> totals;
    std::vector<std::int64_t> active;
};

Compact compact(const RecordSeries& records) {
    Compact c;
    c.totals.reserve(records.size());
    c.active.reserve(records.size());
    for (const auto& r : records) {
        c.totals.push_back(r.total_value);
        c.active.push_back(r.active_players);
    }
    return c;
}

// Neumaier summation over ascending values; sorting first makes the result
// independent of the order repeats arrive in.
double order_free_mean(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    return (sum + comp) / static_cast<double>(values.size());
}

AggregateSeries aggregate_compact(std::span<const Compact> repeats) {
    AggregateSeries out;
    if (repeats.empty()) return out;
    const std::size_t len = repeats.front().totals.size();
    for (std::size_t r = 0; r < repeats.size(); ++r) {
        if (repeats[r].totals.size() != len) {
            throw std::invalid_argument("aggregate: repeat " + std::to_string(r) + " has " +
                                        std::to_string(repeats[r].totals.size()) + " iterations, expected " +
                                        std::to_string(len));
        }
    }
    out.mean_total_value.resize(len);
    out.min_total_value.resize(len);
    out.max_total_value.resize(len);
    out.mean_active_players.resize(len);

    std::vector<double> column(repeats.size());
    for (std::size_t i = 0; i < len; ++i) {
        std::int64_t active_sum = 0;
        for (std::size_t r = 0; r < repeats.size(); ++r) {
            column[r] = repeats[r].totals[i];
            active_sum += repeats[r].active[i];
        }
        auto [lo, hi] = std::minmax_element(column.begin(), column.end());
        out.min_total_value[i] = *lo;
        out.max_total_value[i] = *hi;
        // Rounding can push a mean of near-equal values past an endpoint.
        out.mean_total_value[i] = std::clamp(order_free_mean(column), out.min_total_value[i], out.max_total_value[i]);
        out.mean_active_players[i] = static_cast<double>(active_sum) / static_cast<double>(repeats.size());
    }
    return out;
}

}  // namespace

void validate(const ExperimentSpec& spec) {
    if (spec.iterations < 1) throw ValidationError("iterations must be at least 1");
    if (spec.repeats < 1) throw ValidationError("repeats must be at least 1");
    try {
        validate(spec.econ);
        if (spec.model == ModelKind::serverfi)
            serverfi::validate(spec.serverfi);
        else
            retention::validate(spec.retention);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
}

RecordSeries run_once(const ExperimentSpec& spec, int repeat_index) {
    validate(spec);
    if (repeat_index < 0 || repeat_index >= spec.repeats) {
        throw ValidationError("repeat_index " + std::to_string(repeat_index) + " outside [0, repeats)");
    }
    RngStream rng = derive_stream(spec.master_seed, repeat_index);
    RecordSeries records;
    records.reserve(static_cast<std::size_t>(spec.iterations));
    if (spec.model == ModelKind::serverfi) {
        serverfi::ServerFiState state(spec.serverfi, spec.econ);
        for (int i = 0; i < spec.iterations; ++i) records.push_back(serverfi::step_serverfi(state, rng));
    } else {
        retention::RetentionState state(spec.retention, spec.econ);
        for (int i = 0; i < spec.iterations; ++i) records.push_back(retention::step_retention(state, rng));
    }
    return records;
}

AggregateSeries aggregate(std::span<const RecordSeries> results) {
    std::vector<Compact> columns;
    columns.reserve(results.size());
    for (const auto& r : results) columns.push_back(compact(r));
    return aggregate_compact(columns);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
    validate(spec);
    const auto repeats = static_cast<std::size_t>(spec.repeats);
    const std::size_t keep = std::min(repeats, options.raw_cap);

    std::vector<Compact> columns(repeats);
    ExperimentResult result;
    result.raw.resize(keep);

    unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, repeats));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t r = next++; r < repeats; r = next++) {
            try {
                RecordSeries records = run_once(spec, static_cast<int>(r));
                columns[r] = compact(records);
                if (r < keep) result.raw[r] = std::move(records);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    result.series = aggregate_compact(columns);
    return result;
}

}  // namespace gamefi
