// Repeat orchestration and cross-repeat aggregation.
#pragma once

#include "gamefi/econ_core.hpp"
#include "gamefi/records.hpp"
#include "gamefi/retention_model.hpp"
#include "gamefi/serverfi_model.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace gamefi {

enum class ModelKind { serverfi, retention };

struct ExperimentSpec {
    ModelKind model = ModelKind::serverfi;
    EconCoreParams econ;
    serverfi::ServerFiParams serverfi;
    retention::RetentionParams retention;
    int iterations = 500;
    int repeats = 100;
    std::uint64_t master_seed = 1;
};

/// Thrown for any spec or parameter invariant violation. The message starts
/// with the dotted field path.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void validate(const ExperimentSpec& spec);

using RecordSeries = std::vector<IterationRecord>;

struct AggregateSeries {
    std::vector<double> mean_total_value;
    std::vector<double> min_total_value;
    std::vector<double> max_total_value;
    std::vector<double> mean_active_players;

    [[nodiscard]] std::size_t size() const { return mean_total_value.size(); }
    friend bool operator==(const AggregateSeries&, const AggregateSeries&) = default;
};

RecordSeries run_once(const ExperimentSpec& spec, int repeat_index);

/// Pointwise mean/min/max across repeats. Bit-identical for any ordering of
/// the input. Throws std::invalid_argument naming the first repeat whose
/// length differs from repeat 0.
AggregateSeries aggregate(std::span<const RecordSeries> results);

struct RunOptions {
    unsigned workers = 0;         // 0 = hardware concurrency
    std::size_t raw_cap = 100;    // repeats whose full records are kept
};

struct ExperimentResult {
    AggregateSeries series;
    std::vector<RecordSeries> raw;  // repeats [0, min(repeats, raw_cap))
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

}  // namespace gamefi
