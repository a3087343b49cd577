// Config parsing, CSV and JSON output, trend metrics, and the Monte Carlo
// coupon-collector estimate used to check the analytic collection cost.
#pragma once

#include "gamefi/sim_harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gamefi {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a JSON config. Missing keys take defaults from ExperimentSpec;
/// unknown keys, wrong types and out-of-range values throw ValidationError
/// whose message leads with the dotted field path.
ExperimentSpec parse_config(std::string_view text);

/// Effective spec as JSON, with every field present.
std::string spec_to_json(const ExperimentSpec& spec);

inline constexpr std::string_view kSeriesHeader =
    "iteration,mean_total_value,min_total_value,max_total_value,mean_active_players";

/// Shortest of fixed/scientific with 6 significant digits, trailing zeros
/// dropped ("%.6g" semantics, locale independent): 2.0 -> "2".
std::string format_real(double value);

void write_series_csv(const AggregateSeries& series, std::ostream& out);
void write_series_csv(const AggregateSeries& series, const std::filesystem::path& destination);

/// Inverse of write_series_csv. Throws ValidationError on malformed content.
AggregateSeries read_series_csv(std::istream& in);
AggregateSeries read_series_csv(const std::filesystem::path& source);

/// One repeat's raw records: iteration, total, active, joins, departures and
/// the model extras.
void write_records_csv(const RecordSeries& records, const std::filesystem::path& destination);

struct TrendReport {
    double late_slope = 0.0;
    int peak_iteration = 1;
    double final_to_peak_ratio = 1.0;
    bool early_peak = false;
};

inline constexpr double kLateWindowFraction = 0.8;
inline constexpr double kEarlyPeakFraction = 0.4;

/// Requires at least 10 iterations; throws ValidationError otherwise.
TrendReport trend_report(const AggregateSeries& series);
std::string report_to_json(const TrendReport& report);

/// Mean number of uniform draws over k types needed to hold every type,
/// averaged over `trials` independent collections.
double coupon_oracle(int k, std::int64_t trials, RngStream& rng);

}  // namespace gamefi
