#include "gamefi/analysis_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace gamefi {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ValidationError(path + " " + what); }

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            fail(prefix.empty() ? key : prefix + "." + key, "is not a recognized key");
        }
    }
}

const json* section(const json& root, const char* key) {
    auto it = root.find(key);
    if (it == root.end()) return nullptr;
    if (!it->is_object()) fail(key, "must be an object");
    return &*it;
}

void read(const json& obj, const std::string& prefix, const char* key, double& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number()) fail(prefix + "." + key, "must be a number");
    out = it->get<double>();
}

template <class Int>
void read(const json& obj, const std::string& prefix, const char* key, Int& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!it->is_number_integer()) fail(path, "must be an integer");
    if constexpr (std::is_unsigned_v<Int>) {
        if (it->is_number_unsigned()) {
            out = it->get<Int>();
        } else {
            fail(path, "must be non-negative");
        }
    } else {
        auto v = it->get<std::int64_t>();
        if (v < std::numeric_limits<Int>::min() || v > std::numeric_limits<Int>::max()) fail(path, "is out of range");
        out = static_cast<Int>(v);
    }
}

void rethrow_as_validation(auto&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
}

std::string_view split_name(retention::PayoutSplit s) {
    return s == retention::PayoutSplit::equal ? "equal" : "proportional";
}

double parse_real(std::string_view field, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ValidationError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "' as a number");
    }
    return v;
}

}  // namespace

ExperimentSpec parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ValidationError("config must be a JSON object");
    reject_unknown(root, "", {"model", "master_seed", "iterations", "repeats", "econ", "serverfi", "retention"});

    ExperimentSpec spec;
    if (auto it = root.find("model"); it != root.end()) {
        if (!it->is_string()) fail("model", "must be a string");
        const auto name = it->get<std::string>();
        if (name == "serverfi")
            spec.model = ModelKind::serverfi;
        else if (name == "retention")
            spec.model = ModelKind::retention;
        else
            fail("model", "must be \"serverfi\" or \"retention\"");
    }
    read(root, "", "master_seed", spec.master_seed);
    read(root, "", "iterations", spec.iterations);
    read(root, "", "repeats", spec.repeats);

    if (const json* econ = section(root, "econ")) {
        reject_unknown(*econ, "econ",
                       {"productivity_init_mean", "productivity_init_sigma", "mutation_sigma", "productivity_floor"});
        read(*econ, "econ", "productivity_init_mean", spec.econ.productivity_init_mean);
        read(*econ, "econ", "productivity_init_sigma", spec.econ.productivity_init_sigma);
        read(*econ, "econ", "mutation_sigma", spec.econ.mutation_sigma);
        read(*econ, "econ", "productivity_floor", spec.econ.productivity_floor);
    }
    if (const json* sf = section(root, "serverfi")) {
        reject_unknown(*sf, "serverfi", {"lambda", "k", "n0", "alpha", "staking_share", "payoff_horizon"});
        auto& p = spec.serverfi;
        read(*sf, "serverfi", "lambda", p.lambda);
        read(*sf, "serverfi", "k", p.k);
        read(*sf, "serverfi", "n0", p.n0);
        read(*sf, "serverfi", "alpha", p.alpha);
        read(*sf, "serverfi", "staking_share", p.staking_share);
        read(*sf, "serverfi", "payoff_horizon", p.payoff_horizon);
    }
    if (const json* rt = section(root, "retention")) {
        reject_unknown(*rt, "retention",
                       {"top_fraction", "pool_share", "window", "tolerance_min", "tolerance_max", "n0", "alpha", "split"});
        auto& p = spec.retention;
        read(*rt, "retention", "top_fraction", p.top_fraction);
        read(*rt, "retention", "pool_share", p.pool_share);
        read(*rt, "retention", "window", p.window);
        read(*rt, "retention", "tolerance_min", p.tolerance_min);
        read(*rt, "retention", "tolerance_max", p.tolerance_max);
        read(*rt, "retention", "n0", p.n0);
        read(*rt, "retention", "alpha", p.alpha);
        if (auto it = rt->find("split"); it != rt->end()) {
            const std::string s = it->is_string() ? it->get<std::string>() : "";
            if (s == "proportional")
                p.split = retention::PayoutSplit::proportional;
            else if (s == "equal")
                p.split = retention::PayoutSplit::equal;
            else
                fail("retention.split", "must be \"proportional\" or \"equal\"");
        }
    }

    // Both parameter sets are checked, whichever model runs.
    rethrow_as_validation([&] {
        validate(spec.econ);
        serverfi::validate(spec.serverfi);
        retention::validate(spec.retention);
    });
    validate(spec);
    return spec;
}

std::string spec_to_json(const ExperimentSpec& spec) {
    json j = {
        {"model", spec.model == ModelKind::serverfi ? "serverfi" : "retention"},
        {"master_seed", spec.master_seed},
        {"iterations", spec.iterations},
        {"repeats", spec.repeats},
        {"econ",
         {{"productivity_init_mean", spec.econ.productivity_init_mean},
          {"productivity_init_sigma", spec.econ.productivity_init_sigma},
          {"mutation_sigma", spec.econ.mutation_sigma},
          {"productivity_floor", spec.econ.productivity_floor}}},
        {"serverfi",
         {{"lambda", spec.serverfi.lambda},
          {"k", spec.serverfi.k},
          {"n0", spec.serverfi.n0},
          {"alpha", spec.serverfi.alpha},
          {"staking_share", spec.serverfi.staking_share},
          {"payoff_horizon", spec.serverfi.payoff_horizon}}},
        {"retention",
         {{"top_fraction", spec.retention.top_fraction},
          {"pool_share", spec.retention.pool_share},
          {"window", spec.retention.window},
          {"tolerance_min", spec.retention.tolerance_min},
          {"tolerance_max", spec.retention.tolerance_max},
          {"n0", spec.retention.n0},
          {"alpha", spec.retention.alpha},
          {"split", split_name(spec.retention.split)}}},
    };
    return j.dump(2) + "\n";
}

std::string format_real(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 6);
    return std::string(buf.data(), ptr);
}

void write_series_csv(const AggregateSeries& series, std::ostream& out) {
    out << kSeriesHeader << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << (i + 1) << ',' << format_real(series.mean_total_value[i]) << ',' << format_real(series.min_total_value[i])
            << ',' << format_real(series.max_total_value[i]) << ',' << format_real(series.mean_active_players[i]) << '\n';
    }
}

void write_series_csv(const AggregateSeries& series, const std::filesystem::path& destination) {
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + destination.string() + " for writing");
    write_series_csv(series, out);
    out.flush();
    if (!out) throw IoError("failed writing " + destination.string());
}

AggregateSeries read_series_csv(std::istream& in) {
    AggregateSeries s;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("series CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSeriesHeader) throw ValidationError("series CSV header mismatch: '" + line + "'");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<std::string_view, 5> fields;
        std::size_t n = 0;
        std::string_view rest = line;
        while (n < fields.size()) {
            auto comma = rest.find(',');
            fields[n++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) {
                rest = {};
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (n != fields.size() || !rest.empty()) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 5 fields");
        }
        const double iteration = parse_real(fields[0], line_no);
        if (iteration != static_cast<double>(s.size() + 1)) {
            throw ValidationError("line " + std::to_string(line_no) + ": iterations must be consecutive from 1");
        }
        s.mean_total_value.push_back(parse_real(fields[1], line_no));
        s.min_total_value.push_back(parse_real(fields[2], line_no));
        s.max_total_value.push_back(parse_real(fields[3], line_no));
        s.mean_active_players.push_back(parse_real(fields[4], line_no));
    }
    return s;
}

AggregateSeries read_series_csv(const std::filesystem::path& source) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw IoError("cannot open " + source.string() + " for reading");
    return read_series_csv(in);
}

void write_records_csv(const RecordSeries& records, const std::filesystem::path& destination) {
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + destination.string() + " for writing");
    const bool serverfi = !records.empty() && std::holds_alternative<ServerFiExtra>(records.front().extra);
    out << "iteration,total_value,active_players,joins,departures,"
        << (serverfi ? "nfts_minted,staked_total,per_nft_reward" : "payout_total,winner_count") << '\n';
    for (const auto& r : records) {
        out << r.iteration << ',' << format_real(r.total_value) << ',' << r.active_players << ',' << r.joins << ','
            << r.departures << ',';
        if (const auto* sf = std::get_if<ServerFiExtra>(&r.extra)) {
            out << sf->nfts_minted << ',' << sf->staked_total << ',' << format_real(sf->per_nft_reward);
        } else {
            const auto& rt = std::get<RetentionExtra>(r.extra);
            out << format_real(rt.payout_total) << ',' << rt.winner_count;
        }
        out << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing " + destination.string());
}

TrendReport trend_report(const AggregateSeries& series) {
    const auto& y = series.mean_total_value;
    const std::size_t n = y.size();
    if (n < 10) throw ValidationError("trend report needs at least 10 iterations, got " + std::to_string(n));

    TrendReport r;
    const auto late = static_cast<std::size_t>(std::floor(kLateWindowFraction * static_cast<double>(n)));
    const std::size_t start = n - late;
    double x_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = start; i < n; ++i) {
        x_mean += static_cast<double>(i + 1);
        y_mean += y[i];
    }
    x_mean /= static_cast<double>(late);
    y_mean /= static_cast<double>(late);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = start; i < n; ++i) {
        const double dx = static_cast<double>(i + 1) - x_mean;
        sxy += dx * (y[i] - y_mean);
        sxx += dx * dx;
    }
    r.late_slope = sxy / sxx;

    const auto peak = std::max_element(y.begin(), y.end());  // first maximum
    r.peak_iteration = static_cast<int>(peak - y.begin()) + 1;
    r.final_to_peak_ratio = *peak > 0.0 ? y.back() / *peak : 1.0;
    r.early_peak = r.peak_iteration <= kEarlyPeakFraction * static_cast<double>(n);
    return r;
}

std::string report_to_json(const TrendReport& report) {
    json j = {
        {"late_slope", report.late_slope},
        {"peak_iteration", report.peak_iteration},
        {"final_to_peak_ratio", report.final_to_peak_ratio},
        {"early_peak", report.early_peak},
    };
    return j.dump(2) + "\n";
}

double coupon_oracle(int k, std::int64_t trials, RngStream& rng) {
    if (k < 1 || k > 64) throw std::invalid_argument("coupon_oracle: k must be in [1, 64]");
    if (trials < 1) throw std::invalid_argument("coupon_oracle: trials must be at least 1");
    const std::uint64_t full = k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    std::uint64_t total_draws = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        std::uint64_t seen = 0;
        while (seen != full) {
            seen |= std::uint64_t{1} << rng.uniform_index(static_cast<std::uint64_t>(k));
            ++total_draws;
        }
    }
    return static_cast<double>(total_draws) / static_cast<double>(trials);
}

}  // namespace gamefi
