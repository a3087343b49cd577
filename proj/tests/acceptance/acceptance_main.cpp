// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include "gamefi/analysis_io.hpp"
#include "gamefi/cli.hpp"
#include "gamefi/retention_model.hpp"
#include "gamefi/serverfi_model.hpp"
#include "gamefi/sim_harness.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef GAMEFI_SIM_PATH
#error "GAMEFI_SIM_PATH must name the gamefi-sim executable"
#endif

using namespace gamefi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [violated: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double peak_rss_mib() {
    rusage usage{};
    getrusage(RUSAGE_SELF, &usage);
    return static_cast<double>(usage.ru_maxrss) / 1024.0;  // Linux reports KiB
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentSpec default_spec(ModelKind model) {
    return parse_config(model == ModelKind::serverfi ? R"({"model":"serverfi"})" : R"({"model":"retention"})");
}

// 1. Monte Carlo collection cost agrees with lambda * k * H_k.
void coupon_oracle_equivalence(Outcome& o) {
    const auto t0 = Clock::now();
    for (int k : {2, 4, 8}) {
        std::ostringstream out, err;
        const int code = cli_main({"oracle", "--k", std::to_string(k), "--trials", "100000", "--seed", "7"}, out, err);
        o.require(code == 0, "oracle exit code");

        RngStream rng = derive_stream(7, 0);
        const double mc = coupon_oracle(k, 100'000, rng);
        const double analytic = serverfi::expected_collection_cost(k, 1.0).value();
        const double rel = std::abs(mc - analytic) / analytic;
        o.detail << " k=" << k << " analytic=" << analytic << " mc=" << mc << " rel=" << rel << ";";
        o.require(rel <= 0.02, "k=" + std::to_string(k) + " relative error <= 2%");
    }
    const double secs = seconds_since(t0);
    o.detail << " time=" << secs << "s";
    o.require(secs < 10.0, "runtime < 10 s");
}

// 2. ServerFi aggregate rises: positive late slope and T_500 >= 1.2 T_50.
void serverfi_shape(Outcome& o) {
    auto spec = default_spec(ModelKind::serverfi);
    spec.iterations = 500;
    spec.repeats = 20;
    const auto t0 = Clock::now();
    const auto result = run_experiment(spec);
    const double secs = seconds_since(t0);
    const auto report = trend_report(result.series);
    const double t50 = result.series.mean_total_value[49];
    const double t500 = result.series.mean_total_value[499];
    o.detail << " late_slope=" << report.late_slope << " T50=" << t50 << " T500=" << t500
             << " T500/T50=" << t500 / t50 << " time=" << secs << "s";
    o.require(report.late_slope > 0.0, "late_slope > 0");
    o.require(t500 >= 1.2 * t50, "T500 >= 1.2 * T50");
    o.require(secs < 120.0, "runtime < 2 min");
}

// 3. Retention aggregate peaks early and then falls off.
void retention_shape(Outcome& o) {
    auto spec = default_spec(ModelKind::retention);
    spec.iterations = 500;
    spec.repeats = 20;
    const auto t0 = Clock::now();
    const auto result = run_experiment(spec);
    const double secs = seconds_since(t0);
    const auto report = trend_report(result.series);
    o.detail << " peak_iteration=" << report.peak_iteration << " early_peak=" << report.early_peak
             << " final_to_peak=" << report.final_to_peak_ratio << " time=" << secs << "s";
    o.require(report.early_peak, "peak within first 40% of iterations");
    o.require(report.final_to_peak_ratio <= 0.6, "final_to_peak_ratio <= 0.6");
    o.require(secs < 120.0, "runtime < 2 min");
}

// 4. Separate CLI processes give byte-identical CSVs, for any worker count.
void determinism(Outcome& o) {
    const fs::path dir = fs::temp_directory_path() / "gamefi_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const char* model : {"serverfi", "retention"}) {
        const fs::path cfg = dir / (std::string(model) + ".json");
        std::ofstream(cfg) << R"({"model":")" << model << R"(","master_seed":2024,"iterations":200,"repeats":8})";
        std::vector<fs::path> outputs;
        for (const char* workers : {"1", "1", "4", "3"}) {
            const fs::path csv = dir / (std::string(model) + "_" + std::to_string(outputs.size()) + ".csv");
            const std::string cmd = std::string("\"") + GAMEFI_SIM_PATH + "\" simulate --config \"" + cfg.string() +
                                    "\" --out \"" + csv.string() + "\" --workers " + workers;
            o.require(std::system(cmd.c_str()) == 0, std::string(model) + " simulate exit code");
            outputs.push_back(csv);
        }
        const std::string ref = slurp(outputs.front());
        o.require(!ref.empty(), "non-empty output");
        for (std::size_t i = 1; i < outputs.size(); ++i) {
            o.require(slurp(outputs[i]) == ref, std::string(model) + " run " + std::to_string(i) + " byte-identical");
        }
        o.detail << ' ' << model << ": " << outputs.size() << " runs identical (" << ref.size() << " bytes);";
    }
    fs::remove_all(dir);
}

// 5. Payout, fragment and value-to-draw conservation over full runs.
void conservation(Outcome& o) {
    const auto rspec = default_spec(ModelKind::retention);
    {
        retention::RetentionState state(rspec.retention, rspec.econ);
        RngStream rng = derive_stream(rspec.master_seed, 0);
        retention::StepAudit audit;
        double worst = 0.0;
        int checked = 0;
        for (int i = 0; i < 500; ++i) {
            const auto rec = retention::step_retention(state, rng, audit);
            if (rec.active_players == 0) continue;
            double window_sum = 0.0, paid = 0.0;
            for (const auto& [id, v] : audit.totals) window_sum += v.value();
            for (const auto& [id, v] : audit.payouts) paid += v.value();
            const double pool = rspec.retention.pool_share * window_sum;
            const double rel = pool > 0.0 ? std::abs(paid - pool) / pool : std::abs(paid);
            worst = std::max(worst, rel);
            ++checked;
        }
        o.detail << " retention: " << checked << " iterations, worst payout rel error " << worst << ";";
        o.require(checked > 0 && worst <= 1e-9, "payout conservation within 1e-9");
    }
    const auto sspec = default_spec(ModelKind::serverfi);
    {
        serverfi::ServerFiState state(sspec.serverfi, sspec.econ);
        RngStream rng = derive_stream(sspec.master_seed, 0);
        serverfi::StepAudit audit;
        std::int64_t value_violations = 0, fragment_violations = 0, conversions = 0;
        for (int i = 0; i < 500; ++i) {
            serverfi::step_serverfi(state, rng, audit);
            for (const auto& c : audit.conversions) {
                ++conversions;
                if (c.credit_before + c.contribution != static_cast<double>(c.num_draws) * sspec.serverfi.lambda + c.credit_after)
                    ++value_violations;
            }
            std::uint64_t held = 0;
            for (const auto& pl : state.players) held += pl.inventory.total();
            const auto k = static_cast<std::uint64_t>(sspec.serverfi.k);
            if (state.fragments_drawn - k * static_cast<std::uint64_t>(state.nfts_minted) - state.fragments_forfeited != held)
                ++fragment_violations;
        }
        o.detail << " serverfi: " << conversions << " conversions, value violations " << value_violations
                 << ", fragment violations " << fragment_violations << ", drawn " << state.fragments_drawn
                 << ", minted " << state.nfts_minted << ", forfeited " << state.fragments_forfeited;
        o.require(value_violations == 0, "value-to-draw conservation exact");
        o.require(fragment_violations == 0, "fragment conservation exact");
    }
}

// 6. Full protocol: 500 iterations x 100 repeats per model.
void protocol_scale(Outcome& o) {
    const auto t0 = Clock::now();
    for (auto model : {ModelKind::serverfi, ModelKind::retention}) {
        auto spec = default_spec(model);
        o.require(spec.iterations == 500 && spec.repeats == 100, "defaults are 500 x 100");
        const auto result = run_experiment(spec);
        o.require(result.series.size() == 500, "500-row series");
        o.require(result.raw.size() == 100, "raw repeats retained");
        for (const auto& r : result.raw) o.require(r.size() == 500, "record count per repeat");
    }
    const double secs = seconds_since(t0);
    const double rss = peak_rss_mib();
    o.detail << " both models 500x100 in " << secs << "s, peak RSS " << rss << " MiB";
    o.require(secs < 600.0, "runtime < 10 min");
    o.require(rss < 1024.0, "peak memory < 1 GiB");
}

// 7. Tagged rule examples, verbatim.
void rule_suites(Outcome& o) {
    using namespace gamefi::retention;
    using namespace gamefi::serverfi;
    auto totals = [](std::initializer_list<std::pair<std::uint64_t, double>> items) {
        Totals t;
        for (auto [k, v] : items) t.emplace(PlayerId{k}, ValueAmount{v});
        return t;
    };
    o.require(select_top(totals({{0, 10}, {1, 5}, {2, 1}, {3, 1}, {4, 1}}), 0.2) == std::vector<PlayerId>{PlayerId{0}},
              "winner count floor(p*N)");
    o.require(select_top(totals({{0, 1}, {1, 1}, {2, 1}, {3, 1}}), 0.2).size() == 1, "minimum one winner");
    o.require(select_top(totals({{0, 5}, {1, 5}}), 0.2) == std::vector<PlayerId>{PlayerId{0}}, "tie-break by id");

    auto rp = [](std::uint64_t id, int tol, int misses) {
        return RetentionPlayer{PlayerCore{PlayerId{id}, ValueAmount{1.0}, 1, true}, tol, misses};
    };
    std::vector<RetentionPlayer> a{rp(0, 3, 3)};
    o.require(update_churn(a, {}).size() == 1 && a.empty(), "tau=3, misses 3 -> 4 departs");
    std::vector<RetentionPlayer> b{rp(0, 3, 3)};
    o.require(update_churn(b, {PlayerId{0}}).empty() && b[0].consecutive_misses == 0, "winner resets misses");
    std::vector<RetentionPlayer> c{rp(0, 1, 0)};
    o.require(update_churn(c, {}).empty() && c[0].consecutive_misses == 1, "new player stays after one miss");

    const ValueAmount cost = expected_collection_cost(4, 1.0);
    o.require(entry_gate(cost, ValueAmount{0.2}, 50), "gate open at 10 >= 8.3333");
    o.require(!entry_gate(cost, ValueAmount{0.1}, 50), "gate closed at 5 < 8.3333");
    o.require(!entry_gate(ValueAmount{1.0}, ValueAmount{0.0}, 50), "gate closed at zero reward");

    o.require(arrivals(1, 100, 1.1, true) == 100, "arrivals i=1");
    o.require(arrivals(2, 100, 1.1, true) == 90, "arrivals i=2");
    o.require(arrivals(2, 100, 1.1, false) == 0, "arrivals gated");
    o.detail << " winner-count, tie-break, miss-counter, entry-gate and arrival examples checked";
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria{
        {"AC1 coupon-collector oracle equivalence", coupon_oracle_equivalence},
        {"AC2 ServerFi upward trend", serverfi_shape},
        {"AC3 retention early peak then decline", retention_shape},
        {"AC4 determinism across processes and worker counts", determinism},
        {"AC5 conservation suite", conservation},
        {"AC6 protocol scale 500x100", protocol_scale},
        {"AC7 rule unit suites", rule_suites},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " exception: " << e.what();
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.name << " --" << o.detail.str() << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
