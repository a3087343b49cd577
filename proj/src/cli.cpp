#include "gamefi/cli.hpp"

#include "gamefi/analysis_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace gamefi {

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

struct SimulateArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations;
    std::optional<int> repeats;
    std::string out;
    std::string report;
    std::string raw_dir;
    unsigned workers = 0;
    bool print_spec = false;
};

struct OracleArgs {
    int k = 0;
    std::int64_t trials = 0;
    std::uint64_t seed = 1;
    double lambda = 1.0;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    ExperimentSpec spec = parse_config(slurp(a.config));
    if (a.seed) spec.master_seed = *a.seed;
    if (a.iterations) spec.iterations = *a.iterations;
    if (a.repeats) spec.repeats = *a.repeats;
    validate(spec);

    if (a.print_spec) out << spec_to_json(spec);
    if (a.out.empty()) {
        if (a.print_spec) return kExitOk;
        throw ValidationError("--out is required");
    }

    RunOptions opts;
    opts.workers = a.workers;
    ExperimentResult result = run_experiment(spec, opts);
    write_series_csv(result.series, std::filesystem::path(a.out));

    if (!a.raw_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(a.raw_dir, ec);
        if (ec) throw IoError("cannot create " + a.raw_dir + ": " + ec.message());
        for (std::size_t r = 0; r < result.raw.size(); ++r) {
            std::ostringstream name;
            name << "repeat_" << std::setw(4) << std::setfill('0') << r << ".csv";
            write_records_csv(result.raw[r], std::filesystem::path(a.raw_dir) / name.str());
        }
    }
    if (!a.report.empty()) write_text(a.report, report_to_json(trend_report(result.series)));
    return kExitOk;
}

int run_report(const std::string& in, std::ostream& out) {
    out << report_to_json(trend_report(read_series_csv(std::filesystem::path(in))));
    return kExitOk;
}

int run_oracle(const OracleArgs& a, std::ostream& out) {
    if (a.k < 1 || a.k > 64) throw ValidationError("--k must be in [1, 64]");
    if (a.trials < 1) throw ValidationError("--trials must be at least 1");
    if (!(a.lambda > 0.0)) throw ValidationError("--lambda must be positive");
    const double analytic = serverfi::expected_collection_cost(a.k, a.lambda).value();
    RngStream rng = derive_stream(a.seed, 0);
    const double mc = a.lambda * coupon_oracle(a.k, a.trials, rng);
    const double rel = std::abs(mc - analytic) / analytic;
    out << std::fixed << std::setprecision(4) << "k=" << a.k << " lambda=" << a.lambda << " trials=" << a.trials
        << "\nanalytic    " << analytic << "\nmonte_carlo " << mc << "\nrel_error   " << std::setprecision(6) << rel
        << '\n';
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Agent-based GameFi tokenomics simulator", "gamefi-sim"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run an experiment and write the aggregate series CSV");
    simulate->add_option("--config", sim.config, "JSON experiment config")->required();
    simulate->add_option("--seed", sim.seed, "Override master_seed");
    simulate->add_option("--iterations", sim.iterations, "Override iterations");
    simulate->add_option("--repeats", sim.repeats, "Override repeats");
    simulate->add_option("--out", sim.out, "Series CSV destination");
    simulate->add_option("--report", sim.report, "Trend report JSON destination");
    simulate->add_option("--raw-dir", sim.raw_dir, "Directory for per-repeat record CSVs");
    simulate->add_option("--workers", sim.workers, "Worker threads (0 = all cores)");
    simulate->add_flag("--print-spec", sim.print_spec, "Print the effective spec as JSON");

    std::string report_in;
    auto* report = app.add_subcommand("report", "Recompute the trend report from a series CSV");
    report->add_option("--in", report_in, "Series CSV")->required();

    OracleArgs orc;
    auto* oracle = app.add_subcommand("oracle", "Compare analytic and Monte Carlo fragment collection cost");
    oracle->add_option("--k", orc.k, "Fragment types")->required();
    oracle->add_option("--trials", orc.trials, "Monte Carlo collections")->required();
    oracle->add_option("--seed", orc.seed, "Seed");
    oracle->add_option("--lambda", orc.lambda, "Value per draw");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    try {
        if (*simulate) return run_simulate(sim, out);
        if (*report) return run_report(report_in, out);
        return run_oracle(orc, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace gamefi
