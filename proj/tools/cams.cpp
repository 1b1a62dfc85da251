#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cams/config.hpp"
#include "cams/parallel.hpp"

namespace fs = std::filesystem;
using namespace cams;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNonOptimal = 2;
constexpr int kExitBandTooTight = 3;
constexpr int kExitInfeasible = 4;

struct GlobalOpts {
    std::string out_override;
    bool quiet = false;
};

void info(const GlobalOpts& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << "\n";
}

fs::path output_dir(const RunConfig& cfg, const GlobalOpts& g) {
    fs::path dir = g.out_override.empty() ? fs::path(cfg.output.dir) : fs::path(g.out_override);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string curve_csv(const SweepResult& sweep) {
    std::string csv = "delta,rate_bits,rate_bits_bcrb_bound,lambda_sensing,kkt_residual,status\n";
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
        const TradeoffPoint& pt = sweep.points[i];
        const double bcrb_rate =
            i < sweep.bcrb_points.size() ? sweep.bcrb_points[i].rate_bits : kInf;
        csv += format_full(sweep.deltas[i]) + ",";
        csv += format_full(pt.rate_bits) + ",";
        csv += format_full(bcrb_rate) + ",";
        csv += format_full(pt.lambda_sensing) + ",";
        csv += format_full(pt.kkt_residual) + ",";
        csv += to_string(pt.status);
        csv += "\n";
    }
    return csv;
}

int cmd_sweep(const RunConfig& cfg, const GlobalOpts& g) {
    const Scenario scenario = build_scenario(cfg);
    const SweepResult sweep =
        sweep_curve(scenario, cfg.sweep.n_points, cfg.solver, cfg.sweep.include_bcrb);
    const fs::path dir = output_dir(cfg, g);
    write_file(dir / "curve.csv", curve_csv(sweep));
    for (std::size_t i = 0; i < sweep.points.size(); ++i)
        write_file(dir / ("q_opt_" + std::to_string(i) + ".json"),
                   cov_to_json(sweep.points[i].q_opt));
    std::string meta = "{\n  \"delta_min\": " + format_full(sweep.delta_min) +
                       ",\n  \"delta_comm\": \"" + format_full(sweep.delta_comm) +
                       "\",\n  \"open_ended\": " + (sweep.open_ended ? "true" : "false") +
                       "\n}\n";
    write_file(dir / "sweep_meta.json", meta);
    info(g, "sweep: wrote " + std::to_string(sweep.points.size()) + " points to " +
                dir.string());
    for (const TradeoffPoint& pt : sweep.points)
        if (pt.status != SolveStatus::optimal) return kExitNonOptimal;
    return kExitOk;
}

int cmd_beampattern(const RunConfig& cfg, const GlobalOpts& g,
                    const std::vector<double>& deltas) {
    const Scenario scenario = build_scenario(cfg);
    constexpr int kGridPoints = 721;
    std::vector<double> grid(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i)
        grid[i] = -M_PI / 2 + M_PI * static_cast<double>(i) / (kGridPoints - 1);

    struct Entry {
        std::string label;
        double delta;
        CovMatrix q;
    };
    std::vector<Entry> entries;
    const TradeoffPoint comm = capacity_only(scenario);
    entries.push_back({"comm_optimal", comm.delta, comm.q_opt});
    const MinMseResult sens = min_achievable_mse(scenario, cfg.solver);
    entries.push_back({"sensing_optimal", sens.delta_min, sens.q});
    for (double d : deltas) {
        const TradeoffPoint pt = solve_capacity_mse(scenario, d, cfg.solver);
        if (pt.status == SolveStatus::infeasible) {
            std::cerr << "delta " << format_full(d) << " infeasible (delta_min = "
                      << format_full(sens.delta_min) << ")\n";
            return kExitInfeasible;
        }
        entries.push_back({"delta_" + format_full(d), d, pt.q_opt});
    }

    std::string csv = "label,delta,theta,b\n";
    for (const Entry& e : entries) {
        const auto pattern = beam_pattern(e.q, scenario.power, grid);
        for (const auto& [theta, b] : pattern) {
            csv += e.label + "," + format_full(e.delta) + "," + format_full(theta) + "," +
                   format_full(b) + "\n";
        }
    }
    const fs::path dir = output_dir(cfg, g);
    write_file(dir / "beampattern.csv", csv);
    info(g, "beampattern: wrote " + std::to_string(entries.size()) + " patterns to " +
                dir.string());
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const GlobalOpts& g, bool trial_records) {
    const Scenario scenario = build_scenario(cfg);
    const MinMseResult sens = min_achievable_mse(scenario, cfg.solver);
    std::vector<TrialRecord> records;
    McSummary summary;
    try {
        summary = run_mse_experiment(scenario, sens.q, cfg.montecarlo,
                                     trial_records ? &records : nullptr);
    } catch (const BandTooTight& e) {
        std::cerr << e.what() << "\nhint: increase montecarlo.delta_band or n_block\n";
        return kExitBandTooTight;
    }
    const fs::path dir = output_dir(cfg, g);
    write_file(dir / "mc_summary.json", mc_summary_to_json(summary) + "\n");
    if (trial_records) {
        if (cfg.output.format == OutputFormat::csv) {
            std::string csv = "trial,theta,theta_hat,sq_err\n";
            for (const TrialRecord& r : records) {
                std::string theta, theta_hat;
                for (Eigen::Index i = 0; i < r.theta.size(); ++i) {
                    if (i) theta += " ";
                    theta += format_full(r.theta(i).real());
                    if (r.theta(i).imag() != 0.0)
                        theta += "+" + format_full(r.theta(i).imag()) + "i";
                }
                for (Eigen::Index i = 0; i < r.theta_hat.size(); ++i) {
                    if (i) theta_hat += " ";
                    theta_hat += format_full(r.theta_hat(i).real());
                    if (r.theta_hat(i).imag() != 0.0)
                        theta_hat += "+" + format_full(r.theta_hat(i).imag()) + "i";
                }
                csv += std::to_string(r.trial) + ",\"" + theta + "\",\"" + theta_hat + "\"," +
                       format_full(r.sq_err) + "\n";
            }
            write_file(dir / "trials.csv", csv);
        } else {
            std::string out = "[\n";
            for (std::size_t i = 0; i < records.size(); ++i) {
                const TrialRecord& r = records[i];
                out += "  {\"trial\": " + std::to_string(r.trial) +
                       ", \"sq_err\": " + format_full(r.sq_err) + "}";
                out += i + 1 < records.size() ? ",\n" : "\n";
            }
            out += "]\n";
            write_file(dir / "trials.json", out);
        }
    }
    info(g, "simulate: ratio " + format_full(summary.ratio) + ", wrote " + dir.string());
    return kExitOk;
}

int cmd_solve(const RunConfig& cfg, const std::string& delta_arg) {
    const Scenario scenario = build_scenario(cfg);
    TradeoffPoint pt;
    if (delta_arg == "inf") {
        pt = capacity_only(scenario);
    } else {
        double delta = 0.0;
        try {
            delta = std::stod(delta_arg);
        } catch (const std::exception&) {
            std::cerr << "delta must be a number or 'inf'\n";
            return kExitConfig;
        }
        pt = solve_capacity_mse(scenario, delta, cfg.solver);
        if (pt.status == SolveStatus::infeasible) {
            const MinMseResult sens = min_achievable_mse(scenario, cfg.solver);
            std::cerr << "delta " << format_full(delta) << " infeasible: delta_min = "
                      << format_full(sens.delta_min) << "\n";
            return kExitInfeasible;
        }
    }
    std::cout << tradeoff_to_json(pt) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capacity-MSE trade-off toolkit for joint communication and sensing"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: machine parallelism)");
    app.add_option("--out", g.out_override, "override the configured output directory");
    app.add_flag("--quiet", g.quiet, "suppress progress messages");

    std::string config_path;
    std::vector<double> deltas;
    std::string delta_arg;
    bool trial_records = false;

    CLI::App* sweep = app.add_subcommand("sweep", "trace the capacity-MSE curve");
    sweep->add_option("config", config_path, "run configuration (JSON)")->required();

    CLI::App* beam = app.add_subcommand("beampattern", "beam patterns along the curve");
    beam->add_option("config", config_path, "run configuration (JSON)")->required();
    beam->add_option("--delta", deltas, "MSE levels to solve (repeatable)");

    CLI::App* sim = app.add_subcommand("simulate", "finite-block Monte Carlo validation");
    sim->add_option("config", config_path, "run configuration (JSON)")->required();
    sim->add_flag("--trial-records", trial_records, "emit per-trial records");

    CLI::App* solve = app.add_subcommand("solve", "solve one point of the curve");
    solve->add_option("config", config_path, "run configuration (JSON)")->required();
    solve->add_option("--delta", delta_arg, "MSE level (number or 'inf')")->required();

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) set_max_threads(threads);

    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (sweep->parsed()) return cmd_sweep(cfg, g);
        if (beam->parsed()) return cmd_beampattern(cfg, g, deltas);
        if (sim->parsed()) return cmd_simulate(cfg, g, trial_records);
        if (solve->parsed()) return cmd_solve(cfg, delta_arg);
    } catch (const InvalidInput& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BandTooTight& e) {
        std::cerr << e.what() << "\nhint: increase montecarlo.delta_band or n_block\n";
        return kExitBandTooTight;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
