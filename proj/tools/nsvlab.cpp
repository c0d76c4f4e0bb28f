#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "nsv/config.hpp"
#include "nsv/reports.hpp"
#include "nsv/snapshot.hpp"
#include "nsv/statistics.hpp"
#include "nsv/sweep.hpp"

#ifndef NSV_VERSION
#define NSV_VERSION "unknown"
#endif

namespace {

enum Exit { ok = 0, usage = 1, blow_up = 2, io = 3 };

using namespace nsv;

std::string fmt(double x) { return format_double(x); }

Snapshot final_snapshot(const RunConfig& c, const RunResult& r) {
    Snapshot s;
    s.mode = c.mode;
    s.nu = c.nu;
    s.alpha = c.alpha;
    s.seed = c.seed;
    if (c.mode == Mode::Spectral3d) {
        s.box_length = c.box_length;
        s.time = r.final_3d->time;
        s.velocity = r.final_3d->velocity;
    } else {
        s.box_length = c.k0;
        s.time = r.final_shell->time;
        s.shell = r.final_shell->u;
    }
    return s;
}

int cmd_run(const std::string& config_path, const std::string& out_arg) {
    RunConfig c = load_config(config_path);
    const std::string out = out_arg.empty() ? c.output_dir : out_arg;
    if (out.empty()) throw UsageError("no output directory (use --out or output_dir)");

    const RunSettings settings = run_settings(c);
    std::optional<RunResult> result;
    double reynolds = 0.0;
    if (c.mode == Mode::Spectral3d) {
        const SimParams p = spectral_params(c);
        SpectralField v = random_field(p.forcing.lattice_ptr(), c.seed, c.init_energy, c.init_peak);
        result.emplace(run_spectral(p, TrajectoryState::at(0.0, std::move(v), p.alpha), settings,
                                    c.forcing_kappa_high));
        if (result->acc.samples() > 0) reynolds = reynolds_residual(result->acc, p);
    } else {
        const ShellParams p = shell_params(c);
        result.emplace(run_shell(p, shell_initial(p, c.seed, c.init_amplitude), settings));
        if (result->acc.samples() > 0) reynolds = reynolds_residual(result->acc, p);
    }
    const RunResult& r = *result;

    ReportSet reports{c, std::nullopt, std::nullopt, {}};
    reports.summary.push_back("status: " + std::string(status_name(r.status)));
    if (!r.message.empty()) reports.summary.push_back("message: " + r.message);
    reports.summary.push_back("end_time: " + fmt(r.end_time));
    reports.summary.push_back("burn_in_used: " + fmt(r.burn_in));
    reports.summary.push_back("turnover_time: " + fmt(r.turnover));
    if (r.acc.sufficient()) {
        reports.budget = summarize(r.acc, c.bands, reynolds);
        for (double kappa : c.flux_kappas) {
            const Estimate e = mean_net_transfer(r.acc, kappa);
            reports.summary.push_back("net_transfer(" + fmt(kappa) + "): " + fmt(e.mean) + " +- " + fmt(e.stderr_));
        }
    } else {
        reports.summary.push_back("statistics: too few samples (" + std::to_string(r.acc.samples()) + ")");
    }
    emit_reports(out, reports);
    if (r.final_3d || r.final_shell) {
        write_snapshot((std::filesystem::path(out) / "final.snap").string(), final_snapshot(c, r));
    }

    std::printf("status %s, t = %s, samples %zu\n", status_name(r.status), fmt(r.end_time).c_str(), r.acc.samples());
    if (reports.budget) {
        const auto& b = *reports.budget;
        std::printf("injection %s  dissipation %s  global residual %s\n", fmt(b.injection.mean).c_str(),
                    fmt(b.dissipation.mean).c_str(), fmt(b.global_residual).c_str());
        for (const auto& row : b.bands) {
            std::printf("band [%s, %s): dissipation %s  net transfer %s  residual %s\n", fmt(row.band_lo).c_str(),
                        fmt(row.band_hi).c_str(), fmt(row.dissipation.mean).c_str(),
                        fmt(row.net_transfer.mean).c_str(), fmt(row.residual).c_str());
        }
    }
    if (r.status != RunStatus::Ok) {
        std::fprintf(stderr, "nsvlab: run %s: %s\n", status_name(r.status), r.message.c_str());
        return blow_up;
    }
    return ok;
}

int cmd_sweep(const std::string& config_path, const std::string& out_arg) {
    RunConfig c = load_config(config_path);
    const std::string out = out_arg.empty() ? c.output_dir : out_arg;
    if (out.empty()) throw UsageError("no output directory (use --out or output_dir)");
    const SweepPlan plan = sweep_plan(c);
    plan.validate();

    SweepReport report = run_alpha_sweep(plan);
    ReportSet reports{c, std::nullopt, report, {}};
    for (const auto& cell : report.cells) {
        if (cell.status != RunStatus::Ok) {
            reports.summary.push_back("cell alpha=" + fmt(cell.alpha) + " seed=" + std::to_string(cell.seed) + " " +
                                      status_name(cell.status) + ": " + cell.message);
        }
    }
    const TrendCheck ke = delta_trend(report);
    if (ke.available) {
        reports.summary.push_back("ke_delta trend: large " + fmt(ke.delta_large) + " small " + fmt(ke.delta_small) +
                                  " sigma " + fmt(ke.sigma) + (ke.shrinks ? " shrinks" : " does-not-shrink") +
                                  (ke.monotone ? " monotone" : " non-monotone"));
    }
    emit_reports(out, reports);

    for (const auto& row : report.rows) {
        std::printf("alpha %-10s %-10s runs %zu  <|u|^2> %s  delta %s\n", fmt(row.alpha).c_str(),
                    status_name(row.status), row.runs_ok, fmt(row.kinetic.mean).c_str(),
                    fmt(row.ke_delta.mean).c_str());
    }
    if (!report.has_baseline) std::printf("no resolved alpha; deltas unavailable\n");
    return ok;
}

ObservableAccumulator snapshot_statistics(const Snapshot& s) {
    StatsConfig cfg;
    cfg.min_samples = 1;
    if (s.mode == Mode::Spectral3d) {
        SimParams p;
        p.nu = s.nu;
        p.alpha = s.alpha;
        p.forcing = SpectralField(s.velocity.lattice_ptr());
        const auto layout = layout_for(s.velocity.lattice());
        ObservableAccumulator acc(layout, measure_info(p, 0.0), cfg);
        SampleWorkspace ws;
        acc.accumulate(make_sample(TrajectoryState::at(s.time, s.velocity, s.alpha), p, layout, ws));
        return acc;
    }
    ShellParams p;
    p.shells = static_cast<int>(s.shell.size());
    p.k0 = s.box_length;
    p.nu = s.nu;
    p.alpha = s.alpha;
    p.forcing.assign(s.shell.size(), {0.0, 0.0});
    const auto layout = layout_for(p);
    ObservableAccumulator acc(layout, measure_info(p), cfg);
    SampleWorkspace ws;
    acc.accumulate(make_sample(ShellState{s.time, s.shell}, p, layout, ws));
    return acc;
}

int cmd_budget(const std::string& path, double lo, double hi) {
    const Snapshot s = read_snapshot(path);
    const auto acc = snapshot_statistics(s);
    const BudgetRow row = budget_identity_check(acc, lo, hi);
    std::printf("t = %s  band [%s, %s)\n", fmt(s.time).c_str(), fmt(lo).c_str(), fmt(hi).c_str());
    std::printf("dissipation   %s\n", fmt(row.dissipation.mean).c_str());
    std::printf("net transfer  %s\n", fmt(row.net_transfer.mean).c_str());
    std::printf("mismatch      %s (instantaneous; balance holds only on average)\n", fmt(row.residual).c_str());
    return ok;
}

int cmd_spectrum(const std::string& path) {
    const Snapshot s = read_snapshot(path);
    const auto acc = snapshot_statistics(s);
    std::printf("shell,E\n");
    const auto& e = acc.total().spectrum;
    for (std::size_t i = 0; i < e.size(); ++i) {
        std::printf("%zu,%s\n", shell_label(s.mode, i), fmt(e[i]).c_str());
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Navier-Stokes-Voigt statistics laboratory"};
    app.set_version_flag("--version", std::string("nsvlab ") + NSV_VERSION);
    app.require_subcommand(1);

    std::string config, out, snapshot;
    double lo = 0.0, hi = 0.0;

    auto* run = app.add_subcommand("run", "integrate one trajectory and write reports");
    run->add_option("--config", config, "configuration file")->required();
    run->add_option("--out", out, "output directory (overrides output_dir)");

    auto* sweep = app.add_subcommand("sweep", "alpha sweep over seeds; writes sweep.csv");
    sweep->add_option("--config", config, "configuration file")->required();
    sweep->add_option("--out", out, "output directory (overrides output_dir)");

    auto* budget = app.add_subcommand("budget", "band dissipation and net transfer of a snapshot");
    budget->add_option("--snapshot", snapshot, "snapshot file")->required();
    budget->add_option("--kappa-lo", lo, "lower band edge")->required();
    budget->add_option("--kappa-hi", hi, "upper band edge (inf allowed)")->required();

    auto* spectrum = app.add_subcommand("spectrum", "shell spectrum of a snapshot as CSV");
    spectrum->add_option("--snapshot", snapshot, "snapshot file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*run) return cmd_run(config, out);
        if (*sweep) return cmd_sweep(config, out);
        if (*budget) return cmd_budget(snapshot, lo, hi);
        if (*spectrum) return cmd_spectrum(snapshot);
    } catch (const ConfigError& e) {
        std::cerr << "nsvlab: " << e.what() << '\n';
        return usage;
    } catch (const UsageError& e) {
        std::cerr << "nsvlab: " << e.what() << '\n';
        return usage;
    } catch (const BlowUpError& e) {
        std::cerr << "nsvlab: blow-up at t = " << e.time() << ": " << e.what() << '\n';
        return blow_up;
    } catch (const IoError& e) {
        std::cerr << "nsvlab: " << e.what() << '\n';
        return io;
    }
    return usage;
}
