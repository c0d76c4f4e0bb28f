#include "nsv/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "nsv/errors.hpp"
#include "nsv/operators.hpp"

namespace nsv {

const char* mode_name(Mode m) { return m == Mode::Spectral3d ? "spectral3d" : "shell"; }

const char* status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "ok";
        case RunStatus::Failed: return "failed";
        case RunStatus::Unresolved: return "unresolved";
    }
    return "?";
}

namespace {

/// Shared sampling loop; `advance` steps once, `observe` builds the current sample.
template <typename Advance, typename Observe, typename Enstrophy>
void drive(RunResult& r, long steps, const RunSettings& settings, double kappa_bar,
           double reference_enstrophy, Advance&& advance, Observe&& observe,
           Enstrophy&& enstrophy, const SampleHook& hook) {
    const int stride = settings.stats.stride;
    const double cap = settings.enstrophy_cap * reference_enstrophy;
    double norm2_sum = 0.0;
    std::size_t seen = 0;
    bool burn_in_known = !settings.auto_burn_in;
    try {
        for (long i = 1; i <= steps; ++i) {
            r.end_time = advance();
            if (i % stride != 0) continue;
            const double ens = enstrophy();
            if (!(ens <= cap)) {
                r.status = RunStatus::Unresolved;
                r.message = "enstrophy cap exceeded at t=" + std::to_string(r.end_time);
                return;
            }
            const Sample s = observe();
            norm2_sum += s.norm2;
            ++seen;
            if (!burn_in_known && kappa_bar > 0.0 && norm2_sum > 0.0) {
                const double tl = 1.0 / (std::sqrt(norm2_sum / static_cast<double>(seen)) * kappa_bar);
                if (s.time >= 10.0 * tl) {
                    burn_in_known = true;
                    r.burn_in = s.time;
                    r.acc.set_burn_in(s.time);
                }
            }
            if (r.acc.accumulate(s) && hook) hook(s.time, r.acc);
        }
    } catch (const BlowUpError& e) {
        r.status = RunStatus::Failed;
        r.message = e.what();
        r.end_time = e.time();
    }
}

void finish(RunResult& r, double kappa_bar) {
    const Block& t = r.acc.total();
    if (t.count > 0 && t.norm2 > 0.0 && kappa_bar > 0.0) {
        r.turnover = 1.0 / (std::sqrt(t.norm2 / static_cast<double>(t.count)) * kappa_bar);
    }
}

long step_count(double t_total, double dt) {
    if (!(t_total >= 0.0)) throw UsageError("t_total must be nonnegative");
    return std::lround(t_total / dt);
}

}  // namespace

RunResult run_spectral(const SimParams& p, TrajectoryState init, const RunSettings& settings,
                       double forcing_top, const SampleHook& hook) {
    p.validate();
    require_same_lattice(init.velocity, p.forcing);
    const AccumulatorLayout layout = layout_for(p.forcing.lattice());
    StatsConfig cfg = settings.stats;
    if (settings.auto_burn_in) cfg.burn_in = std::numeric_limits<double>::infinity();
    RunResult r(ObservableAccumulator(layout, measure_info(p, forcing_top), cfg));
    r.burn_in = settings.auto_burn_in ? std::numeric_limits<double>::infinity() : cfg.burn_in;
    r.end_time = init.time;

    const VoigtStepper stepper(p);
    TrajectoryState s = std::move(init);
    s.diag = diagnose(s.velocity, p.alpha);
    double reference = s.diag.enstrophy;
    if (p.nu > 0.0) reference = std::max(reference, p.forcing.norm2() / (p.nu * p.nu * p.forcing.lattice().lambda1()));
    SampleWorkspace ws;
    drive(
        r, step_count(p.t_total, p.dt), settings, forcing_top, reference,
        [&] {
            stepper.step_in_place(s);
            return s.time;
        },
        [&] { return make_sample(s, p, layout, ws); }, [&] { return s.diag.enstrophy; }, hook);
    finish(r, forcing_top);
    r.final_3d = std::move(s);
    return r;
}

RunResult run_shell(const ShellParams& p, ShellState init, const RunSettings& settings,
                    const SampleHook& hook) {
    p.validate();
    if (init.u.size() != static_cast<std::size_t>(p.shells)) throw UsageError("initial state has the wrong shell count");
    const AccumulatorLayout layout = layout_for(p);
    const MeasureInfo info = measure_info(p);
    StatsConfig cfg = settings.stats;
    if (settings.auto_burn_in) cfg.burn_in = std::numeric_limits<double>::infinity();
    RunResult r(ObservableAccumulator(layout, info, cfg));
    r.burn_in = settings.auto_burn_in ? std::numeric_limits<double>::infinity() : cfg.burn_in;
    r.end_time = init.time;

    const SabraStepper stepper(p);
    ShellState s = std::move(init);
    double reference = shell_enstrophy(s, p);
    if (p.nu > 0.0) reference = std::max(reference, info.forcing_norm2 / (p.nu * p.nu * info.lambda1));
    SampleWorkspace ws;
    drive(
        r, step_count(p.t_total, p.dt), settings, info.forcing_top, reference,
        [&] {
            stepper.step_in_place(s);
            return s.time;
        },
        [&] { return make_sample(s, p, layout, ws); }, [&] { return shell_enstrophy(s, p); }, hook);
    finish(r, info.forcing_top);
    r.final_shell = std::move(s);
    return r;
}

// ---------------------------------------------------------------------------

void SweepPlan::validate() const {
    if (alphas.empty()) throw UsageError("sweep needs at least one alpha");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] >= 0.0)) throw UsageError("sweep alphas must be nonnegative");
        if (i > 0 && !(alphas[i] < alphas[i - 1])) throw UsageError("sweep alphas must be strictly decreasing");
    }
    if (alphas.back() != 0.0) throw UsageError("sweep alphas must end at 0");
    if (seeds.empty()) throw UsageError("sweep needs at least one seed");
    const double top = mode == Mode::Shell ? measure_info(shell).forcing_top : forcing_top;
    for (const auto& b : bands) {
        if (!(b.lo > top)) throw UsageError("sweep bands must lie above the forcing band");
    }
    if (mode == Mode::Shell) {
        shell.validate();
    } else {
        spectral.validate();
    }
}

SweepReport run_alpha_sweep(const SweepPlan& plan) {
    plan.validate();
    const std::size_t na = plan.alphas.size();
    const std::size_t ns = plan.seeds.size();
    const std::size_t cells = na * ns;
    std::vector<std::optional<RunResult>> results(cells);

    auto run_cell = [&](std::size_t c) {
        const double alpha = plan.alphas[c / ns];
        const std::uint64_t seed = plan.seeds[c % ns];
        if (plan.mode == Mode::Shell) {
            ShellParams p = plan.shell;
            p.alpha = alpha;
            results[c].emplace(run_shell(p, shell_initial(p, seed, plan.init_amplitude), plan.settings));
        } else {
            SimParams p = plan.spectral;
            p.alpha = alpha;
            auto v = random_field(p.forcing.lattice_ptr(), seed, plan.init_energy, plan.init_peak);
            results[c].emplace(run_spectral(p, TrajectoryState::at(0.0, std::move(v), alpha),
                                            plan.settings, plan.forcing_top));
        }
    };

    unsigned workers = plan.workers ? plan.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, cells));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t c = next++; c < cells; c = next++) run_cell(c);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SweepReport report;
    report.bands = plan.bands;
    std::vector<std::optional<ObservableAccumulator>> pooled(na);
    for (std::size_t c = 0; c < cells; ++c) {
        const RunResult& r = *results[c];
        SweepCell cell;
        cell.alpha = plan.alphas[c / ns];
        cell.seed = plan.seeds[c % ns];
        cell.status = r.status;
        cell.message = r.message;
        cell.samples = r.acc.samples();
        report.cells.push_back(cell);
    }
    for (std::size_t a = 0; a < na; ++a) {
        AlphaRow row;
        row.alpha = plan.alphas[a];
        for (std::size_t s = 0; s < ns; ++s) {
            const RunResult& r = *results[a * ns + s];
            if (r.status != RunStatus::Ok) {
                if (row.status == RunStatus::Ok || r.status == RunStatus::Failed) row.status = r.status;
                continue;
            }
            ++row.runs_ok;
            if (!pooled[a]) {
                pooled[a].emplace(r.acc);
            } else {
                pooled[a]->merge(r.acc);
            }
        }
        if (row.status == RunStatus::Ok && pooled[a] && pooled[a]->sufficient()) {
            const auto& acc = *pooled[a];
            row.kinetic = estimate(acc, [](const Block& b) { return b.count ? b.norm2 / b.count : 0.0; });
            for (const auto& band : plan.bands) {
                const auto& layout = acc.layout();
                double lo = band.lo, hi = band.hi;
                row.net_transfer.push_back(estimate(acc, [&](const Block& b) {
                    double s = 0.0;
                    for (std::size_t g = 0; g < layout.group_kappa.size(); ++g) {
                        if (lo <= layout.group_kappa[g] && layout.group_kappa[g] < hi) s -= b.group_transfer[g];
                    }
                    return b.count ? s / b.count : 0.0;
                }));
            }
        } else if (row.status == RunStatus::Ok) {
            row.status = RunStatus::Unresolved;
        }
        report.rows.push_back(row);
    }

    // Baseline: alpha = 0 if resolved, otherwise the smallest resolved alpha.
    for (std::size_t a = na; a-- > 0;) {
        if (report.rows[a].status == RunStatus::Ok) {
            report.has_baseline = true;
            report.baseline_alpha = report.rows[a].alpha;
            report.baseline_substituted = a != na - 1;
            const AlphaRow& base = report.rows[a];
            for (auto& row : report.rows) {
                if (row.status != RunStatus::Ok) continue;
                row.ke_delta.mean = std::abs(row.kinetic.mean - base.kinetic.mean);
                row.ke_delta.stderr_ = &row == &base ? 0.0 : std::hypot(row.kinetic.stderr_, base.kinetic.stderr_);
                row.nt_delta.clear();
                for (std::size_t b = 0; b < plan.bands.size(); ++b) {
                    Estimate d;
                    d.mean = std::abs(row.net_transfer[b].mean - base.net_transfer[b].mean);
                    d.stderr_ = &row == &base ? 0.0
                                              : std::hypot(row.net_transfer[b].stderr_, base.net_transfer[b].stderr_);
                    row.nt_delta.push_back(d);
                }
            }
            break;
        }
    }
    return report;
}

TrendCheck delta_trend(const SweepReport& report, int band) {
    TrendCheck t;
    if (!report.has_baseline) return t;
    std::vector<const AlphaRow*> rows;
    for (const auto& r : report.rows) {
        if (r.status == RunStatus::Ok && r.alpha > report.baseline_alpha) rows.push_back(&r);
    }
    if (rows.size() < 2) return t;
    auto delta = [band](const AlphaRow& r) { return band < 0 ? r.ke_delta : r.nt_delta.at(band); };
    const Estimate large = delta(*rows.front());
    const Estimate small = delta(*rows.back());
    t.available = true;
    t.delta_large = large.mean;
    t.delta_small = small.mean;
    t.sigma = std::hypot(large.stderr_, small.stderr_);
    t.shrinks = large.mean - small.mean > 2.0 * t.sigma;
    t.monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const Estimate a = delta(*rows[i - 1]);
        const Estimate b = delta(*rows[i]);
        if (b.mean - a.mean > 2.0 * std::hypot(a.stderr_, b.stderr_)) t.monotone = false;
    }
    return t;
}

// ---------------------------------------------------------------------------

HelmholtzConstant helmholtz_constant(double eta) {
    if (!(eta > 1.75)) throw UsageError("helmholtz_constant: the series diverges for eta <= 7/4");
    const double p = 2.0 * (eta - 1.0);  // terms are |k|^{-2p}
    const double q = 2.0 * p - 3.0;      // tail integral exponent
    auto estimate_at = [&](int radius) {
        const long r2 = static_cast<long>(radius) * radius;
        double sum = 0.0;
        long count = 0;
        // One octant with multiplicities; every nonzero k carries two polarizations.
        for (int x = 0; x <= radius; ++x) {
            for (int y = 0; y <= radius; ++y) {
                const long xy = static_cast<long>(x) * x + static_cast<long>(y) * y;
                if (xy > r2) break;
                for (int z = 0; z <= radius; ++z) {
                    const long k2 = xy + static_cast<long>(z) * z;
                    if (k2 > r2) break;
                    if (k2 == 0) continue;
                    const int mult = (x ? 2 : 1) * (y ? 2 : 1) * (z ? 2 : 1);
                    sum += mult * std::pow(static_cast<double>(k2), -p);
                    count += mult;
                }
            }
        }
        // Points inside the ball stand for a ball of volume count + 1 (the origin).
        const double r_eff = std::cbrt(3.0 * static_cast<double>(count + 1) / (4.0 * std::numbers::pi));
        const double tail = 4.0 * std::numbers::pi * std::pow(r_eff, -q) / q;
        return 2.0 * (sum + tail);
    };
    HelmholtzConstant c;
    int radius = 8;
    double prev = estimate_at(radius);
    for (radius = 16; radius <= 512; radius *= 2) {
        const double cur = estimate_at(radius);
        c.radius = radius;
        c.value = std::sqrt(cur);
        if (std::abs(std::sqrt(cur) - std::sqrt(prev)) <= 1e-6 * std::sqrt(cur)) {
            c.converged = true;
            break;
        }
        prev = cur;
    }
    return c;
}

DeviationReport helmholtz_deviation_check(const SpectralField& phi, const std::vector<double>& alphas,
                                          double eta) {
    DeviationReport rep;
    rep.eta = eta;
    rep.constant = helmholtz_constant(eta);
    const double lambda1 = phi.lattice().lambda1();
    const double a_eta = stokes_apply(phi, eta).norm();
    std::vector<double> lx, ly;
    for (double a : alphas) {
        if (!(a >= 0.0)) throw UsageError("helmholtz_deviation_check: alpha must be nonnegative");
        DeviationRow row;
        row.alpha = a;
        row.deviation = (helmholtz_inverse(phi, a) - phi).norm();
        row.bound = rep.constant.value * a * a * std::pow(lambda1, 1.0 - eta) * a_eta;
        row.ratio = row.bound > 0.0 ? row.deviation / row.bound : 0.0;
        if (a > 0.0 && row.deviation > 0.0) {
            lx.push_back(std::log(a));
            ly.push_back(std::log(row.deviation));
        }
        rep.rows.push_back(row);
    }
    if (lx.size() >= 2) {
        const double n = static_cast<double>(lx.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= n;
        my /= n;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        rep.slope = sxy / sxx;
    }
    return rep;
}

}  // namespace nsv
