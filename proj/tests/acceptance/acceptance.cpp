// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance 2 3 8      run a subset
//
// Long runs are shared between criteria (5/8/9 use one shell run, 6/7/8 one 32^3 run).

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "nsv/operators.hpp"
#include "nsv/statistics.hpp"
#include "nsv/sweep.hpp"

using namespace nsv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Shared runs

struct ShellLongRun {
    ShellParams p;
    std::optional<RunResult> result;
    BudgetReport report;
    std::vector<double> window_residuals;  ///< Reynolds residual over nested windows W, 2W, 4W, 8W
};

const ShellLongRun& shell_long_run() {
    static std::optional<ShellLongRun> cache;
    if (cache) return *cache;
    ShellLongRun run;
    run.p.shells = 22;
    run.p.nu = 1e-6;
    run.p.dt = 2e-3;
    run.p.t_total = 1e5;
    run.p.forcing = shell_forcing(22, 2, 0.005);
    RunSettings s;
    s.auto_burn_in = true;
    s.stats.stride = 10;
    s.stats.block_size = 256;
    const ShellParams& p = run.p;
    int next = 0;
    auto hook = [&](double t, const ObservableAccumulator& acc) {
        const double t0 = acc.total().t_first;
        const double w = (p.t_total - t0) / 8.0;
        if (next < 4 && t >= t0 + w * (1 << next) - 0.5 * p.dt * s.stats.stride) {
            run.window_residuals.push_back(reynolds_residual(acc, p));
            ++next;
        }
    };
    run.result.emplace(run_shell(p, shell_initial(p, 1, 0.1), s, hook));
    if (run.result->status == RunStatus::Ok) run.report = summarize(run.result->acc, {}, reynolds_residual(run.result->acc, p));
    cache = std::move(run);
    return *cache;
}

struct SpectralRun {
    SimParams p;
    std::optional<RunResult> result;
    BudgetReport report;
};

const SpectralRun& spectral_32_run() {
    static std::optional<SpectralRun> cache;
    if (cache) return *cache;
    SpectralRun run;
    const auto lat = make_lattice(32);
    run.p.nu = 0.02;
    run.p.alpha = 0.2;
    run.p.dt = 0.01;
    run.p.t_total = 250.0;
    run.p.forcing = random_band_field(lat, 7, 1.0, 2.0, 0.5);
    RunSettings s;
    s.auto_burn_in = false;
    s.stats.burn_in = 10.0;
    s.stats.stride = 5;
    s.stats.block_size = 64;
    run.result.emplace(run_spectral(run.p, TrajectoryState::at(0.0, random_field(lat, 3, 0.5, 2.0), run.p.alpha), s, 2.0));
    if (run.result->status == RunStatus::Ok) {
        run.report = summarize(run.result->acc, {ShellBand(3.0, 6.0), ShellBand(6.0, 10.0)},
                               reynolds_residual(run.result->acc, run.p));
    }
    cache = std::move(run);
    return *cache;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome inviscid_conservation() {
    const auto lat = make_lattice(32);
    SimParams p;
    p.alpha = 0.1;
    p.dt = 5e-3;
    p.forcing = SpectralField(lat);
    VoigtStepper stepper(p);
    auto s = TrajectoryState::at(0.0, random_field(lat, 1, 0.5, 2.0), p.alpha);
    const double e0 = s.diag.alpha_energy;
    for (int i = 0; i < 10000; ++i) stepper.step_in_place(s);
    const double drift3d = std::abs(s.diag.alpha_energy - e0) / e0;

    ShellParams sp;
    sp.shells = 22;
    sp.alpha = 0.1;
    sp.nu = 0.0;
    sp.dt = 1e-2;
    sp.forcing.assign(22, {});
    SabraStepper shell(sp);
    // Energetic enough to populate shells far beyond 1/alpha within the run.
    ShellState u = shell_initial(sp, 1, 1.0);
    const double s0 = shell_alpha_energy(u, sp);
    for (int i = 0; i < 10000; ++i) shell.step_in_place(u);
    const double drift_shell = std::abs(shell_alpha_energy(u, sp) - s0) / s0;
    return {drift3d <= 1e-8 && drift_shell <= 1e-8,
            fmt("relative drift over 1e4 steps: 32^3 %.2e, shells %.2e (limit 1e-8)", drift3d, drift_shell)};
}

Outcome trilinear_identities() {
    double worst_orth = 0.0, worst_anti = 0.0;
    for (int n : {8, 16}) {
        const auto lat = make_lattice(n);
        for (int t = 0; t < 100; ++t) {
            const std::uint64_t seed = 1000 * n + 3 * t;
            const SpectralField u = random_field(lat, seed, 0.5, 1.5);
            const SpectralField v = random_field(lat, seed + 1, 0.5, 2.0);
            const SpectralField w = random_field(lat, seed + 2, 0.5, 2.5);
            const double scale = u.norm() * h1_norm2(v);
            worst_orth = std::max(worst_orth, std::abs(trilinear_b(u, v, v)) / scale);
            const double a = trilinear_b(u, v, w);
            const double b = trilinear_b(u, w, v);
            worst_anti = std::max(worst_anti, std::abs(a + b) / std::max(std::abs(a), std::abs(b)));
        }
    }
    return {worst_orth <= 1e-12 && worst_anti <= 1e-12,
            fmt("max |b(u,v,v)|/(|u| ||v||^2) = %.2e, max antisymmetry defect %.2e relative (limit 1e-12)",
                worst_orth, worst_anti)};
}

// Direct evaluation of P[(u.grad) v] on the dealiased modes by summing all triads.
SpectralField convolution(const SpectralField& u, const SpectralField& v) {
    const auto& lat = u.lattice();
    auto coeff = [&](const SpectralField& f, int kx, int ky, int kz) -> Vec3c {
        const int lim = lat.max_dealiased_component();
        if (std::abs(kx) > lim || std::abs(ky) > lim || std::abs(kz) > lim) return {};
        if (kx == 0 && ky == 0 && kz == 0) return {};
        if (kz >= 0) return f.at(lat.index(kx, ky, kz));
        Vec3c c = f.at(lat.index(-kx, -ky, -kz));
        for (auto& x : c) x = std::conj(x);
        return c;
    };
    const int lim = lat.max_dealiased_component();
    const double unit = lat.kappa_unit();
    SpectralField out(u.lattice_ptr());
    for (std::size_t idx : lat.dealiased_indices()) {
        if (!lat.retained(idx)) continue;
        const auto k = lat.wavevector(idx);
        Vec3c w{};
        for (int px = -lim; px <= lim; ++px) {
            for (int py = -lim; py <= lim; ++py) {
                for (int pz = -lim; pz <= lim; ++pz) {
                    const Vec3c up = coeff(u, px, py, pz);
                    const int q[3] = {k[0] - px, k[1] - py, k[2] - pz};
                    const Vec3c vq = coeff(v, q[0], q[1], q[2]);
                    Complex dot = 0.0;
                    for (int c = 0; c < 3; ++c) dot += up[c] * Complex(0.0, unit * q[c]);
                    for (int c = 0; c < 3; ++c) w[c] += dot * vq[c];
                }
            }
        }
        const auto kp = lat.physical(idx);
        const double k2 = kp[0] * kp[0] + kp[1] * kp[1] + kp[2] * kp[2];
        Complex kw = 0.0;
        for (int c = 0; c < 3; ++c) kw += kp[c] * w[c];
        for (int c = 0; c < 3; ++c) w[c] -= kw * kp[c] / k2;
        out.set(idx, w);
    }
    return out;
}

Outcome convolution_oracle() {
    const auto lat = make_lattice(8);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const SpectralField u = random_field(lat, 500 + 2 * t, 0.5, 1.5);
        const SpectralField v = random_field(lat, 501 + 2 * t, 0.5, 1.5);
        const SpectralField direct = convolution(u, v);
        const SpectralField fast = bilinear_B(u, v);
        double scale = 0.0;
        for (const auto& c : direct.data()) scale = std::max(scale, std::abs(c));
        worst = std::max(worst, max_abs_diff(fast, direct) / scale);
    }
    return {worst <= 1e-10, fmt("max relative difference over 20 pairs at N=8: %.2e (limit 1e-10)", worst)};
}

Outcome helmholtz_lemma() {
    const auto lat = make_lattice(16);
    const std::vector<double> alphas{1e-1, 1e-2, 1e-3};
    // Contraction: every multiplier lies in (0, 1] and norms never grow.
    bool contraction = true;
    const SpectralField phi = random_band_field(lat, 11, 1.0, 3.0, 1.0);
    for (double a : alphas) {
        for (std::size_t idx = 0; idx < lat->size(); ++idx) {
            const double m = 1.0 / (1.0 + a * a * lat->eigenvalue(idx));
            if (!(m > 0.0 && m <= 1.0)) contraction = false;
        }
        const SpectralField r = random_field(lat, 12, 1.0, 4.0);
        if (helmholtz_inverse(r, a).norm() > r.norm()) contraction = false;
    }
    const DeviationReport rep = helmholtz_deviation_check(phi, alphas, 2.0);
    double worst_ratio = 0.0;
    for (const auto& row : rep.rows) worst_ratio = std::max(worst_ratio, row.ratio);
    const bool pass = contraction && std::abs(rep.slope - 2.0) <= 0.05 && worst_ratio <= 1.0 && rep.constant.converged;
    return {pass, fmt("contraction %s; slope %.4f (2 +- 0.05); max bound ratio %.3e with C = %.6f (eta = 2)",
                      contraction ? "holds" : "VIOLATED", rep.slope, worst_ratio, rep.constant.value)};
}

Outcome global_balance() {
    const auto& run = shell_long_run();
    if (run.result->status != RunStatus::Ok) return {false, "shell run " + run.result->message};
    const double turnovers = (run.result->end_time - run.result->burn_in) / run.result->turnover;
    const auto& r = run.report;
    return {r.global_residual <= 0.05,
            fmt("|nu<||u||^2> - <(f,u)>| / <(f,u)> = %.4f (limit 0.05); %.0f turnovers, %zu samples",
                r.global_residual, turnovers, r.samples)};
}

Outcome budget_closure() {
    const auto& run = spectral_32_run();
    if (run.result->status != RunStatus::Ok) return {false, "32^3 run " + run.result->message};
    bool pass = true;
    std::string d;
    for (const auto& row : run.report.bands) {
        pass = pass && row.residual <= 0.05;
        d += fmt("[%g,%g): diss %.4e net %.4e residual %.4f +- %.4f; ", row.band_lo, row.band_hi,
                 row.dissipation.mean, row.net_transfer.mean, row.residual, row.stderr_);
    }
    return {pass, d + "(limit 0.05 of total dissipation)"};
}

Outcome flux_positivity() {
    const auto& run = spectral_32_run();
    if (run.result->status != RunStatus::Ok) return {false, "32^3 run " + run.result->message};
    const auto& acc = run.result->acc;
    const auto& g = acc.layout().group_kappa;
    double worst = INFINITY, worst_kappa = 0.0;
    int checked = 0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (g[i] < 2.0) continue;  // inside the forcing band
        const double kappa = 0.5 * (g[i] + g[i + 1]);
        const Estimate e = mean_net_transfer(acc, kappa);
        const double z = e.stderr_ > 0.0 ? e.mean / e.stderr_ : (e.mean > 0.0 ? INFINITY : -INFINITY);
        ++checked;
        if (z < worst) {
            worst = z;
            worst_kappa = kappa;
        }
    }
    return {checked > 0 && worst > 3.0,
            fmt("<e_net(kappa)> > 0 at every one of %d distinct kappa above the forcing; weakest %.1f sigma at "
                "kappa = %.3f (need 3)",
                checked, worst, worst_kappa)};
}

Outcome support_bound() {
    const auto& shell = shell_long_run();
    const auto& cube = spectral_32_run();
    if (shell.result->status != RunStatus::Ok || cube.result->status != RunStatus::Ok) {
        return {false, "a shared run failed"};
    }
    const double r_shell = shell.report.support.max_ratio;
    const double r_cube = cube.report.support.max_ratio;

    // Lowest-mode steady state: u on |k|^2 = lambda_1 and f = nu A u.
    const auto lat = make_lattice(16);
    const SpectralField u = single_mode(lat, {1, 0, 0}, 0.7);
    SimParams p;
    p.nu = 0.05;
    p.alpha = 0.2;
    p.forcing = p.nu * stokes_apply(u, 1.0);
    const auto states = std::vector<TrajectoryState>{TrajectoryState::at(0.0, u, p.alpha)};
    const double steady = support_bound_check(states, p).max_ratio;

    ShellParams sp;
    sp.shells = 12;
    sp.nu = 0.01;
    sp.alpha = 3.0;
    ShellState s{0.0, std::vector<std::complex<double>>(12, std::complex<double>{})};
    s.u[0] = {0.3, 0.4};
    sp.forcing.assign(12, {});
    sp.forcing[0] = sp.nu * sp.k(1) * sp.k(1) * s.u[0];
    const MeasureInfo info = measure_info(sp);
    const double steady_shell = support_ratio(shell_norm2(s) + sp.alpha * sp.alpha * shell_enstrophy(s, sp), info);

    const bool pass = r_shell <= 1.02 && r_cube <= 1.02 && std::abs(steady - 1.0) <= 1e-12 &&
                      std::abs(steady_shell - 1.0) <= 1e-12;
    return {pass, fmt("sample max ratio: shell run %.3e, 32^3 run %.3e (limit 1.02); lowest-mode steady state "
                      "%.15f (3D), %.15f (shells)",
                      r_shell, r_cube, steady, steady_shell)};
}

Outcome reynolds_equation() {
    // Converged steady state of a low-Grashof 16^3 flow.
    const auto lat = make_lattice(16);
    SimParams p;
    p.nu = 0.5;
    p.alpha = 0.2;
    p.dt = 0.005;
    p.t_total = 80.0;
    p.forcing = random_band_field(lat, 7, 1.0, 2.0, 1.0);
    RunSettings s;
    s.auto_burn_in = false;
    s.stats.burn_in = p.t_total - 1.0;
    s.stats.stride = 10;
    const RunResult steady = run_spectral(p, TrajectoryState::at(0.0, random_field(lat, 3, 0.5, 2.0), p.alpha), s, 2.0);
    const double r_steady = steady.acc.samples() ? reynolds_residual(steady.acc, p) : INFINITY;

    const auto& shell = shell_long_run();
    const auto& w = shell.window_residuals;
    bool monotone = w.size() == 4;
    for (std::size_t i = 1; i < w.size(); ++i) monotone = monotone && w[i] < w[i - 1];
    std::string ws;
    for (double x : w) ws += fmt(" %.4f", x);
    return {r_steady <= 1e-10 && monotone,
            fmt("steady residual %.2e (limit 1e-10); chaotic shell residual over windows W,2W,4W,8W:%s (%s)",
                r_steady, ws.c_str(), monotone ? "decreasing" : "NOT decreasing")};
}

Outcome gevrey_tail() {
    const auto lat = make_lattice(64);
    SimParams p;
    p.nu = 0.08;
    p.alpha = 0.1;
    p.dt = 0.02;
    p.t_total = 60.0;
    p.forcing = random_band_field(lat, 7, 1.0, 2.0, 0.5);
    RunSettings s;
    s.auto_burn_in = false;
    s.stats.burn_in = 10.0;
    s.stats.stride = 10;
    s.stats.block_size = 8;
    const RunResult r = run_spectral(p, TrajectoryState::at(0.0, random_field(lat, 3, 0.5, 2.0), p.alpha), s, 2.0);
    if (r.status != RunStatus::Ok) return {false, "64^3 run " + r.message};
    const BudgetReport rep = summarize(r.acc, {}, 0.0);
    const auto& g = rep.gevrey;
    return {g.conclusive && g.r2 >= 0.95,
            fmt("%s fit over shells %zu..%zu: slope %.4f (tau %.4f), r^2 = %.6f (need 0.95); %zu samples",
                g.conclusive ? "conclusive" : "INCONCLUSIVE", g.first, g.last, g.slope, g.tau, g.r2, rep.samples)};
}

Outcome alpha_trend() {
    SweepPlan plan;
    plan.mode = Mode::Shell;
    plan.shell.shells = 22;
    plan.shell.nu = 1e-5;
    plan.shell.dt = 2e-3;
    plan.shell.t_total = 3e4;
    plan.shell.forcing = shell_forcing(22, 2, 0.005);
    plan.init_amplitude = 0.1;
    plan.alphas = {1e-1, 1e-2, 1e-3, 0.0};
    plan.seeds = {1, 2, 3};
    plan.bands = {ShellBand(1.5, 20.0)};
    plan.settings.auto_burn_in = true;
    plan.settings.stats.stride = 10;
    plan.settings.stats.block_size = 256;
    const SweepReport rep = run_alpha_sweep(plan);
    const TrendCheck ke = delta_trend(rep);
    const TrendCheck nt = delta_trend(rep, 0);
    bool all_ok = true;
    for (const auto& row : rep.rows) all_ok = all_ok && row.status == RunStatus::Ok;
    const bool pass = all_ok && !rep.baseline_substituted && ke.available && nt.available && ke.shrinks && nt.shrinks;
    return {pass, fmt("kinetic delta %.3e -> %.3e (2 sigma %.1e), net-transfer delta %.3e -> %.3e (2 sigma %.1e) "
                      "from alpha 0.1 to 0.001; monotone: %s/%s",
                      ke.delta_large, ke.delta_small, 2 * ke.sigma, nt.delta_large, nt.delta_small, 2 * nt.sigma,
                      ke.monotone ? "yes" : "no", nt.monotone ? "yes" : "no")};
}

Outcome two_regimes() {
    ShellParams p;
    p.shells = 22;
    p.nu = 1e-6;
    p.alpha = 1.0 / 1024.0;
    p.dt = 2e-3;
    p.t_total = 4e4;
    p.forcing = shell_forcing(22, 2, 0.005);
    RunSettings s;
    s.auto_burn_in = true;
    s.stats.stride = 10;
    s.stats.block_size = 256;
    const RunResult r = run_shell(p, shell_initial(p, 1, 0.1), s);
    if (r.status != RunStatus::Ok) return {false, "shell run " + r.message};
    std::vector<double> mean_sq(p.shells);
    const Block& t = r.acc.total();
    for (int n = 0; n < p.shells; ++n) mean_sq[n] = t.spectrum[n] / static_cast<double>(t.count);
    // spectrum bins hold |u_n|^2 / 2
    for (auto& x : mean_sq) x *= 2.0;
    const double turnovers = (r.end_time - r.burn_in) / r.turnover;
    const ShellSpectrumReport sp = shell_spectrum(mean_sq, p, turnovers);
    const SegmentFit fit = compare_segment_fits(sp.k, sp.alpha_energy, sp.inertial_first, sp.sub_alpha_last);
    const bool pass = fit.two_segments_preferred() && fit.slope_right > fit.slope_left;
    return {pass, fmt("inertial slope %.3f (shells %d-%d, k < 1/alpha = %.0f); two-segment fit over shells %d-%d: "
                      "slopes %.3f | %.3f, joint at shell %d (k = %.0f); BIC two %.1f vs one %.1f",
                      sp.inertial_slope, sp.inertial_first, sp.inertial_last, 1.0 / p.alpha, sp.inertial_first,
                      sp.sub_alpha_last, fit.slope_left, fit.slope_right, fit.breakpoint, p.k(fit.breakpoint),
                      fit.bic_two, fit.bic_one)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
        {1, {"inviscid alpha-energy conservation", inviscid_conservation}},
        {2, {"trilinear identities", trilinear_identities}},
        {3, {"convolution oracle", convolution_oracle}},
        {4, {"Helmholtz lemma", helmholtz_lemma}},
        {5, {"global energy balance", global_balance}},
        {6, {"band budget closure", budget_closure}},
        {7, {"flux positivity", flux_positivity}},
        {8, {"support bound", support_bound}},
        {9, {"Reynolds equation", reynolds_equation}},
        {10, {"Gevrey tail", gevrey_tail}},
        {11, {"alpha -> 0 trend", alpha_trend}},
        {12, {"two-regime spectrum", two_regimes}},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int c = std::atoi(argv[i]);
        if (!criteria.count(c)) {
            std::fprintf(stderr, "usage: %s [criterion 1..12 ...]\n", argv[0]);
            return 2;
        }
        selected.insert(c);
    }
    if (selected.empty()) {
        for (const auto& [id, unused] : criteria) selected.insert(id);
    }

    int failed = 0;
    for (int id : selected) {
        const auto& [name, fn] = criteria.at(id);
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(selected.size()) - failed, selected.size());
    return failed ? 1 : 0;
}
