#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsv/errors.hpp"
#include "nsv/operators.hpp"
#include "nsv/statistics.hpp"

using namespace nsv;
using cplx = std::complex<double>;

namespace {

// Hand-built samples on a 6-shell layout.
struct Synthetic {
    ShellParams p;
    AccumulatorLayout layout;
    std::vector<double> groups, transfer, spectrum;
    std::vector<cplx> field;

    Synthetic() {
        p.shells = 6;
        p.nu = 0.5;
        p.forcing = shell_forcing(6, 1, 1.0);
        layout = layout_for(p);
        groups.assign(6, 0.0);
        transfer.assign(6, 0.0);
        spectrum.assign(6, 0.0);
        field.assign(6, cplx{});
    }

    Sample sample(double t, double x) {
        for (std::size_t i = 0; i < 6; ++i) {
            groups[i] = x * (i + 1);
            transfer[i] = -x * 0.25 * (i + 1);
            spectrum[i] = 0.5 * x * (i + 1);
            field[i] = cplx(x, -x);
        }
        Sample s;
        s.time = t;
        s.norm2 = x;
        s.enstrophy = 2.0 * x;
        s.palinstrophy = 4.0 * x;
        s.injection = 0.5 * x;
        s.group_enstrophy = groups;
        s.group_transfer = transfer;
        s.spectrum = spectrum;
        s.velocity = field;
        s.nonlinear = field;
        return s;
    }

    ObservableAccumulator make(StatsConfig c = {}) const { return {layout, measure_info(p), c}; }
};

bool blocks_equal(const Block& a, const Block& b) {
    return a.count == b.count && a.norm2 == b.norm2 && a.enstrophy == b.enstrophy &&
           a.palinstrophy == b.palinstrophy && a.injection == b.injection && a.group_enstrophy == b.group_enstrophy &&
           a.group_transfer == b.group_transfer && a.spectrum == b.spectrum && a.hist_count == b.hist_count &&
           a.hist_sum == b.hist_sum && a.t_first == b.t_first && a.t_last == b.t_last;
}

}  // namespace

TEST_CASE("merging is exact for dyadic data") {
    Synthetic syn;
    StatsConfig cfg;
    cfg.block_size = 4;
    cfg.hist_edges = {0.0, 1.0, 8.0};
    auto whole = syn.make(cfg), first = syn.make(cfg), second = syn.make(cfg);
    for (int i = 0; i < 24; ++i) {
        const double x = std::ldexp(1.0 + (i % 5), -(i % 3));
        whole.accumulate(syn.sample(i, x));
        (i < 12 ? first : second).accumulate(syn.sample(i, x));
    }
    first.merge(second);
    CHECK(blocks_equal(first.total(), whole.total()));
    REQUIRE(first.blocks().size() == whole.blocks().size());
    for (std::size_t b = 0; b < whole.blocks().size(); ++b) CHECK(blocks_equal(first.blocks()[b], whole.blocks()[b]));
    CHECK(first.mean_velocity() == whole.mean_velocity());

    Synthetic other;
    other.p.shells = 7;
    other.p.forcing = shell_forcing(7, 1, 1.0);
    other.layout = layout_for(other.p);
    auto mismatched = other.make(cfg);
    CHECK_THROWS_AS(first.merge(mismatched), UsageError);
}

TEST_CASE("constant and alternating trajectories") {
    Synthetic syn;
    StatsConfig cfg;
    cfg.block_size = 2;
    auto constant = syn.make(cfg), alternating = syn.make(cfg);
    for (int i = 0; i < 40; ++i) {
        constant.accumulate(syn.sample(i, 0.75));
        alternating.accumulate(syn.sample(i, i % 2 == 0 ? 1.0 : 3.0));
    }
    auto mean_norm2 = [](const Block& b) { return b.norm2 / b.count; };
    const Estimate c = estimate(constant, mean_norm2);
    CHECK(c.mean == 0.75);
    CHECK(c.stderr_ == 0.0);
    const Estimate a = estimate(alternating, mean_norm2);
    CHECK(a.mean == 2.0);
    // Every batch holds whole periods, so the batch means coincide.
    CHECK(a.stderr_ == 0.0);
    CHECK(alternating.batches().size() == 10u);

    const auto rows = banded_energy_balance(constant);
    REQUIRE(rows.size() == 1u);
    CHECK(rows[0].residual == doctest::Approx(0.5 * 1.5 - 0.375));
}

TEST_CASE("burn-in, sufficiency and layout checks") {
    Synthetic syn;
    StatsConfig cfg;
    cfg.burn_in = 5.0;
    cfg.min_samples = 10;
    auto acc = syn.make(cfg);
    for (int i = 0; i < 12; ++i) acc.accumulate(syn.sample(i, 1.0));
    CHECK(acc.skipped() == 5u);
    CHECK(acc.samples() == 7u);
    CHECK_FALSE(acc.sufficient());
    CHECK_THROWS_AS(acc.require_sufficient("test"), UsageError);
    CHECK_THROWS_AS(mean_net_transfer(acc, 1.0), UsageError);
    acc.set_burn_in(0.0);
    for (int i = 12; i < 15; ++i) acc.accumulate(syn.sample(i, 1.0));
    CHECK(acc.sufficient());

    Sample bad = syn.sample(20, 1.0);
    std::vector<double> short_groups(3, 0.0);
    bad.group_enstrophy = short_groups;
    CHECK_THROWS_AS(acc.accumulate(bad), UsageError);
    Sample nan = syn.sample(21, NAN);
    CHECK_THROWS_AS(acc.accumulate(nan), UsageError);
    StatsConfig unsorted;
    unsorted.hist_edges = {1.0, 0.5};
    CHECK_THROWS_AS(syn.make(unsorted), UsageError);
}

TEST_CASE("two routes to the net transfer agree") {
    const auto lat = make_lattice(16);
    const SpectralField v = random_field(lat, 12, 1.0, 2.5);
    for (double kappa : {1.5, 2.5, 3.7, 5.2}) {
        const TransferRates r = transfer_rates(v, kappa);
        CHECK(r.consistent);
        CHECK(r.net == doctest::Approx(r.net_direct).epsilon(1e-10));
        CHECK(std::abs(r.forward) > 0.0);
    }
    CHECK_THROWS_AS(transfer_rates(v, 1.0), UsageError);
    CHECK_THROWS_AS(transfer_rates(v, 100.0), UsageError);

    // Group sums in a sample reproduce the same number.
    SimParams p;
    p.nu = 0.1;
    p.forcing = random_band_field(lat, 1, 1.0, 2.0, 0.1);
    const auto layout = layout_for(*lat);
    SampleWorkspace ws;
    const Sample s = make_sample(TrajectoryState::at(0.0, v, 0.0), p, layout, ws);
    for (double kappa : {1.5, 2.5, 3.7}) {
        const double from_groups = net_transfer_at(layout, s.group_transfer, kappa);
        CHECK(from_groups == doctest::Approx(transfer_rates(v, kappa).net_direct).epsilon(1e-10));
    }
    double total = 0.0;
    for (double x : s.group_transfer) total += x;
    CHECK(std::abs(total) < 1e-12);
    CHECK(s.enstrophy == doctest::Approx(h1_norm2(v)));
    CHECK(s.injection == doctest::Approx(inner(p.forcing, v)));
}

TEST_CASE("steady single mode") {
    const auto lat = make_lattice(16);
    for (std::array<int, 3> k : {std::array<int, 3>{1, 0, 0}, std::array<int, 3>{2, 0, 0}}) {
        const SpectralField u = single_mode(lat, k, 0.5);
        SimParams p;
        p.nu = 0.3;
        p.alpha = 0.2;
        p.forcing = p.nu * stokes_apply(u, 1.0);
        const auto layout = layout_for(*lat);
        StatsConfig cfg;
        cfg.hist_edges = {0.0, 0.1, 1.0};
        ObservableAccumulator acc(layout, measure_info(p, 2.0), cfg);
        SampleWorkspace ws;
        for (int i = 0; i < 30; ++i) acc.accumulate(make_sample(TrajectoryState::at(i, u, p.alpha), p, layout, ws));

        CHECK(reynolds_residual(acc, p) < 1e-14);
        const auto report = summarize(acc, {ShellBand(3.0, 6.0)}, reynolds_residual(acc, p));
        CHECK(report.global_residual < 1e-14);
        CHECK(report.bands[0].dissipation.mean == 0.0);
        CHECK(report.bands[0].residual == 0.0);
        CHECK_FALSE(report.gevrey.conclusive);
        REQUIRE(report.balance.size() == 3u);
        CHECK(report.balance[2].samples == 30u);
        CHECK(std::abs(report.balance[2].residual) < 1e-15);
        CHECK(report.balance[1].undersampled);

        const double lam = k[0] * k[0];
        const double expected = (1.0 + 0.04 * lam) / ((1.0 + 0.04) * lam * lam);
        CHECK(report.support.max_ratio == doctest::Approx(expected).epsilon(1e-12));
        if (lam == 1.0) CHECK(report.support.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
        if (lam == 4.0) CHECK(report.support.max_ratio < 1.0);
    }
}

TEST_CASE("support ratio scales with the box") {
    MeasureInfo info;
    info.nu = 0.1;
    info.alpha = 0.5;
    info.lambda1 = 0.25;
    info.forcing_norm2 = 4.0;
    // Lowest-mode steady state: f = nu lambda1 u, X = |u|^2 (1 + alpha^2 lambda1).
    const double u2 = info.forcing_norm2 / (info.nu * info.nu * info.lambda1 * info.lambda1);
    CHECK(support_ratio(u2 * (1.0 + 0.25 * info.lambda1), info) == doctest::Approx(1.0));
    info.nu = 0.0;
    CHECK_THROWS_AS(support_ratio(1.0, info), UsageError);
    info.nu = 0.1;
    info.forcing_norm2 = 0.0;
    CHECK_THROWS_AS(support_ratio(1.0, info), UsageError);
}

TEST_CASE("budget band must avoid the forcing") {
    Synthetic syn;
    auto acc = syn.make();
    for (int i = 0; i < 20; ++i) acc.accumulate(syn.sample(i, 1.0));
    CHECK_THROWS_AS(budget_identity_check(acc, syn.p.k(1), 10.0), UsageError);
    CHECK_THROWS_AS(budget_identity_check(acc, 2.0, 1.0), UsageError);
    const BudgetRow row = budget_identity_check(acc, syn.p.k(2), syn.p.k(4));
    // Shells 2..3: enstrophy 2 + 3, transfer -(0.25)(2 + 3).
    CHECK(row.dissipation.mean == doctest::Approx(0.5 * 5.0));
    CHECK(row.net_transfer.mean == doctest::Approx(1.25));
    CHECK(row.residual == doctest::Approx(1.25 / 1.0));
    CHECK(mean_dissipation_above(acc, syn.p.k(5)).mean == doctest::Approx(0.5 * 11.0));
    CHECK(mean_net_transfer(acc, syn.p.k(3)).mean == doctest::Approx(-0.25 * 3.0));
}

TEST_CASE("tail fit recovers an exponential decay rate") {
    std::vector<double> e(30, 0.0);
    for (std::size_t n = 1; n < 30; ++n) e[n] = std::exp(-2.0 * 0.9 * n) * (n < 3 ? 10.0 : 1.0);
    const GevreyFit fit = gevrey_tail_fit(e, 29, 10);
    REQUIRE(fit.conclusive);
    CHECK(fit.tau == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(fit.r2 == doctest::Approx(1.0));
    CHECK(fit.first == 20u);
    CHECK(fit.last == 29u);

    std::vector<double> shallow(30, 0.0);
    for (std::size_t n = 1; n < 30; ++n) shallow[n] = std::exp(-0.1 * n);
    CHECK_FALSE(gevrey_tail_fit(shallow, 29, 10).conclusive);
}

TEST_CASE("stronger viscosity steepens the resolved tail") {
    const auto lat = make_lattice(32);
    double previous = 0.0;
    for (double nu : {0.4, 0.6, 0.8}) {
        SimParams p;
        p.nu = nu;
        p.alpha = 0.1;
        p.dt = 0.02;
        p.forcing = random_band_field(lat, 7, 1.0, 2.0, 0.5);
        VoigtStepper stepper(p);
        auto s = TrajectoryState::at(0.0, random_field(lat, 3, 0.5, 2.0), p.alpha);
        const auto layout = layout_for(*lat);
        StatsConfig cfg;
        cfg.burn_in = 2.0;
        ObservableAccumulator acc(layout, measure_info(p, 2.0), cfg);
        SampleWorkspace ws;
        for (int i = 0; i < 200; ++i) {
            stepper.step_in_place(s);
            if (i % 5 == 4) acc.accumulate(make_sample(s, p, layout, ws));
        }
        const auto report = summarize(acc, {}, 0.0);
        MESSAGE("nu ", nu, " tau ", report.gevrey.tau, " r2 ", report.gevrey.r2);
        REQUIRE(report.gevrey.conclusive);
        CHECK(report.gevrey.tau > previous);
        previous = report.gevrey.tau;
    }
}

TEST_CASE("shell samples") {
    ShellParams p;
    p.shells = 10;
    p.nu = 0.01;
    p.alpha = 0.1;
    p.forcing = shell_forcing(10, 2, 0.1);
    const ShellState s = shell_initial(p, 1, 0.2);
    const auto layout = layout_for(p);
    SampleWorkspace ws;
    const Sample x = make_sample(s, p, layout, ws);
    CHECK(x.norm2 == doctest::Approx(shell_norm2(s)));
    CHECK(x.enstrophy == doctest::Approx(shell_enstrophy(s, p)));
    CHECK(x.injection == doctest::Approx(shell_injection(s, p)));
    const auto t = shell_transfer(s, p);
    // Both record what each shell loses to the cascade.
    for (int n = 0; n < 10; ++n) CHECK(x.group_transfer[n] == doctest::Approx(t[n]));
    CHECK(net_transfer_at(layout, x.group_transfer, p.k(4) * 1.01) == doctest::Approx(shell_flux(s, p, 4)));
    const auto nl = sabra_nonlinear(s.u, p);
    for (int n = 0; n < 10; ++n) CHECK(std::abs(x.nonlinear[n] + nl[n]) < 1e-15);
}
