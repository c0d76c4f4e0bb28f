#include "nsv/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsv/errors.hpp"
#include "nsv/operators.hpp"

namespace nsv {

namespace {

void add_into(std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

/// Sorted distinct |k|^2 over dealiased modes.
std::vector<int> dealiased_k2(const WaveLattice& lat) {
    std::vector<int> k2;
    for (std::size_t idx : lat.dealiased_indices()) {
        if (lat.retained(idx)) k2.push_back(lat.integer_norm2(idx));
    }
    std::sort(k2.begin(), k2.end());
    k2.erase(std::unique(k2.begin(), k2.end()), k2.end());
    return k2;
}

template <typename Stat>
Estimate estimate_from(const Block& total, const std::vector<Block>& parts, Stat&& stat) {
    Estimate e;
    e.mean = stat(total);
    if (parts.size() < 2) return e;
    double m = 0.0;
    std::vector<double> values;
    for (const auto& b : parts) values.push_back(stat(b));
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    const double nb = static_cast<double>(values.size());
    e.stderr_ = std::sqrt(ss / (nb * (nb - 1.0)));
    return e;
}

double mean_of(double sum, const Block& b) {
    return b.count ? sum / static_cast<double>(b.count) : 0.0;
}

double group_sum(const AccumulatorLayout& layout, const std::vector<double>& values, double lo,
                 double hi) {
    double s = 0.0;
    for (std::size_t g = 0; g < layout.group_kappa.size(); ++g) {
        const double k = layout.group_kappa[g];
        if (lo <= k && k < hi) s += values[g];
    }
    return s;
}

}  // namespace

AccumulatorLayout layout_for(const WaveLattice& lattice) {
    AccumulatorLayout layout;
    for (int k2 : dealiased_k2(lattice)) {
        layout.group_kappa.push_back(lattice.kappa_unit() * std::sqrt(static_cast<double>(k2)));
    }
    const int half = lattice.resolution() / 2;
    layout.spectrum_bins = static_cast<std::size_t>(std::lround(std::sqrt(3.0) * half)) + 1;
    layout.field_size = 3 * lattice.size();
    layout.last_complete_bin = static_cast<std::size_t>(lattice.max_dealiased_component());
    return layout;
}

AccumulatorLayout layout_for(const ShellParams& p) {
    AccumulatorLayout layout;
    layout.group_kappa = p.wavenumbers();
    layout.spectrum_bins = static_cast<std::size_t>(p.shells);
    layout.field_size = static_cast<std::size_t>(p.shells);
    layout.last_complete_bin = layout.spectrum_bins - 1;
    return layout;
}

void Block::add(const Block& other) {
    if (other.count == 0) return;
    if (count == 0) {
        t_first = other.t_first;
        t_last = other.t_last;
        alpha_norm_max = other.alpha_norm_max;
    } else {
        t_first = std::min(t_first, other.t_first);
        t_last = std::max(t_last, other.t_last);
        alpha_norm_max = std::max(alpha_norm_max, other.alpha_norm_max);
    }
    count += other.count;
    norm2 += other.norm2;
    enstrophy += other.enstrophy;
    palinstrophy += other.palinstrophy;
    injection += other.injection;
    add_into(group_enstrophy, other.group_enstrophy);
    add_into(group_transfer, other.group_transfer);
    add_into(spectrum, other.spectrum);
    add_into(hist_count, other.hist_count);
    add_into(hist_sum, other.hist_sum);
}

ObservableAccumulator::ObservableAccumulator(AccumulatorLayout layout, MeasureInfo info,
                                             StatsConfig config)
    : layout_(std::move(layout)), info_(info), config_(std::move(config)) {
    if (config_.block_size == 0) throw UsageError("block_size must be positive");
    if (config_.stride < 1) throw UsageError("sample stride must be at least 1");
    if (!std::is_sorted(config_.hist_edges.begin(), config_.hist_edges.end()) ||
        std::adjacent_find(config_.hist_edges.begin(), config_.hist_edges.end()) !=
            config_.hist_edges.end()) {
        throw UsageError("histogram edges must be strictly increasing");
    }
    total_ = empty_block();
    velocity_sum_.assign(layout_.field_size, {});
    nonlinear_sum_.assign(layout_.field_size, {});
}

Block ObservableAccumulator::empty_block() const {
    Block b;
    const std::size_t groups = layout_.group_kappa.size();
    const std::size_t bands = config_.hist_edges.size() < 2 ? 0 : config_.hist_edges.size() - 1;
    b.group_enstrophy.assign(groups, 0.0);
    b.group_transfer.assign(groups, 0.0);
    b.spectrum.assign(layout_.spectrum_bins, 0.0);
    b.hist_count.assign(bands, 0.0);
    b.hist_sum.assign(bands, 0.0);
    return b;
}

int ObservableAccumulator::hist_band(double alpha_norm) const {
    const auto& e = config_.hist_edges;
    if (e.size() < 2 || alpha_norm < e.front() || !(alpha_norm < e.back())) return -1;
    const auto it = std::upper_bound(e.begin(), e.end(), alpha_norm);
    return static_cast<int>(it - e.begin()) - 1;
}

bool ObservableAccumulator::accumulate(const Sample& s) {
    if (s.time < config_.burn_in) {
        ++skipped_;
        return false;
    }
    if (s.group_enstrophy.size() != layout_.group_kappa.size() ||
        s.group_transfer.size() != layout_.group_kappa.size() ||
        s.spectrum.size() != layout_.spectrum_bins || s.velocity.size() != layout_.field_size ||
        s.nonlinear.size() != layout_.field_size) {
        throw UsageError("sample does not match the accumulator layout");
    }
    const double scalars[] = {s.norm2, s.enstrophy, s.palinstrophy, s.injection};
    for (double x : scalars) {
        if (!std::isfinite(x)) throw UsageError("non-finite sample");
    }

    Block one = empty_block();
    one.count = 1;
    one.t_first = one.t_last = s.time;
    one.norm2 = s.norm2;
    one.enstrophy = s.enstrophy;
    one.palinstrophy = s.palinstrophy;
    one.injection = s.injection;
    const double alpha_norm = s.norm2 + info_.alpha * info_.alpha * s.enstrophy;
    one.alpha_norm_max = alpha_norm;
    std::copy(s.group_enstrophy.begin(), s.group_enstrophy.end(), one.group_enstrophy.begin());
    std::copy(s.group_transfer.begin(), s.group_transfer.end(), one.group_transfer.begin());
    std::copy(s.spectrum.begin(), s.spectrum.end(), one.spectrum.begin());
    if (const int band = hist_band(alpha_norm); band >= 0) {
        one.hist_count[band] = 1.0;
        one.hist_sum[band] = info_.nu * s.enstrophy - s.injection;
    }

    if (blocks_.empty() || blocks_.back().count >= config_.block_size) blocks_.push_back(empty_block());
    blocks_.back().add(one);
    total_.add(one);
    for (std::size_t i = 0; i < layout_.field_size; ++i) {
        velocity_sum_[i] += s.velocity[i];
        nonlinear_sum_[i] += s.nonlinear[i];
    }
    return true;
}

void ObservableAccumulator::merge(const ObservableAccumulator& other) {
    if (other.layout_.group_kappa != layout_.group_kappa ||
        other.layout_.field_size != layout_.field_size ||
        other.config_.hist_edges != config_.hist_edges) {
        throw UsageError("cannot merge accumulators with different layouts");
    }
    for (const auto& b : other.blocks_) blocks_.push_back(b);
    total_.add(other.total_);
    for (std::size_t i = 0; i < layout_.field_size; ++i) {
        velocity_sum_[i] += other.velocity_sum_[i];
        nonlinear_sum_[i] += other.nonlinear_sum_[i];
    }
    skipped_ += other.skipped_;
}

void ObservableAccumulator::require_sufficient(const char* what) const {
    if (samples() == 0 || samples() < config_.min_samples) {
        throw UsageError(std::string(what) + ": " + std::to_string(samples()) +
                         " samples, at least " + std::to_string(std::max<std::size_t>(config_.min_samples, 1)) +
                         " required");
    }
}

std::vector<Block> ObservableAccumulator::batches(std::size_t n) const {
    std::vector<Block> out;
    if (n == 0 || total_.count == 0) return out;
    std::vector<Block> parts(n, empty_block());
    std::size_t before = 0;
    for (const auto& b : blocks_) {
        const std::size_t which = std::min(n - 1, before * n / total_.count);
        parts[which].add(b);
        before += b.count;
    }
    for (auto& p : parts) {
        if (p.count > 0) out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::complex<double>> ObservableAccumulator::mean_velocity() const {
    std::vector<std::complex<double>> m(velocity_sum_);
    if (samples() == 0) return m;
    for (auto& x : m) x /= static_cast<double>(samples());
    return m;
}

std::vector<std::complex<double>> ObservableAccumulator::mean_nonlinear() const {
    std::vector<std::complex<double>> m(nonlinear_sum_);
    if (samples() == 0) return m;
    for (auto& x : m) x /= static_cast<double>(samples());
    return m;
}

// ---------------------------------------------------------------------------

MeasureInfo measure_info(const SimParams& p, double forcing_top) {
    MeasureInfo info;
    info.nu = p.nu;
    info.alpha = p.alpha;
    info.lambda1 = p.forcing.lattice().lambda1();
    info.forcing_norm2 = p.forcing.norm2();
    info.forcing_top = forcing_top;
    return info;
}

MeasureInfo measure_info(const ShellParams& p) {
    MeasureInfo info;
    info.nu = p.nu;
    info.alpha = p.alpha;
    info.lambda1 = p.k(1) * p.k(1);
    double f2 = 0.0;
    for (const auto& f : p.forcing) f2 += std::norm(f);
    info.forcing_norm2 = f2;
    const int top = p.forcing_top();
    info.forcing_top = top > 0 ? p.k(top) : 0.0;
    return info;
}

Sample make_sample(const TrajectoryState& s, const SimParams& p, const AccumulatorLayout& layout,
                   SampleWorkspace& ws) {
    const SpectralField& v = s.velocity;
    require_same_lattice(v, p.forcing);
    const WaveLattice& lat = v.lattice();
    if (ws.resolution != lat.resolution() || ws.mode_group.size() != lat.size()) {
        const auto k2 = dealiased_k2(lat);
        if (k2.size() != layout.group_kappa.size()) throw UsageError("layout does not match lattice");
        ws.mode_group.assign(lat.size(), std::numeric_limits<std::size_t>::max());
        ws.mode_bin.assign(lat.size(), 0);
        for (std::size_t idx : lat.dealiased_indices()) {
            if (!lat.retained(idx)) continue;
            const int q = lat.integer_norm2(idx);
            ws.mode_group[idx] =
                static_cast<std::size_t>(std::lower_bound(k2.begin(), k2.end(), q) - k2.begin());
            ws.mode_bin[idx] = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(q))));
        }
        ws.resolution = lat.resolution();
    }
    ws.group_enstrophy.assign(layout.group_kappa.size(), 0.0);
    ws.group_transfer.assign(layout.group_kappa.size(), 0.0);
    ws.spectrum.assign(layout.spectrum_bins, 0.0);
    if (ws.advected.empty() || !(ws.advected.lattice() == lat)) ws.advected = SpectralField(v.lattice_ptr());
    if (p.nonlinear) {
        advect_self_into(v, ws.advected);
    } else {
        ws.advected = SpectralField(v.lattice_ptr());
    }

    Sample out;
    out.time = s.time;
    const auto& lam = lat.eigenvalues();
    for (std::size_t idx : lat.dealiased_indices()) {
        const double w = lat.weight(idx);
        if (w == 0.0) continue;
        double e = 0.0, inj = 0.0, tr = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Complex u = v.component(c)[idx];
            e += std::norm(u);
            inj += (p.forcing.component(c)[idx] * std::conj(u)).real();
            tr += (ws.advected.component(c)[idx] * std::conj(u)).real();
        }
        const double l = lam[idx];
        out.norm2 += w * e;
        out.enstrophy += w * l * e;
        out.palinstrophy += w * l * l * e;
        out.injection += w * inj;
        ws.group_enstrophy[ws.mode_group[idx]] += w * l * e;
        ws.group_transfer[ws.mode_group[idx]] += w * tr;
        ws.spectrum[ws.mode_bin[idx]] += 0.5 * w * e;
    }
    out.group_enstrophy = ws.group_enstrophy;
    out.group_transfer = ws.group_transfer;
    out.spectrum = ws.spectrum;
    out.velocity = v.data();
    out.nonlinear = ws.advected.data();
    return out;
}

Sample make_sample(const ShellState& s, const ShellParams& p, const AccumulatorLayout& layout,
                   SampleWorkspace& ws) {
    const std::size_t m = static_cast<std::size_t>(p.shells);
    if (s.u.size() != m || layout.group_kappa.size() != m) throw UsageError("shell state does not match layout");
    ws.group_enstrophy.assign(m, 0.0);
    ws.group_transfer.assign(m, 0.0);
    ws.spectrum.assign(m, 0.0);
    ws.nonlinear.resize(m);
    const auto nl = p.nonlinear ? sabra_nonlinear(s.u, p)
                                : std::vector<std::complex<double>>(m, std::complex<double>{});

    Sample out;
    out.time = s.time;
    for (std::size_t n = 0; n < m; ++n) {
        const double k2 = layout.group_kappa[n] * layout.group_kappa[n];
        const double e = std::norm(s.u[n]);
        out.norm2 += e;
        out.enstrophy += k2 * e;
        out.palinstrophy += k2 * k2 * e;
        out.injection += (p.forcing[n] * std::conj(s.u[n])).real();
        ws.group_enstrophy[n] = k2 * e;
        ws.group_transfer[n] = -(std::conj(s.u[n]) * nl[n]).real();
        ws.spectrum[n] = 0.5 * e;
        ws.nonlinear[n] = -nl[n];
    }
    out.group_enstrophy = ws.group_enstrophy;
    out.group_transfer = ws.group_transfer;
    out.spectrum = ws.spectrum;
    out.velocity = s.u;
    out.nonlinear = ws.nonlinear;
    return out;
}

// ---------------------------------------------------------------------------

TransferRates transfer_rates(const SpectralField& v, double kappa) {
    const WaveLattice& lat = v.lattice();
    const double k1 = std::sqrt(lat.lambda1());
    if (!(kappa > k1 && kappa < lat.kappa_max())) {
        throw UsageError("transfer_rates: kappa must lie strictly between kappa_1 and kappa_max");
    }
    const double inf = std::numeric_limits<double>::infinity();
    const SpectralField low = band_project(v, ShellBand(k1, kappa));
    const SpectralField high = band_project(v, ShellBand(kappa, inf));

    TransferRates r;
    r.forward = -inner(bilinear_B(low, low), high);
    r.backward = -inner(bilinear_B(high, high), low);
    r.net = r.forward - r.backward;
    r.net_direct = inner(advect_self(v), low);
    const double scale = std::max({std::abs(r.forward), std::abs(r.backward), std::abs(r.net_direct)});
    const double floor = 1e-14 * v.norm() * h1_norm2(v);
    r.consistent = std::abs(r.net - r.net_direct) <= 1e-10 * scale + floor;
    return r;
}

double net_transfer_at(const AccumulatorLayout& layout, std::span<const double> group_transfer,
                       double kappa) {
    double s = 0.0;
    for (std::size_t g = 0; g < layout.group_kappa.size(); ++g) {
        if (layout.group_kappa[g] < kappa) s += group_transfer[g];
    }
    return s;
}

Estimate mean_net_transfer(const ObservableAccumulator& acc, double kappa) {
    acc.require_sufficient("mean_net_transfer");
    const auto& layout = acc.layout();
    return estimate(acc, [&](const Block& b) {
        return mean_of(net_transfer_at(layout, b.group_transfer, kappa), b);
    });
}

Estimate mean_dissipation_above(const ObservableAccumulator& acc, double kappa) {
    acc.require_sufficient("mean_dissipation_above");
    const auto& layout = acc.layout();
    const double nu = acc.info().nu;
    const double inf = std::numeric_limits<double>::infinity();
    return estimate(acc, [&](const Block& b) {
        return nu * mean_of(group_sum(layout, b.group_enstrophy, kappa, inf), b);
    });
}

BudgetRow budget_identity_check(const ObservableAccumulator& acc, double kappa_lo, double kappa_hi) {
    const MeasureInfo& info = acc.info();
    if (!(kappa_lo <= kappa_hi)) throw UsageError("budget band: lower edge exceeds upper edge");
    if (!(kappa_lo > info.forcing_top)) {
        throw UsageError("budget band overlaps the forcing band; the closure needs an unforced band");
    }
    acc.require_sufficient("budget_identity_check");
    const auto& layout = acc.layout();
    const double nu = info.nu;
    auto diss = [&](const Block& b) { return nu * mean_of(group_sum(layout, b.group_enstrophy, kappa_lo, kappa_hi), b); };
    // Band gain from the cascade: e(k') - e(k'') = -(B(u,u), u_band).
    auto net = [&](const Block& b) { return -mean_of(group_sum(layout, b.group_transfer, kappa_lo, kappa_hi), b); };
    auto total = [&](const Block& b) { return nu * mean_of(b.enstrophy, b); };

    const auto parts = acc.batches();
    BudgetRow row;
    row.band_lo = kappa_lo;
    row.band_hi = kappa_hi;
    row.dissipation = estimate_from(acc.total(), parts, diss);
    row.net_transfer = estimate_from(acc.total(), parts, net);
    const double norm = total(acc.total());
    row.residual = norm > 0.0 ? std::abs(row.dissipation.mean - row.net_transfer.mean) / norm : 0.0;
    row.stderr_ = estimate_from(acc.total(), parts, [&](const Block& b) {
                      const double t = total(b);
                      return t > 0.0 ? (diss(b) - net(b)) / t : 0.0;
                  }).stderr_;
    return row;
}

double support_ratio(double alpha_norm, const MeasureInfo& info) {
    if (!(info.nu > 0.0)) throw UsageError("support bound is undefined for nu = 0");
    if (!(info.forcing_norm2 > 0.0)) throw UsageError("support bound is undefined for f = 0");
    const double a2 = info.alpha * info.alpha;
    return alpha_norm * info.nu * info.nu * info.lambda1 / ((1.0 / info.lambda1 + a2) * info.forcing_norm2);
}

SupportReport support_bound_check(const ObservableAccumulator& acc) {
    acc.require_sufficient("support_bound_check");
    const Block& t = acc.total();
    const double a2 = acc.info().alpha * acc.info().alpha;
    SupportReport r;
    r.max_ratio = support_ratio(t.alpha_norm_max, acc.info());
    r.mean_ratio = support_ratio(mean_of(t.norm2, t) + a2 * mean_of(t.enstrophy, t), acc.info());
    return r;
}

SupportReport support_bound_check(std::span<const TrajectoryState> states, const SimParams& p) {
    if (states.empty()) throw UsageError("support_bound_check: no samples");
    MeasureInfo info = measure_info(p, 0.0);
    const double a2 = p.alpha * p.alpha;
    SupportReport r;
    double sum = 0.0;
    for (const auto& s : states) {
        const double x = 2.0 * s.diag.kinetic + a2 * s.diag.enstrophy;
        r.max_ratio = std::max(r.max_ratio, support_ratio(x, info));
        sum += x;
    }
    r.mean_ratio = support_ratio(sum / static_cast<double>(states.size()), info);
    return r;
}

double reynolds_residual(const ObservableAccumulator& acc, const SimParams& p) {
    if (acc.samples() == 0) throw UsageError("reynolds_residual: empty accumulator");
    const double fn = p.forcing.norm();
    if (!(fn > 0.0)) throw UsageError("reynolds_residual: forcing is zero");
    const auto mu = acc.mean_velocity();
    const auto mb = acc.mean_nonlinear();
    if (mu.size() != 3 * p.forcing.lattice().size()) throw UsageError("reynolds_residual: layout mismatch");
    SpectralField r(p.forcing.lattice_ptr());
    const WaveLattice& lat = p.forcing.lattice();
    const auto f = p.forcing.data();
    auto d = r.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double lam = lat.eigenvalue(i % lat.size());
        d[i] = p.nu * lam * mu[i] + mb[i] - f[i];
    }
    return r.norm() / fn;
}

double reynolds_residual(const ObservableAccumulator& acc, const ShellParams& p) {
    if (acc.samples() == 0) throw UsageError("reynolds_residual: empty accumulator");
    const auto mu = acc.mean_velocity();
    const auto mb = acc.mean_nonlinear();
    if (mu.size() != p.forcing.size()) throw UsageError("reynolds_residual: layout mismatch");
    double r2 = 0.0, f2 = 0.0;
    for (std::size_t n = 0; n < mu.size(); ++n) {
        const double k = p.k(static_cast<int>(n) + 1);
        r2 += std::norm(p.nu * k * k * mu[n] + mb[n] - p.forcing[n]);
        f2 += std::norm(p.forcing[n]);
    }
    if (!(f2 > 0.0)) throw UsageError("reynolds_residual: forcing is zero");
    return std::sqrt(r2 / f2);
}

std::vector<BalanceRow> banded_energy_balance(const ObservableAccumulator& acc) {
    acc.require_sufficient("banded_energy_balance");
    const double nu = acc.info().nu;
    const auto parts = acc.batches();
    std::vector<BalanceRow> rows;

    BalanceRow global;
    global.e_lo = 0.0;
    global.e_hi = std::numeric_limits<double>::infinity();
    global.samples = acc.samples();
    const auto g = estimate_from(acc.total(), parts, [&](const Block& b) {
        return mean_of(nu * b.enstrophy - b.injection, b);
    });
    global.residual = g.mean;
    global.stderr_ = g.stderr_;
    rows.push_back(global);

    const auto& edges = acc.config().hist_edges;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        BalanceRow row;
        row.e_lo = edges[i];
        row.e_hi = edges[i + 1];
        row.samples = static_cast<std::size_t>(acc.total().hist_count[i]);
        row.undersampled = row.samples < 10;
        if (row.samples > 0) row.residual = acc.total().hist_sum[i] / acc.total().hist_count[i];
        // Batches that never visit the band carry no information about it.
        std::vector<double> values;
        for (const auto& b : parts) {
            if (b.hist_count[i] > 0.0) values.push_back(b.hist_sum[i] / b.hist_count[i]);
        }
        if (values.size() >= 2) {
            double m = 0.0;
            for (double v : values) m += v;
            m /= static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - m) * (v - m);
            const double nb = static_cast<double>(values.size());
            row.stderr_ = std::sqrt(ss / (nb * (nb - 1.0)));
        }
        rows.push_back(row);
    }
    return rows;
}

GevreyFit gevrey_tail_fit(std::span<const double> spectrum, std::size_t last_shell, std::size_t shells) {
    GevreyFit fit;
    if (spectrum.empty()) return fit;
    last_shell = std::min(last_shell, spectrum.size() - 1);
    std::size_t peak = 1;
    for (std::size_t n = 1; n <= last_shell; ++n) {
        if (spectrum[n] > spectrum[peak]) peak = n;
    }
    const double top = spectrum[peak];
    if (!(top > 0.0)) return fit;
    std::size_t below = 0;
    for (std::size_t n = peak + 1; n <= last_shell; ++n) {
        if (spectrum[n] < 1e-8 * top) ++below;
    }
    const std::size_t first = std::max(peak + 1, last_shell + 1 > shells ? last_shell + 1 - shells : 0);
    fit.first = first;
    fit.last = last_shell;
    std::vector<double> xs, ys;
    for (std::size_t n = first; n <= last_shell; ++n) {
        if (spectrum[n] > 0.0 && std::isfinite(spectrum[n])) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(spectrum[n]));
        }
    }
    if (below < 5 || xs.size() < 3) return fit;

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.tau = -0.5 * fit.slope;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    fit.conclusive = true;
    return fit;
}

BudgetReport summarize(const ObservableAccumulator& acc, const std::vector<ShellBand>& bands,
                       double reynolds) {
    acc.require_sufficient("summarize");
    const auto parts = acc.batches();
    const Block& t = acc.total();
    const double nu = acc.info().nu;

    BudgetReport r;
    r.window_start = t.t_first;
    r.window_end = t.t_last;
    r.samples = t.count;
    for (std::size_t n = 0; n < acc.layout().spectrum_bins; ++n) {
        const auto e = estimate_from(t, parts, [n](const Block& b) { return mean_of(b.spectrum[n], b); });
        r.spectrum.push_back(e.mean);
        r.spectrum_stderr.push_back(e.stderr_);
    }
    for (const auto& band : bands) r.bands.push_back(budget_identity_check(acc, band.lo, band.hi));
    r.injection = estimate_from(t, parts, [](const Block& b) { return mean_of(b.injection, b); });
    r.dissipation = estimate_from(t, parts, [nu](const Block& b) { return nu * mean_of(b.enstrophy, b); });
    r.global_residual = r.injection.mean != 0.0
                            ? std::abs(r.dissipation.mean - r.injection.mean) / std::abs(r.injection.mean)
                            : std::abs(r.dissipation.mean);
    r.kinetic = estimate_from(t, parts, [](const Block& b) { return 0.5 * mean_of(b.norm2, b); });
    r.palinstrophy = estimate_from(t, parts, [](const Block& b) { return mean_of(b.palinstrophy, b); });
    r.kolmogorov_eta = r.dissipation.mean > 0.0 ? std::pow(nu * nu * nu / r.dissipation.mean, 0.25) : 0.0;
    if (nu > 0.0 && acc.info().forcing_norm2 > 0.0) r.support = support_bound_check(acc);
    r.reynolds = reynolds;
    r.balance = banded_energy_balance(acc);
    r.gevrey = gevrey_tail_fit(r.spectrum, acc.layout().last_complete_bin);
    return r;
}

}  // namespace nsv
