#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nsv/lattice.hpp"
#include "nsv/shell.hpp"
#include "nsv/voigt.hpp"

namespace nsv {

/// Physical constants the averaged identities refer to.
struct MeasureInfo {
    double nu = 0.0;
    double alpha = 0.0;
    double lambda1 = 1.0;
    double forcing_norm2 = 0.0;  ///< |f|^2
    double forcing_top = 0.0;    ///< upper edge of the forcing band (kappa bar)
};

/// How samples are grouped. A "group" is a set of modes sharing one eigenvalue
/// (one lattice sphere |k|^2 = const in 3D, one shell in the shell model); band
/// sums and transfer rates at any kappa are assembled from group sums.
struct AccumulatorLayout {
    std::vector<double> group_kappa;  ///< sqrt(lambda) per group, ascending
    std::size_t spectrum_bins = 0;
    std::size_t field_size = 0;       ///< flattened mean-field length
    /// Highest spectrum bin whose sphere lies fully inside the dealias cube (3D);
    /// equal to spectrum_bins - 1 for the shell model.
    std::size_t last_complete_bin = 0;
};

AccumulatorLayout layout_for(const WaveLattice& lattice);
AccumulatorLayout layout_for(const ShellParams& p);

struct StatsConfig {
    double burn_in = 0.0;          ///< samples with t < burn_in are skipped
    int stride = 1;                ///< steps between samples (recorded, enforced by the driver)
    std::size_t min_samples = 10;  ///< below this no average is reported
    std::size_t block_size = 16;   ///< samples folded into one stored block
    std::vector<double> hist_edges;  ///< alpha-energy band edges for the banded balance
};

/// One instantaneous observation. Norm conventions: |u|^2 = sum |u_k|^2,
/// ||u||^2 = sum lambda |u_k|^2; "nonlinear" has the sign of B(u, u).
struct Sample {
    double time = 0.0;
    double norm2 = 0.0;         ///< |u|^2
    double enstrophy = 0.0;     ///< ||u||^2
    double palinstrophy = 0.0;  ///< |A u|^2
    double injection = 0.0;     ///< (f, u)
    std::span<const double> group_enstrophy;  ///< lambda |u_group|^2
    std::span<const double> group_transfer;   ///< (B(u,u), u_group): alpha-energy lost to the cascade
    std::span<const double> spectrum;         ///< energy per spectrum bin
    std::span<const std::complex<double>> velocity;
    std::span<const std::complex<double>> nonlinear;
};

/// Summed observations over a contiguous run of samples.
struct Block {
    std::size_t count = 0;
    double t_first = 0.0;
    double t_last = 0.0;
    double norm2 = 0.0;
    double enstrophy = 0.0;
    double palinstrophy = 0.0;
    double injection = 0.0;
    double alpha_norm_max = 0.0;  ///< max of |u|^2 + alpha^2 ||u||^2
    std::vector<double> group_enstrophy;
    std::vector<double> group_transfer;
    std::vector<double> spectrum;
    std::vector<double> hist_count;  ///< per alpha-energy band
    std::vector<double> hist_sum;    ///< sum of nu ||u||^2 - (f, u) per band

    void add(const Block& other);
};

/// Running time averages: the empirical invariant measure of one (or several merged) trajectories.
class ObservableAccumulator {
public:
    ObservableAccumulator(AccumulatorLayout layout, MeasureInfo info, StatsConfig config);

    /// Returns false (and counts the sample) when t < burn_in.
    bool accumulate(const Sample& s);
    /// Appends the other accumulator's samples; exact for the stored sums.
    void merge(const ObservableAccumulator& other);
    /// Moves the burn-in boundary; only affects later samples.
    void set_burn_in(double t) { config_.burn_in = t; }

    std::size_t samples() const { return total_.count; }
    std::size_t skipped() const { return skipped_; }
    bool sufficient() const { return samples() >= config_.min_samples && samples() > 0; }
    /// Throws UsageError when fewer than min_samples samples were taken.
    void require_sufficient(const char* what) const;

    const AccumulatorLayout& layout() const { return layout_; }
    const MeasureInfo& info() const { return info_; }
    const StatsConfig& config() const { return config_; }

    const Block& total() const { return total_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    /// Blocks regrouped into (at most) n contiguous batches of similar sample count.
    std::vector<Block> batches(std::size_t n = 10) const;

    std::vector<std::complex<double>> mean_velocity() const;
    std::vector<std::complex<double>> mean_nonlinear() const;

    /// Index of the alpha-energy band holding value x, or -1.
    int hist_band(double alpha_norm) const;

private:
    Block empty_block() const;

    AccumulatorLayout layout_;
    MeasureInfo info_;
    StatsConfig config_;
    std::vector<Block> blocks_;
    Block total_;
    std::vector<std::complex<double>> velocity_sum_;
    std::vector<std::complex<double>> nonlinear_sum_;
    std::size_t skipped_ = 0;
};

/// Mean and batch-means standard error of a scalar statistic.
struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Evaluates stat(block) on the whole window and on each of `batches` batches.
template <typename Stat>
Estimate estimate(const ObservableAccumulator& acc, Stat&& stat, std::size_t batches = 10);

/// Reusable buffers for building samples without reallocating.
struct SampleWorkspace {
    std::vector<double> group_enstrophy;
    std::vector<double> group_transfer;
    std::vector<double> spectrum;
    std::vector<std::complex<double>> nonlinear;  ///< shell model: -NL
    SpectralField advected;                       ///< 3D: B(u, u)
    std::vector<std::size_t> mode_group;          ///< 3D: group index per stored mode
    std::vector<std::size_t> mode_bin;            ///< 3D: spectrum bin per stored mode
    int resolution = 0;
};

Sample make_sample(const TrajectoryState& s, const SimParams& p, const AccumulatorLayout& layout,
                   SampleWorkspace& ws);
Sample make_sample(const ShellState& s, const ShellParams& p, const AccumulatorLayout& layout,
                   SampleWorkspace& ws);

MeasureInfo measure_info(const SimParams& p, double forcing_top);
MeasureInfo measure_info(const ShellParams& p);

// ---------------------------------------------------------------------------
// Instantaneous transfer rates

struct TransferRates {
    double forward = 0.0;   ///< -(B(v_<, v_<), v_>)
    double backward = 0.0;  ///< -(B(v_>, v_>), v_<)
    double net = 0.0;       ///< forward - backward
    double net_direct = 0.0;  ///< b(v, v, v_<), the independent route to the same number
    bool consistent = true;   ///< routes agree to 1e-10 relative
};

/// Rates at kappa, with v_< the modes kappa_1 <= sqrt(lambda) < kappa and v_> the rest.
/// Requires kappa_1 < kappa < kappa_max.
TransferRates transfer_rates(const SpectralField& v, double kappa);

/// e_net(kappa) = sum of group transfers below kappa.
double net_transfer_at(const AccumulatorLayout& layout, std::span<const double> group_transfer,
                       double kappa);

// ---------------------------------------------------------------------------
// Averaged identities

struct BudgetRow {
    double band_lo = 0.0;
    double band_hi = 0.0;
    Estimate dissipation;   ///< nu <||u_band||^2>
    Estimate net_transfer;  ///< <e_lo - e_hi>
    double residual = 0.0;  ///< |dissipation - net transfer| / total dissipation
    double stderr_ = 0.0;
};

/// Closure of nu <||u_{k',k''}||^2> = <e_k'> - <e_k''> for a band above the forcing.
BudgetRow budget_identity_check(const ObservableAccumulator& acc, double kappa_lo, double kappa_hi);

/// <e_net(kappa)> with standard error.
Estimate mean_net_transfer(const ObservableAccumulator& acc, double kappa);
/// nu <||u_{kappa,inf}||^2>.
Estimate mean_dissipation_above(const ObservableAccumulator& acc, double kappa);

struct SupportReport {
    /// max over samples of (|u|^2 + a^2||u||^2) nu^2 l1 / ((1/l1 + a^2)|f|^2); the extra l1
    /// makes the bound scale-consistent and is 1 when l1 = 1.
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
};

double support_ratio(double alpha_norm, const MeasureInfo& info);
SupportReport support_bound_check(const ObservableAccumulator& acc);
SupportReport support_bound_check(std::span<const TrajectoryState> states, const SimParams& p);

/// |nu A<u> + <B(u,u)> - f| / |f|.
double reynolds_residual(const ObservableAccumulator& acc, const SimParams& p);
double reynolds_residual(const ObservableAccumulator& acc, const ShellParams& p);

struct BalanceRow {
    double e_lo = 0.0;
    double e_hi = 0.0;
    std::size_t samples = 0;
    double residual = 0.0;  ///< conditional mean of nu||u||^2 - (f,u)
    double stderr_ = 0.0;
    bool undersampled = false;
};

/// First row is the global band [0, inf); then one row per configured alpha-energy band.
std::vector<BalanceRow> banded_energy_balance(const ObservableAccumulator& acc);

struct GevreyFit {
    bool conclusive = false;
    double slope = 0.0;  ///< d log E / d n on the dissipation range
    double tau = 0.0;    ///< -slope / 2, the decay rate of E ~ exp(-2 tau n)
    double r2 = 0.0;
    std::size_t first = 0;
    std::size_t last = 0;
};

/// Straight-line fit of log E(n) over the last `shells` complete shells after the peak.
/// Inconclusive when fewer than 5 shells lie below 1e-8 of the peak or fewer than
/// 3 positive values are available.
GevreyFit gevrey_tail_fit(std::span<const double> spectrum, std::size_t last_shell,
                          std::size_t shells = 10);

struct BudgetReport {
    double window_start = 0.0;
    double window_end = 0.0;
    std::size_t samples = 0;
    std::vector<double> spectrum;
    std::vector<double> spectrum_stderr;
    std::vector<BudgetRow> bands;
    Estimate injection;
    Estimate dissipation;       ///< epsilon = nu <||u||^2>
    double global_residual = 0.0;  ///< |eps - <(f,u)>| / <(f,u)>
    Estimate kinetic;           ///< <|u|^2> / 2
    Estimate palinstrophy;      ///< <|A u|^2>
    double kolmogorov_eta = 0.0;
    SupportReport support;
    double reynolds = 0.0;
    std::vector<BalanceRow> balance;
    GevreyFit gevrey;
};

BudgetReport summarize(const ObservableAccumulator& acc, const std::vector<ShellBand>& bands,
                       double reynolds);

// ---------------------------------------------------------------------------

template <typename Stat>
Estimate estimate(const ObservableAccumulator& acc, Stat&& stat, std::size_t batches) {
    Estimate e;
    e.mean = stat(acc.total());
    const auto parts = acc.batches(batches);
    if (parts.size() < 2) return e;
    std::vector<double> values;
    values.reserve(parts.size());
    for (const auto& b : parts) values.push_back(stat(b));
    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    const double nb = static_cast<double>(values.size());
    e.stderr_ = std::sqrt(ss / (nb * (nb - 1.0)));
    return e;
}

}  // namespace nsv
