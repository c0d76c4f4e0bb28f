#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsv/shell.hpp"
#include "nsv/statistics.hpp"
#include "nsv/voigt.hpp"

namespace nsv {

enum class Mode { Spectral3d, Shell };

const char* mode_name(Mode m);

/// How a single trajectory is sampled.
struct RunSettings {
    StatsConfig stats;
    /// When set, burn-in ends at the first sample time t >= 10 T_L, with the large-eddy
    /// time T_L = 1 / (<|u|^2>^{1/2} kappa_bar) estimated from all samples so far.
    bool auto_burn_in = false;
    /// The run aborts (status "unresolved") once ||u||^2 exceeds this multiple of the
    /// reference enstrophy max(||u_0||^2, |f|^2 / (nu^2 lambda_1)); the second term bounds
    /// the time-averaged enstrophy of any forced solution.
    double enstrophy_cap = 1e3;
};

enum class RunStatus { Ok, Failed, Unresolved };

const char* status_name(RunStatus s);

/// Called after every accumulated sample.
using SampleHook = std::function<void(double time, const ObservableAccumulator& acc)>;

struct RunResult {
    explicit RunResult(ObservableAccumulator a) : acc(std::move(a)) {}

    ObservableAccumulator acc;
    RunStatus status = RunStatus::Ok;
    std::string message;  ///< failure description
    double end_time = 0.0;
    double burn_in = 0.0;     ///< burn-in actually used
    double turnover = 0.0;    ///< T_L from the averaged |u|^2 (0 if unknown)
    std::optional<TrajectoryState> final_3d;
    std::optional<ShellState> final_shell;
};

/// Integrates from `init` for p.t_total, sampling every stats.stride steps.
RunResult run_spectral(const SimParams& p, TrajectoryState init, const RunSettings& settings,
                       double forcing_top, const SampleHook& hook = {});
RunResult run_shell(const ShellParams& p, ShellState init, const RunSettings& settings,
                    const SampleHook& hook = {});

// ---------------------------------------------------------------------------

struct SweepPlan {
    Mode mode = Mode::Shell;
    SimParams spectral;  ///< base parameters (alpha overridden per cell)
    ShellParams shell;
    double forcing_top = 0.0;  ///< kappa_bar for 3D (shell mode derives it)

    // Initial conditions, seeded per cell.
    double init_energy = 0.5;  ///< 3D
    double init_peak = 2.0;    ///< 3D
    double init_amplitude = 0.1;  ///< shell

    std::vector<double> alphas;       ///< strictly decreasing, ending at 0
    std::vector<std::uint64_t> seeds;
    std::vector<ShellBand> bands;     ///< transfer comparison bands, above forcing
    RunSettings settings;
    unsigned workers = 0;  ///< 0: hardware concurrency

    void validate() const;
};

struct SweepCell {
    double alpha = 0.0;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::Ok;
    std::string message;
    std::size_t samples = 0;
};

struct AlphaRow {
    double alpha = 0.0;
    RunStatus status = RunStatus::Ok;  ///< Ok only if every seed succeeded
    std::size_t runs_ok = 0;
    Estimate kinetic;                   ///< <|u|^2>
    std::vector<Estimate> net_transfer; ///< <e_k' - e_k''> per band
    Estimate ke_delta;                  ///< |<|u|^2>^a - <|u|^2>^base|
    std::vector<Estimate> nt_delta;
};

struct SweepReport {
    std::vector<AlphaRow> rows;   ///< in plan order
    std::vector<SweepCell> cells; ///< alpha-major, seed-minor
    std::vector<ShellBand> bands;
    double baseline_alpha = 0.0;  ///< 0, or the smallest resolved alpha
    bool baseline_substituted = false;
    bool has_baseline = false;
};

/// Runs every (alpha, seed) cell in parallel; the report does not depend on scheduling.
SweepReport run_alpha_sweep(const SweepPlan& plan);

struct TrendCheck {
    bool available = false;
    double delta_large = 0.0;  ///< delta at the largest alpha
    double delta_small = 0.0;  ///< delta at the smallest positive alpha
    double sigma = 0.0;        ///< combined standard error of the two deltas
    bool shrinks = false;      ///< delta_large - delta_small > 2 sigma
    bool monotone = false;     ///< deltas non-increasing within 2 sigma across positive alphas
};

/// Trend of the kinetic-energy deltas (band < 0) or of the net-transfer deltas of one band.
TrendCheck delta_trend(const SweepReport& report, int band = -1);

// ---------------------------------------------------------------------------

/// C with C^2 = sum over eigenvectors (two per nonzero k) of (lambda_1/lambda_k)^{2(eta-1)}.
struct HelmholtzConstant {
    double value = 0.0;
    int radius = 0;        ///< lattice radius of the last partial sum
    bool converged = false;
};

/// Lattice partial sums with an integral tail, doubled in radius until the estimate
/// moves by at most 1e-6 relative. Refuses eta <= 7/4.
HelmholtzConstant helmholtz_constant(double eta);

struct DeviationRow {
    double alpha = 0.0;
    double deviation = 0.0;  ///< |((I + a^2 A)^-1 - I) phi|
    double bound = 0.0;      ///< C a^2 lambda_1^{1-eta} |A^eta phi|
    double ratio = 0.0;
};

struct DeviationReport {
    double eta = 0.0;
    HelmholtzConstant constant;
    std::vector<DeviationRow> rows;
    double slope = 0.0;  ///< least-squares log-log slope over alpha > 0
};

DeviationReport helmholtz_deviation_check(const SpectralField& phi, const std::vector<double>& alphas,
                                          double eta);

}  // namespace nsv
