#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nsv/errors.hpp"
#include "nsv/lattice.hpp"
#include "nsv/sweep.hpp"

namespace nsv {

/// Flat run configuration read from `key = value` text.
struct RunConfig {
    Mode mode = Mode::Shell;

    double nu = 1e-6;
    double alpha = 0.0;
    double dt = 1e-3;
    double t_total = 10.0;
    std::uint64_t seed = 1;

    // spectral3d
    int n = 32;
    double box_length = 6.283185307179586;
    double forcing_kappa_low = 1.0;
    double forcing_kappa_high = 2.0;
    double forcing_amplitude = 0.005;
    std::uint64_t forcing_seed = 7;
    double init_energy = 0.5;
    double init_peak = 2.0;

    // shell
    int shells = 22;
    double k0 = 0.0625;
    double lambda_ratio = 2.0;
    double coef_a = 1.0;
    double coef_b = -0.5;
    double coef_c = -0.5;
    int forcing_shells = 2;
    double init_amplitude = 0.1;

    // statistics
    bool burn_in_auto = true;
    double burn_in = 0.0;
    int sample_stride = 10;
    std::uint64_t min_samples = 10;
    std::uint64_t block_size = 64;
    std::vector<ShellBand> bands;
    std::vector<double> flux_kappas;
    std::vector<double> hist_edges;
    double enstrophy_cap = 1e3;

    // sweep
    std::vector<double> sweep_alphas;
    std::vector<std::uint64_t> sweep_seeds;
    int workers = 0;

    std::string output_dir;

    bool operator==(const RunConfig&) const = default;
};

/// Every problem found while parsing, one message per entry ("line N: ...").
class ConfigError : public UsageError {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Parses and validates; throws ConfigError listing all problems.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Lossless text form: parse_config(config_to_text(c)) == c.
std::string config_to_text(const RunConfig& c);

/// Shortest round-trip-safe decimal form (17 significant digits at most), locale independent.
std::string format_double(double x);

SimParams spectral_params(const RunConfig& c);
ShellParams shell_params(const RunConfig& c);
RunSettings run_settings(const RunConfig& c);
/// Sweep plan from the sweep_* keys; requires them to be present.
SweepPlan sweep_plan(const RunConfig& c);

}  // namespace nsv
