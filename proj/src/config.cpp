#include "nsv/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "nsv/spectral_field.hpp"

#ifndef NSV_VERSION
#define NSV_VERSION "unknown"
#endif

namespace nsv {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

struct BadValue {
    std::string message;
};

double to_double(std::string_view s) {
    double x = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw BadValue{"expects a real number, got '" + std::string(s) + "'"};
    }
    return x;
}

template <typename Int>
Int to_int(std::string_view s) {
    Int x = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw BadValue{"expects an integer, got '" + std::string(s) + "'"};
    }
    return x;
}

std::vector<double> to_doubles(std::string_view s) {
    std::vector<double> out;
    if (trim(s).empty()) return out;
    for (auto part : split(s, ',')) out.push_back(to_double(part));
    return out;
}

std::vector<std::uint64_t> to_uints(std::string_view s) {
    std::vector<std::uint64_t> out;
    if (trim(s).empty()) return out;
    for (auto part : split(s, ',')) out.push_back(to_int<std::uint64_t>(part));
    return out;
}

std::vector<ShellBand> to_bands(std::string_view s) {
    std::vector<ShellBand> out;
    if (trim(s).empty()) return out;
    for (auto part : split(s, ',')) {
        const auto ends = split(part, ':');
        if (ends.size() != 2) throw BadValue{"expects bands as lo:hi[,lo:hi...], got '" + std::string(part) + "'"};
        const double lo = to_double(ends[0]);
        const double hi = to_double(ends[1]);
        if (!(lo >= 0.0) || !(lo <= hi)) throw BadValue{"band '" + std::string(part) + "' needs 0 <= lo <= hi"};
        out.emplace_back(lo, hi);
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += f(v[i]);
    }
    return s;
}

struct Key {
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Field>
Key real_key(Field RunConfig::*field) {
    return {[field](RunConfig& c, std::string_view v) { c.*field = to_double(v); },
            [field](const RunConfig& c) { return format_double(c.*field); }};
}

template <typename Field>
Key int_key(Field RunConfig::*field) {
    return {[field](RunConfig& c, std::string_view v) { c.*field = to_int<Field>(v); },
            [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

const std::map<std::string, Key, std::less<>>& keys() {
    static const std::map<std::string, Key, std::less<>> table = [] {
        std::map<std::string, Key, std::less<>> k;
        k["mode"] = {[](RunConfig& c, std::string_view v) {
                         if (v == "spectral3d") {
                             c.mode = Mode::Spectral3d;
                         } else if (v == "shell") {
                             c.mode = Mode::Shell;
                         } else {
                             throw BadValue{"expects spectral3d or shell, got '" + std::string(v) + "'"};
                         }
                     },
                     [](const RunConfig& c) { return std::string(mode_name(c.mode)); }};
        k["nu"] = real_key(&RunConfig::nu);
        k["alpha"] = real_key(&RunConfig::alpha);
        k["dt"] = real_key(&RunConfig::dt);
        k["t_total"] = real_key(&RunConfig::t_total);
        k["seed"] = int_key(&RunConfig::seed);
        k["n"] = int_key(&RunConfig::n);
        k["box_length"] = real_key(&RunConfig::box_length);
        k["forcing_kappa_low"] = real_key(&RunConfig::forcing_kappa_low);
        k["forcing_kappa_high"] = real_key(&RunConfig::forcing_kappa_high);
        k["forcing_amplitude"] = real_key(&RunConfig::forcing_amplitude);
        k["forcing_seed"] = int_key(&RunConfig::forcing_seed);
        k["init_energy"] = real_key(&RunConfig::init_energy);
        k["init_peak"] = real_key(&RunConfig::init_peak);
        k["shells"] = int_key(&RunConfig::shells);
        k["k0"] = real_key(&RunConfig::k0);
        k["lambda_ratio"] = real_key(&RunConfig::lambda_ratio);
        k["coef_a"] = real_key(&RunConfig::coef_a);
        k["coef_b"] = real_key(&RunConfig::coef_b);
        k["coef_c"] = real_key(&RunConfig::coef_c);
        k["forcing_shells"] = int_key(&RunConfig::forcing_shells);
        k["init_amplitude"] = real_key(&RunConfig::init_amplitude);
        k["burn_in"] = {[](RunConfig& c, std::string_view v) {
                            if (v == "auto") {
                                c.burn_in_auto = true;
                                c.burn_in = 0.0;
                            } else {
                                c.burn_in_auto = false;
                                c.burn_in = to_double(v);
                            }
                        },
                        [](const RunConfig& c) {
                            return c.burn_in_auto ? std::string("auto") : format_double(c.burn_in);
                        }};
        k["sample_stride"] = int_key(&RunConfig::sample_stride);
        k["min_samples"] = int_key(&RunConfig::min_samples);
        k["block_size"] = int_key(&RunConfig::block_size);
        k["bands"] = {[](RunConfig& c, std::string_view v) { c.bands = to_bands(v); },
                      [](const RunConfig& c) {
                          return join<ShellBand>(c.bands, [](const ShellBand& b) {
                              return format_double(b.lo) + ":" + format_double(b.hi);
                          });
                      }};
        k["flux_kappas"] = {[](RunConfig& c, std::string_view v) { c.flux_kappas = to_doubles(v); },
                            [](const RunConfig& c) { return join<double>(c.flux_kappas, format_double); }};
        k["hist_edges"] = {[](RunConfig& c, std::string_view v) { c.hist_edges = to_doubles(v); },
                           [](const RunConfig& c) { return join<double>(c.hist_edges, format_double); }};
        k["enstrophy_cap"] = real_key(&RunConfig::enstrophy_cap);
        k["sweep_alphas"] = {[](RunConfig& c, std::string_view v) { c.sweep_alphas = to_doubles(v); },
                             [](const RunConfig& c) { return join<double>(c.sweep_alphas, format_double); }};
        k["sweep_seeds"] = {[](RunConfig& c, std::string_view v) { c.sweep_seeds = to_uints(v); },
                            [](const RunConfig& c) {
                                return join<std::uint64_t>(c.sweep_seeds,
                                                           [](const std::uint64_t& s) { return std::to_string(s); });
                            }};
        k["workers"] = int_key(&RunConfig::workers);
        k["output_dir"] = {[](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
                           [](const RunConfig& c) { return c.output_dir; }};
        return k;
    }();
    return table;
}

/// Constraint checks; `where` maps a key to the text "line N" (or "default").
void validate(const RunConfig& c, const std::function<std::string(const char*)>& where,
              std::vector<std::string>& errors) {
    auto fail = [&](const char* key, const std::string& msg) {
        errors.push_back(where(key) + ": " + key + " " + msg);
    };
    auto increasing = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (!(v[i] > v[i - 1])) return false;
        }
        return true;
    };
    if (!(c.nu >= 0.0) || !std::isfinite(c.nu)) fail("nu", "must be a finite nonnegative number");
    if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha)) fail("alpha", "must be a finite nonnegative number");
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail("dt", "must be positive");
    if (!(c.t_total >= 0.0) || !std::isfinite(c.t_total)) fail("t_total", "must be nonnegative");
    if (c.n < 4 || c.n % 2 != 0) fail("n", "must be an even integer >= 4");
    if (!(c.box_length > 0.0)) fail("box_length", "must be positive");
    if (!(c.forcing_kappa_low > 0.0)) fail("forcing_kappa_low", "must be positive");
    if (!(c.forcing_kappa_high >= c.forcing_kappa_low)) fail("forcing_kappa_high", "must be >= forcing_kappa_low");
    if (!(c.forcing_amplitude >= 0.0)) fail("forcing_amplitude", "must be nonnegative");
    if (!(c.init_energy >= 0.0)) fail("init_energy", "must be nonnegative");
    if (!(c.init_peak > 0.0)) fail("init_peak", "must be positive");
    if (c.shells < 4) fail("shells", "must be at least 4");
    if (!(c.k0 > 0.0)) fail("k0", "must be positive");
    if (!(c.lambda_ratio > 1.0)) fail("lambda_ratio", "must exceed 1");
    const double abc = std::abs(c.coef_a) + std::abs(c.coef_b) + std::abs(c.coef_c);
    if (std::abs(c.coef_a + c.coef_b + c.coef_c) > 1e-14 * abc) {
        // Blame the first coefficient that was set explicitly.
        const char* key = "coef_c";
        for (const char* k : {"coef_c", "coef_b", "coef_a"}) {
            if (where(k) != "default") key = k;
        }
        fail(key, "must satisfy coef_a + coef_b + coef_c = 0");
    }
    if (c.forcing_shells < 0 || c.forcing_shells > c.shells) fail("forcing_shells", "must lie in [0, shells]");
    if (!(c.init_amplitude >= 0.0)) fail("init_amplitude", "must be nonnegative");
    if (!c.burn_in_auto && !(c.burn_in >= 0.0)) fail("burn_in", "must be nonnegative or auto");
    if (c.sample_stride < 1) fail("sample_stride", "must be at least 1");
    if (c.min_samples < 1) fail("min_samples", "must be at least 1");
    if (c.block_size < 1) fail("block_size", "must be at least 1");
    if (!increasing(c.hist_edges)) fail("hist_edges", "must be strictly increasing");
    if (!(c.enstrophy_cap > 0.0)) fail("enstrophy_cap", "must be positive");
    const double top = c.mode == Mode::Shell
                           ? (c.forcing_shells > 0 ? c.k0 * std::pow(c.lambda_ratio, c.forcing_shells) : 0.0)
                           : c.forcing_kappa_high;
    for (const auto& b : c.bands) {
        if (!(b.lo > top)) {
            fail("bands", "must lie above the forcing band (lower edges > " + format_double(top) + ")");
            break;
        }
    }
    if (!c.sweep_alphas.empty()) {
        bool ok = c.sweep_alphas.back() == 0.0;
        for (std::size_t i = 0; i < c.sweep_alphas.size(); ++i) {
            if (!(c.sweep_alphas[i] >= 0.0)) ok = false;
            if (i > 0 && !(c.sweep_alphas[i] < c.sweep_alphas[i - 1])) ok = false;
        }
        if (!ok) fail("sweep_alphas", "must be strictly decreasing and end at 0");
    }
    if (c.workers < 0) fail("workers", "must be nonnegative");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : UsageError([&] {
          std::string s = "invalid configuration:";
          for (const auto& e : errors) s += "\n  " + e;
          return s;
      }()),
      errors_(std::move(errors)) {}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    // Shortest representation that reads back to the same double.
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::vector<std::string> errors;
    std::map<std::string, int, std::less<>> seen;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = keys().find(key);
        if (it == keys().end()) {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
            continue;
        }
        if (const auto prev = seen.find(key); prev != seen.end()) {
            errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) +
                             "' (first set on line " + std::to_string(prev->second) + ")");
            continue;
        }
        seen.emplace(std::string(key), line_no);
        try {
            it->second.set(c, value);
        } catch (const BadValue& e) {
            errors.push_back("line " + std::to_string(line_no) + ": " + std::string(key) + " " + e.message);
        } catch (const UsageError& e) {
            errors.push_back("line " + std::to_string(line_no) + ": " + std::string(key) + " " + e.what());
        }
    }
    validate(
        c,
        [&](const char* key) {
            const auto it = seen.find(key);
            return it == seen.end() ? std::string("default") : "line " + std::to_string(it->second);
        },
        errors);
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_text(const RunConfig& c) {
    std::string s = "# nsvlab " NSV_VERSION " resolved configuration\n";
    for (const auto& [key, k] : keys()) s += key + " = " + k.get(c) + "\n";
    return s;
}

SimParams spectral_params(const RunConfig& c) {
    const auto lattice = make_lattice(c.n, c.box_length);
    SimParams p;
    p.nu = c.nu;
    p.alpha = c.alpha;
    p.dt = c.dt;
    p.t_total = c.t_total;
    p.forcing = random_band_field(lattice, c.forcing_seed, c.forcing_kappa_low, c.forcing_kappa_high,
                                  c.forcing_amplitude);
    return p;
}

ShellParams shell_params(const RunConfig& c) {
    ShellParams p;
    p.shells = c.shells;
    p.k0 = c.k0;
    p.ratio = c.lambda_ratio;
    p.a = c.coef_a;
    p.b = c.coef_b;
    p.c = c.coef_c;
    p.nu = c.nu;
    p.alpha = c.alpha;
    p.dt = c.dt;
    p.t_total = c.t_total;
    p.forcing = shell_forcing(c.shells, c.forcing_shells, c.forcing_amplitude);
    return p;
}

RunSettings run_settings(const RunConfig& c) {
    RunSettings s;
    s.auto_burn_in = c.burn_in_auto;
    s.stats.burn_in = c.burn_in_auto ? 0.0 : c.burn_in;
    s.stats.stride = c.sample_stride;
    s.stats.min_samples = c.min_samples;
    s.stats.block_size = c.block_size;
    s.stats.hist_edges = c.hist_edges;
    s.enstrophy_cap = c.enstrophy_cap;
    return s;
}

SweepPlan sweep_plan(const RunConfig& c) {
    if (c.sweep_alphas.empty()) throw UsageError("sweep needs sweep_alphas in the configuration");
    SweepPlan plan;
    plan.mode = c.mode;
    if (c.mode == Mode::Shell) {
        plan.shell = shell_params(c);
    } else {
        plan.spectral = spectral_params(c);
        plan.forcing_top = c.forcing_kappa_high;
    }
    plan.init_energy = c.init_energy;
    plan.init_peak = c.init_peak;
    plan.init_amplitude = c.init_amplitude;
    plan.alphas = c.sweep_alphas;
    plan.seeds = c.sweep_seeds.empty() ? std::vector<std::uint64_t>{c.seed} : c.sweep_seeds;
    plan.bands = c.bands;
    plan.settings = run_settings(c);
    plan.workers = static_cast<unsigned>(c.workers);
    return plan;
}

}  // namespace nsv
