#include "nsv/reports.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#ifndef NSV_VERSION
#define NSV_VERSION "unknown"
#endif

namespace nsv {

namespace {

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path.string()), out_(path) {
        if (!out_) throw IoError("cannot write '" + path_ + "'");
        out_ << header << '\n';
    }

    template <typename... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    ~CsvFile() noexcept(false) {
        out_.flush();
        if (!out_ && std::uncaught_exceptions() == 0) throw IoError("failed writing '" + path_ + "'");
    }

private:
    static std::string cell(double x) { return format_double(x); }
    static std::string cell(std::size_t x) { return std::to_string(x); }
    static std::string cell(bool x) { return x ? "1" : "0"; }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }

    std::string path_;
    std::ofstream out_;
};

void write_spectrum(const std::filesystem::path& dir, const ReportSet& r) {
    CsvFile f(dir / "spectrum.csv", "shell,E,stderr");
    if (!r.budget) return;
    const auto& b = *r.budget;
    for (std::size_t i = 0; i < b.spectrum.size(); ++i) {
        const double se = i < b.spectrum_stderr.size() ? b.spectrum_stderr[i] : 0.0;
        f.row(shell_label(r.config.mode, i), b.spectrum[i], se);
    }
}

void write_budget(const std::filesystem::path& dir, const ReportSet& r) {
    CsvFile f(dir / "budget.csv", "band_lo,band_hi,dissipation,net_transfer,residual,stderr");
    if (!r.budget) return;
    for (const auto& row : r.budget->bands) {
        f.row(row.band_lo, row.band_hi, row.dissipation.mean, row.net_transfer.mean, row.residual, row.stderr_);
    }
}

void write_balance(const std::filesystem::path& dir, const ReportSet& r) {
    CsvFile f(dir / "balance.csv", "E_lo,E_hi,samples,residual,stderr,undersampled");
    if (!r.budget) return;
    for (const auto& row : r.budget->balance) {
        f.row(row.e_lo, row.e_hi, row.samples, row.residual, row.stderr_, row.undersampled);
    }
}

void write_sweep(const std::filesystem::path& dir, const ReportSet& r) {
    CsvFile f(dir / "sweep.csv",
              "alpha,band_lo,band_hi,kinetic_energy,ke_stderr,ke_delta,ke_delta_stderr,"
              "net_transfer,nt_stderr,nt_delta,nt_delta_stderr,status");
    if (!r.sweep) return;
    const auto& s = *r.sweep;
    for (const auto& row : s.rows) {
        const std::string status = status_name(row.status);
        if (s.bands.empty()) {
            f.row(row.alpha, "", "", row.kinetic.mean, row.kinetic.stderr_, row.ke_delta.mean, row.ke_delta.stderr_,
                  "", "", "", "", status);
        }
        for (std::size_t b = 0; b < s.bands.size(); ++b) {
            const Estimate nt = b < row.net_transfer.size() ? row.net_transfer[b] : Estimate{};
            const Estimate nd = b < row.nt_delta.size() ? row.nt_delta[b] : Estimate{};
            f.row(row.alpha, s.bands[b].lo, s.bands[b].hi, row.kinetic.mean, row.kinetic.stderr_, row.ke_delta.mean,
                  row.ke_delta.stderr_, nt.mean, nt.stderr_, nd.mean, nd.stderr_, status);
        }
    }
}

void write_gevrey(const std::filesystem::path& dir, const ReportSet& r) {
    CsvFile f(dir / "gevrey.csv", "shell,logE,fit_slope,r2,in_fit");
    if (!r.budget) return;
    const auto& b = *r.budget;
    const auto& g = b.gevrey;
    for (std::size_t i = 0; i < b.spectrum.size(); ++i) {
        if (!(b.spectrum[i] > 0.0)) continue;
        const bool in_fit = g.conclusive && i >= g.first && i <= g.last;
        f.row(shell_label(r.config.mode, i), std::log(b.spectrum[i]), g.conclusive ? g.slope : NAN,
              g.conclusive ? g.r2 : NAN, in_fit);
    }
}

void write_meta(const std::filesystem::path& dir, const ReportSet& r) {
    const auto path = (dir / "meta.txt").string();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "# nsvlab version " << NSV_VERSION << '\n';
    out << config_to_text(r.config);
    if (r.budget) {
        const auto& b = *r.budget;
        out << "# window: " << format_double(b.window_start) << " .. " << format_double(b.window_end) << '\n';
        out << "# samples: " << b.samples << '\n';
        out << "# injection: " << format_double(b.injection.mean) << " +- " << format_double(b.injection.stderr_)
            << '\n';
        out << "# dissipation: " << format_double(b.dissipation.mean) << " +- "
            << format_double(b.dissipation.stderr_) << '\n';
        out << "# global_residual: " << format_double(b.global_residual) << '\n';
        out << "# kinetic_energy: " << format_double(b.kinetic.mean) << '\n';
        out << "# kolmogorov_eta: " << format_double(b.kolmogorov_eta) << '\n';
        out << "# support_max_ratio: " << format_double(b.support.max_ratio) << '\n';
        out << "# reynolds_residual: " << format_double(b.reynolds) << '\n';
        out << "# gevrey: " << (b.gevrey.conclusive ? "tau=" + format_double(b.gevrey.tau) : "inconclusive")
            << '\n';
    }
    if (r.sweep) {
        out << "# sweep baseline alpha: " << format_double(r.sweep->baseline_alpha)
            << (r.sweep->baseline_substituted ? " (substituted)" : "") << '\n';
    }
    for (const auto& line : r.summary) out << "# " << line << '\n';
    if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void emit_reports(const std::string& dir, const ReportSet& reports) {
    const std::filesystem::path root(dir);
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec || !std::filesystem::is_directory(root)) {
        throw IoError("cannot create output directory '" + dir + "'" + (ec ? ": " + ec.message() : ""));
    }
    write_spectrum(root, reports);
    write_budget(root, reports);
    write_balance(root, reports);
    write_sweep(root, reports);
    write_gevrey(root, reports);
    write_meta(root, reports);
}

}  // namespace nsv
