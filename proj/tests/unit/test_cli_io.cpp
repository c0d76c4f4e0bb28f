#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsv/config.hpp"
#include "nsv/reports.hpp"
#include "nsv/snapshot.hpp"

using namespace nsv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("nsv_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::vector<std::string> out;
    std::ifstream in(p);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig c = parse_config(R"(
# comment line
mode = spectral3d
n = 16          # trailing comment
nu = 0.02
alpha = 2.5e-1
bands = 3:6, 6:inf
burn_in = 4.5
sweep_alphas = 0.1, 0.01, 0
sweep_seeds = 1,2,3
output_dir = /tmp/out
)");
    CHECK(c.mode == Mode::Spectral3d);
    CHECK(c.n == 16);
    CHECK(c.nu == 0.02);
    CHECK(c.alpha == 0.25);
    REQUIRE(c.bands.size() == 2u);
    CHECK(c.bands[1].lo == 6.0);
    CHECK(std::isinf(c.bands[1].hi));
    CHECK_FALSE(c.burn_in_auto);
    CHECK(c.burn_in == 4.5);
    CHECK(c.sweep_alphas == std::vector<double>{0.1, 0.01, 0.0});
    CHECK(c.sweep_seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.output_dir == "/tmp/out");
    CHECK(parse_config("").mode == Mode::Shell);
    CHECK(parse_config("burn_in = auto").burn_in_auto);
}

TEST_CASE("config errors are collected with line numbers") {
    try {
        parse_config("nu = 1e-3\nbogus = 1\nnu = 2\nn = sixteen\ndt = -1\ncoef_a = 2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const auto& errs = e.errors();
        REQUIRE(errs.size() == 5u);
        CHECK(errs[0].rfind("line 2: unknown key 'bogus'", 0) == 0);
        CHECK(errs[1].find("line 3: duplicate key 'nu' (first set on line 1)") == 0);
        CHECK(errs[2].find("line 4: n expects an integer") == 0);
        CHECK(errs[3].find("line 5: dt") == 0);
        CHECK(errs[4].find("line 6: coef_a must satisfy") == 0);
        (void)errs;
    }
    try {
        parse_config("coef_a = 2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.errors().size() == 1u);
        CHECK(e.errors()[0].find("coef_a + coef_b + coef_c = 0") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("no equals sign"), ConfigError);
    CHECK_THROWS_AS(parse_config("sweep_alphas = 0.1, 0.2, 0"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = shell\nbands = 0.1:1"), ConfigError);
    CHECK_THROWS_AS(parse_config("n = 15"), ConfigError);
    CHECK_THROWS_AS(parse_config("bands = 3-6"), ConfigError);
    CHECK_THROWS_AS(parse_config("nu = 1e-3x"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), IoError);
}

TEST_CASE("config text round trip is exact") {
    RunConfig c;
    c.mode = Mode::Spectral3d;
    c.nu = 0.1 + 0.2;  // not a short decimal
    c.alpha = 1.0 / 3.0;
    c.dt = 1e-300;
    c.box_length = 2.0 * std::numbers::pi;
    c.bands = {ShellBand(2.5, 6.0), ShellBand(6.0, INFINITY)};
    c.flux_kappas = {2.5, 4.0 / 3.0};
    c.hist_edges = {0.0, 0.125, 1e10};
    c.sweep_alphas = {0.3, 0.1, 0.0};
    c.sweep_seeds = {18446744073709551615ull, 2};
    c.burn_in_auto = false;
    c.burn_in = 7.25;
    c.output_dir = "runs/a b";
    const RunConfig back = parse_config(config_to_text(c));
    CHECK(back == c);
    CHECK(parse_config(config_to_text(RunConfig{})) == RunConfig{});
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(INFINITY) == "inf");
}

TEST_CASE("parsing ignores the C locale") {
    const char* old = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = old ? old : "C";
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) {
        CHECK(parse_config("nu = 0.5").nu == 0.5);
        CHECK(format_double(0.5) == "0.5");
    }
    std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("config builders") {
    RunConfig c = parse_config("mode = shell\nshells = 12\nforcing_shells = 1\nforcing_amplitude = 0.25\nalpha = 0.01\n"
                               "sweep_alphas = 0.1, 0\nbands = 1:4\n");
    const ShellParams sp = shell_params(c);
    CHECK(sp.shells == 12);
    CHECK(sp.forcing_top() == 1);
    CHECK(sp.forcing[0] == std::complex<double>(0.25, 0.25));
    CHECK(sp.alpha == 0.01);
    const SweepPlan plan = sweep_plan(c);
    CHECK(plan.alphas.size() == 2u);
    CHECK(plan.seeds == std::vector<std::uint64_t>{1});
    CHECK_NOTHROW(plan.validate());
    CHECK(run_settings(c).auto_burn_in);

    c = parse_config("mode = spectral3d\nn = 8\nforcing_amplitude = 0.5\n");
    const SimParams p = spectral_params(c);
    CHECK(p.forcing.lattice().resolution() == 8);
    CHECK(p.forcing.norm() == doctest::Approx(0.5));
    CHECK_THROWS_AS(sweep_plan(c), UsageError);
}

TEST_CASE("snapshot round trip") {
    SUBCASE("3D") {
        Snapshot s;
        s.mode = Mode::Spectral3d;
        s.box_length = 4.0;
        s.nu = 0.01;
        s.alpha = 0.2;
        s.time = 12.5;
        s.seed = 99;
        s.velocity = random_field(make_lattice(8, 4.0), 4, 1.0, 2.0);
        const std::string bytes = encode_snapshot(s);
        CHECK(bytes.size() == 60u + 8u * 8u * 5u * 3u * 16u);
        const Snapshot back = decode_snapshot(bytes);
        CHECK(back.mode == Mode::Spectral3d);
        CHECK(back.size() == 8);
        CHECK(back.time == 12.5);
        CHECK(back.seed == 99u);
        CHECK(back.velocity.lattice() == s.velocity.lattice());
        CHECK(std::equal(back.velocity.data().begin(), back.velocity.data().end(), s.velocity.data().begin()));
    }
    SUBCASE("shell") {
        Snapshot s;
        s.box_length = 0.0625;
        s.shell = {{1.0, -2.0}, {0.5, 0.25}, {1e-300, 3.0}};
        const Snapshot back = decode_snapshot(encode_snapshot(s));
        CHECK(back.mode == Mode::Shell);
        CHECK(back.shell == s.shell);
        CHECK(back.box_length == 0.0625);
    }
}

TEST_CASE("snapshot layout is little endian with the documented header") {
    Snapshot s;
    s.shell = {{1.0, 0.0}};
    s.nu = 1.0;
    const std::string b = encode_snapshot(s);
    CHECK(b.substr(0, 4) == "NSVS");
    CHECK(static_cast<unsigned char>(b[4]) == 1);  // version
    CHECK(static_cast<unsigned char>(b[8]) == 1);  // shell mode tag
    CHECK(static_cast<unsigned char>(b[12]) == 1); // one shell
    // nu = 1.0 -> 0x3ff0000000000000 at offset 24
    CHECK(static_cast<unsigned char>(b[31]) == 0x3f);
    CHECK(static_cast<unsigned char>(b[30]) == 0xf0);
    CHECK(b.size() == 60u + 16u);
}

TEST_CASE("snapshot corruption is reported distinctly") {
    Snapshot s;
    s.shell = {{1.0, 2.0}, {3.0, 4.0}};
    const std::string good = encode_snapshot(s);

    std::string bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_snapshot(bad), SnapshotMagicError);

    bad = good;
    bad[4] = 7;
    try {
        decode_snapshot(bad);
        FAIL("expected version error");
    } catch (const SnapshotVersionError& e) {
        CHECK(e.found() == 7u);
        const std::string msg = e.what();
        CHECK(msg.find('7') != std::string::npos);
        CHECK(msg.find('1') != std::string::npos);
    }

    bad = good;
    bad[good.size() - 3] ^= 0x10;
    CHECK_THROWS_AS(decode_snapshot(bad), SnapshotChecksumError);
    bad = good;
    bad[20] ^= 0x01;  // header field covered by the checksum
    CHECK_THROWS_AS(decode_snapshot(bad), SnapshotChecksumError);
    CHECK_THROWS_AS(decode_snapshot(good.substr(0, good.size() - 1)), SnapshotChecksumError);
    CHECK_THROWS_AS(decode_snapshot(good.substr(0, 30)), SnapshotChecksumError);
    CHECK_THROWS_AS(decode_snapshot(good + "x"), SnapshotChecksumError);
    CHECK_THROWS_AS(decode_snapshot(""), SnapshotMagicError);

    const fs::path dir = scratch("snap");
    write_snapshot((dir / "a.snap").string(), s);
    CHECK(read_snapshot((dir / "a.snap").string()).shell == s.shell);
    CHECK_THROWS_AS(read_snapshot((dir / "missing.snap").string()), IoError);
    CHECK_THROWS_AS(write_snapshot((dir / "no/such/dir.snap").string(), s), IoError);
    fs::remove_all(dir);
}

TEST_CASE("reports") {
    const fs::path dir = scratch("reports");
    ReportSet set;
    set.config.mode = Mode::Shell;
    set.summary.push_back("note: hello");
    emit_reports((dir / "empty").string(), set);
    CHECK(lines_of(dir / "empty" / "spectrum.csv") == std::vector<std::string>{"shell,E,stderr"});
    CHECK(lines_of(dir / "empty" / "budget.csv") ==
          std::vector<std::string>{"band_lo,band_hi,dissipation,net_transfer,residual,stderr"});
    CHECK(lines_of(dir / "empty" / "balance.csv") ==
          std::vector<std::string>{"E_lo,E_hi,samples,residual,stderr,undersampled"});
    CHECK(lines_of(dir / "empty" / "sweep.csv") ==
          std::vector<std::string>{"alpha,band_lo,band_hi,kinetic_energy,ke_stderr,ke_delta,ke_delta_stderr,"
                                   "net_transfer,nt_stderr,nt_delta,nt_delta_stderr,status"});
    CHECK(lines_of(dir / "empty" / "gevrey.csv") == std::vector<std::string>{"shell,logE,fit_slope,r2,in_fit"});
    const std::string meta = slurp(dir / "empty" / "meta.txt");
    CHECK(meta.find("# nsvlab version") == 0);
    CHECK(meta.find("# note: hello") != std::string::npos);
    // The config echo parses back to the same configuration.
    CHECK(parse_config(meta) == set.config);

    BudgetReport b;
    b.spectrum = {0.5, 0.25, 0.0};
    b.spectrum_stderr = {0.01, 0.02, 0.0};
    BudgetRow row;
    row.band_lo = 1.0;
    row.band_hi = INFINITY;
    row.dissipation = {2.0, 0.1};
    row.net_transfer = {2.5, 0.1};
    row.residual = 0.25;
    b.bands = {row};
    b.balance = {BalanceRow{0.0, INFINITY, 12, 0.125, 0.01, false}};
    b.gevrey = GevreyFit{true, -2.0, 1.0, 0.99, 1, 1};
    set.budget = b;
    SweepReport sw;
    sw.bands = {ShellBand(1.0, 4.0)};
    AlphaRow ar;
    ar.alpha = 0.5;
    ar.status = RunStatus::Failed;
    ar.net_transfer = {{1.0, 0.5}};
    ar.nt_delta = {{0.25, 0.5}};
    sw.rows = {ar};
    set.sweep = sw;
    emit_reports((dir / "full").string(), set);
    const auto spectrum = lines_of(dir / "full" / "spectrum.csv");
    REQUIRE(spectrum.size() == 4u);
    CHECK(spectrum[1] == "1,0.5,0.01");
    CHECK(lines_of(dir / "full" / "budget.csv")[1] == "1,inf,2,2.5,0.25,0");
    CHECK(lines_of(dir / "full" / "balance.csv")[1] == "0,inf,12,0.125,0.01,0");
    const auto gev = lines_of(dir / "full" / "gevrey.csv");
    REQUIRE(gev.size() == 3u);  // the zero bin has no logarithm
    CHECK(gev[2] == "2," + format_double(std::log(0.25)) + ",-2,0.99,1");
    CHECK(lines_of(dir / "full" / "sweep.csv")[1] == "0.5,1,4,0,0,0,0,1,0.5,0.25,0.5,failed");

    fs::path blocker = dir / "file";
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS(emit_reports((blocker / "sub").string(), set), IoError);
    fs::remove_all(dir);
}
