// Drives the installed binary end to end: exit codes, determinism, the
// simulate -> estimate round trip, and the figure data files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "qkdcal/config.hpp"
#include "qkdcal/estimation.hpp"
#include "qkdcal/keyrate.hpp"

namespace fs = std::filesystem;
using namespace qkdcal;

namespace {

std::string cli_path() {
    const char* p = std::getenv("QKDCAL_CLI");
    REQUIRE_MESSAGE(p != nullptr, "QKDCAL_CLI must point at the binary");
    return p;
}

struct CliResult {
    int exit_code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out_file =
        fs::temp_directory_path() / ("qkdcal_cli_out_" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        "\"" + cli_path() + "\" " + args + " > \"" + out_file.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    fs::remove(out_file);
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("qkdcal_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("rate exit codes follow the security verdict") {
    CHECK(run_cli("rate --q-bar 1 --delta-bar 0 --eta-e 1").exit_code == 0);
    CHECK(run_cli("rate --q-bar 0.4 --delta-bar 0 --eta-e 0.5").exit_code == 2);
    CHECK(run_cli("rate --q-bar 1.7 --delta-bar 0 --eta-e 0.5").exit_code == 1);
}

TEST_CASE("unknown config keys are rejected") {
    const fs::path dir = fresh_dir("badcfg");
    std::ofstream(dir / "bad.ini") << "[keyrate]\nq_bar = 0.5\nbogus_key = 1\n";
    const auto r = run_cli("rate --config " + (dir / "bad.ini").string());
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("bogus_key") != std::string::npos);

    std::ofstream(dir / "bad2.ini") << "[nosuchsection]\nx = 1\n";
    CHECK(run_cli("rate --config " + (dir / "bad2.ini").string()).exit_code == 1);
}

TEST_CASE("identical invocations produce byte-identical files") {
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    CHECK(run_cli("figures --which 5 --out " + a.string()).exit_code == 0);
    CHECK(run_cli("figures --which 5 --out " + b.string()).exit_code == 0);
    CHECK(read_file(a / "fig5.csv") == read_file(b / "fig5.csv"));
    CHECK(read_file(a / "fig5.svg") == read_file(b / "fig5.svg"));
}

TEST_CASE("simulate then estimate reproduces the in-process pipeline exactly") {
    const fs::path dir = fresh_dir("roundtrip");
    std::ofstream(dir / "session.ini") << R"(
[detector]
eta_plateau = 0.4
dark_rate = 2e-5

[source]
kind = poisson
mu = 0.1
p_test = 0.4
dark_calibration_fraction = 0.12

[attack]
kind = honest
loss = 0.1

[run]
n_gates = 120000
seed = 9
)";
    const auto sim = run_cli("simulate --config " + (dir / "session.ini").string() + " --out " +
                             (dir / "out").string());
    REQUIRE(sim.exit_code == 0);
    REQUIRE(fs::exists(dir / "out" / "counts.ini"));

    const auto est = run_cli("estimate --counts " + (dir / "out" / "counts.ini").string());
    REQUIRE((est.exit_code == 0 || est.exit_code == 2));
    const auto kv = parse_kv(est.output);

    const RunConfig cfg = load_config((dir / "out" / "counts.ini").string());
    REQUIRE(cfg.has_counts);
    const auto expected =
        estimate_pipeline(cfg.counts, cfg.source, cfg.assumptions, cfg.keyrate.eta_max);
    CHECK(kv.at("q_bar") == format_exact(expected.inputs.q_bar));
    CHECK(kv.at("delta_bar") == format_exact(expected.inputs.delta_bar));
    CHECK(kv.at("eta_e_bar") == format_exact(expected.inputs.eta_e_bar));
    CHECK(kv.at("q_t_raw") == format_exact(expected.diag.q_t_raw));
    CHECK(kv.at("rate_estimated") ==
          format_exact(rate_estimated(expected.inputs).rate));
}

TEST_CASE("simulate writes a parseable trace on request") {
    const fs::path dir = fresh_dir("trace");
    std::ofstream(dir / "cfg.ini") << "[run]\nn_gates = 500\nseed = 3\n";
    const auto sim = run_cli("simulate --config " + (dir / "cfg.ini").string() + " --trace --out " +
                             (dir / "out").string());
    REQUIRE(sim.exit_code == 0);
    const std::string trace = read_file(dir / "out" / "trace.tsv");
    size_t lines = 0;
    for (char ch : trace) lines += ch == '\n';
    CHECK(lines == 501);  // header plus one record per gate
    CHECK(trace.find("signal") != std::string::npos);
}

TEST_CASE("figure 3 baseline curve crosses zero at the origin") {
    const fs::path dir = fresh_dir("fig3");
    REQUIRE(run_cli("figures --which 3 --out " + dir.string()).exit_code == 0);
    std::ifstream in(dir / "fig3.csv");
    std::string line;
    bool found_origin = false;
    bool positive_above = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'q') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 5);
        const double q = std::stod(cells[0]);
        const double delta = std::stod(cells[1]);
        const double eta_e = std::stod(cells[2]);
        const double rate = std::stod(cells[3]);
        if (q == 1.0 && delta == 0.0) {
            if (eta_e == 0.0) {
                found_origin = true;
                CHECK(rate == 0.0);
            } else if (rate <= 0.0) {
                positive_above = false;
            }
        }
    }
    CHECK(found_origin);
    CHECK(positive_above);
}

TEST_CASE("unwritable output directory is an error exit") {
    CHECK(run_cli("figures --which 4 --out /proc/qkdcal_nowhere").exit_code == 1);
}

TEST_CASE("sweep at the ceiling matches the constant-efficiency rate") {
    // one sweep per error-rate curve, estimate pinned to the ceiling
    for (const double delta : {0.0, 0.02, 0.05}) {
        const auto r = run_cli("sweep --param eta_ceiling --min 0.05 --max 1 --steps 19 "
                               "--q-bar 0.7 --delta-bar " +
                               format_exact(delta));
        REQUIRE(r.exit_code == 0);
        std::stringstream ss(r.output);
        std::string line;
        std::getline(ss, line);  // header
        size_t rows = 0;
        while (std::getline(ss, line)) {
            std::stringstream ls(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            REQUIRE(cells.size() == 11);
            const double eta_e = std::stod(cells[5]);
            const double rate_cap = std::stod(cells[9]);
            CHECK(rate_cap ==
                  doctest::Approx(rate_constant_eta(eta_e, delta)).epsilon(1e-8));
            ++rows;
        }
        CHECK(rows == 20);
    }
}
