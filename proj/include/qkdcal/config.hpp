#pragma once

#include <iosfwd>
#include <string>

#include "qkdcal/estimation.hpp"
#include "qkdcal/sim.hpp"

namespace qkdcal {

struct SweepSpec {
    std::string parameter;  // one of q_bar, delta_bar, eta_e_bar, eta_max
    double min = 0.0;
    double max = 1.0;
    int steps = 100;
};

// Everything a command can take from a config file. Sections are optional;
// `has_*` records which ones were present so commands can demand them.
struct RunConfig {
    KeyRateInputs keyrate;
    bool has_keyrate = false;
    ReceiverAssumptions assumptions;
    bool has_assumptions = false;
    DetectorModel detector;
    bool has_detector = false;
    TestSourceConfig source;
    bool has_source = false;
    AttackStrategy attack = HonestChannel{};
    uint64_t n_gates = 100000;
    uint64_t seed = 1;
    bool trace = false;
    SweepSpec sweep;
    bool has_sweep = false;
    TestCounts counts;
    bool has_counts = false;
};

// Parses the key = value / [section] format documented in the README.
// Unknown sections or keys are errors (std::invalid_argument), as are
// malformed values.
RunConfig parse_config(std::istream& in, const std::string& origin = "<stream>");
RunConfig load_config(const std::string& path);

// Counts file written after a simulation: the [counts] section plus an echo
// of the sections the estimator needs, so the file is self-contained.
void write_counts_file(std::ostream& out, const TestCounts& counts, const RunConfig& cfg);
void write_counts_file(const std::string& path, const TestCounts& counts,
                       const RunConfig& cfg);

// Full-precision decimal form that parses back to the identical double.
std::string format_exact(double v);

}  // namespace qkdcal
