#pragma once

#include <cstdint>

#include "qkdcal/keyrate.hpp"

namespace qkdcal {

// Trusted bounds on the receiver's component behaviour. These are inputs
// characterised offline; nothing here is estimated at run time.
struct ReceiverAssumptions {
    double eps_e = 0.0;       // residual disturbance of a test gate by outside pulses
    double eps_omega = 0.0;   // efficiency spread across the filter passband
    double eps_t = 0.0;       // efficiency spread across the inner gate
    double eps_i = 0.0;       // efficiency spread across field shapes
    double eps_s = 0.0;       // detector superlinearity bound (non-deflecting tests)
    double zeta_omega = 0.0;  // detected fraction outside the passband
    double zeta_k = 0.0;      // detected fraction in the wrong spatial mode
    double q_omega = 0.0;     // click probability bound for out-of-band pulses
};

void validate(const ReceiverAssumptions& a);

enum class TestMode { deflecting, non_deflecting };

// eps_e + eps_omega + eps_t + eps_i, with eps_s replacing eps_e when tests
// run without deflecting the line. Throws if the total exceeds 1.
double eps_total(const ReceiverAssumptions& a, TestMode mode);

// Raw counters of one session.
struct TestCounts {
    uint64_t test_gates = 0;    // test gates with the source firing
    uint64_t test_clicks = 0;
    uint64_t dark_gates = 0;    // test gates with the source off and line blocked
    uint64_t dark_clicks = 0;
    uint64_t signal_gates = 0;
    uint64_t signal_clicks = 0;
    uint64_t sifted_errors = 0;
    uint64_t sifted_bits = 0;
};

void validate(const TestCounts& c);

// Test-pulse source description.
enum class SourceKind { single_photon, poisson };

struct TestSourceConfig {
    SourceKind kind = SourceKind::single_photon;
    double mu = 0.1;                        // mean photon number (poisson only)
    double p_test = 0.05;                   // probability a gate is a test gate
    bool deflecting = true;                 // outside pulses blocked during tests
    double dark_calibration_fraction = 0.1; // test gates fired with the source off
    double deflection_leakage = 0.0;        // probability an outside pulse survives deflection
};

void validate(const TestSourceConfig& src);

struct ZetaResult {
    double zeta = 0.0;
    bool clamped = false;
};

// Fraction of detections that may originate outside the tested state space:
// zeta = 2*delta + max(zeta_omega, zeta_k), clamped to [0,1].
ZetaResult zeta_total(double delta_bar, const ReceiverAssumptions& a);

struct EfficiencyBound {
    double value = 0.0;
    bool clamped = false;        // raw bound left [0,1]
    bool no_information = false; // data carried no usable signal
};

// Lower bound on the in-gate single-photon efficiency from the measured test
// click rate. Deflecting mode: max(0, q_t - eps_tot). Non-deflecting mode
// expects the raw rate q_t' plus the signal yield and uses
// max(0, (q_t' - q_bar) - eps_tot) with eps_s in place of eps_e.
EfficiencyBound eta_t_single_photon(double q_t, const ReceiverAssumptions& a,
                                    TestMode mode, double q_bar = 0.0);

// (1 - zeta) * eta_t: extends the in-gate bound to all detections.
double eta_e_single_photon(double eta_t, double zeta);

// Lower bound from a phase-randomized weak laser with mean photon number mu
// and dark count rate d per gate:
// 1 - eps_tot + (1-d)/mu - (1-q_t)/(mu*exp(-mu)), clamped to [0,1].
// mode selects which epsilon enters eps_tot; the non-deflecting q_t' - q_bar
// subtraction is the caller's job (see estimate_pipeline).
EfficiencyBound eta_t_faint_laser(double q_t, double mu, double dark_rate,
                                  const ReceiverAssumptions& a,
                                  TestMode mode = TestMode::deflecting);

// Same composition as the single-photon case.
double eta_e_faint_laser(double eta_t, double zeta);

struct DarkCountBound {
    double point = 0.0;       // dark_clicks / dark_gates
    double upper = 0.0;       // one-sided Clopper-Pearson upper bound
    double confidence = 0.0;
};

// Dark count rate per gate from the source-off calibration gates. Throws
// when no calibration gates were recorded.
DarkCountBound dark_count_bound(const TestCounts& c, double confidence = 1.0 - 1e-6);

struct EstimateDiagnostics {
    double q_t_raw = 0.0;    // measured test click rate
    double q_t_used = 0.0;   // after the non-deflecting subtraction, if any
    double eps_tot = 0.0;
    double zeta = 0.0;
    bool zeta_clamped = false;
    double eta_t = 0.0;
    bool eta_t_clamped = false;
    bool eta_t_no_information = false;
    DarkCountBound dark;
    bool dark_measured = false;
    // Monte-Carlo standard errors of the point estimates (reported only;
    // the rate formulas use the point values).
    double se_q_bar = 0.0;
    double se_delta_bar = 0.0;
    double se_q_t = 0.0;
    bool eta_e_exceeds_eta_max = false;
    bool q_omega_consistent = true;  // zeta_omega <= q_omega / q_bar
};

struct EstimateResult {
    KeyRateInputs inputs;
    EstimateDiagnostics diag;
};

// Full estimation chain: session counts -> (q_bar, delta_bar, eta_e_bar)
// plus per-step diagnostics. eta_max is carried into the returned inputs and
// checked against the estimate. Throws on empty signal data or, for a
// poisson source, missing dark calibration.
EstimateResult estimate_pipeline(const TestCounts& counts, const TestSourceConfig& source,
                                 const ReceiverAssumptions& a, double eta_max = 1.0);

// Expected click rate of a weak Poisson pulse when each photon is detected
// independently with probability eta on top of dark rate d:
// 1 - (1-d) * exp(-mu * eta).
double poisson_click_probability(double mu, double eta, double dark_rate);

}  // namespace qkdcal
