#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "qkdcal/estimation.hpp"
#include "qkdcal/rng.hpp"

namespace qkdcal {

// Gated single-photon detector with a trapezoidal efficiency profile over
// the normalized gate [0,1]: linear rise, flat plateau, linear fall. The
// plateau is the inner gate; bit-mapped gating randomizes everything
// detected outside it.
struct DetectorModel {
    double eta_plateau = 1.0;
    double rise_fraction = 0.2;
    double fall_fraction = 0.2;
    double dark_rate = 0.0;  // dark click probability per gate
    bool blindable = true;
    double blind_click_threshold = 1.0;  // intensity forcing a click when blinded
    double superlinearity = 0.0;         // extra click probability on coincident pulses
};

void validate(const DetectorModel& det);

// Single-photon efficiency at in-gate time t; zero outside [0,1].
double efficiency_at(const DetectorModel& det, double t);

bool in_inner_gate(const DetectorModel& det, double t);

// Adversary strategies -------------------------------------------------------

// Passive channel with the given transmission loss.
struct HonestChannel {
    double loss = 0.0;
};

enum class EveBasisPolicy { uniform_random, fixed_z };

// Intercept-resend with detector blinding: on a blinded gate Eve measures
// the incoming pulse in her own basis and fires a bright trigger pulse
// carrying her result; on unblinded gates she blocks the line so that the
// error rate stays flat.
struct BlindingAttack {
    double blind_fraction = 1.0;
    double trigger_intensity = 1.5;
    EveBasisPolicy basis_policy = EveBasisPolicy::uniform_random;
};

// Control of both the line and the detector state that meets the privacy
// amplification bound with equality: a q*eta fraction of gates runs fully
// sensitive with errors delta/eta, faked detections supply the remaining
// q*(1-eta) yield error-free, and the rest of the line is dark.
struct TightnessAttack {
    double eta_bar_target = 0.5;
    double delta_bar_target = 0.0;
    double q_bar_target = 0.5;
};

// Delays every signal pulse by a fixed fraction of the gate.
struct TimeShiftAttack {
    double shift = 0.0;
};

using AttackStrategy =
    std::variant<HonestChannel, BlindingAttack, TightnessAttack, TimeShiftAttack>;

void validate(const AttackStrategy& atk, const DetectorModel& det);

// Session bookkeeping --------------------------------------------------------

enum class GateKind : uint8_t { signal, test, dark };

enum class AttackState : uint8_t {
    none,       // honest passthrough
    blinded,    // detector held in the blind state, faked pulse sent
    blocked,    // line dark (blinding attack, unblinded gate)
    sensitive,  // detector forced fully sensitive (tightness)
    vacuum,     // tightness: no pulse, detector sensitive
    shifted     // time-shifted signal pulse
};

struct TraceRecord {
    uint64_t gate_index = 0;
    GateKind kind = GateKind::signal;
    AttackState attack_state = AttackState::none;
    bool click = false;
    double time = -1.0;   // in-gate detection time, -1 when no click
    int bit = -1;         // recorded bit, -1 when not applicable
    int basis_match = -1; // -1 when not applicable
    int error = -1;       // -1 when not applicable
};

struct SessionResult {
    TestCounts counts;
    uint64_t eve_known_sifted = 0;
    double eve_known_fraction = 0.0;  // of sifted bits
    // Ground truth only the simulator can see: sum over detected signal
    // gates of the gate's true minimum in-gate detection probability.
    double sum_eta_detected = 0.0;
    std::vector<TraceRecord> trace;  // filled only when requested

    double true_eta_bar() const {
        return counts.signal_clicks > 0
                   ? sum_eta_detected / static_cast<double>(counts.signal_clicks)
                   : 0.0;
    }
};

// Gate-by-gate session. Deterministic in (configuration, seed): every gate
// consumes randomness only from its own counter-based substream.
SessionResult run_session(uint64_t n_gates, const DetectorModel& det,
                          const TestSourceConfig& src, const AttackStrategy& atk,
                          uint64_t seed, bool record_trace = false);

// Per-gate bit decoding under bit-mapped gating -------------------------------

enum class BitRegion { inner, edge, outside };

struct BitAssignment {
    BitRegion region = BitRegion::outside;
    int bit = -1;
};

// Detections inside the inner gate decode to the physical bit through the
// per-gate detector/bit mapping; edge detections come out uniformly random;
// outside the gate nothing is recorded.
BitAssignment bitmap_gate_assign(double detection_time, const DetectorModel& det,
                                 int physical_bit, PhiloxStream& rng);

// Raw detector response -------------------------------------------------------

struct IncidentPulse {
    int photons = 0;        // photon number of a quantum pulse
    double intensity = 0.0; // classical brightness, matters only when blinded
    double time = 0.5;      // in-gate arrival time
};

// Unblinded: clicks with probability 1-(1-eta(t))^k, OR-ed with the dark
// rate. Blinded: single photons never click; a pulse at or above the blind
// click threshold clicks deterministically. One click per gate by
// construction.
bool detector_respond(const IncidentPulse& pulse, const DetectorModel& det, bool blinded,
                      PhiloxStream& rng);

// Bound comparison -------------------------------------------------------------

struct EveInfoReport {
    double eve_known_fraction = 0.0;
    double bound = 0.0;       // permitted knowledge per received bit
    double margin = 0.0;      // bound - fraction
    double tolerance = 0.0;   // statistical slack used by the flag
    bool violated = false;    // fraction exceeded bound beyond the slack
    bool out_of_regime = false;
};

// Compares the simulated adversary knowledge against the privacy
// amplification bound evaluated at the session averages, with eta_bar
// recovered from the estimate through the worst-case non-detection relation.
EveInfoReport eve_information(const SessionResult& result, const KeyRateInputs& bound_inputs);

// Session averages as the bound sees them, from the simulator's ground
// truth; eta_e_bar is the worst-case completion of the detection-weighted
// average.
KeyRateInputs true_keyrate_inputs(const SessionResult& result);

}  // namespace qkdcal
