#include "qkdcal/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkdcal {

namespace {

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

// Everything Eve decided for one gate, drawn before the gate type is known:
// the random interleaving of signal, test and calibration gates is exactly
// what she cannot see through.
struct GateAction {
    bool blinded = false;
    double eta_override = -1.0;  // >= 0 replaces the native profile
    bool has_pulse = false;
    bool is_trigger = false;
    double intensity = 0.0;
    int pulse_basis = 0;
    int pulse_bit = 0;
    double flip_prob = 0.0;  // error injected into a passed-through photon
    double arrival = 0.5;
    bool eve_knows = false;
    AttackState label = AttackState::none;
};

GateAction draw_action(const AttackStrategy& atk, const DetectorModel& det, int alice_basis,
                       int alice_bit, PhiloxStream& rng) {
    GateAction g;
    if (const auto* honest = std::get_if<HonestChannel>(&atk)) {
        g.has_pulse = rng.bernoulli(1.0 - honest->loss);
        g.pulse_basis = alice_basis;
        g.pulse_bit = alice_bit;
        return g;
    }
    if (const auto* shift = std::get_if<TimeShiftAttack>(&atk)) {
        g.has_pulse = true;
        g.pulse_basis = alice_basis;
        g.pulse_bit = alice_bit;
        g.arrival = 0.5 + shift->shift;
        g.label = AttackState::shifted;
        return g;
    }
    if (const auto* blind = std::get_if<BlindingAttack>(&atk)) {
        const bool blinded = rng.bernoulli(blind->blind_fraction);
        const int eve_basis =
            blind->basis_policy == EveBasisPolicy::uniform_random ? rng.bit() : 0;
        const int eve_bit = eve_basis == alice_basis ? alice_bit : rng.bit();
        if (blinded) {
            g.blinded = true;
            g.has_pulse = true;
            g.is_trigger = true;
            g.intensity = blind->trigger_intensity;
            g.pulse_basis = eve_basis;
            g.pulse_bit = eve_bit;
            g.eve_knows = true;
            g.label = AttackState::blinded;
        } else {
            g.label = AttackState::blocked;
        }
        return g;
    }
    const auto& tight = std::get<TightnessAttack>(atk);
    const double p_sensitive = tight.q_bar_target * tight.eta_bar_target;
    const double p_faked = 2.0 * tight.q_bar_target * (1.0 - tight.eta_bar_target);
    const double u = rng.next_unit();
    if (u < p_sensitive) {
        g.eta_override = 1.0;
        g.has_pulse = true;
        g.pulse_basis = alice_basis;
        g.pulse_bit = alice_bit;
        g.flip_prob = tight.eta_bar_target > 0.0
                          ? tight.delta_bar_target / tight.eta_bar_target
                          : 0.0;
        g.label = AttackState::sensitive;
    } else if (u < p_sensitive + p_faked) {
        const int eve_basis = rng.bit();
        g.blinded = true;
        g.has_pulse = true;
        g.is_trigger = true;
        g.intensity = det.blind_click_threshold;  // clicks on basis match only
        g.pulse_basis = eve_basis;
        g.pulse_bit = eve_basis == alice_basis ? alice_bit : rng.bit();
        g.eve_knows = true;
        g.label = AttackState::blinded;
    } else {
        g.eta_override = 1.0;
        g.label = AttackState::vacuum;
    }
    return g;
}

double effective_efficiency(const GateAction& g, const DetectorModel& det, double t) {
    if (t < 0.0 || t > 1.0) return 0.0;
    if (g.eta_override >= 0.0) return g.eta_override;
    return efficiency_at(det, t);
}

// The gate's true minimum detection probability for a single photon inside
// the inner gate, dark counts included. This is the quantity the session
// averages weight; it is invisible to the protocol and used only for bound
// comparisons.
double true_gate_eta(const GateAction& g, const DetectorModel& det) {
    if (g.blinded && det.blindable) return 0.0;
    const double eta_sp = g.eta_override >= 0.0 ? g.eta_override : det.eta_plateau;
    return 1.0 - (1.0 - eta_sp) * (1.0 - det.dark_rate);
}

struct ClickDetail {
    bool click = false;
    double time = -1.0;
    int physical_bit = -1;
    bool eve_knows = false;
};

ClickDetail signal_detection(const GateAction& g, const DetectorModel& det, int bob_basis,
                             PhiloxStream& rng) {
    ClickDetail cd;
    const bool blind = g.blinded && det.blindable;
    if (g.has_pulse && g.is_trigger) {
        const bool basis_match = bob_basis == g.pulse_basis;
        if (blind) {
            // Faked state: full intensity on one detector when the bases
            // agree, half on each otherwise.
            if (basis_match && g.intensity >= det.blind_click_threshold) {
                cd = {true, g.arrival, g.pulse_bit, g.eve_knows};
            } else if (!basis_match && g.intensity / 2.0 >= det.blind_click_threshold) {
                cd = {true, g.arrival, rng.bit(), false};
            }
        } else {
            // Bright pulse into a live detector always avalanches.
            cd = {true, g.arrival,
                  basis_match ? g.pulse_bit : rng.bit(),
                  basis_match && g.eve_knows};
        }
        return cd;
    }
    if (g.has_pulse && !blind) {
        const double eta = effective_efficiency(g, det, g.arrival);
        if (rng.bernoulli(eta)) {
            cd.click = true;
            cd.time = g.arrival;
            if (bob_basis == g.pulse_basis) {
                cd.physical_bit = g.pulse_bit ^ (rng.bernoulli(g.flip_prob) ? 1 : 0);
            } else {
                cd.physical_bit = rng.bit();
            }
            cd.eve_knows = g.eve_knows && bob_basis == g.pulse_basis;
            return cd;
        }
    }
    if (!blind && rng.bernoulli(det.dark_rate)) {
        cd.click = true;
        cd.time = rng.next_unit();
        cd.physical_bit = rng.bit();
    }
    return cd;
}

// Click probability of a test or calibration gate. k is the test-pulse
// photon number (zero when the source is off); eve_present tells whether an
// outside pulse reached the detector.
bool test_gate_click(const GateAction& g, const DetectorModel& det, int k, double t,
                     bool eve_present, int bob_basis, PhiloxStream& rng) {
    const bool blind = g.blinded && det.blindable;
    if (blind) {
        if (eve_present && g.is_trigger) {
            const double inten =
                bob_basis == g.pulse_basis ? g.intensity : g.intensity / 2.0;
            return inten >= det.blind_click_threshold;
        }
        return false;
    }
    const double p_test =
        k > 0 ? 1.0 - std::pow(1.0 - effective_efficiency(g, det, t), k) : 0.0;
    double p_eve = 0.0;
    if (eve_present && g.has_pulse) {
        p_eve = g.is_trigger ? 1.0 : effective_efficiency(g, det, g.arrival);
    }
    double p = 1.0 - (1.0 - p_test) * (1.0 - p_eve) * (1.0 - det.dark_rate);
    if (eve_present && g.has_pulse && k > 0) {
        p = std::min(1.0, p + det.superlinearity);
    }
    return rng.bernoulli(p);
}

}  // namespace

void validate(const DetectorModel& det) {
    if (!is_probability(det.eta_plateau)) {
        throw std::invalid_argument("DetectorModel: eta_plateau must lie in [0,1]");
    }
    if (det.rise_fraction < 0.0 || det.fall_fraction < 0.0 ||
        det.rise_fraction + det.fall_fraction >= 1.0) {
        throw std::invalid_argument("DetectorModel: gate edges must leave a nonempty plateau");
    }
    if (!is_probability(det.dark_rate)) {
        throw std::invalid_argument("DetectorModel: dark_rate must lie in [0,1]");
    }
    if (!(det.blind_click_threshold > 0.0)) {
        throw std::invalid_argument("DetectorModel: blind_click_threshold must be positive");
    }
    if (!is_probability(det.superlinearity)) {
        throw std::invalid_argument("DetectorModel: superlinearity must lie in [0,1]");
    }
}

double efficiency_at(const DetectorModel& det, double t) {
    if (t < 0.0 || t > 1.0) return 0.0;
    if (t < det.rise_fraction) return det.eta_plateau * (t / det.rise_fraction);
    if (t > 1.0 - det.fall_fraction) {
        return det.eta_plateau * ((1.0 - t) / det.fall_fraction);
    }
    return det.eta_plateau;
}

bool in_inner_gate(const DetectorModel& det, double t) {
    return t >= det.rise_fraction && t <= 1.0 - det.fall_fraction;
}

void validate(const AttackStrategy& atk, const DetectorModel& det) {
    if (const auto* honest = std::get_if<HonestChannel>(&atk)) {
        if (!is_probability(honest->loss)) {
            throw std::invalid_argument("HonestChannel: loss must lie in [0,1]");
        }
    } else if (const auto* blind = std::get_if<BlindingAttack>(&atk)) {
        if (!is_probability(blind->blind_fraction)) {
            throw std::invalid_argument("BlindingAttack: blind_fraction must lie in [0,1]");
        }
        if (!(blind->trigger_intensity >= 0.0)) {
            throw std::invalid_argument("BlindingAttack: trigger_intensity must be nonnegative");
        }
    } else if (const auto* tight = std::get_if<TightnessAttack>(&atk)) {
        if (!(tight->eta_bar_target > 0.0) || tight->eta_bar_target > 1.0) {
            throw std::invalid_argument("TightnessAttack: eta_bar_target must lie in (0,1]");
        }
        if (!is_probability(tight->q_bar_target) || !is_probability(tight->delta_bar_target)) {
            throw std::invalid_argument("TightnessAttack: targets must lie in [0,1]");
        }
        if (tight->delta_bar_target > tight->eta_bar_target / 2.0) {
            throw std::invalid_argument("TightnessAttack: needs delta <= eta/2");
        }
        if (tight->q_bar_target * (2.0 - tight->eta_bar_target) > 1.0) {
            throw std::invalid_argument(
                "TightnessAttack: q*(2-eta) must not exceed 1 (faked gates need headroom)");
        }
        if (!det.blindable && tight->eta_bar_target < 1.0 && tight->q_bar_target > 0.0) {
            throw std::invalid_argument("TightnessAttack: requires a blindable detector");
        }
    } else if (const auto* shift = std::get_if<TimeShiftAttack>(&atk)) {
        if (std::abs(shift->shift) > 1.0) {
            throw std::invalid_argument("TimeShiftAttack: |shift| must not exceed one gate");
        }
    }
}

BitAssignment bitmap_gate_assign(double detection_time, const DetectorModel& det,
                                 int physical_bit, PhiloxStream& rng) {
    if (detection_time < 0.0 || detection_time > 1.0) {
        return {BitRegion::outside, -1};
    }
    if (in_inner_gate(det, detection_time)) {
        // The per-gate detector/bit mapping and its inverse cancel here; the
        // decoded value is the physical bit.
        return {BitRegion::inner, physical_bit};
    }
    return {BitRegion::edge, rng.bit()};
}

bool detector_respond(const IncidentPulse& pulse, const DetectorModel& det, bool blinded,
                      PhiloxStream& rng) {
    if (blinded && det.blindable) {
        return pulse.intensity >= det.blind_click_threshold;
    }
    double p_photon = 0.0;
    if (pulse.photons > 0) {
        const double eta = efficiency_at(det, pulse.time);
        p_photon = 1.0 - std::pow(1.0 - eta, pulse.photons);
    }
    const double p = 1.0 - (1.0 - p_photon) * (1.0 - det.dark_rate);
    return rng.bernoulli(p);
}

SessionResult run_session(uint64_t n_gates, const DetectorModel& det,
                          const TestSourceConfig& src, const AttackStrategy& atk,
                          uint64_t seed, bool record_trace) {
    if (n_gates == 0) {
        throw std::invalid_argument("run_session: n_gates must be at least 1");
    }
    validate(det);
    validate(src);
    validate(atk, det);

    SessionResult res;
    if (record_trace) res.trace.reserve(n_gates);

    for (uint64_t gate = 0; gate < n_gates; ++gate) {
        PhiloxStream rng = gate_stream(seed, gate);

        const int alice_basis = rng.bit();
        const int alice_bit = rng.bit();
        const int bob_basis = rng.bit();
        GateAction action = draw_action(atk, det, alice_basis, alice_bit, rng);

        TraceRecord rec;
        rec.gate_index = gate;
        rec.attack_state = action.label;

        const bool is_test_gate = rng.bernoulli(src.p_test);
        if (is_test_gate) {
            const bool source_off = rng.bernoulli(src.dark_calibration_fraction);
            // The line is blocked for every test gate (and always for dark
            // calibration); an outside pulse sneaks through only with the
            // residual leakage probability.
            const bool eve_present =
                action.has_pulse &&
                (src.deflecting || source_off ? rng.bernoulli(src.deflection_leakage) : true);
            if (source_off) {
                res.counts.dark_gates += 1;
                const bool click =
                    test_gate_click(action, det, 0, 0.5, eve_present, bob_basis, rng);
                res.counts.dark_clicks += click;
                rec.kind = GateKind::dark;
                rec.click = click;
                if (click) rec.time = rng.next_unit();
            } else {
                res.counts.test_gates += 1;
                const double span = 1.0 - det.rise_fraction - det.fall_fraction;
                const double t = det.rise_fraction + rng.next_unit() * span;
                const int k = src.kind == SourceKind::single_photon
                                  ? 1
                                  : static_cast<int>(rng.poisson(src.mu));
                const bool click =
                    test_gate_click(action, det, k, t, eve_present, bob_basis, rng);
                res.counts.test_clicks += click;
                rec.kind = GateKind::test;
                rec.click = click;
                if (click) rec.time = t;
            }
        } else {
            res.counts.signal_gates += 1;
            rec.kind = GateKind::signal;
            const ClickDetail cd = signal_detection(action, det, bob_basis, rng);
            rec.basis_match = bob_basis == alice_basis ? 1 : 0;
            if (cd.click) {
                res.counts.signal_clicks += 1;
                res.sum_eta_detected += true_gate_eta(action, det);
                const BitAssignment assign =
                    bitmap_gate_assign(cd.time, det, cd.physical_bit, rng);
                rec.click = true;
                rec.time = cd.time;
                rec.bit = assign.bit;
                if (rec.basis_match == 1) {
                    res.counts.sifted_bits += 1;
                    const bool error = assign.bit != alice_bit;
                    res.counts.sifted_errors += error;
                    rec.error = error ? 1 : 0;
                    if (cd.eve_knows && assign.region == BitRegion::inner) {
                        res.eve_known_sifted += 1;
                    }
                }
            }
        }
        if (record_trace) res.trace.push_back(rec);
    }

    res.eve_known_fraction =
        res.counts.sifted_bits > 0
            ? static_cast<double>(res.eve_known_sifted) /
                  static_cast<double>(res.counts.sifted_bits)
            : 0.0;
    return res;
}

EveInfoReport eve_information(const SessionResult& result, const KeyRateInputs& bound_inputs) {
    validate(bound_inputs);
    EveInfoReport rep;
    rep.eve_known_fraction = result.eve_known_fraction;
    if (bound_inputs.q_bar <= 0.0) {
        // No received bits: nothing to protect, nothing to violate.
        rep.bound = 1.0;
        rep.margin = 1.0 - rep.eve_known_fraction;
        return rep;
    }
    const double eta_bar =
        std::clamp(eta_bar_from_eta_e(bound_inputs.q_bar, bound_inputs.eta_e_bar), 0.0, 1.0);
    const auto bound_at = [&](double eta, double delta) {
        eta = std::clamp(eta, 0.0, 1.0);
        delta = std::clamp(delta, 0.0, 1.0);
        return privacy_amp_bound(bound_inputs.q_bar, eta, delta).h_per_pulse /
               bound_inputs.q_bar;
    };
    const auto pa = privacy_amp_bound(bound_inputs.q_bar, eta_bar, bound_inputs.delta_bar);
    rep.bound = pa.h_per_pulse / bound_inputs.q_bar;
    rep.out_of_regime = !pa.in_regime;
    rep.margin = rep.bound - rep.eve_known_fraction;

    // The comparison pits one realized sample against a bound evaluated at
    // realized averages, so grant a few standard errors of slack before
    // declaring a violation.
    const double detected = std::max<uint64_t>(result.counts.signal_clicks, 1);
    const double sifted = std::max<uint64_t>(result.counts.sifted_bits, 1);
    const double se_f =
        std::sqrt(rep.eve_known_fraction * (1.0 - rep.eve_known_fraction) / sifted);
    const double se_eta = 0.5 / std::sqrt(detected);
    const double se_delta =
        std::sqrt(bound_inputs.delta_bar * (1.0 - bound_inputs.delta_bar) / sifted);
    const double sensitivity =
        std::abs(bound_at(eta_bar - se_eta, bound_inputs.delta_bar) - rep.bound) +
        std::abs(bound_at(eta_bar, bound_inputs.delta_bar + se_delta) - rep.bound);
    rep.tolerance = 5.0 * (se_f + sensitivity) + 1e-9;
    rep.violated = rep.eve_known_fraction > rep.bound + rep.tolerance;
    return rep;
}

KeyRateInputs true_keyrate_inputs(const SessionResult& result) {
    const auto& c = result.counts;
    KeyRateInputs in;
    in.q_bar = c.signal_gates > 0
                   ? static_cast<double>(c.signal_clicks) / static_cast<double>(c.signal_gates)
                   : 0.0;
    in.delta_bar = c.sifted_bits > 0 ? static_cast<double>(c.sifted_errors) /
                                           static_cast<double>(c.sifted_bits)
                                     : 0.0;
    in.eta_e_bar = std::clamp(eta_e_from_eta_bar(in.q_bar, result.true_eta_bar()), 0.0, 1.0);
    in.eta_max = 1.0;
    return in;
}

}  // namespace qkdcal
