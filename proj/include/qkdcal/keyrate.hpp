#pragma once

#include <vector>

namespace qkdcal {

// Binary Shannon entropy h(x) = -x log2 x - (1-x) log2(1-x), with
// h(0) = h(1) = 0 exactly. Throws std::domain_error outside [0, 1].
double binary_entropy(double x);

// Observed session averages plus trust parameters feeding the rate bounds.
// All rates are per sifted bit; the number of pulses never appears.
struct KeyRateInputs {
    double q_bar = 0.0;      // average yield (detections per signal gate)
    double delta_bar = 0.0;  // average sifted-key error rate
    double eta_e_bar = 0.0;  // estimated minimum single-photon detection efficiency
    double eta_max = 1.0;    // trusted ceiling on the single-photon efficiency
};

// Throws std::invalid_argument when fields leave their ranges
// (probabilities in [0,1], eta_max in (0,1]).
void validate(const KeyRateInputs& in);

// One receiver state in an adversarial mixture: with probability p the
// receiver has minimum detection efficiency eta, yield q and error rate
// delta among its detections.
struct MixtureComponent {
    double p = 0.0;
    double q = 0.0;
    double eta = 0.0;
    double delta = 0.0;
};

struct EveMixture {
    std::vector<MixtureComponent> components;
};

struct MixtureAverages {
    double q_bar = 0.0;
    double eta_bar = 0.0;    // detection-weighted average of eta
    double delta_bar = 0.0;  // detection-weighted average of delta
};

// Detection-weighted session averages of a mixture. Probabilities must sum
// to one within 1e-12 and every entry must lie in [0,1]; a zero total yield
// returns (0, 0, 0) by convention.
MixtureAverages mixture_averages(const EveMixture& m);

struct EntropyBound {
    double h_per_pulse = 0.0;  // privacy amplification per pulse
    bool in_regime = true;     // delta_bar <= eta_bar / 2 held
};

// Concavity bound on the privacy amplification needed per pulse,
// q * (1 - eta * (1 - h(delta/eta))). Outside the regime delta <= eta/2 the
// bound degenerates and the whole key must be treated as known to the
// adversary: h_per_pulse = q_bar with in_regime = false.
EntropyBound privacy_amp_bound(double q_bar, double eta_bar, double delta_bar);

// Rate when the detection efficiency is a known constant:
// eta * (1 - h(delta)) - h(delta). May be negative.
double rate_constant_eta(double eta, double delta_bar);

struct RateResult {
    double rate = 0.0;               // raw bound value; zeroed when flagged
    bool secure = false;             // rate > 0 and no flags raised
    bool insecure_threshold = false; // q_bar + eta_e_bar/eta_max - 1 <= 0
    bool out_of_regime = false;      // entropy argument exceeded 1/2
    bool eta_exceeds_max = false;    // estimate above the trusted ceiling
};

// Rate from detection-weighted averages: eta_bar*(1 - h(delta/eta)) - h(delta).
// When delta_bar > eta_bar/2 the derivation's precondition fails; the result
// is a conservative zero with out_of_regime set. q_bar enters no formula and
// is accepted only for interface symmetry.
RateResult rate_avg_eta(double q_bar, double eta_bar, double delta_bar);

// Main estimated-efficiency rate:
// ((q+etaE-1)/q) * (1 - h(q*delta/(q+etaE-1))) - h(delta).
// q_bar must be positive (throws otherwise); q+etaE-1 <= 0 yields zero with
// insecure_threshold set. Ignores eta_max.
RateResult rate_estimated(const KeyRateInputs& in);

// Variant under the trusted ceiling eta_max:
// etamax * ((q+etaE/etamax-1)/q) * (1 - h(delta*q/(q+etaE/etamax-1))) - h(delta).
// Reduces to rate_estimated bit for bit at eta_max = 1, and to
// eta_e*(1-h(delta)) - h(delta) at eta_e_bar = eta_max. An estimate above
// eta_max is reported via eta_exceeds_max, never clamped.
RateResult rate_estimated_etamax(const KeyRateInputs& in);

// Worst-case relation between the detection-weighted average efficiency and
// the estimate covering non-detected pulses: etaE = q*eta + (1-q)*eta_max.
double eta_e_from_eta_bar(double q_bar, double eta_bar, double eta_max = 1.0);

// Inverse of the above; requires q_bar > 0.
double eta_bar_from_eta_e(double q_bar, double eta_e_bar, double eta_max = 1.0);

}  // namespace qkdcal
