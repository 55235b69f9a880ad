#include "qkdcal/keyrate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkdcal {

namespace {

constexpr double kProbSumTolerance = 1e-12;

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

void require_probability(double x, const char* name) {
    if (!is_probability(x)) {
        throw std::domain_error(std::string(name) + " must lie in [0,1], got " +
                                std::to_string(x));
    }
}

}  // namespace

double binary_entropy(double x) {
    require_probability(x, "binary_entropy argument");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

void validate(const KeyRateInputs& in) {
    if (!is_probability(in.q_bar) || !is_probability(in.delta_bar) ||
        !is_probability(in.eta_e_bar)) {
        throw std::invalid_argument("KeyRateInputs: q_bar, delta_bar, eta_e_bar must lie in [0,1]");
    }
    if (!(in.eta_max > 0.0) || in.eta_max > 1.0) {
        throw std::invalid_argument("KeyRateInputs: eta_max must lie in (0,1]");
    }
}

MixtureAverages mixture_averages(const EveMixture& m) {
    double p_sum = 0.0;
    for (const auto& c : m.components) {
        if (!is_probability(c.p) || !is_probability(c.q) || !is_probability(c.eta) ||
            !is_probability(c.delta)) {
            throw std::invalid_argument("EveMixture: component values must lie in [0,1]");
        }
        p_sum += c.p;
    }
    if (std::abs(p_sum - 1.0) > kProbSumTolerance) {
        throw std::invalid_argument("EveMixture: component probabilities must sum to 1, got " +
                                    std::to_string(p_sum));
    }

    double q_bar = 0.0, q_eta = 0.0, q_delta = 0.0;
    for (const auto& c : m.components) {
        q_bar += c.p * c.q;
        q_eta += c.p * c.q * c.eta;
        q_delta += c.p * c.q * c.delta;
    }
    if (q_bar == 0.0) return {0.0, 0.0, 0.0};
    return {q_bar, q_eta / q_bar, q_delta / q_bar};
}

EntropyBound privacy_amp_bound(double q_bar, double eta_bar, double delta_bar) {
    require_probability(q_bar, "q_bar");
    require_probability(eta_bar, "eta_bar");
    require_probability(delta_bar, "delta_bar");
    if (delta_bar > eta_bar / 2.0) {
        return {q_bar, false};
    }
    const double arg = eta_bar > 0.0 ? delta_bar / eta_bar : 0.0;
    return {q_bar * (1.0 - eta_bar * (1.0 - binary_entropy(arg))), true};
}

double rate_constant_eta(double eta, double delta_bar) {
    require_probability(eta, "eta");
    require_probability(delta_bar, "delta_bar");
    const double h = binary_entropy(delta_bar);
    return eta * (1.0 - h) - h;
}

RateResult rate_avg_eta([[maybe_unused]] double q_bar, double eta_bar, double delta_bar) {
    require_probability(eta_bar, "eta_bar");
    require_probability(delta_bar, "delta_bar");
    RateResult r;
    if (delta_bar > eta_bar / 2.0) {
        r.out_of_regime = true;
        return r;
    }
    const double arg = eta_bar > 0.0 ? delta_bar / eta_bar : 0.0;
    r.rate = eta_bar * (1.0 - binary_entropy(arg)) - binary_entropy(delta_bar);
    r.secure = r.rate > 0.0;
    return r;
}

namespace {

// Shared body of the estimated-efficiency rates; eta_max = 1 gives the plain
// estimate so the two public entry points agree bit for bit there.
RateResult rate_estimated_impl(double q_bar, double delta_bar, double eta_e_bar,
                               double eta_max) {
    if (q_bar <= 0.0) {
        throw std::invalid_argument("rate_estimated: q_bar must be positive");
    }
    RateResult r;
    r.eta_exceeds_max = eta_e_bar > eta_max;
    const double excess = q_bar + eta_e_bar / eta_max - 1.0;
    if (excess <= 0.0) {
        r.insecure_threshold = true;
        return r;
    }
    const double arg = delta_bar * q_bar / excess;
    if (arg > 0.5) {
        r.out_of_regime = true;
        return r;
    }
    r.rate = eta_max * (excess / q_bar) * (1.0 - binary_entropy(arg)) -
             binary_entropy(delta_bar);
    r.secure = r.rate > 0.0 && !r.eta_exceeds_max;
    return r;
}

}  // namespace

RateResult rate_estimated(const KeyRateInputs& in) {
    validate(in);
    return rate_estimated_impl(in.q_bar, in.delta_bar, in.eta_e_bar, 1.0);
}

RateResult rate_estimated_etamax(const KeyRateInputs& in) {
    validate(in);
    return rate_estimated_impl(in.q_bar, in.delta_bar, in.eta_e_bar, in.eta_max);
}

double eta_e_from_eta_bar(double q_bar, double eta_bar, double eta_max) {
    return q_bar * eta_bar + (1.0 - q_bar) * eta_max;
}

double eta_bar_from_eta_e(double q_bar, double eta_e_bar, double eta_max) {
    if (q_bar <= 0.0) {
        throw std::invalid_argument("eta_bar_from_eta_e: q_bar must be positive");
    }
    return (eta_e_bar - (1.0 - q_bar) * eta_max) / q_bar;
}

}  // namespace qkdcal
