#pragma once

// Test-only reference computations, kept independent of the library code
// they check: extended-precision mixture sums, a direct binomial tail, and
// the independent-detection click model for a weak Poisson pulse.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline long double binary_entropy_ld(long double x) {
    if (x <= 0.0L || x >= 1.0L) return 0.0L;
    return -x * std::log2(x) - (1.0L - x) * std::log2(1.0L - x);
}

struct Component {
    long double p, q, eta, delta;
};

struct MixtureSums {
    long double q_bar = 0.0L;
    long double eta_bar = 0.0L;
    long double delta_bar = 0.0L;
    long double entropy_sum = 0.0L;   // sum p*q*eta*h(delta)
    long double h_per_pulse = 0.0L;   // sum p*(q - eta*q*(1 - h(delta)))
};

inline MixtureSums mixture_sums(const std::vector<Component>& comps) {
    MixtureSums s;
    long double q_eta = 0.0L, q_delta = 0.0L;
    for (const auto& c : comps) {
        s.q_bar += c.p * c.q;
        q_eta += c.p * c.q * c.eta;
        q_delta += c.p * c.q * c.delta;
        s.entropy_sum += c.p * c.q * c.eta * binary_entropy_ld(c.delta);
        s.h_per_pulse += c.p * (c.q - c.eta * c.q * (1.0L - binary_entropy_ld(c.delta)));
    }
    if (s.q_bar > 0.0L) {
        s.eta_bar = q_eta / s.q_bar;
        s.delta_bar = q_delta / s.q_bar;
    }
    return s;
}

// log of C(n, k) via lgamma
inline double log_choose(uint64_t n, uint64_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// P(X <= k) for X ~ Binomial(n, p), by direct log-space summation.
inline double binomial_cdf(uint64_t k, uint64_t n, double p) {
    if (p <= 0.0) return 1.0;
    if (p >= 1.0) return k >= n ? 1.0 : 0.0;
    long double sum = 0.0L;
    for (uint64_t j = 0; j <= k; ++j) {
        const double lg = log_choose(n, j) + static_cast<double>(j) * std::log(p) +
                          static_cast<double>(n - j) * std::log1p(-p);
        sum += std::exp(static_cast<long double>(lg));
    }
    return static_cast<double>(sum);
}

// Click probability of a phase-randomized pulse with mean photon number mu
// when every photon is detected independently with probability eta and the
// gate dark-counts with probability d.
inline double poisson_click_probability(double mu, double eta, double d) {
    return 1.0 - (1.0 - d) * std::exp(-mu * eta);
}

}  // namespace oracle
