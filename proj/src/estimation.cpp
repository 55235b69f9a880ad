#include "qkdcal/estimation.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkdcal {

namespace {

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

void require_probability(double x, const char* name) {
    if (!is_probability(x)) {
        throw std::domain_error(std::string(name) + " must lie in [0,1]");
    }
}

double binomial_se(double p, uint64_t n) {
    return n > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n)) : 0.0;
}

}  // namespace

void validate(const ReceiverAssumptions& a) {
    for (double v : {a.eps_e, a.eps_omega, a.eps_t, a.eps_i, a.eps_s, a.zeta_omega,
                     a.zeta_k, a.q_omega}) {
        if (!is_probability(v)) {
            throw std::invalid_argument("ReceiverAssumptions: all fields must lie in [0,1]");
        }
    }
}

double eps_total(const ReceiverAssumptions& a, TestMode mode) {
    validate(a);
    const double first = mode == TestMode::deflecting ? a.eps_e : a.eps_s;
    const double total = first + a.eps_omega + a.eps_t + a.eps_i;
    if (total > 1.0) {
        throw std::invalid_argument("ReceiverAssumptions: eps_tot exceeds 1");
    }
    return total;
}

void validate(const TestCounts& c) {
    if (c.test_clicks > c.test_gates || c.dark_clicks > c.dark_gates ||
        c.signal_clicks > c.signal_gates) {
        throw std::invalid_argument("TestCounts: clicks cannot exceed gates");
    }
    if (c.sifted_errors > c.sifted_bits) {
        throw std::invalid_argument("TestCounts: sifted_errors cannot exceed sifted_bits");
    }
    if (c.sifted_bits > c.signal_clicks) {
        throw std::invalid_argument("TestCounts: sifted_bits cannot exceed signal_clicks");
    }
}

void validate(const TestSourceConfig& src) {
    if (!(src.p_test > 0.0 && src.p_test < 1.0)) {
        throw std::invalid_argument("TestSourceConfig: p_test must lie in (0,1)");
    }
    if (src.kind == SourceKind::poisson && !(src.mu > 0.0)) {
        throw std::invalid_argument("TestSourceConfig: mu must be positive");
    }
    if (!is_probability(src.dark_calibration_fraction) || src.dark_calibration_fraction >= 1.0) {
        throw std::invalid_argument("TestSourceConfig: dark_calibration_fraction must lie in [0,1)");
    }
    if (!is_probability(src.deflection_leakage)) {
        throw std::invalid_argument("TestSourceConfig: deflection_leakage must lie in [0,1]");
    }
}

ZetaResult zeta_total(double delta_bar, const ReceiverAssumptions& a) {
    require_probability(delta_bar, "delta_bar");
    validate(a);
    const double raw = 2.0 * delta_bar + std::max(a.zeta_omega, a.zeta_k);
    if (raw > 1.0) return {1.0, true};
    return {raw, false};
}

EfficiencyBound eta_t_single_photon(double q_t, const ReceiverAssumptions& a,
                                    TestMode mode, double q_bar) {
    require_probability(q_t, "q_t");
    const double eps = eps_total(a, mode);
    EfficiencyBound b;
    double signal = q_t;
    if (mode == TestMode::non_deflecting) {
        require_probability(q_bar, "q_bar");
        signal = q_t - q_bar;
        if (signal < 0.0) {
            b.no_information = true;
            return b;
        }
    }
    const double raw = signal - eps;
    if (raw < 0.0) {
        b.clamped = true;
        return b;
    }
    b.value = raw;
    return b;
}

double eta_e_single_photon(double eta_t, double zeta) {
    require_probability(eta_t, "eta_t");
    require_probability(zeta, "zeta");
    return (1.0 - zeta) * eta_t;
}

EfficiencyBound eta_t_faint_laser(double q_t, double mu, double dark_rate,
                                  const ReceiverAssumptions& a, TestMode mode) {
    if (!(mu > 0.0)) {
        throw std::domain_error("eta_t_faint_laser: mu must be positive");
    }
    require_probability(q_t, "q_t");
    require_probability(dark_rate, "dark_rate");
    const double eps = eps_total(a, mode);
    const double raw = 1.0 - eps + (1.0 - dark_rate) / mu - (1.0 - q_t) / (mu * std::exp(-mu));
    EfficiencyBound b;
    if (raw < 0.0) {
        b.clamped = true;
        return b;
    }
    if (raw > 1.0) {
        b.value = 1.0;
        b.clamped = true;
        return b;
    }
    b.value = raw;
    return b;
}

double eta_e_faint_laser(double eta_t, double zeta) {
    return eta_e_single_photon(eta_t, zeta);
}

DarkCountBound dark_count_bound(const TestCounts& c, double confidence) {
    if (c.dark_gates == 0) {
        throw std::invalid_argument("dark_count_bound: no dark-calibration gates recorded");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument("dark_count_bound: confidence must lie in (0,1)");
    }
    validate(c);
    DarkCountBound b;
    b.confidence = confidence;
    b.point = static_cast<double>(c.dark_clicks) / static_cast<double>(c.dark_gates);
    if (c.dark_clicks >= c.dark_gates) {
        b.upper = 1.0;
    } else {
        b.upper = boost::math::binomial_distribution<double>::find_upper_bound_on_p(
            static_cast<double>(c.dark_gates), static_cast<double>(c.dark_clicks),
            1.0 - confidence);
    }
    return b;
}

EstimateResult estimate_pipeline(const TestCounts& counts, const TestSourceConfig& source,
                                 const ReceiverAssumptions& a, double eta_max) {
    validate(counts);
    validate(source);
    if (counts.signal_gates == 0) {
        throw std::invalid_argument("estimate_pipeline: no signal gates recorded");
    }
    if (counts.test_gates == 0) {
        throw std::invalid_argument("estimate_pipeline: no test gates recorded");
    }
    if (!(eta_max > 0.0) || eta_max > 1.0) {
        throw std::invalid_argument("estimate_pipeline: eta_max must lie in (0,1]");
    }

    EstimateResult r;
    const double q_bar = static_cast<double>(counts.signal_clicks) /
                         static_cast<double>(counts.signal_gates);
    const double delta_bar =
        counts.sifted_bits > 0
            ? static_cast<double>(counts.sifted_errors) / static_cast<double>(counts.sifted_bits)
            : 0.0;
    const double q_t = static_cast<double>(counts.test_clicks) /
                       static_cast<double>(counts.test_gates);

    auto& d = r.diag;
    d.q_t_raw = q_t;
    d.se_q_bar = binomial_se(q_bar, counts.signal_gates);
    d.se_delta_bar = binomial_se(delta_bar, counts.sifted_bits);
    d.se_q_t = binomial_se(q_t, counts.test_gates);

    const TestMode mode = source.deflecting ? TestMode::deflecting : TestMode::non_deflecting;
    d.eps_tot = eps_total(a, mode);

    const ZetaResult z = zeta_total(delta_bar, a);
    d.zeta = z.zeta;
    d.zeta_clamped = z.clamped;

    if (counts.dark_gates > 0) {
        d.dark = dark_count_bound(counts);
        d.dark_measured = true;
    } else if (source.kind == SourceKind::poisson) {
        throw std::invalid_argument(
            "estimate_pipeline: poisson source needs dark-calibration gates");
    }

    EfficiencyBound eta_t;
    if (source.kind == SourceKind::single_photon) {
        eta_t = eta_t_single_photon(q_t, a, mode, q_bar);
        d.q_t_used = mode == TestMode::non_deflecting ? q_t - q_bar : q_t;
    } else {
        // Non-deflecting tests see the outside pulses on top of the test
        // pulse; the usable test signal is the excess click rate over the
        // plain yield, exactly as in the single-photon case.
        double q_t_eff = q_t;
        if (mode == TestMode::non_deflecting) {
            q_t_eff = q_t - q_bar;
            if (q_t_eff < 0.0) {
                eta_t.no_information = true;
                q_t_eff = 0.0;
            }
        }
        d.q_t_used = q_t_eff;
        if (!eta_t.no_information) {
            eta_t = eta_t_faint_laser(q_t_eff, source.mu, d.dark.point, a, mode);
        }
    }
    d.eta_t = eta_t.value;
    d.eta_t_clamped = eta_t.clamped;
    d.eta_t_no_information = eta_t.no_information;

    const double eta_e = eta_e_single_photon(eta_t.value, z.zeta);

    r.inputs.q_bar = q_bar;
    r.inputs.delta_bar = delta_bar;
    r.inputs.eta_e_bar = eta_e;
    r.inputs.eta_max = eta_max;
    d.eta_e_exceeds_eta_max = eta_e > eta_max;
    d.q_omega_consistent = q_bar <= 0.0 || a.zeta_omega <= a.q_omega / q_bar;
    return r;
}

double poisson_click_probability(double mu, double eta, double dark_rate) {
    if (!(mu >= 0.0)) throw std::domain_error("poisson_click_probability: mu must be >= 0");
    require_probability(eta, "eta");
    require_probability(dark_rate, "dark_rate");
    return 1.0 - (1.0 - dark_rate) * std::exp(-mu * eta);
}

}  // namespace qkdcal
