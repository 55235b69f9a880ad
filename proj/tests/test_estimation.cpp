#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qkdcal/estimation.hpp"
#include "qkdcal/rng.hpp"
#include "qkdcal/sim.hpp"

using namespace qkdcal;

TEST_CASE("zeta total") {
    ReceiverAssumptions a;
    CHECK(zeta_total(0.0, a).zeta == 0.0);

    a.zeta_omega = 0.01;
    a.zeta_k = 0.02;
    const auto z = zeta_total(0.05, a);
    CHECK(z.zeta == doctest::Approx(0.12).epsilon(1e-15));
    CHECK_FALSE(z.clamped);

    const auto degenerate = zeta_total(0.6, a);
    CHECK(degenerate.zeta == 1.0);
    CHECK(degenerate.clamped);
}

TEST_CASE("single-photon in-gate bound") {
    ReceiverAssumptions a;
    CHECK(eta_t_single_photon(0.4, a, TestMode::deflecting).value == doctest::Approx(0.4));

    a.eps_e = 0.02;
    a.eps_omega = 0.01;
    a.eps_t = 0.01;
    a.eps_i = 0.01;
    const auto b = eta_t_single_photon(0.4, a, TestMode::deflecting);
    CHECK(b.value == doctest::Approx(0.35).epsilon(1e-14));
    CHECK_FALSE(b.clamped);

    // below the assumption floor the bound clamps to zero
    const auto clamped = eta_t_single_photon(0.03, a, TestMode::deflecting);
    CHECK(clamped.value == 0.0);
    CHECK(clamped.clamped);
}

TEST_CASE("single-photon bound without deflection subtracts the yield") {
    ReceiverAssumptions a;
    const auto b = eta_t_single_photon(0.5, a, TestMode::non_deflecting, 0.45);
    CHECK(b.value == doctest::Approx(0.05).epsilon(1e-12));

    const auto none = eta_t_single_photon(0.4, a, TestMode::non_deflecting, 0.45);
    CHECK(none.value == 0.0);
    CHECK(none.no_information);

    // eps_s replaces eps_e in this mode
    a.eps_e = 0.5;
    a.eps_s = 0.01;
    const auto swapped = eta_t_single_photon(0.5, a, TestMode::non_deflecting, 0.45);
    CHECK(swapped.value == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("detection-space extension") {
    CHECK(eta_e_single_photon(0.4, 0.0) == doctest::Approx(0.4));
    CHECK(eta_e_single_photon(0.4, 0.1) == doctest::Approx(0.36).epsilon(1e-14));
    CHECK(eta_e_single_photon(0.0, 0.3) == 0.0);
    CHECK(eta_e_faint_laser(0.5, 0.1) == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(eta_e_faint_laser(0.7, 1.0) == 0.0);
}

TEST_CASE("faint-laser bound against the independent-detection oracle") {
    ReceiverAssumptions a;
    const double mu = 0.1, d = 2e-5;
    // reference point frozen from 40-digit evaluation
    const double q_t = oracle::poisson_click_probability(mu, 0.1, d);
    const auto b = eta_t_faint_laser(q_t, mu, d, a);
    CHECK(b.value == doctest::Approx(0.05827599780463746).epsilon(1e-12));
    CHECK(b.value == doctest::Approx(0.058).epsilon(0.01));

    const double q_t4 = oracle::poisson_click_probability(mu, 0.4, d);
    CHECK(eta_t_faint_laser(q_t4, mu, d, a).value ==
          doctest::Approx(0.3816469018557128).epsilon(1e-12));
}

TEST_CASE("faint-laser bound recovers the true efficiency as mu vanishes") {
    ReceiverAssumptions a;
    for (double eta : {0.1, 0.4, 0.9}) {
        double prev = -1.0;
        for (double mu : {1e-1, 1e-2, 1e-3, 1e-4}) {
            const double q_t = oracle::poisson_click_probability(mu, eta, 0.0);
            const double value = eta_t_faint_laser(q_t, mu, 0.0, a).value;
            CHECK(value <= eta + 1e-12);  // stays a lower bound
            CHECK(value >= prev);         // monotone convergence
            prev = value;
        }
        CHECK(prev == doctest::Approx(eta).epsilon(1e-4));
    }
}

TEST_CASE("faint-laser bound agrees with its small-mu expansion") {
    // cross-check only: (q_t - d)/mu + q_t - mu/2 - eps_tot up to
    // O(mu^2) + O(mu q_t)
    ReceiverAssumptions a;
    a.eps_t = 0.01;
    const double d = 2e-5;
    for (const double mu : {3e-2, 1e-2, 1e-3}) {
        const double q_t = oracle::poisson_click_probability(mu, 0.4, d);
        const double full = eta_t_faint_laser(q_t, mu, d, a).value;
        const double expansion = (q_t - d) / mu + q_t - mu / 2.0 - eps_total(a, TestMode::deflecting);
        CHECK(std::abs(full - expansion) <= mu * q_t + mu * mu);
    }
}

TEST_CASE("faint-laser bound clamps when the signal is pure dark counts") {
    ReceiverAssumptions a;
    const double mu = 1e-3, d = 1e-5;
    const auto b = eta_t_faint_laser(d, mu, d, a);
    CHECK(b.value == 0.0);
    CHECK(b.clamped);
    CHECK_THROWS_AS(eta_t_faint_laser(0.1, 0.0, 0.0, a), std::domain_error);
}

TEST_CASE("faint-laser bound is monotone in its inputs") {
    ReceiverAssumptions a;
    const double mu = 0.2;
    double prev = -1.0;
    for (int i = 0; i <= 50; ++i) {
        const double q_t = 0.01 + 0.015 * i;
        const double v = eta_t_faint_laser(q_t, mu, 1e-4, a).value;
        CHECK(v >= prev);
        prev = v;
    }
    prev = 2.0;
    for (int i = 0; i <= 50; ++i) {
        const double d = i * 1e-3;
        const double v = eta_t_faint_laser(0.2, mu, d, a).value;
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("dark count bound") {
    TestCounts c;
    c.dark_gates = 1000000;
    c.dark_clicks = 0;
    auto b = dark_count_bound(c);
    CHECK(b.point == 0.0);
    // closed form for zero clicks: 1 - alpha^(1/n)
    const double expect = 1.0 - std::pow(1e-6, 1e-6);
    CHECK(b.upper == doctest::Approx(expect).epsilon(1e-9));
    CHECK(b.upper == doctest::Approx(1.38e-5).epsilon(0.01));

    c.dark_clicks = 20;
    b = dark_count_bound(c);
    CHECK(b.point == doctest::Approx(2e-5).epsilon(1e-12));
    CHECK(b.upper > b.point);

    c.dark_gates = 7;
    c.dark_clicks = 7;
    b = dark_count_bound(c);
    CHECK(b.point == 1.0);
    CHECK(b.upper == 1.0);

    c.dark_gates = 0;
    CHECK_THROWS_AS(dark_count_bound(c), std::invalid_argument);
}

TEST_CASE("dark count upper bound inverts the binomial tail") {
    TestCounts c;
    c.dark_gates = 10000;
    c.dark_clicks = 5;
    const auto b = dark_count_bound(c, 1.0 - 1e-6);
    // at the returned p the lower tail mass must equal the residual level
    const double tail = oracle::binomial_cdf(c.dark_clicks, c.dark_gates, b.upper);
    CHECK(tail == doctest::Approx(1e-6).epsilon(1e-6));
}

TEST_CASE("estimation pipeline on perfect synthetic counts") {
    TestCounts c;
    c.test_gates = 100000;
    c.test_clicks = 100000;
    c.dark_gates = 100000;
    c.dark_clicks = 0;
    c.signal_gates = 100000;
    c.signal_clicks = 100000;
    c.sifted_bits = 50000;
    c.sifted_errors = 0;
    TestSourceConfig src;
    ReceiverAssumptions a;
    const auto r = estimate_pipeline(c, src, a);
    CHECK(r.inputs.eta_e_bar == doctest::Approx(1.0));
    CHECK(r.inputs.q_bar == doctest::Approx(1.0));
    CHECK(r.inputs.delta_bar == 0.0);
    CHECK_FALSE(r.diag.eta_e_exceeds_eta_max);
}

TEST_CASE("pipeline propagates errors") {
    TestCounts c;
    TestSourceConfig src;
    ReceiverAssumptions a;
    CHECK_THROWS_AS(estimate_pipeline(c, src, a), std::invalid_argument);
    c.signal_gates = 10;
    CHECK_THROWS_AS(estimate_pipeline(c, src, a), std::invalid_argument);
    c.test_gates = 10;
    src.kind = SourceKind::poisson;
    src.mu = 0.1;
    // poisson source without dark calibration is an error
    CHECK_THROWS_AS(estimate_pipeline(c, src, a), std::invalid_argument);
}

TEST_CASE("pipeline estimate stays sound against simulated detectors") {
    // For any honest detector the estimate must lower-bound the worst-case
    // completion q*eta_true + (1-q), up to sampling error.
    PhiloxStream scenario_rng(9100, 0, 0);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        DetectorModel det;
        det.eta_plateau = 0.05 + 0.95 * scenario_rng.next_unit();
        det.dark_rate = 1e-5 * scenario_rng.next_unit();
        TestSourceConfig src;
        src.p_test = 0.3;
        src.dark_calibration_fraction = 0.2;
        HonestChannel honest{scenario_rng.next_unit() * 0.9};
        const uint64_t n_gates = 20000;
        const auto session =
            run_session(n_gates, det, src, honest, 1000 + trial);
        if (session.counts.test_gates == 0 || session.counts.signal_gates == 0) continue;
        ReceiverAssumptions a;
        const auto est = estimate_pipeline(session.counts, src, a);
        const double q = est.inputs.q_bar;
        const double eta_true = 1.0 - (1.0 - det.eta_plateau) * (1.0 - det.dark_rate);
        const double worst_case = q * eta_true + (1.0 - q);
        const double se =
            3.0 * (est.diag.se_q_t + est.diag.se_q_bar + 2.0 * est.diag.se_delta_bar);
        if (est.inputs.eta_e_bar > worst_case + se) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("non-deflecting estimates never certify a positive plain rate") {
    PhiloxStream scenario_rng(9200, 0, 0);
    for (int trial = 0; trial < 50; ++trial) {
        DetectorModel det;
        det.eta_plateau = 0.2 + 0.8 * scenario_rng.next_unit();
        TestSourceConfig src;
        src.deflecting = false;
        src.p_test = 0.3;
        src.dark_calibration_fraction = 0.1;
        HonestChannel honest{scenario_rng.next_unit() * 0.5};
        const auto session = run_session(20000, det, src, honest, 5000 + trial);
        if (session.counts.signal_clicks == 0) continue;
        ReceiverAssumptions a;
        const auto est = estimate_pipeline(session.counts, src, a);
        if (est.inputs.q_bar == 0.0) continue;
        const auto r = rate_estimated(est.inputs);
        CHECK_FALSE(r.secure);
    }
}
