"""Smoke tests for the python module: every main operation is reachable and
behaves sanely on small inputs. The heavy numerical checks live in the C++
suites."""

import math

import pytest

import qkdcal as q


def test_binary_entropy():
    assert q.binary_entropy(0.0) == 0.0
    assert q.binary_entropy(1.0) == 0.0
    assert q.binary_entropy(0.5) == 1.0
    assert q.binary_entropy(0.11) == pytest.approx(0.4999159581645280, abs=1e-14)
    with pytest.raises(ValueError):
        q.binary_entropy(1.5)


def test_rate_formulas():
    assert q.rate_constant_eta(1.0, 0.0) == 1.0
    r = q.rate_estimated(q.KeyRateInputs(1.0, 0.0, 0.5))
    assert r.rate == pytest.approx(0.5)
    assert r.secure

    below = q.rate_estimated(q.KeyRateInputs(0.4, 0.0, 0.5))
    assert below.insecure_threshold
    assert not below.secure

    cap = q.rate_estimated_etamax(q.KeyRateInputs(0.3, 0.02, 0.1, 0.1))
    simplified = 0.1 * (1 - q.binary_entropy(0.02)) - q.binary_entropy(0.02)
    assert cap.rate == pytest.approx(simplified, abs=1e-12)


def test_mixture_and_bound():
    avg = q.mixture_averages(
        [q.MixtureComponent(0.5, 0.6, 1.0, 0.1), q.MixtureComponent(0.5, 0.6, 0.0, 0.0)]
    )
    assert avg.q_bar == pytest.approx(0.6)
    assert avg.eta_bar == pytest.approx(0.5)
    bound = q.privacy_amp_bound(avg.q_bar, avg.eta_bar, avg.delta_bar)
    assert bound.in_regime
    assert 0.0 < bound.h_per_pulse < avg.q_bar


def test_estimation_chain():
    a = q.ReceiverAssumptions()
    z = q.zeta_total(0.05, a)
    assert z.zeta == pytest.approx(0.1)
    assert q.eta_e_single_photon(0.4, 0.1) == pytest.approx(0.36)
    b = q.eta_t_faint_laser(q.poisson_click_probability(0.1, 0.4, 2e-5), 0.1, 2e-5, a)
    assert b.value == pytest.approx(0.3816469018557128, abs=1e-12)

    counts = q.TestCounts()
    counts.dark_gates = 10**6
    counts.dark_clicks = 0
    dark = q.dark_count_bound(counts)
    assert dark.point == 0.0
    assert dark.upper == pytest.approx(1.38e-5, rel=0.01)


def test_session_determinism_and_estimate():
    det = q.DetectorModel()
    det.eta_plateau = 0.4
    det.dark_rate = 2e-5
    src = q.TestSourceConfig()
    src.p_test = 0.3

    res1 = q.run_session(40000, det, src, q.HonestChannel(0.1), seed=11)
    res2 = q.run_session(40000, det, src, q.HonestChannel(0.1), seed=11)
    assert res1.counts.signal_clicks == res2.counts.signal_clicks
    assert res1.counts.test_clicks == res2.counts.test_clicks

    est = q.estimate_pipeline(res1.counts, src, q.ReceiverAssumptions())
    true_eta = 1 - (1 - det.eta_plateau) * (1 - det.dark_rate)
    assert est.inputs.eta_e_bar == pytest.approx(true_eta, abs=0.02)

    report = q.eve_information(res1, q.true_keyrate_inputs(res1))
    assert not report.violated


def test_blinding_attack_is_flagged():
    det = q.DetectorModel()  # plateau 1, blindable
    src = q.TestSourceConfig()
    src.p_test = 0.35
    res = q.run_session(120000, det, src, q.BlindingAttack(0.5, 1.5), seed=3)
    est = q.estimate_pipeline(res.counts, src, q.ReceiverAssumptions())
    assert est.inputs.eta_e_bar <= 0.55
    rate = q.rate_estimated(est.inputs)
    assert rate.insecure_threshold
    assert res.eve_known_fraction > 0.99


def test_tightness_attack_matches_bound():
    det = q.DetectorModel()
    det.dark_rate = 0.0
    src = q.TestSourceConfig()
    src.p_test = 0.05
    res = q.run_session(200000, det, src, q.TightnessAttack(0.5, 0.0, 0.5), seed=5)
    eta_bar = res.true_eta_bar()
    assert res.eve_known_fraction == pytest.approx(1 - eta_bar, abs=0.02)


def test_philox_stream():
    s1 = q.PhiloxStream(123, 0, 0)
    s2 = q.PhiloxStream(123, 0, 0)
    assert [s1.next_u64() for _ in range(8)] == [s2.next_u64() for _ in range(8)]
    u = q.PhiloxStream(9, 0, 0)
    draws = [u.next_unit() for _ in range(2000)]
    assert all(0.0 <= d < 1.0 for d in draws)
    assert abs(sum(draws) / len(draws) - 0.5) < 0.05
    mean = sum(u.poisson(0.2) for _ in range(5000)) / 5000
    assert math.isclose(mean, 0.2, rel_tol=0.25)
