import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.special import gammainc
from scipy.stats import ncx2

from irsoutage.analytic import (AccuracyError, DomainError, SeriesControl, channel_moments,
                                f_series, f_series_many, g_los, g_nlos, log_f_series,
                                log_gamma_p, outage_probability)
from irsoutage.model import (DirectLink, IrsSpec, OutageQuery, PhaseShifts, SystemModel,
                             ValidationError, preset)
from oracles import g_los_bruteforce, marcum_cdf_oracle, marcum_q1_equal_args

from conftest import random_model


# --- f(a, b, c) ---------------------------------------------------------------

def test_f_a_zero_is_exponential_cdf():
    assert f_series(0.0, 1.0, math.log(2.0)) == pytest.approx(0.5, abs=1e-15)


def test_f_zero_threshold():
    assert f_series(5.0, 2.0, 0.0) == 0.0


def test_f_unit_point_against_marcum_closed_form():
    # f(1,1,1) = 1 - Q1(sqrt2, sqrt2) = (1 - e^-2 I0(2)) / 2
    expected = 1.0 - marcum_q1_equal_args(math.sqrt(2.0))
    assert expected == pytest.approx(0.3457, abs=5e-5)
    assert f_series(1.0, 1.0, 1.0) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("a, b, c", [(-1.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, -1.0, 1.0),
                                     (1.0, 1.0, -0.1), (math.nan, 1.0, 1.0)])
def test_f_domain_errors(a, b, c):
    with pytest.raises(DomainError):
        f_series(a, b, c)


def test_series_control_invariants():
    with pytest.raises(DomainError):
        SeriesControl(rel_tol=1e-3)
    with pytest.raises(DomainError):
        SeriesControl(max_terms=10)


def test_non_convergence_reports_partial_sum():
    with pytest.raises(AccuracyError) as e:
        f_series(1e6, 1.0, 1e6, SeriesControl(max_terms=64))
    assert e.value.partial_sum >= 0 and e.value.bound > 0


@pytest.mark.parametrize("a, b, c", [
    (0.0, 3.0, 2.0), (1e-8, 1.0, 1.0), (3.0, 0.7, 0.01), (50.0, 0.5, 20.0),
    (12.0, 1.0, 40.0), (135.0, 1.0, 3.5), (400.0, 2.0, 150.0), (0.5, 10.0, 20.0),
])
def test_f_matches_quadrature(a, b, c):
    ref = marcum_cdf_oracle(a, b, c)
    got = f_series(a, b, c)
    assert abs(got - ref) <= 1e-12 + 1e-9 * ref


@pytest.mark.parametrize("a, c", [(1e4, 9000.0), (1e4, 1e4), (1e4, 1.1e4), (2500.0, 2000.0)])
def test_f_large_noncentrality(a, c):
    # large a/b: compare with quadrature, which is accurate here as well
    ref = marcum_cdf_oracle(a, 1.0, c)
    assert f_series(a, 1.0, c) == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_deep_tail_keeps_relative_accuracy():
    # terms peak far below the Poisson mode; value ~6e-44
    v = f_series(135.0, 1.0, 3.5)
    assert 0 < v < 1e-40
    assert v == pytest.approx(marcum_cdf_oracle(135.0, 1.0, 3.5), rel=1e-8)


def test_log_f_below_double_range():
    lf = log_f_series(3000.0, 1.0, 1.0)
    assert lf < -700 and math.isfinite(lf)
    assert f_series(3000.0, 1.0, 1.0) == 0.0


# log f at 40 significant digits (mpmath, direct summation of the series)
@pytest.mark.parametrize("lam, x, expected", [
    (1000.0, 10.0, -815.76809403589692001),
    (1e4, 1.0, -9809.1651729366558227),
    (1e4, 100.0, -8106.9168913680816347),
])
def test_threshold_far_below_mean(lam, x, expected):
    # the summand peaks near sqrt(lam x), far from the Poisson mode
    assert log_f_series(lam, 1.0, x) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("lam, x", [(10.0, 40.0), (100.0, 200.0), (1000.0, 2000.0),
                                    (0.01, 30.0), (1e4, 1.1e4), (3.0, 25.0)])
def test_complement_near_one(lam, x):
    # 1 - f stays accurate relative to itself when f rounds to 1
    lf = log_f_series(lam, 1.0, x)
    assert math.log(-math.expm1(lf)) == pytest.approx(ncx2.logsf(2 * x, 2, 2 * lam), rel=1e-12)


def test_subnormal_threshold():
    assert f_series(1.0, 2.0, 5e-324) == 0.0
    assert f_series(0.0, 2.0, 5e-324) == 0.0
    assert f_series(3.0, 1.0, 1e-300) == pytest.approx(math.exp(-3.0) * 1e-300, rel=1e-12)


def test_huge_threshold_is_certain_outage():
    assert f_series(3.0, 1.0, 1e6) == 1.0


def test_log_gamma_p_matches_scipy():
    for x in (0.3, 1.0, 7.5, 60.0, 900.0):
        lo, hi = 0, int(2 * x + 80)
        ours = np.exp(log_gamma_p(x, lo, hi))
        ref = gammainc(np.arange(lo, hi + 1) + 1.0, x)
        mask = ref > 1e-290
        np.testing.assert_allclose(ours[mask], ref[mask], rtol=1e-11)


def test_many_matches_scalar():
    a = np.concatenate([[0.0], np.linspace(0.01, 80.0, 41)])
    for b, c in [(1.0, 2.0), (0.3, 0.05), (5.0, 30.0)]:
        ref = np.array([f_series(v, b, c) for v in a])
        np.testing.assert_allclose(f_series_many(a, b, c), ref, rtol=1e-12, atol=1e-300)


def test_many_falls_back_for_wide_mixtures():
    a = np.array([10.0, 900.0])
    ref = [f_series(v, 1.0, 800.0) for v in a]
    np.testing.assert_allclose(f_series_many(a, 1.0, 800.0), ref, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0, 50), da=st.floats(0.01, 10), b=st.floats(0.1, 10), c=st.floats(0.01, 20))
def test_f_decreasing_in_a(a, da, b, c):
    lo, hi = f_series(a + da, b, c), f_series(a, b, c)
    assert lo <= hi * (1 + 4e-16)
    if hi < 1 - 1e-9 and lo > 1e-290:
        assert lo < hi


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0, 50), b=st.floats(0.1, 10), c=st.floats(0, 20), dc=st.floats(0, 20))
def test_f_increasing_in_c(a, b, c, dc):
    assert f_series(a, b, c + dc) >= f_series(a, b, c) * (1 - 1e-13)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0, 50), b=st.floats(0.1, 10), c=st.floats(0, 20))
def test_f_is_probability(a, b, c):
    assert 0.0 <= f_series(a, b, c) <= 1.0


def test_f_tends_to_one():
    assert f_series(5.0, 1.0, 400.0) == pytest.approx(1.0, abs=1e-15)


# --- channel aggregates -------------------------------------------------------

def test_g_los_zero_without_los():
    model = SystemModel(DirectLink(0.8, 0.0), [IrsSpec(2, 1.0, 0.6, 0.0)])
    assert g_los(model, PhaseShifts.zeros(model)) == 0.0


def test_g_los_direct_only():
    model = SystemModel(DirectLink(0.8, 2.0, los_phase_sd=1.234))
    assert g_los(model, PhaseShifts(())) == pytest.approx(0.8 * 2 / 3, rel=1e-15)


def test_g_los_fig2_all_zero():
    m = preset("fig2").model
    expected = (math.sqrt(1.6 / 3) + 2 * math.sqrt(6 / 11) + 2 * math.sqrt(1.5 / 16)) ** 2
    assert expected == pytest.approx(7.9511, abs=5e-5)
    got = g_los(m, PhaseShifts.zeros(m))
    assert got == pytest.approx(expected, rel=1e-14)
    assert got == pytest.approx(g_los_bruteforce(m, PhaseShifts.zeros(m).theta), rel=1e-14)


def test_g_los_random_against_bruteforce(rng):
    for _ in range(30):
        m = random_model(rng, k_max=3, n_max=4)
        ph = PhaseShifts.from_flat(m, rng.uniform(0, 2 * math.pi, m.total_elements))
        assert g_los(m, ph) == pytest.approx(g_los_bruteforce(m, ph.theta), rel=1e-12, abs=1e-15)


def test_g_los_shape_mismatch(small_model):
    with pytest.raises(ValidationError):
        g_los(small_model, PhaseShifts(((0.0,),)))


def test_g_nlos_rayleigh_direct():
    assert g_nlos(SystemModel(DirectLink(1.0, 0.0))) == 1.0


def test_g_nlos_fig2():
    expected = 0.8 / 3 + 2 * 0.6 / 11 + 2 * 0.1 / 16
    assert expected == pytest.approx(0.38826, abs=5e-6)
    assert g_nlos(preset("fig2").model) == pytest.approx(expected, rel=1e-15)


def _scale_paths(model, t):
    from dataclasses import replace
    d = replace(model.direct, alpha_sd=model.direct.alpha_sd * t)
    return SystemModel(d, [replace(i, alpha_rd=i.alpha_rd * t) for i in model.irss])


def test_g_nlos_linear_in_path_loss(rng):
    for _ in range(10):
        m = random_model(rng)
        assert g_nlos(_scale_paths(m, 2.0)) == pytest.approx(2 * g_nlos(m), rel=1e-14)


# --- outage probability -------------------------------------------------------

def test_zero_rate_never_outage(rng):
    for _ in range(5):
        m = random_model(rng)
        assert outage_probability(m, PhaseShifts.zeros(m), OutageQuery(0.0, 3.0)) == 0.0


def test_rayleigh_everywhere_closed_form():
    m = SystemModel(DirectLink(0.8, 0.0), [IrsSpec(2, 1.0, 0.6, 0.0), IrsSpec(3, 0.5, 0.2, 0.0)])
    q = OutageQuery.from_db(2.0, 5.0)
    expected = -math.expm1(-q.threshold / g_nlos(m))
    assert outage_probability(m, PhaseShifts.zeros(m), q) == pytest.approx(expected, rel=1e-13)


def test_outage_decreasing_in_snr(rng):
    for _ in range(10):
        m = random_model(rng)
        ph = PhaseShifts.zeros(m)
        vals = [outage_probability(m, ph, OutageQuery.from_db(3.0, s)) for s in range(-5, 25, 3)]
        assert all(b < a for a, b in zip(vals, vals[1:]) if 1e-300 < b and a < 1 - 1e-12)


def test_phase_enters_only_through_g_los():
    # global rotation of every reflected term by pi when the direct link has no LoS
    m = SystemModel(DirectLink(0.5, 0.0), [IrsSpec(2, 1.0, 0.3, 4.0, [0.3, 1.1], [2.0, 0.4])])
    ph1 = PhaseShifts(((0.2, 1.0),))
    ph2 = PhaseShifts(((0.2 + math.pi, 1.0 + math.pi),))
    q = OutageQuery.from_db(2.0, 5.0)
    m1, m2 = channel_moments(m, ph1), channel_moments(m, ph2)
    if m1.g_los == m2.g_los:
        assert outage_probability(m, ph1, q) == outage_probability(m, ph2, q)
    # equal moments always give bit-identical outage
    assert f_series(m1.g_los, m1.g_nlos, q.threshold) == outage_probability(m, ph1, q)


def test_joint_path_scaling_reduces_outage(rng):
    q = OutageQuery.from_db(3.0, 5.0)
    for _ in range(20):
        m = random_model(rng)
        ph = PhaseShifts.from_flat(m, rng.uniform(0, 2 * math.pi, m.total_elements))
        before = outage_probability(m, ph, q)
        after = outage_probability(_scale_paths(m, 1.5), ph, q)
        if 1e-290 < before < 1 - 1e-12:
            assert after < before
