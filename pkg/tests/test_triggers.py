import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etimpulse.integrator import FlowSource
from etimpulse.model import ThresholdSpec, TriggerSpec, UsageError
from etimpulse.triggers import (CertificateViolation, EventQuery, next_event_continuous,
                                next_event_periodic_global, next_event_periodic_post_impulse,
                                surplus)

from conftest import GAP_ANALYTIC

TH = ThresholdSpec(0.294, 0.1)


def test_surplus_values(analytic):
    _, lyap = analytic
    assert surplus(lyap, TH, 0.0, np.array([0.294])) == 0.0
    assert surplus(lyap, TH, 0.0, np.array([0.0])) == -0.294
    assert surplus(lyap, TH, 10.0, np.array([0.294])) == pytest.approx(
        0.294 * (1 - math.exp(-1)), abs=1e-15)
    assert surplus(lyap, TH, 10.0, np.array([0.294])) == pytest.approx(0.1858, abs=1e-4)


def _query(trigger, horizon=5.0, start=0.0, last=None):
    return EventQuery(start, last, trigger, TH, horizon)


def brute_force_crossing(v0, a, b, resolution=1e-7, t_max=1.0):
    """First grid time with v0 e^t >= a e^{-bt}, from the closed-form solution."""
    t = np.arange(0.0, t_max, resolution)
    s = v0 * np.exp(t) - a * np.exp(-b * t)
    return float(t[np.argmax(s >= 0)])


def test_continuous_analytic_crossing(analytic):
    model, lyap = analytic
    src = FlowSource(model, 0.0, [0.147], 1e-3)
    t1 = next_event_continuous(src, lyap, _query(TriggerSpec.continuous()), tol_t=1e-10)
    assert t1 == pytest.approx(GAP_ANALYTIC, abs=1e-9)
    assert GAP_ANALYTIC == pytest.approx(0.63013, abs=1e-5)
    assert src.t == t1


def test_continuous_matches_brute_force_scan(analytic):
    model, lyap = analytic
    src = FlowSource(model, 0.0, [0.147], 1e-4)
    t1 = next_event_continuous(src, lyap, _query(TriggerSpec.continuous()))
    assert abs(t1 - brute_force_crossing(0.147, 0.294, 0.1)) <= 1e-6


def test_continuous_zero_state_never_fires(analytic):
    model, lyap = analytic
    src = FlowSource(model, 0.0, [0.0], 1e-2)
    assert next_event_continuous(src, lyap, _query(TriggerSpec.continuous())) is None
    assert src.t == 5.0


def test_continuous_bracketing_invariant(analytic):
    model, lyap = analytic
    tol = 1e-9
    src = FlowSource(model, 0.0, [0.147], 1e-3)
    t1 = next_event_continuous(src, lyap, _query(TriggerSpec.continuous()), tol_t=tol)
    s_at = surplus(lyap, TH, t1, src.x)
    # |s'| is about 1.1 * 0.294 near the crossing
    assert 0.0 <= s_at <= 0.5 * tol
    before = 0.147 * math.exp(t1 - 10 * tol) - TH(t1 - 10 * tol)
    assert before < 0


def test_continuous_violation_when_window_opens_above(analytic):
    model, lyap = analytic
    src = FlowSource(model, 1.0, [0.5], 1e-3)
    q = _query(TriggerSpec.continuous(), start=1.0, last=1.0)
    with pytest.raises(CertificateViolation):
        next_event_continuous(src, lyap, q)


def test_periodic_global_first_multiple_after_crossing(analytic):
    model, lyap = analytic
    src = FlowSource(model, 0.0, [0.147], 1e-3)
    trig = TriggerSpec.periodic_global(0.25)
    t1 = next_event_periodic_global(src, lyap, _query(trig))
    assert t1 == 0.75
    # closed form: below the line at 0.5, above at 0.75
    assert 0.147 * math.exp(0.5) < TH(0.5)
    assert 0.147 * math.exp(0.75) >= TH(0.75)


def test_periodic_global_zero_state(analytic):
    model, lyap = analytic
    src = FlowSource(model, 0.0, [0.0], 1e-2)
    assert next_event_periodic_global(src, lyap, _query(TriggerSpec.periodic_global(0.25))) is None


def test_periodic_global_respects_window(analytic):
    model, lyap = analytic
    # state well above the line: fires at the first grid point >= window start
    src = FlowSource(model, 0.3, [0.3], 1e-3)
    q = _query(TriggerSpec.periodic_global(0.25), start=0.3, last=0.3)
    assert next_event_periodic_global(src, lyap, q) == 0.5


def test_periodic_samples_only_on_grid(analytic):
    model, lyap = analytic
    seen = []

    def spy_V(x):
        seen.append(src.t)
        return lyap.V(x)

    spy = replace(lyap, V=spy_V)
    src = FlowSource(model, 0.0, [0.147], 1e-3)
    t1 = next_event_periodic_global(src, spy, _query(TriggerSpec.periodic_global(0.25)))
    assert t1 == 0.75
    assert seen == [0.25, 0.5, 0.75]


def test_post_impulse_grid(analytic):
    model, lyap = analytic
    T = 0.8
    src = FlowSource(model, T, [0.05], 1e-3)
    seen = []
    spy = replace(lyap, V=lambda x: (seen.append(src.t), lyap.V(x))[1])
    q = _query(TriggerSpec.periodic_post_impulse(0.25), start=T, last=T)
    t = next_event_periodic_post_impulse(src, spy, q)
    assert seen[:3] == [pytest.approx(T + 0.25), pytest.approx(T + 0.5), pytest.approx(T + 0.75)]
    assert ((t - T) / 0.25) == pytest.approx(round((t - T) / 0.25), abs=1e-12)


def test_post_impulse_first_event_uses_global_grid(analytic):
    model, lyap = analytic
    src = FlowSource(model, 0.0, [0.147], 1e-3)
    assert next_event_periodic_post_impulse(
        src, lyap, _query(TriggerSpec.periodic_post_impulse(0.25))) == 0.75


def test_event_query_validation():
    with pytest.raises(UsageError):
        EventQuery(-1.0, None, TriggerSpec.continuous(), TH, 1.0)
    with pytest.raises(UsageError):
        EventQuery(2.0, None, TriggerSpec.continuous(), TH, 1.0)


@settings(max_examples=25, deadline=None)
@given(v0=st.floats(0.01, 0.28), delta=st.floats(0.05, 0.5))
def test_periodic_event_is_first_grid_point_past_crossing(analytic, v0, delta):
    model, lyap = analytic
    exact = math.log(0.294 / v0) / 1.1
    src = FlowSource(model, 0.0, [v0], 1e-3)
    t = next_event_periodic_global(src, lyap, _query(TriggerSpec.periodic_global(delta), horizon=10))
    j = round(t / delta)
    assert t == j * delta
    assert t >= exact - 1e-9
    assert t - delta < exact + 1e-9


@settings(max_examples=25, deadline=None)
@given(v0=st.floats(0.01, 0.28))
def test_continuous_event_never_before_window(analytic, v0):
    model, lyap = analytic
    src = FlowSource(model, 0.0, [v0], 1e-3)
    t = next_event_continuous(src, lyap, _query(TriggerSpec.continuous(), horizon=10))
    assert t >= 0.0
    assert t == pytest.approx(math.log(0.294 / v0) / 1.1, abs=1e-8)
