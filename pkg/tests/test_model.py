import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etimpulse.model import (CHAOS3D_B, TriggerKind, TriggerSpec, ThresholdSpec, UsageError,
                             builtin, chaos3d_C, eval_flow, eval_impulse, make_scalar,
                             spectral_norm, verify_assumption1, verify_assumption2)

finite = st.floats(-50, 50, allow_nan=False)


def test_chaos_flow_at_origin(chaos):
    model, _ = chaos
    np.testing.assert_array_equal(eval_flow(model, [0, 0, 0]), np.zeros(3))


def test_chaos_flow_unit_vector(chaos):
    # A e1 + B q(e1) = (-1, 0, 0) + first column of B
    model, _ = chaos
    np.testing.assert_allclose(eval_flow(model, [1, 0, 0]), [0.25, -3.2, -3.2], atol=1e-15)


def test_chaos_flow_linear_bound(chaos):
    model, _ = chaos
    x = np.array([0.1, 0.2, -0.1])
    assert np.linalg.norm(eval_flow(model, x)) <= 8.010 * np.linalg.norm(x)


def test_chaos_impulse_cancels_first_axis(chaos):
    model, _ = chaos
    x = np.array([1.0, 0.0, 0.0])
    g = eval_impulse(model, 0.0, x)
    np.testing.assert_allclose(g, [-1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(x + g, 0.0, atol=1e-15)


def test_dimension_mismatch_is_usage_error(chaos):
    model, _ = chaos
    with pytest.raises(UsageError):
        eval_flow(model, [1.0, 2.0])
    with pytest.raises(UsageError):
        eval_impulse(model, 0.0, [1.0])
    with pytest.raises(UsageError):
        eval_flow(model, [np.nan, 0, 0])


def test_chaos_constants(chaos):
    model, lyap = chaos
    assert model.L1 == pytest.approx(8.010, abs=0.005)
    assert model.L2 == 0.4
    assert math.isinf(model.R)
    assert lyap.mu == model.L1
    assert lyap.norm_type and lyap.rho is None


def test_spectral_norm_matches_svd():
    sv = np.linalg.svd(CHAOS3D_B, compute_uv=False)[0]
    assert spectral_norm(CHAOS3D_B) == pytest.approx(sv, rel=1e-9)
    assert sv == pytest.approx(7.010, abs=0.005)


def test_identity_jump_gain_norm_on_grid():
    for t in np.arange(0.0, 2 * np.pi, 0.01):
        assert np.linalg.norm(np.eye(3) + chaos3d_C(t), 2) <= 0.4 + 1e-12


@given(t=st.floats(-100, 100, allow_nan=False), x=st.lists(finite, min_size=3, max_size=3))
def test_chaos_jump_contraction_property(chaos, t, x):
    model, _ = chaos
    x = np.array(x)
    assert np.linalg.norm(x + eval_impulse(model, t, x)) <= 0.4 * np.linalg.norm(x) + 1e-12


@pytest.mark.parametrize("name,params", [
    ("chaos3d", {}),
    ("scalar-cubic", {"radius": 2.0}),
    ("scalar-linpow", {"radius": 4.0, "gain": 1.0}),
    ("analytic-linear", {}),
])
def test_builtins_fix_origin(name, params):
    model, _ = builtin(name, **params)
    zero = np.zeros(model.dim)
    np.testing.assert_array_equal(model.flow(zero), zero)
    for t in np.linspace(0, 10, 21):
        np.testing.assert_array_equal(model.impulse(t, zero), zero)


def test_scalar_constants():
    cubic, _ = make_scalar("cubic", R=2.0)
    assert cubic.L1 == cubic.L2 == 4.0
    linpow, _ = make_scalar("linear_pow", R=4.0, c=1.0)
    assert (linpow.L1, linpow.L2) == (1.0, 2.0)
    lin, lyap = make_scalar("analytic_linear")
    assert eval_flow(lin, [3.0])[0] == 3.0
    assert eval_impulse(lin, 0.0, [3.0])[0] == -1.5
    assert lyap.mu == 1.0


@pytest.mark.parametrize("kwargs", [
    {"kind": "cubic", "R": 0.0},
    {"kind": "cubic", "R": -1.0},
    {"kind": "linear_pow", "R": 4.0, "c": 0.0},
    {"kind": "linear_pow", "R": -4.0, "c": 1.0},
    {"kind": "quartic"},
])
def test_make_scalar_rejects_bad_params(kwargs):
    with pytest.raises(UsageError):
        make_scalar(**kwargs)


def test_verify_assumption1_chaos(chaos):
    model, _ = chaos
    rep = verify_assumption1(model, samples=10_000, seed=1)
    assert rep.ok
    assert rep.max_flow_ratio <= 8.010
    assert rep.max_jump_ratio <= 0.4 + 1e-12
    assert rep.radius == 10.0


def test_verify_assumption1_analytic_exact(analytic):
    model, _ = analytic
    rep = verify_assumption1(model, samples=200, seed=3)
    assert rep.max_flow_ratio == pytest.approx(1.0, rel=1e-15)
    assert rep.flow_ok and rep.jump_ok


def test_verify_assumption1_cubic_flow_sample():
    model, _ = make_scalar("cubic", R=2.0)
    rep = verify_assumption1(model, samples=1, seed=0, extra_points=[[1.0]])
    assert rep.max_flow_ratio >= 1.0
    assert rep.flow_ok


def test_verify_assumption1_flags_loose_cubic_jump():
    # |x + x^3| / |x| = 1 + x^2 exceeds R^2 close to the ball edge
    model, _ = make_scalar("cubic", R=2.0)
    rep = verify_assumption1(model, samples=2000, seed=0)
    assert rep.flow_ok
    assert not rep.jump_ok
    assert rep.max_jump_ratio <= 1 + 4.0


def test_verify_assumption2_chaos(chaos):
    model, lyap = chaos
    rep = verify_assumption2(model, lyap, samples=2000, seed=5)
    assert rep.sandwich_ok and rep.dini_ok


def test_verify_assumption2_detects_wrong_rate(chaos):
    model, lyap = chaos
    from dataclasses import replace
    rep = verify_assumption2(model, replace(lyap, mu=0.1), samples=2000, seed=5)
    assert not rep.dini_ok


def test_threshold_and_trigger_validation():
    with pytest.raises(UsageError):
        ThresholdSpec(0.0, 0.1)
    with pytest.raises(UsageError):
        ThresholdSpec(0.3, -1.0)
    with pytest.raises(UsageError):
        TriggerSpec(TriggerKind.PERIODIC_GLOBAL)
    with pytest.raises(UsageError):
        TriggerSpec(TriggerKind.CONTINUOUS, 0.1)
    with pytest.raises(UsageError):
        TriggerSpec("hourly", 1.0)
    assert TriggerSpec("periodic-post-impulse", 0.015).kind is TriggerKind.PERIODIC_POST_IMPULSE


@settings(max_examples=50)
@given(s=st.floats(0, 1e3))
def test_builtin_sandwich_is_identity(chaos, s):
    _, lyap = chaos
    assert lyap.alpha1(s) <= lyap.alpha2(s)
    assert lyap.alpha1_inv(lyap.alpha1(s)) == s
