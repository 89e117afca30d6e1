"""Event-time searches for the three triggering laws.

All three fire when the surplus ``s(t) = V(x(t)) - a exp(-b t)`` becomes
nonnegative; they differ in where ``s`` is observed:

* continuous: every time ``t >= window_start`` (sub-step localization by
  bisection on the dense output),
* periodic-global: only on the fixed grid ``j * delta``, ``j >= 1``,
* periodic-post-impulse: on ``last_impulse + j * delta`` once an impulse
  has happened, on the fixed grid before that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .integrator import FlowSegment, FlowSource, dense_eval
from .model import LyapunovSpec, ThresholdSpec, TriggerKind, TriggerSpec, UsageError


class CertificateViolation(RuntimeError):
    """The surplus is already nonnegative when a monitoring window opens."""

    def __init__(self, t: float, surplus_value: float):
        self.t = t
        self.surplus = surplus_value
        super().__init__(
            f"V is at or above the threshold when monitoring resumes at t={t:.17g} "
            f"(surplus {surplus_value:.3e}); the stability conditions do not hold")


@dataclass(frozen=True)
class EventQuery:
    window_start: float
    last_impulse_time: Optional[float]
    trigger: TriggerSpec
    threshold: ThresholdSpec
    horizon: float

    def __post_init__(self):
        if self.window_start < 0:
            raise UsageError("window_start must be >= 0")
        if not self.horizon > self.window_start:
            raise UsageError("horizon must exceed window_start")


def surplus(lyap: LyapunovSpec, threshold: ThresholdSpec, t: float, x) -> float:
    return lyap.V(x) - threshold.a * math.exp(-threshold.b * t)


def default_tol(t: float, tol_t: float = 1e-9) -> float:
    return tol_t * max(1.0, abs(t))


def _bisect(seg: FlowSegment, lyap, threshold, tol: float) -> float:
    lo, hi = seg.t0, seg.t1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if surplus(lyap, threshold, mid, dense_eval(seg, mid)) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def next_event_continuous(src: FlowSource, lyap: LyapunovSpec, query: EventQuery,
                          tol_t: float = 1e-9) -> Optional[float]:
    """First ``t >= window_start`` with ``s(t) >= 0``, or ``None`` before the horizon.

    ``src`` must sit at ``query.window_start``. On return it sits at the
    event time (state from the dense output) or at the horizon.
    """
    th = query.threshold
    s0 = surplus(lyap, th, src.t, src.x)
    if s0 >= 0:
        if query.last_impulse_time is not None:
            raise CertificateViolation(src.t, s0)
        return src.t
    while src.t < query.horizon:
        seg = src.peek(query.horizon)
        if surplus(lyap, th, seg.t1, seg.x1) >= 0:
            t_star = _bisect(seg, lyap, th, default_tol(seg.t1, tol_t))
            x_star = dense_eval(seg, t_star)
            src.commit(FlowSegment(seg.t0, t_star, seg.x0, x_star, seg.d0,
                                   src.model.flow(x_star)))
            return t_star
        src.commit(seg)
    return None


def _scan_samples(src: FlowSource, lyap, query: EventQuery, base: float, j: int) -> Optional[float]:
    th = query.threshold
    delta = query.trigger.delta
    while True:
        t_j = base + j * delta
        if t_j > query.horizon:
            return None
        src.advance_to(t_j)
        # rounding can put t_j a hair before src.t (sample at the impulse time)
        if surplus(lyap, th, t_j, src.x) >= 0:
            return t_j
        j += 1


def next_event_periodic_global(src: FlowSource, lyap: LyapunovSpec,
                               query: EventQuery) -> Optional[float]:
    """Smallest grid time ``j * delta >= window_start`` (``j >= 1``) with ``s >= 0``."""
    delta = query.trigger.delta
    j = max(1, math.ceil(query.window_start / delta - 1e-9))
    return _scan_samples(src, lyap, query, 0.0, j)


def next_event_periodic_post_impulse(src: FlowSource, lyap: LyapunovSpec,
                                     query: EventQuery) -> Optional[float]:
    if query.last_impulse_time is None:
        return next_event_periodic_global(src, lyap, query)
    return _scan_samples(src, lyap, query, query.last_impulse_time, 1)


def next_event(src: FlowSource, lyap: LyapunovSpec, query: EventQuery,
               tol_t: float = 1e-9) -> Optional[float]:
    kind = query.trigger.kind
    if kind is TriggerKind.CONTINUOUS:
        return next_event_continuous(src, lyap, query, tol_t)
    if kind is TriggerKind.PERIODIC_GLOBAL:
        return next_event_periodic_global(src, lyap, query)
    return next_event_periodic_post_impulse(src, lyap, query)
