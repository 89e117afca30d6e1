"""Closed-loop execution: flow, event, delayed impulse, repeat."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .integrator import DivergenceError, FlowSource
from .model import (LyapunovSpec, SystemModel, ThresholdSpec, TriggerSpec, UsageError,
                    as_state, eval_impulse)
from .triggers import CertificateViolation, EventQuery, next_event

FLOW = "flow"
IMPULSE_PRE = "impulse_pre"
IMPULSE_POST = "impulse_post"

COMPLETED = "completed"
ZENO_GUARD = "zeno_guard"
DIVERGENCE = "divergence"
CERTIFICATE_VIOLATION = "certificate_violation"


@dataclass(frozen=True)
class SimConfig:
    x0: tuple
    tau: float
    t_end: float
    step: float = 1e-4
    record_stride: int = 10
    max_events: int = 1_000_000
    tol_t: float = 1e-9
    """Relative event-localization tolerance: ``tol_t * max(1, t)``."""

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))
        if not self.tau >= 0:
            raise UsageError("tau must be >= 0")
        if not self.t_end > 0:
            raise UsageError("t_end must be > 0")
        if not self.step > 0:
            raise UsageError("step must be > 0")
        if self.record_stride < 1:
            raise UsageError("record_stride must be >= 1")
        if self.max_events < 1:
            raise UsageError("max_events must be >= 1")
        if not self.tol_t > 0:
            raise UsageError("tol_t must be > 0")


@dataclass(frozen=True)
class EventRecord:
    k: int
    t_event: float
    x_at_event: np.ndarray
    V_at_event: float
    threshold_at_event: float


@dataclass(frozen=True)
class ImpulseRecord:
    k: int
    t_impulse: float
    x_pre: np.ndarray
    x_post: np.ndarray
    V_pre: float
    V_post: float


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    V: np.ndarray
    threshold: np.ndarray
    phase: list
    events: list
    impulses: list
    termination: str
    t_end: float
    tau: float
    delta: Optional[float] = None
    message: str = ""

    @property
    def event_times(self) -> np.ndarray:
        return np.array([e.t_event for e in self.events])

    @property
    def impulse_times(self) -> np.ndarray:
        return np.array([p.t_impulse for p in self.impulses])

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=1)


class _Recorder:
    def __init__(self, lyap: LyapunovSpec, threshold: ThresholdSpec, stride: int):
        self.lyap = lyap
        self.threshold = threshold
        self.stride = stride
        self.count = 0
        self.t: list = []
        self.x: list = []
        self.V: list = []
        self.th: list = []
        self.phase: list = []

    def add(self, t, x, phase=FLOW):
        if self.t and t <= self.t[-1]:
            last = self.phase[-1]
            if phase == IMPULSE_POST and last == IMPULSE_PRE:
                pass
            elif phase == IMPULSE_PRE and last == FLOW and t == self.t[-1]:
                self._pop()
            else:
                return
        self.t.append(t)
        self.x.append(np.array(x, dtype=float))
        self.V.append(float(self.lyap.V(x)))
        self.th.append(self.threshold(t))
        self.phase.append(phase)

    def _pop(self):
        for lst in (self.t, self.x, self.V, self.th, self.phase):
            lst.pop()

    def on_segment(self, seg):
        self.count += 1
        if self.count % self.stride == 0:
            self.add(seg.t1, seg.x1)


def simulate(model: SystemModel, lyap: LyapunovSpec, threshold: ThresholdSpec,
             trigger: TriggerSpec, config: SimConfig) -> Trajectory:
    """Run the event-triggered impulsive loop on ``[0, config.t_end]``.

    Raises :class:`UsageError` unless ``alpha2(||x0||) < a``. Divergence,
    certificate violations and the Zeno guard end the run early and are
    reported through ``Trajectory.termination``.
    """
    x0 = as_state(config.x0, model.dim)
    if not lyap.alpha2(float(np.linalg.norm(x0))) < threshold.a:
        raise UsageError(
            f"initial state rejected: alpha2(||x0||) = {lyap.alpha2(float(np.linalg.norm(x0))):.6g}"
            f" must be below a = {threshold.a}")
    tau, t_end = config.tau, config.t_end
    rec = _Recorder(lyap, threshold, config.record_stride)
    rec.add(0.0, x0)
    src = FlowSource(model, 0.0, x0, config.step, listener=rec.on_segment)
    events: list = []
    impulses: list = []
    termination = COMPLETED
    message = ""
    window_start = 0.0
    last_impulse = None
    try:
        while True:
            if len(events) >= config.max_events:
                termination = ZENO_GUARD
                message = f"stopped after {len(events)} events"
                break
            if window_start >= t_end:
                break
            query = EventQuery(window_start, last_impulse, trigger, threshold, t_end)
            t_ev = next_event(src, lyap, query, config.tol_t)
            if t_ev is None:
                src.advance_to(t_end)
                break
            x_ev = np.array(src.x)
            k = len(events) + 1
            events.append(EventRecord(k, t_ev, x_ev, float(lyap.V(x_ev)), threshold(t_ev)))
            rec.add(t_ev, x_ev)
            t_imp = t_ev + tau
            if t_imp > t_end:
                src.advance_to(t_end)
                break
            # no monitoring inside (t_ev, t_imp)
            x_pre = np.array(src.advance_to(t_imp))
            x_post = x_pre + eval_impulse(model, t_ev, x_ev)
            rec.add(t_imp, x_pre, IMPULSE_PRE)
            src.jump(x_post)
            rec.add(t_imp, x_post, IMPULSE_POST)
            impulses.append(ImpulseRecord(k, t_imp, x_pre, np.array(x_post),
                                          float(lyap.V(x_pre)), float(lyap.V(x_post))))
            window_start = t_imp
            last_impulse = t_imp
    except CertificateViolation as exc:
        termination = CERTIFICATE_VIOLATION
        message = str(exc)
    except DivergenceError as exc:
        termination = DIVERGENCE
        message = str(exc)
    rec.add(src.t, src.x)
    delta = trigger.delta if trigger.kind.periodic else None
    return Trajectory(
        t=np.array(rec.t), x=np.array(rec.x), V=np.array(rec.V),
        threshold=np.array(rec.th), phase=rec.phase, events=events, impulses=impulses,
        termination=termination, t_end=t_end, tau=tau, delta=delta, message=message)


def min_inter_event(traj: Trajectory) -> Optional[float]:
    if len(traj.events) < 2:
        return None
    return float(np.min(np.diff(traj.event_times)))


@dataclass
class ZenoReport:
    lower_bound: float
    min_gap: Optional[float]
    n_events: int
    termination: str
    passed: bool = field(init=False)

    def __post_init__(self):
        gap_ok = self.min_gap is None or self.min_gap >= self.lower_bound - 1e-9 * max(1.0, self.lower_bound)
        self.passed = gap_ok and self.termination != ZENO_GUARD


def check_zeno(traj: Trajectory, lower_bound: float) -> ZenoReport:
    if not lower_bound > 0:
        raise UsageError("lower_bound must be positive")
    return ZenoReport(lower_bound, min_inter_event(traj), len(traj.events), traj.termination)

