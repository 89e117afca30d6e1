"""Fixed-step RK4 integration of the flow with cubic Hermite dense output."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .model import SystemModel, UsageError, as_state

DIVERGENCE_NORM = 1e6


class DivergenceError(RuntimeError):
    """The numerical solution left every reasonable bound (finite escape)."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"solution diverged at t={t:.17g}")


@dataclass(frozen=True)
class FlowSegment:
    t0: float
    t1: float
    x0: np.ndarray
    x1: np.ndarray
    d0: np.ndarray
    d1: np.ndarray

    @property
    def h(self) -> float:
        return self.t1 - self.t0


def _check_finite(t: float, x: np.ndarray):
    n = np.linalg.norm(x)
    if not np.isfinite(n) or n > DIVERGENCE_NORM:
        raise DivergenceError(t)


def rk4_step(model: SystemModel, t: float, x, h: float, d0=None) -> FlowSegment:
    """One classical RK4 step over ``[t, t + h]``.

    ``d0`` may carry a cached ``f(x)`` (the previous segment's ``d1``).
    """
    if not h > 0:
        raise UsageError(f"step must be positive, got {h}")
    f = model.flow
    k1 = f(x) if d0 is None else d0
    k2 = f(x + (0.5 * h) * k1)
    k3 = f(x + (0.5 * h) * k2)
    k4 = f(x + h * k3)
    x1 = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(t + h, x1)
    return FlowSegment(t, t + h, x, x1, k1, f(x1))


def dense_eval(seg: FlowSegment, t: float) -> np.ndarray:
    """Cubic Hermite interpolant through ``(x0, d0)`` and ``(x1, d1)``."""
    if not seg.t0 <= t <= seg.t1:
        raise UsageError(f"t={t!r} outside segment [{seg.t0!r}, {seg.t1!r}]")
    if t == seg.t0:
        return seg.x0
    if t == seg.t1:
        return seg.x1
    h = seg.t1 - seg.t0
    s = (t - seg.t0) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * seg.x0 + (h10 * h) * seg.d0 + h01 * seg.x1 + (h11 * h) * seg.d1


def _next_step(t: float, t_end: float, h: float) -> tuple[float, bool]:
    # absorb slivers below 1e-9 h into the final step
    remaining = t_end - t
    if remaining <= h * (1 + 1e-9):
        return remaining, True
    return h, False


def iter_segments(model: SystemModel, t0: float, x0, t_end: float, h: float,
                  d0=None) -> Iterator[FlowSegment]:
    """Segments covering ``[t0, t_end]``; the last one ends exactly at ``t_end``."""
    t, x, d = t0, x0, d0
    while t < t_end:
        hh, last = _next_step(t, t_end, h)
        seg = rk4_step(model, t, x, hh, d)
        if last:
            seg = FlowSegment(seg.t0, t_end, seg.x0, seg.x1, seg.d0, seg.d1)
        yield seg
        t, x, d = seg.t1, seg.x1, seg.d1


def integrate_until(model: SystemModel, t0: float, x0, t_end: float, h: float,
                    observer: Optional[Callable[[FlowSegment], None]] = None) -> np.ndarray:
    if not t0 < t_end:
        raise UsageError(f"need t0 < t_end, got {t0} >= {t_end}")
    x = as_state(x0, model.dim)
    for seg in iter_segments(model, t0, x, t_end, h):
        if observer is not None:
            observer(seg)
        x = seg.x1
    return x


class FlowSource:
    """Stateful stepping over the flow, used by the event searches.

    ``peek`` computes the next segment without moving; ``commit`` moves
    to a segment's end and notifies the listener. The simulator uses the
    listener to record samples, so segments abandoned after an event
    crossing are never recorded.
    """

    def __init__(self, model: SystemModel, t: float, x, h: float,
                 listener: Optional[Callable[[FlowSegment], None]] = None):
        if not h > 0:
            raise UsageError(f"step must be positive, got {h}")
        self.model = model
        self.h = h
        self.listener = listener
        self.t = float(t)
        self.x = as_state(x, model.dim)
        self._d = None

    def peek(self, t_limit: float) -> FlowSegment:
        hh, last = _next_step(self.t, t_limit, self.h)
        seg = rk4_step(self.model, self.t, self.x, hh, self._d)
        if last:
            seg = FlowSegment(seg.t0, t_limit, seg.x0, seg.x1, seg.d0, seg.d1)
        return seg

    def commit(self, seg: FlowSegment):
        self.t, self.x, self._d = seg.t1, seg.x1, seg.d1
        if self.listener is not None:
            self.listener(seg)

    def advance_to(self, t_target: float):
        while self.t < t_target:
            self.commit(self.peek(t_target))
        return self.x

    def jump(self, x_new):
        """Replace the state in place (impulse); time is unchanged."""
        self.x = np.asarray(x_new, dtype=float)
        self._d = None
        _check_finite(self.t, self.x)
