"""Post-hoc checks on simulated trajectories and CSV export."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .simulator import Trajectory


@dataclass
class BoundCheckReport:
    bound_name: str
    violations: list = field(default_factory=list)
    max_excess: float = -math.inf
    vacuous: bool = False

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        state = "pass" if self.passed else f"FAIL ({len(self.violations)} violations)"
        extra = " (vacuous)" if self.vacuous else ""
        return f"{self.bound_name}: {state}{extra}, max excess {self.max_excess:.3e}"


def _collect(name, t, observed, bound, slack) -> BoundCheckReport:
    excess = observed - bound
    bad = excess > slack
    rep = BoundCheckReport(name)
    if excess.size:
        rep.max_excess = float(np.max(excess))
    rep.violations = [(float(a), float(b), float(c))
                      for a, b, c in zip(t[bad], observed[bad], bound[bad])]
    return rep


def verify_global_bound(traj: Trajectory, a: float, b: float, mu: float, tau: float,
                        delta: float = 0.0) -> BoundCheckReport:
    """``V(t) <= a exp(-b t) exp((b + mu)(tau + delta))`` for recorded ``t >= t_1``."""
    name = "global_envelope"
    if not traj.events:
        return BoundCheckReport(name, vacuous=True)
    t1 = traj.events[0].t_event
    mask = traj.t >= t1
    t = traj.t[mask]
    bound = a * np.exp(-b * t) * math.exp((b + mu) * (tau + delta))
    return _collect(name, t, traj.V[mask], bound, 1e-6 * bound)


def verify_post_impulse(traj: Trajectory, a: float, b: float) -> BoundCheckReport:
    """Each impulse must land V strictly under the threshold line."""
    name = "post_impulse_below_threshold"
    if not traj.impulses:
        return BoundCheckReport(name, vacuous=True)
    t = traj.impulse_times
    observed = np.array([p.V_post for p in traj.impulses])
    bound = a * np.exp(-b * t)
    rep = BoundCheckReport(name)
    rep.max_excess = float(np.max(observed - bound))
    rep.violations = [(float(ti), float(v), float(th))
                      for ti, v, th in zip(t, observed, bound) if not v < th + 1e-9]
    return rep


@dataclass
class DecayFit:
    rate: float
    final_norm: float
    converged: bool
    n_points: int


def decay_fit(traj: Trajectory, convergence_threshold: float = 1e-2) -> DecayFit:
    """Slope of ``ln V`` against t over post-impulse values.

    Falls back to all recorded samples when there are fewer than two
    impulses. ``rate`` is NaN when fewer than two positive values exist.
    """
    if len(traj.impulses) >= 2:
        t = traj.impulse_times
        v = np.array([p.V_post for p in traj.impulses])
    else:
        t, v = traj.t, traj.V
    keep = v > 0
    t, v = t[keep], v[keep]
    rate = float(np.polyfit(t, np.log(v), 1)[0]) if t.size >= 2 else math.nan
    final_norm = float(traj.norms[-1])
    return DecayFit(rate, final_norm, final_norm < convergence_threshold, int(t.size))


def adt_check(traj: Trajectory, T_star: float, zeta: Optional[float] = None,
              sigma: float = 1.0) -> BoundCheckReport:
    """Reverse average dwell-time test ``N(t, s) >= (t - s)/T* - zeta/sigma``.

    Interval endpoints range over ``{0} U impulses`` (left) and
    ``impulses U {t_end}`` (right). A right endpoint at an impulse time is
    taken as a left limit, which is where the count is smallest for that
    length. ``zeta`` defaults to ``sigma`` (one impulse of slack).
    """
    if not (T_star > 0 and sigma > 0):
        raise ValueError("T_star and sigma must be positive")
    if zeta is None:
        zeta = sigma
    imp = traj.impulse_times
    n = imp.size
    starts = np.concatenate([[0.0], imp])
    ends = np.concatenate([imp, [traj.t_end]])
    # counts: impulses in (s, t) for s = starts[i], t = ends[j]^-
    start_idx = np.arange(n + 1)              # impulses strictly after starts[i] begin at index i
    end_idx = np.arange(n + 1)                # impulses before ends[j]; all n by t_end
    S, E = np.meshgrid(starts, ends, indexing="ij")
    Ns = end_idx[None, :] - start_idx[:, None]
    valid = E > S
    need = (E - S) / T_star - zeta / sigma
    rep = BoundCheckReport("reverse_adt")
    excess = np.where(valid, need - Ns, -np.inf)
    rep.max_excess = float(np.max(excess)) if excess.size else -math.inf
    bad = valid & (Ns < need)
    for i, j in zip(*np.nonzero(bad)):
        rep.violations.append((float(E[i, j]), float(Ns[i, j]), float(need[i, j])))
    rep.vacuous = n == 0
    return rep


def impulse_rate(traj: Trajectory) -> float:
    return len(traj.impulses) / traj.t_end


# --------------------------------------------------------------------------
# CSV export

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def samples_header(dim: int) -> list:
    return ["t"] + [f"x{i + 1}" for i in range(dim)] + ["V", "threshold", "phase"]


EVENTS_HEADER = ["k", "t_event", "t_impulse", "V_event", "V_pre", "V_post", "gap_prev"]


def export_csv(traj: Trajectory, samples_path, events_path):
    samples_path, events_path = Path(samples_path), Path(events_path)
    dim = traj.x.shape[1]
    try:
        with samples_path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(samples_header(dim))
            for t, x, v, th, ph in zip(traj.t, traj.x, traj.V, traj.threshold, traj.phase):
                w.writerow([_fmt(t), *map(_fmt, x), _fmt(v), _fmt(th), ph])
    except OSError as exc:
        raise OSError(f"cannot write samples CSV {samples_path}: {exc}") from exc
    impulses = {p.k: p for p in traj.impulses}
    try:
        with events_path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(EVENTS_HEADER)
            prev = None
            for e in traj.events:
                p = impulses.get(e.k)
                w.writerow([
                    e.k, _fmt(e.t_event),
                    _fmt(p.t_impulse) if p else "",
                    _fmt(e.V_at_event),
                    _fmt(p.V_pre) if p else "",
                    _fmt(p.V_post) if p else "",
                    _fmt(e.t_event - prev) if prev is not None else "",
                ])
                prev = e.t_event
    except OSError as exc:
        raise OSError(f"cannot write events CSV {events_path}: {exc}") from exc


def read_samples_csv(path) -> dict:
    """Columns of a samples CSV as float arrays (``phase`` stays a list)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for i, name in enumerate(header):
        col = [r[i] for r in body]
        out[name] = col if name == "phase" else np.array(col, dtype=float)
    return out


def read_events_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    parsed = []
    for r in rows:
        parsed.append({k: (int(v) if k == "k" else (float(v) if v != "" else None))
                       for k, v in r.items()})
    return parsed
