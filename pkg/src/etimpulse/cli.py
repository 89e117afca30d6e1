"""Command-line front end.

Every run is described by a flat JSON config; each key can be overridden
with a ``--kebab-case`` flag. Exit codes: 0 ok, 1 certificate fails,
2 usage error, 3 certificate violation during simulation, 4 divergence.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis
from .certify import adt_compare, certify, inter_event_lower_bound, rho_for
from .model import ThresholdSpec, TriggerKind, TriggerSpec, UsageError, builtin, verify_assumption1
from .simulator import (CERTIFICATE_VIOLATION, DIVERGENCE, SimConfig, check_zeno,
                        min_inter_event, simulate)

EXIT_OK = 0
EXIT_CERT_FAIL = 1
EXIT_USAGE = 2
EXIT_VIOLATION = 3
EXIT_DIVERGENCE = 4

SWEEP_AXES = ("tau", "delta", "a", "b")


@dataclass
class RunConfig:
    system: str = "chaos3d"
    radius: Optional[float] = None
    gain: Optional[float] = None
    trigger: str = "continuous"
    tau: float = 0.05
    a: float = 0.294
    b: float = 0.1
    delta: Optional[float] = None
    x0: list = field(default_factory=lambda: [0.1, 0.2, -0.1])
    t_end: float = 20.0
    step: float = 1e-4
    tol_t: float = 1e-9
    max_events: int = 1_000_000
    record_stride: int = 10
    seed: int = 0
    output_dir: str = "."
    lam: float = 0.1
    zeta: Optional[float] = None
    rho: Optional[float] = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self):
        # build every derived object once so bad values fail before any work
        self.build()
        if not self.lam > 0:
            raise UsageError("lam must be positive")

    def build(self):
        model, lyap = builtin(self.system, radius=self.radius, gain=self.gain)
        threshold = ThresholdSpec(self.a, self.b)
        periodic = self.trigger != TriggerKind.CONTINUOUS.value
        if not periodic and self.delta is not None:
            raise UsageError("delta is only meaningful for periodic triggers")
        trigger = TriggerSpec(self.trigger, self.delta if periodic else None)
        sim = SimConfig(x0=tuple(self.x0), tau=self.tau, t_end=self.t_end, step=self.step,
                        record_stride=self.record_stride, max_events=self.max_events,
                        tol_t=self.tol_t)
        if len(sim.x0) != model.dim:
            raise UsageError(f"x0 has {len(sim.x0)} components, {self.system} needs {model.dim}")
        return model, lyap, threshold, trigger, sim

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# commands

def _write_summary(cfg: RunConfig, lines: list, out=None):
    out = out or sys.stdout
    text = "\n".join(lines) + "\n"
    out.write(text)
    dest = Path(cfg.output_dir)
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "summary.txt").write_text(
        "effective config:\n" + cfg.to_json() + "\n\n" + text)


def cmd_simulate(cfg: RunConfig, out=None) -> int:
    model, lyap, threshold, trigger, sim = cfg.build()
    traj = simulate(model, lyap, threshold, trigger, sim)
    dest = Path(cfg.output_dir)
    dest.mkdir(parents=True, exist_ok=True)
    analysis.export_csv(traj, dest / "samples.csv", dest / "events.csv")

    report = certify(model, lyap, cfg.a, cfg.b, cfg.tau, trigger, rho=cfg.rho)
    bound = inter_event_lower_bound(trigger, report.gamma, cfg.tau)
    delta = cfg.delta if trigger.kind.periodic else 0.0
    glob = analysis.verify_global_bound(traj, cfg.a, cfg.b, lyap.mu, cfg.tau, delta)
    post = analysis.verify_post_impulse(traj, cfg.a, cfg.b)
    fit = analysis.decay_fit(traj)
    gap = min_inter_event(traj)
    assumption = verify_assumption1(model, samples=1000, seed=cfg.seed)
    lines = [
        f"system: {model.name}  trigger: {trigger.kind.value}  tau={cfg.tau:g}"
        + (f"  delta={cfg.delta:g}" if trigger.kind.periodic else ""),
        f"termination: {traj.termination}" + (f" ({traj.message})" if traj.message else ""),
        f"events: {len(traj.events)}  impulses: {len(traj.impulses)}",
        f"min inter-event gap: {'n/a' if gap is None else f'{gap:.6f}'}",
        f"certificate: {'pass' if report.overall else 'fail'}  rho={report.rho:.6f}  "
        f"Gamma={report.gamma:.6f}  lower bound={bound:.6f}",
    ]
    if bound > 0:
        z = check_zeno(traj, bound)
        lines.append(f"zeno check vs {bound:.6f}: {'pass' if z.passed else 'FAIL'}")
    lines += [
        glob.summary(),
        post.summary(),
        f"decay fit: rate={fit.rate:.6f}  final norm={fit.final_norm:.6e}  "
        f"converged(<1e-2)={fit.converged}",
        f"impulse rate: {analysis.impulse_rate(traj):.6f} per unit time",
        f"assumption check (seed {cfg.seed}): flow ratio {assumption.max_flow_ratio:.4f}"
        f" <= L1={model.L1:.4f}: {assumption.flow_ok}; jump ratio "
        f"{assumption.max_jump_ratio:.4f} <= L2={model.L2:.4f}: {assumption.jump_ok}",
    ]
    _write_summary(cfg, lines, out)
    if traj.termination == CERTIFICATE_VIOLATION:
        return EXIT_VIOLATION
    if traj.termination == DIVERGENCE:
        return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_certify(cfg: RunConfig, as_json: bool = False, out=None) -> int:
    out = out or sys.stdout
    model, lyap, _, trigger, _ = cfg.build()
    report = certify(model, lyap, cfg.a, cfg.b, cfg.tau, trigger, rho=cfg.rho)
    bound = inter_event_lower_bound(trigger, report.gamma, cfg.tau)
    if as_json:
        d = json.loads(report.to_json())
        d["inter_event_lower_bound"] = bound
        out.write(json.dumps(d, indent=2) + "\n")
    else:
        out.write(report.to_text() + f"\ninter_event_lower_bound = {bound:.10g}\n")
    return EXIT_OK if report.overall else EXIT_CERT_FAIL


SWEEP_HEADER = ["index", "tau", "delta", "a", "b", "rho", "gamma", "certified",
                "lower_bound", "events", "min_gap", "zeno_pass", "bounds_pass", "termination"]


def sweep_point(index: int, cfg: RunConfig) -> list:
    model, lyap, threshold, trigger, sim = cfg.build()
    report = certify(model, lyap, cfg.a, cfg.b, cfg.tau, trigger, rho=cfg.rho)
    bound = inter_event_lower_bound(trigger, report.gamma, cfg.tau)
    traj = simulate(model, lyap, threshold, trigger, sim)
    delta = cfg.delta if trigger.kind.periodic else 0.0
    glob = analysis.verify_global_bound(traj, cfg.a, cfg.b, lyap.mu, cfg.tau, delta)
    post = analysis.verify_post_impulse(traj, cfg.a, cfg.b)
    gap = min_inter_event(traj)
    zeno = check_zeno(traj, bound).passed if bound > 0 else False
    return [index, cfg.tau, cfg.delta if cfg.delta is not None else "", cfg.a, cfg.b,
            report.rho, report.gamma, report.overall, bound, len(traj.events),
            "" if gap is None else gap, zeno, glob.passed and post.passed, traj.termination]


def sweep_grid(cfg: RunConfig, axis: str, start: float, stop: float, count: int) -> list:
    if axis not in SWEEP_AXES:
        raise UsageError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}")
    if count < 1:
        raise UsageError("empty sweep grid")
    points = []
    for v in np.linspace(start, stop, count):
        point = dataclasses.replace(cfg, **{axis: float(v)})
        point.validate()
        points.append(point)
    return points


def cmd_sweep(cfg: RunConfig, axis: str, start: float, stop: float, count: int,
              jobs: int = 1, out=None) -> int:
    out = out or sys.stdout
    points = sweep_grid(cfg, axis, start, stop, count)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_point, range(len(points)), points))
    else:
        rows = [sweep_point(i, p) for i, p in enumerate(points)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    dest = Path(cfg.output_dir)
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "sweep.csv").write_text(buf.getvalue())
    out.write(buf.getvalue())
    return EXIT_OK


def cmd_compare_adt(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if not cfg.lam > 0:
        raise UsageError("lam must be positive")
    model, lyap, threshold, trigger, sim = cfg.build()
    rho = cfg.rho if cfg.rho is not None else rho_for(model, lyap, cfg.tau)
    try:
        sigma, t_star = adt_compare(model.L1, cfg.lam, rho)
    except ValueError as exc:
        out.write(f"no dwell-time comparison possible: {exc}\n")
        return EXIT_CERT_FAIL
    traj = simulate(model, lyap, threshold, trigger, sim)
    gap = min_inter_event(traj)
    adt = analysis.adt_check(traj, t_star, cfg.zeta, sigma)
    lines = [
        f"rho = {rho:.6f}",
        f"sigma = {sigma:.6f}",
        f"T* = {t_star:.6f}",
        f"event-triggered min gap = {'n/a' if gap is None else f'{gap:.6f}'}",
        f"event-triggered impulse rate = {analysis.impulse_rate(traj):.6f} per unit time"
        f" (dwell-time schedule needs about {1 / t_star:.3f})",
        f"reverse ADT condition on event-triggered impulses: "
        f"{'satisfied' if adt.passed else 'not satisfied'}",
    ]
    if gap is not None:
        verdict = "sparser" if gap > t_star else "not sparser"
        lines.append(f"verdict: min gap {gap:.6f} vs T* {t_star:.6f} "
                     f"(factor {gap / t_star:.2f}); event-triggered impulses are {verdict}")
    else:
        lines.append("verdict: fewer than two events, no gap to compare")
    _write_summary(cfg, lines, out)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing

def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="flat JSON config file")
    for f in dataclasses.fields(RunConfig):
        if f.name == "x0":
            p.add_argument("--x0", nargs="+", type=float, help="initial state")
            continue
        default = f.default
        if f.name in ("radius", "gain", "delta", "zeta", "rho"):
            kind = float
        elif f.name in ("system", "trigger", "output_dir"):
            kind = str
        else:
            kind = type(default)
        p.add_argument(_flag(f.name), type=kind, dest=f.name)
    return p


def build_parser() -> argparse.ArgumentParser:
    parent = _config_parent()
    parser = argparse.ArgumentParser(prog="etimpulse", parents=[parent], description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[parent], help="run one closed-loop simulation")
    c = sub.add_parser("certify", parents=[parent], help="evaluate the stability conditions")
    c.add_argument("--json", action="store_true", help="machine-readable output")
    s = sub.add_parser("sweep", parents=[parent], help="grid over tau, delta, a or b")
    s.add_argument("--axis", required=True, choices=SWEEP_AXES)
    s.add_argument("--start", type=float, required=True)
    s.add_argument("--stop", type=float, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--jobs", type=int, default=1)
    sub.add_parser("compare-adt", parents=[parent], help="compare with dwell-time impulses")
    return parser


def load_config(ns: argparse.Namespace) -> RunConfig:
    values: dict = {}
    path = getattr(ns, "config", None)
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        values.update(loaded)
    for f in dataclasses.fields(RunConfig):
        if hasattr(ns, f.name):
            values[f.name] = getattr(ns, f.name)
    return RunConfig.from_dict(values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(ns)
        if ns.command == "simulate":
            return cmd_simulate(cfg)
        if ns.command == "certify":
            return cmd_certify(cfg, as_json=ns.json)
        if ns.command == "sweep":
            return cmd_sweep(cfg, ns.axis, ns.start, ns.stop, ns.count, ns.jobs)
        return cmd_compare_adt(cfg)
    except (UsageError, TypeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
