"""Closed-form stability conditions, inter-event bounds and delay search.

Every check returns a :class:`CertificateReport` listing each inequality
with its two sides and the margin ``rhs - lhs``; nothing is hidden behind
a single boolean.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .model import LyapunovSpec, SystemModel, TriggerKind, TriggerSpec, UsageError, identity


@dataclass
class Condition:
    name: str
    lhs: float
    rhs: float
    passed: bool
    margin: float


def _lt(name, lhs, rhs) -> Condition:
    return Condition(name, lhs, rhs, bool(lhs < rhs), rhs - lhs)


def _le(name, lhs, rhs) -> Condition:
    return Condition(name, lhs, rhs, bool(lhs <= rhs), rhs - lhs)


def _vacuous(name, lhs) -> Condition:
    return Condition(name, lhs, math.inf, True, math.inf)


@dataclass
class CertificateReport:
    theorem: str
    rho: float
    eps1: float
    eps2: float
    gamma: float
    tau: float
    delta: Optional[float] = None
    a_bar: Optional[float] = None
    conditions: list = field(default_factory=list)
    sigma_adt: Optional[float] = None
    T_star: Optional[float] = None

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list:
        return [c.name for c in self.conditions if not c.passed]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["overall"] = self.overall
        return d

    def to_json(self) -> str:
        # JSON has no inf; encode as strings
        def enc(v):
            if isinstance(v, float) and not math.isfinite(v):
                return str(v)
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            if isinstance(v, list):
                return [enc(x) for x in v]
            return v
        return json.dumps(enc(self.to_dict()), indent=2)

    def to_text(self) -> str:
        lines = [f"theorem = {self.theorem}"]
        for key in ("tau", "delta", "rho", "eps1", "eps2", "gamma", "a_bar", "sigma_adt", "T_star"):
            v = getattr(self, key)
            if v is not None:
                lines.append(f"{key} = {v:.10g}")
        for c in self.conditions:
            lines.append(f"condition {c.name}: lhs={c.lhs:.10g} rhs={c.rhs:.10g} "
                         f"pass={str(c.passed).lower()} margin={c.margin:.10g}")
        lines.append(f"overall = {'pass' if self.overall else 'fail'}")
        return "\n".join(lines)


def compute_rho_bound(L1: float, L2: float, tau: float) -> float:
    """Jump contraction for ``V = ||x||`` including flow drift over the delay."""
    if not (L1 > 0 and L2 > 0):
        raise UsageError("L1 and L2 must be positive")
    if not tau >= 0:
        raise UsageError("tau must be >= 0")
    return L2 + math.sqrt(tau * L1 * math.expm1(2.0 * L1 * tau) / 2.0)


def rho_for(model: SystemModel, lyap: LyapunovSpec, tau: float) -> float:
    if lyap.rho is not None:
        return lyap.rho
    if lyap.norm_type:
        return compute_rho_bound(model.L1, model.L2, tau)
    raise UsageError("rho must be supplied for a non-norm Lyapunov function")


def epsilons(mu: float, b: float, rho: float, a: float, R: float = math.inf,
             alpha1: Callable = identity) -> tuple[float, float]:
    eps1 = math.inf if math.isinf(R) else math.log(alpha1(R) / a) / mu
    eps2 = math.log(1.0 / rho) / b
    return eps1, eps2


def gamma_continuous(tau: float, rho: float, b: float, mu: float) -> float:
    return tau - math.log(rho * math.exp(b * tau)) / (b + mu)


def gamma_periodic(tau: float, delta: float, rho: float, b: float, mu: float) -> float:
    return tau - math.log(rho * math.exp(b * (tau + delta)) * math.exp(mu * delta)) / (b + mu)


def check_theorem1(L1, L2, mu, rho, a, b, tau, R=math.inf, alpha1=identity,
                   alpha1_inv=identity) -> CertificateReport:
    """Continuous-trigger conditions: ``rho < 1``, ``a < alpha1(R)``,
    ``tau < min(eps1, eps2)`` and the trajectory-confinement inequality."""
    eps1, eps2 = epsilons(mu, b, rho, a, R, alpha1)
    growth = compute_rho_bound(L1, L2, tau)
    conds = [_lt("rho<1", rho, 1.0)]
    if math.isinf(R):
        conds.append(_vacuous("a<alpha1(R)", a))
    else:
        conds.append(_lt("a<alpha1(R)", a, alpha1(R)))
    conds.append(_lt("tau<min(eps1,eps2)", tau, min(eps1, eps2)))
    if math.isinf(R):
        conds.append(_vacuous("confinement", growth))
    else:
        conds.append(_lt("confinement", growth, R / alpha1_inv(a)))
    return CertificateReport("continuous", rho, eps1, eps2,
                             gamma_continuous(tau, rho, b, mu), tau, conditions=conds)


def check_theorem2(L1, L2, mu, rho, a, b, tau, delta, R=math.inf, alpha1=identity,
                   alpha1_inv=identity) -> CertificateReport:
    """Periodic-trigger conditions, also used for the post-impulse variant."""
    if not delta > 0:
        raise UsageError("delta must be positive")
    eps1, eps2 = epsilons(mu, b, rho, a, R, alpha1)
    a_bar = a * math.exp((mu + b) * delta)
    growth = compute_rho_bound(L1, L2, tau)
    overshoot = max(math.exp((mu + b) * delta), math.exp(mu * (tau + delta)))
    conds = []
    if math.isinf(R):
        conds.append(_vacuous("sampling_overshoot", overshoot))
    else:
        conds.append(_le("sampling_overshoot", overshoot, alpha1(R) / a))
    conds.append(_lt("periodic_contraction",
                     rho * math.exp(b * (tau + delta)) * math.exp(mu * delta), 1.0))
    if math.isinf(R):
        conds.append(_vacuous("confinement(a_bar)", growth))
    else:
        conds.append(_lt("confinement(a_bar)", growth, R / alpha1_inv(a_bar)))
    return CertificateReport("periodic", rho, eps1, eps2,
                             gamma_periodic(tau, delta, rho, b, mu), tau, delta=delta,
                             a_bar=a_bar, conditions=conds)


def certify(model: SystemModel, lyap: LyapunovSpec, a: float, b: float, tau: float,
            trigger: TriggerSpec, rho: Optional[float] = None) -> CertificateReport:
    """Pick the right condition set for ``trigger`` and evaluate it."""
    if rho is None:
        rho = rho_for(model, lyap, tau)
    common = dict(L1=model.L1, L2=model.L2, mu=lyap.mu, rho=rho, a=a, b=b, tau=tau,
                  R=model.R, alpha1=lyap.alpha1, alpha1_inv=lyap.alpha1_inv)
    if trigger.kind is TriggerKind.CONTINUOUS:
        return check_theorem1(**common)
    return check_theorem2(delta=trigger.delta, **common)


def inter_event_lower_bound(trigger: TriggerSpec, gamma: float, tau: float) -> float:
    if trigger.kind is TriggerKind.CONTINUOUS:
        return gamma
    if trigger.kind is TriggerKind.PERIODIC_GLOBAL:
        return max(gamma, trigger.delta)
    return max(gamma, tau + trigger.delta)


def stability_radius(a, b, mu, tau, epsilon, alpha1=identity, alpha2_inv=identity,
                     delta: float = 0.0) -> float:
    """Initial-state radius keeping ``||x(t)|| < epsilon`` for all t.

    ``delta > 0`` gives the periodic-trigger version (``a`` replaced by
    ``a exp((mu + b) delta)``, ``tau`` by ``tau + delta``).
    """
    if not epsilon > 0:
        raise UsageError("epsilon must be positive")
    if delta:
        a = a * math.exp((mu + b) * delta)
        tau = tau + delta
    ratio = alpha1(epsilon) / (a * math.exp(mu * tau))
    return alpha2_inv(a * ratio ** ((mu + b) / b))


def adt_compare(L1: float, lam: float, rho: float) -> tuple[float, float]:
    """Best reverse average dwell-time constants ``(sigma, T*)`` for the same ``rho``."""
    if not lam > 0:
        raise UsageError("lambda must be positive")
    if not 0 < rho < 1:
        raise ValueError(f"no admissible sigma for rho={rho} (need 0 < rho < 1)")
    sigma = math.log(1.0 / rho)
    return sigma, sigma / (L1 + lam)


@dataclass(frozen=True)
class CertParams:
    """Constants for the delay search; ``rho=None`` means norm-type V
    (rho recomputed from L1, L2 at every candidate delay)."""

    L1: float
    L2: float
    mu: float
    a: float
    b: float
    delta: Optional[float] = None
    R: float = math.inf
    alpha1: Callable = identity
    alpha1_inv: Callable = identity
    rho: Optional[float] = None

    @classmethod
    def from_model(cls, model: SystemModel, lyap: LyapunovSpec, a: float, b: float,
                   delta: Optional[float] = None) -> "CertParams":
        return cls(model.L1, model.L2, lyap.mu, a, b, delta, model.R, lyap.alpha1,
                   lyap.alpha1_inv, None if lyap.norm_type and lyap.rho is None else lyap.rho)

    def report(self, tau: float, kind: TriggerKind) -> CertificateReport:
        rho = self.rho if self.rho is not None else compute_rho_bound(self.L1, self.L2, tau)
        common = dict(L1=self.L1, L2=self.L2, mu=self.mu, rho=rho, a=self.a, b=self.b,
                      tau=tau, R=self.R, alpha1=self.alpha1, alpha1_inv=self.alpha1_inv)
        if kind is TriggerKind.CONTINUOUS:
            return check_theorem1(**common)
        if self.delta is None:
            raise UsageError("periodic search needs delta")
        return check_theorem2(delta=self.delta, **common)


def max_admissible_tau(params: CertParams, kind: TriggerKind = TriggerKind.CONTINUOUS,
                       tol: float = 1e-9, tau_cap: float = 1e3) -> float:
    """Largest certified delay, assuming the certified set is ``[0, tau_max)``."""
    kind = TriggerKind(kind)
    if not params.report(0.0, kind).overall:
        raise ValueError("conditions already fail at tau = 0")
    lo, hi = 0.0, 1e-3
    while params.report(hi, kind).overall:
        lo, hi = hi, 2.0 * hi
        if hi > tau_cap:
            raise ValueError(f"conditions still hold at tau = {tau_cap}; no finite bound found")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if params.report(mid, kind).overall:
            lo = mid
        else:
            hi = mid
    return lo
