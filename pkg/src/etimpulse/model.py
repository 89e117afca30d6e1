"""Controlled systems, Lyapunov data and the built-in example systems.

A model is the pair ``(flow, impulse)`` of an impulsive system

    x'(t) = f(x(t)),            t != t_k + tau
    x(t_k + tau) = x((t_k + tau)^-) + g(t_k, x(t_k))

together with the linear-growth constants ``L1`` (flow) and ``L2``
(jump) that hold on the open ball of radius ``R``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class UsageError(ValueError):
    """Invalid arguments or configuration supplied by the caller."""


def identity(s):
    return s


def as_state(x, dim: Optional[int] = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float array, checking its dimension."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.size < 1:
        raise UsageError(f"state must be a non-empty vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise UsageError(f"state has dimension {arr.size}, model expects {dim}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"state has non-finite components: {arr}")
    return arr


@dataclass(frozen=True)
class SystemModel:
    name: str
    dim: int
    flow: Callable[[np.ndarray], np.ndarray]
    impulse: Callable[[float, np.ndarray], np.ndarray]
    L1: float
    L2: float
    R: float = math.inf

    def __post_init__(self):
        if self.dim < 1:
            raise UsageError("dim must be >= 1")
        if not (self.L1 > 0 and self.L2 > 0 and self.R > 0):
            raise UsageError("L1, L2 and R must be positive")


@dataclass(frozen=True)
class LyapunovSpec:
    """Lyapunov candidate with its class-K-infinity sandwich and linear rates.

    ``rho`` may be left as ``None`` when ``norm_type`` is set; it is then
    derived from ``L1``, ``L2`` and the delay (see
    :func:`etimpulse.certify.rho_for`).
    """

    V: Callable[[np.ndarray], float]
    mu: float
    alpha1: Callable[[float], float] = identity
    alpha1_inv: Callable[[float], float] = identity
    alpha2: Callable[[float], float] = identity
    alpha2_inv: Callable[[float], float] = identity
    rho: Optional[float] = None
    norm_type: bool = False

    def __post_init__(self):
        if not self.mu > 0:
            raise UsageError("mu must be positive")
        if self.rho is not None and not self.rho > 0:
            raise UsageError("rho must be positive")
        if self.rho is None and not self.norm_type:
            raise UsageError("rho is required unless V is norm-type")


@dataclass(frozen=True)
class ThresholdSpec:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise UsageError(f"threshold needs a > 0 and b > 0, got a={self.a}, b={self.b}")

    def __call__(self, t: float) -> float:
        return self.a * math.exp(-self.b * t)


class TriggerKind(enum.Enum):
    CONTINUOUS = "continuous"
    PERIODIC_GLOBAL = "periodic-global"
    PERIODIC_POST_IMPULSE = "periodic-post-impulse"

    @property
    def periodic(self) -> bool:
        return self is not TriggerKind.CONTINUOUS


@dataclass(frozen=True)
class TriggerSpec:
    kind: TriggerKind
    delta: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.kind, TriggerKind):
            try:
                object.__setattr__(self, "kind", TriggerKind(self.kind))
            except ValueError:
                raise UsageError(f"unknown trigger kind {self.kind!r}") from None
        if self.kind.periodic:
            if self.delta is None or not self.delta > 0:
                raise UsageError("periodic triggers need a sampling period delta > 0")
        elif self.delta is not None:
            raise UsageError("the continuous trigger takes no delta")

    @classmethod
    def continuous(cls) -> "TriggerSpec":
        return cls(TriggerKind.CONTINUOUS)

    @classmethod
    def periodic_global(cls, delta: float) -> "TriggerSpec":
        return cls(TriggerKind.PERIODIC_GLOBAL, delta)

    @classmethod
    def periodic_post_impulse(cls, delta: float) -> "TriggerSpec":
        return cls(TriggerKind.PERIODIC_POST_IMPULSE, delta)


def eval_flow(model: SystemModel, x) -> np.ndarray:
    x = as_state(x, model.dim)
    return np.asarray(model.flow(x), dtype=float)


def eval_impulse(model: SystemModel, t_event: float, x) -> np.ndarray:
    """Jump ``g(t_event, x)``; the caller adds it to the pre-impulse state."""
    x = as_state(x, model.dim)
    return np.asarray(model.impulse(t_event, x), dtype=float)


# --------------------------------------------------------------------------
# built-in systems

def spectral_norm(M, rtol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Induced 2-norm of ``M`` by power iteration on ``M^T M``."""
    M = np.asarray(M, dtype=float)
    G = M.T @ M
    v = np.ones(G.shape[1]) / math.sqrt(G.shape[1])
    lam = 0.0
    for _ in range(max_iter):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam_new = float(v @ G @ v)
        if abs(lam_new - lam) <= rtol * abs(lam_new):
            return math.sqrt(lam_new)
        lam = lam_new
    return math.sqrt(lam)


CHAOS3D_A = -np.eye(3)
CHAOS3D_B = np.array([
    [1.25, -3.2, -3.2],
    [-3.2, 1.1, -4.4],
    [-3.2, 4.4, 1.0],
])


def chaos3d_C(t: float) -> np.ndarray:
    """Time-varying impulse gain; ``||I + C(t)|| <= 2/5`` for every t."""
    return np.array([
        [-1.0, 0.0, -0.4 * math.cos(math.pi * t)],
        [0.0, -1.0 - 0.4 * math.sin(math.pi * t), 0.0],
        [-0.4 * math.sin(2.0 * t), 0.0, -1.0],
    ])


def saturation(z):
    """q(z) = (|z + 1| - |z - 1|) / 2, i.e. clipping to [-1, 1]."""
    return np.clip(z, -1.0, 1.0)


def _euclidean(x) -> float:
    return float(np.linalg.norm(x))


def norm_lyapunov(mu: float) -> LyapunovSpec:
    return LyapunovSpec(V=_euclidean, mu=mu, norm_type=True)


def make_chaos3d():
    # Matrices are bound at module scope so the flow stays picklable.
    L1 = spectral_norm(CHAOS3D_A) + spectral_norm(CHAOS3D_B)
    model = SystemModel(
        name="chaos3d",
        dim=3,
        flow=_chaos3d_flow,
        impulse=_chaos3d_impulse,
        L1=L1,
        L2=0.4,
    )
    return model, norm_lyapunov(mu=L1)


def _chaos3d_flow(x):
    return -x + CHAOS3D_B @ saturation(x)


def _chaos3d_impulse(t, x):
    return chaos3d_C(t) @ x


def _cubic(x):
    return x ** 3


def _cubic_jump(t, x):
    return x ** 3


@dataclass(frozen=True)
class _Linear:
    c: float

    def __call__(self, x):
        return self.c * x


def _pow32_jump(t, x):
    # odd extension of x^(3/2) so the map is defined on all of R
    return np.sign(x) * np.abs(x) ** 1.5


def _halving_jump(t, x):
    return -0.5 * x


def make_scalar(kind: str, R: Optional[float] = None, c: Optional[float] = None):
    """Scalar test systems.

    ``cubic``: f = g = x^3 on B(R), L1 = L2 = R^2.
    ``linear_pow``: f = c x, g = x^(3/2), L1 = c, L2 = sqrt(R).
    ``analytic_linear``: f = x, g = -x/2 with closed-form solutions.
    """
    if kind == "cubic":
        if R is None or not R > 0 or math.isinf(R):
            raise UsageError("cubic system needs a finite radius R > 0")
        model = SystemModel("scalar-cubic", 1, _cubic, _cubic_jump, L1=R * R, L2=R * R, R=R)
        return model, norm_lyapunov(mu=R * R)
    if kind == "linear_pow":
        if R is None or not R > 0 or math.isinf(R):
            raise UsageError("linear_pow system needs a finite radius R > 0")
        if c is None or not c > 0:
            raise UsageError("linear_pow system needs a gain c > 0")
        model = SystemModel("scalar-linpow", 1, _Linear(c), _pow32_jump, L1=c, L2=math.sqrt(R), R=R)
        return model, norm_lyapunov(mu=c)
    if kind == "analytic_linear":
        model = SystemModel("analytic-linear", 1, _Linear(1.0), _halving_jump, L1=1.0, L2=0.5)
        return model, norm_lyapunov(mu=1.0)
    raise UsageError(f"unknown scalar system kind {kind!r}")


BUILTIN_NAMES = ("chaos3d", "scalar-cubic", "scalar-linpow", "analytic-linear")


def builtin(name: str, radius: Optional[float] = None, gain: Optional[float] = None):
    """Look up a built-in ``(model, lyap)`` by its public name."""
    if name == "chaos3d":
        return make_chaos3d()
    if name == "scalar-cubic":
        return make_scalar("cubic", R=radius)
    if name == "scalar-linpow":
        return make_scalar("linear_pow", R=radius, c=gain)
    if name == "analytic-linear":
        return make_scalar("analytic_linear")
    raise UsageError(f"unknown system {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


# --------------------------------------------------------------------------
# sampling-based verification of the standing assumptions

@dataclass
class Assumption1Report:
    radius: float
    samples: int
    max_flow_ratio: float
    max_jump_ratio: float
    L1: float
    L2: float
    flow_ok: bool = field(init=False)
    jump_ok: bool = field(init=False)

    def __post_init__(self):
        self.flow_ok = self.max_flow_ratio <= self.L1 + 1e-9
        self.jump_ok = self.max_jump_ratio <= self.L2 + 1e-9

    @property
    def ok(self) -> bool:
        return self.flow_ok and self.jump_ok


def sample_ball(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    """``n`` points uniform in the open ball; the origin is never returned."""
    d = rng.standard_normal((n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    u = rng.uniform(0.0, 1.0, n)
    u[u == 0.0] = 0.5
    r = radius * u ** (1.0 / dim)
    return d * r[:, None]


def verify_assumption1(model: SystemModel, samples: int = 10_000, seed=0,
                       extra_points=None) -> Assumption1Report:
    """Randomized check of ``||f(x)|| <= L1 ||x||`` and ``||x + g(t, x)|| <= L2 ||x||``."""
    if samples < 1:
        raise UsageError("samples must be >= 1")
    radius = min(model.R, 10.0)
    rng = np.random.default_rng(seed)
    pts = sample_ball(rng, samples, model.dim, radius)
    if extra_points is not None:
        pts = np.vstack([pts, np.atleast_2d(np.asarray(extra_points, dtype=float))])
    times = np.linspace(0.0, 10.0, 20)
    flow_ratio = 0.0
    jump_ratio = 0.0
    for x in pts:
        nx = np.linalg.norm(x)
        flow_ratio = max(flow_ratio, np.linalg.norm(model.flow(x)) / nx)
        for t in times:
            jump_ratio = max(jump_ratio, np.linalg.norm(x + model.impulse(t, x)) / nx)
    return Assumption1Report(radius, len(pts), float(flow_ratio), float(jump_ratio),
                             model.L1, model.L2)


@dataclass
class Assumption2Report:
    sandwich_ok: bool
    dini_ok: bool
    max_dini_excess: float

    @property
    def ok(self) -> bool:
        return self.sandwich_ok and self.dini_ok


def verify_assumption2(model: SystemModel, lyap: LyapunovSpec, samples: int = 2_000,
                       seed=0) -> Assumption2Report:
    """Sampled sandwich bound and a forward-difference surrogate of ``D+V <= mu V``."""
    radius = min(model.R, 10.0)
    rng = np.random.default_rng(seed)
    sandwich_ok = True
    excess = -math.inf
    for x in sample_ball(rng, samples, model.dim, radius):
        nx = float(np.linalg.norm(x))
        v = lyap.V(x)
        if not (lyap.alpha1(nx) <= v * (1 + 1e-12) and v <= lyap.alpha2(nx) * (1 + 1e-12)):
            sandwich_ok = False
        fx = model.flow(x)
        for h in (1e-5, 1e-6):
            excess = max(excess, (lyap.V(x + h * fx) - v) / h - lyap.mu * v)
    return Assumption2Report(sandwich_ok, excess <= 1e-3, float(excess))
