"""Event-triggered impulsive control of nonlinear systems with actuation delays.

Simulate the closed loop under three event triggers, evaluate the
sufficient stability conditions, and check realized trajectories against
the certified bounds.
"""
from .analysis import (adt_check, decay_fit, export_csv, impulse_rate, verify_global_bound,
                       verify_post_impulse)
from .certify import (adt_compare, certify, check_theorem1, check_theorem2, compute_rho_bound,
                      gamma_continuous, gamma_periodic, inter_event_lower_bound,
                      max_admissible_tau, stability_radius)
from .model import (LyapunovSpec, SystemModel, ThresholdSpec, TriggerKind, TriggerSpec,
                    UsageError, builtin, make_chaos3d, make_scalar)
from .simulator import SimConfig, Trajectory, check_zeno, min_inter_event, simulate

__version__ = "0.1.0"

__all__ = [
    "LyapunovSpec", "SimConfig", "SystemModel", "ThresholdSpec", "Trajectory", "TriggerKind",
    "TriggerSpec", "UsageError", "adt_check", "adt_compare", "builtin", "certify",
    "check_theorem1", "check_theorem2", "check_zeno", "compute_rho_bound", "decay_fit",
    "export_csv", "gamma_continuous", "gamma_periodic", "impulse_rate",
    "inter_event_lower_bound", "make_chaos3d", "make_scalar", "max_admissible_tau",
    "min_inter_event", "simulate", "stability_radius", "verify_global_bound",
    "verify_post_impulse",
]
