import math

import pytest

from etimpulse.model import ThresholdSpec, TriggerSpec, make_chaos3d, make_scalar
from etimpulse.simulator import SimConfig, simulate

A_REF = 0.294
B_REF = 0.1
X0_REF = (0.1, 0.2, -0.1)
TAU_CONT = 0.05
TAU_PER = 0.04
DELTA_PER = 0.015
GAP_ANALYTIC = math.log(2.0) / 1.1


@pytest.fixture(scope="session")
def chaos():
    return make_chaos3d()


@pytest.fixture(scope="session")
def analytic():
    return make_scalar("analytic_linear")


@pytest.fixture(scope="session")
def bench_threshold():
    return ThresholdSpec(A_REF, B_REF)


def _run(chaos, trigger, tau, t_end):
    model, lyap = chaos
    cfg = SimConfig(x0=X0_REF, tau=tau, t_end=t_end, step=1e-4)
    return simulate(model, lyap, ThresholdSpec(A_REF, B_REF), trigger, cfg)


@pytest.fixture(scope="session")
def bench_continuous(chaos):
    return _run(chaos, TriggerSpec.continuous(), TAU_CONT, 20.0)


@pytest.fixture(scope="session")
def bench_continuous_30(chaos):
    return _run(chaos, TriggerSpec.continuous(), TAU_CONT, 30.0)


@pytest.fixture(scope="session")
def bench_periodic_global(chaos):
    return _run(chaos, TriggerSpec.periodic_global(DELTA_PER), TAU_PER, 20.0)


@pytest.fixture(scope="session")
def bench_post_impulse(chaos):
    return _run(chaos, TriggerSpec.periodic_post_impulse(DELTA_PER), TAU_PER, 20.0)


@pytest.fixture(scope="session")
def analytic_run(analytic):
    model, lyap = analytic
    cfg = SimConfig(x0=(0.147,), tau=0.0, t_end=4.0, step=1e-4, record_stride=1)
    return simulate(model, lyap, ThresholdSpec(A_REF, B_REF), TriggerSpec.continuous(), cfg)
