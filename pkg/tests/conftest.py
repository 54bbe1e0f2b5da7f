"""Shared fixtures for the test suite."""

import pytest
from hypothesis import HealthCheck, settings

from ehsched import HarvestTrace, ProblemInstance, RateFunction

settings.register_profile(
    "suite",
    max_examples=50,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def log2_rate():
    return RateFunction(kind="log2", scale=1.0)


@pytest.fixture
def worked_instance():
    """Small two-arrival instance whose optimal schedule is known in closed form.

    One joule arrives at the origin and three more at t = 1. A single receiver
    purse at the origin buys one second of listening time and the target is
    two bits.
    """
    return ProblemInstance(
        bits=2.0,
        tx=HarvestTrace(((0.0, 1.0), (1.0, 3.0))),
        rx=HarvestTrace(((0.0, 1.0),)),
        rate=RateFunction(kind="log2", scale=1.0),
        rx_power=1.0,
    )


@pytest.fixture
def pinned_instance():
    """Instance whose transmitter harvests nothing until t = 1.

    The schedule cannot start earlier than the first arrival, so the usual
    full-window duration rule is unattainable here.
    """
    return ProblemInstance(
        bits=1.0,
        tx=HarvestTrace(((1.0, 5.0),)),
        rx=HarvestTrace(((0.0, 3.0),)),
        rate=RateFunction(kind="log2", scale=1.0),
        rx_power=1.0,
    )
