"""Causal transmission policy and its comparison against offline schedules.

The online transmitter sees arrivals only as they land.  It waits until the
accumulated receiver budget could carry the whole bit target, then always
plans to spend its entire energy stock at one constant power chosen so the
stock covers exactly the remaining bits, replanning whenever new transmitter
energy lands.  Between arrivals the remaining-bits to remaining-energy ratio
is invariant, so each replan only lowers that ratio and the planned finish
never moves later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InsufficientHarvestError
from .model import (
    PowerSegment,
    ProblemInstance,
    TransmissionPolicy,
    energy_through,
    on_time_through,
)
from .offline import solve_offline
from .rates import power_for_efficiency

ACHIEVABILITY_SLACK = 1e-12


@dataclass(frozen=True)
class OnlineResult:
    """Realized causal schedule: one power level per replanning point."""

    policy: TransmissionPolicy
    start: float
    finish: float
    power_steps: tuple[tuple[float, float], ...]
    bits: float


@dataclass(frozen=True)
class BoundResult:
    """Reference completion time; achievable means an actual optimum, not a bound."""

    seconds: float
    achievable: bool


@dataclass(frozen=True)
class RatioResult:
    """Online finish over the offline reference it was compared against."""

    ratio: float
    basis: str
    online_finish: float
    reference: float


def online_start_time(instance: ProblemInstance) -> float:
    """First moment the harvest so far could possibly carry the bit target.

    Both cumulative stocks only change at arrival events, so the first time
    the receiver budget times the best spread of the transmitter stock covers
    the target is an event time.  If even the final stocks fall short the
    target is never achievable.
    """
    fn = instance.rate
    events = sorted(set(instance.tx.times) | set(instance.rx.times))
    for t in events:
        on_budget = on_time_through(instance, t)
        if on_budget <= 0.0:
            continue
        stock = energy_through(instance.tx, t)
        if stock <= 0.0:
            continue
        carriable = on_budget * fn.rate(stock / on_budget)
        if carriable >= instance.bits * (1.0 - ACHIEVABILITY_SLACK):
            return t
    raise InsufficientHarvestError("the bit target is never achievable on these traces")


def run_online(instance: ProblemInstance) -> OnlineResult:
    """Run the causal policy to completion.

    Raises InsufficientHarvestError when no prefix of the traces can ever
    carry the target.
    """
    fn = instance.rate
    start = online_start_time(instance)

    remaining_bits = instance.bits
    remaining_energy = energy_through(instance.tx, start)
    level = power_for_efficiency(fn, remaining_bits / remaining_energy)
    steps = [(start, level)]
    segments: list[PowerSegment] = []
    now = start
    finish = now + remaining_bits / fn.rate(level)

    for t, amount in instance.tx.arrivals:
        if t <= start:
            continue
        if t >= finish:
            break
        elapsed = t - now
        remaining_bits -= fn.rate(level) * elapsed
        remaining_energy -= level * elapsed
        segments.append(PowerSegment(now, t, level))
        remaining_energy += amount
        level = power_for_efficiency(fn, remaining_bits / remaining_energy)
        steps.append((t, level))
        now = t
        finish = now + remaining_bits / fn.rate(level)

    segments.append(PowerSegment(now, finish, level))
    return OnlineResult(
        policy=TransmissionPolicy(tuple(segments)),
        start=start,
        finish=finish,
        power_steps=tuple(steps),
        bits=instance.bits,
    )


def offline_lower_bound(instance: ProblemInstance) -> BoundResult:
    """Reference for judging the online finish.

    With a single receiver purse at time zero the exact offline optimum is
    computed; otherwise the first moment the accumulated harvest could carry
    the target lower-bounds any schedule, causal or not.
    """
    if instance.single_rx_at_origin:
        return BoundResult(seconds=solve_offline(instance).finish, achievable=True)
    return BoundResult(seconds=online_start_time(instance), achievable=False)


def competitive_ratio(instance: ProblemInstance) -> RatioResult:
    """Online finish divided by the offline reference.

    The basis is "exact-offline" when the true optimum is available and
    "lower-bound" otherwise; a zero reference yields an infinite ratio, which
    is diagnostic rather than meaningful.
    """
    online = run_online(instance)
    bound = offline_lower_bound(instance)
    basis = "exact-offline" if bound.achievable else "lower-bound"
    if bound.seconds <= 0.0:
        ratio = math.inf
    else:
        ratio = online.finish / bound.seconds
    return RatioResult(
        ratio=ratio,
        basis=basis,
        online_finish=online.finish,
        reference=bound.seconds,
    )
