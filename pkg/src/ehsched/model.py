"""Problem data: harvest traces, instances, policies, and feasibility checks.

Cumulative quantities follow a strict-left convention: energy_before(trace, t)
sums arrivals strictly earlier than t, so an arrival at exactly t becomes usable
only after t.  energy_through(trace, t) is the matching right limit.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

from .errors import PolicyStructureError
from .rates import RateFunction

BITS_RTOL = 1e-6
FEASIBILITY_TOL = 1e-7
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class HarvestTrace:
    """Sorted finite sequence of (time, joules) arrivals; duplicates are merged."""

    arrivals: tuple[tuple[float, float], ...]
    _times: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _prefix: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        merged: list[list[float]] = []
        for t, amount in sorted(self.arrivals, key=lambda a: a[0]):
            t = float(t)
            amount = float(amount)
            if not (math.isfinite(t) and t >= 0.0):
                raise ValueError(f"arrival time {t} must be finite and nonnegative")
            if not (math.isfinite(amount) and amount > 0.0):
                raise ValueError(f"arrival amount {amount} must be positive")
            if merged and merged[-1][0] == t:
                merged[-1][1] += amount
            else:
                merged.append([t, amount])
        object.__setattr__(self, "arrivals", tuple((t, a) for t, a in merged))
        object.__setattr__(self, "_times", tuple(t for t, _ in merged))
        prefix = [0.0]
        for _, a in merged:
            prefix.append(prefix[-1] + a)
        object.__setattr__(self, "_prefix", tuple(prefix))

    @property
    def times(self) -> tuple[float, ...]:
        return self._times

    @property
    def total(self) -> float:
        return self._prefix[-1]

    def __len__(self) -> int:
        return len(self.arrivals)


def energy_before(trace: HarvestTrace, t: float) -> float:
    """Joules delivered strictly before time t."""
    return trace._prefix[bisect_left(trace._times, t)]


def energy_through(trace: HarvestTrace, t: float) -> float:
    """Joules delivered at or before time t (right limit of the staircase)."""
    return trace._prefix[bisect_right(trace._times, t)]


@dataclass(frozen=True)
class ProblemInstance:
    """A bit target plus transmitter and receiver harvest traces.

    Receiver arrivals of R joules buy R / rx_power seconds of listening time.
    """

    bits: float
    tx: HarvestTrace
    rx: HarvestTrace
    rate: RateFunction = RateFunction()
    rx_power: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.bits) and self.bits > 0.0):
            raise ValueError("bit target must be positive and finite")
        if not (math.isfinite(self.rx_power) and self.rx_power > 0.0):
            raise ValueError("receiver power draw must be positive and finite")

    @property
    def single_rx_at_origin(self) -> bool:
        return len(self.rx) == 1 and self.rx.times[0] == 0.0

    @property
    def initial_on_time(self) -> float:
        """On-time bought by the first receiver arrival (seconds)."""
        if len(self.rx) == 0:
            return 0.0
        return self.rx.arrivals[0][1] / self.rx_power


def on_time_before(instance: ProblemInstance, t: float) -> float:
    """Receiver on-time budget accrued strictly before time t (seconds)."""
    return energy_before(instance.rx, t) / instance.rx_power


def on_time_through(instance: ProblemInstance, t: float) -> float:
    """Receiver on-time budget accrued at or before time t (seconds)."""
    return energy_through(instance.rx, t) / instance.rx_power


@dataclass(frozen=True)
class PowerSegment:
    """Constant transmit power on [start, end)."""

    start: float
    end: float
    power: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise PolicyStructureError("segment endpoints must be finite")
        if not self.end > self.start:
            raise PolicyStructureError(
                f"segment [{self.start}, {self.end}] must have positive length"
            )
        if not (math.isfinite(self.power) and self.power >= 0.0):
            raise PolicyStructureError("segment power must be nonnegative")

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class TransmissionPolicy:
    """Contiguous sequence of constant-power segments."""

    segments: tuple[PowerSegment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(b.start - a.end) > BOUNDARY_TOL:
                raise PolicyStructureError(
                    f"segments not contiguous at {a.end} vs {b.start}"
                )

    @property
    def is_empty(self) -> bool:
        return not self.segments

    @property
    def start(self) -> float:
        if self.is_empty:
            raise PolicyStructureError("empty policy has no start")
        return self.segments[0].start

    @property
    def end(self) -> float:
        if self.is_empty:
            raise PolicyStructureError("empty policy has no end")
        return self.segments[-1].end

    @property
    def span(self) -> float:
        return 0.0 if self.is_empty else self.end - self.start

    @property
    def boundaries(self) -> tuple[float, ...]:
        if self.is_empty:
            return ()
        return tuple(s.start for s in self.segments) + (self.end,)

    @property
    def powers(self) -> tuple[float, ...]:
        return tuple(s.power for s in self.segments)


def consumed_energy(policy: TransmissionPolicy, t: float) -> float:
    """Joules consumed by the policy up to time t."""
    total = 0.0
    for seg in policy.segments:
        if t <= seg.start:
            break
        total += seg.power * (min(t, seg.end) - seg.start)
    return total


def transmitted_bits(
    policy: TransmissionPolicy, fn: RateFunction, t: float | None = None
) -> float:
    """Bits delivered by the policy up to time t (policy end when omitted)."""
    if policy.is_empty:
        return 0.0
    if t is None:
        t = policy.end
    total = 0.0
    for seg in policy.segments:
        if t <= seg.start:
            break
        total += fn.rate(seg.power) * (min(t, seg.end) - seg.start)
    return total


def on_time_used(policy: TransmissionPolicy, t: float | None = None) -> float:
    """Seconds the receiver must be on (power strictly positive) up to time t."""
    if policy.is_empty:
        return 0.0
    if t is None:
        t = policy.end
    total = 0.0
    for seg in policy.segments:
        if t <= seg.start:
            break
        if seg.power > 0.0:
            total += min(t, seg.end) - seg.start
    return total


@dataclass(frozen=True)
class FeasibilityReport:
    """Constraint residuals for a policy against an instance."""

    feasible: bool
    bits_delivered: float
    bits_residual: float
    worst_energy_violation: float
    worst_energy_time: float | None
    worst_on_time_violation: float
    worst_on_time_at: float | None


def check_feasibility(
    policy: TransmissionPolicy,
    instance: ProblemInstance,
    tol: float | None = None,
) -> FeasibilityReport:
    """Check causal energy use, receiver on-time cover, and the bit target.

    Consumption is piecewise linear and the harvest staircases are left
    continuous, so the worst margins occur at segment boundaries and arrival
    epochs; those points are checked exhaustively.
    """
    if tol is None:
        tol = FEASIBILITY_TOL
    bits = transmitted_bits(policy, instance.rate)
    bits_residual = bits - instance.bits

    if policy.is_empty:
        feasible = abs(bits_residual) <= BITS_RTOL * max(1.0, instance.bits)
        return FeasibilityReport(feasible, bits, bits_residual, 0.0, None, 0.0, None)

    end = policy.end
    checkpoints = set(policy.boundaries)
    checkpoints.update(t for t in instance.tx.times if t <= end)
    checkpoints.update(t for t in instance.rx.times if t <= end)
    checkpoints.add(end)

    energy_tol = tol * max(1.0, instance.tx.total)
    time_tol = tol * max(1.0, instance.rx.total / instance.rx_power)

    worst_e = 0.0
    worst_e_at: float | None = None
    worst_o = 0.0
    worst_o_at: float | None = None
    for t in sorted(checkpoints):
        margin_e = consumed_energy(policy, t) - energy_before(instance.tx, t)
        if margin_e > worst_e:
            worst_e, worst_e_at = margin_e, t
        margin_o = on_time_used(policy, t) - on_time_before(instance, t)
        if margin_o > worst_o:
            worst_o, worst_o_at = margin_o, t

    feasible = (
        worst_e <= energy_tol
        and worst_o <= time_tol
        and abs(bits_residual) <= BITS_RTOL * max(1.0, instance.bits)
    )
    return FeasibilityReport(
        feasible=feasible,
        bits_delivered=bits,
        bits_residual=bits_residual,
        worst_energy_violation=worst_e,
        worst_energy_time=worst_e_at,
        worst_on_time_violation=worst_o,
        worst_on_time_at=worst_o_at,
    )
