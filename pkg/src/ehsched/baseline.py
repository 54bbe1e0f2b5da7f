"""Energy-only schedules: best bits by a deadline, earliest finish for a target.

These ignore the receiver; they answer what the transmitter harvest alone
allows.  Both build the classic tight-string schedule whose power levels are
the slopes of the greatest convex minorant threaded under the cumulative
energy staircase.
"""

from __future__ import annotations

from .errors import InsufficientHarvestError
from .model import (
    HarvestTrace,
    PowerSegment,
    TransmissionPolicy,
    energy_before,
    transmitted_bits,
)
from .rates import MAX_BISECT_STEPS, SOLVE_RTOL, RateFunction, duration_for_bits

BITS_TRIM_TOL = 1e-15


def max_bits_by_deadline(
    trace: HarvestTrace,
    fn: RateFunction,
    deadline: float,
    origin: float = 0.0,
) -> tuple[float, TransmissionPolicy]:
    """Most bits deliverable on [origin, deadline] under causal energy use.

    Arrivals at or before origin are usable stock from the start.  Ties in
    the slope search break toward the latest corner so equal-power runs are
    emitted as a single segment.
    """
    if deadline <= origin:
        return 0.0, TransmissionPolicy(())
    corners = [
        (t, energy_before(trace, t)) for t in trace.times if origin < t < deadline
    ]
    corners.append((deadline, energy_before(trace, deadline)))
    if corners[-1][1] == 0.0:
        return 0.0, TransmissionPolicy(())

    segments: list[PowerSegment] = []
    cur_t, cur_e = origin, 0.0
    idx = 0
    while cur_t < deadline:
        best_slope = None
        best_j = None
        for j in range(idx, len(corners)):
            t_j, e_j = corners[j]
            slope = (e_j - cur_e) / (t_j - cur_t)
            if best_slope is None or slope <= best_slope:
                best_slope = slope
                best_j = j
        t_j, e_j = corners[best_j]
        segments.append(PowerSegment(cur_t, t_j, best_slope))
        cur_t, cur_e = t_j, e_j
        idx = best_j + 1

    policy = TransmissionPolicy(tuple(segments))
    return transmitted_bits(policy, fn), policy


def min_finish_time(
    trace: HarvestTrace,
    fn: RateFunction,
    bits: float,
    origin: float = 0.0,
) -> tuple[float, TransmissionPolicy]:
    """Earliest finish of a bit target starting at origin, and its schedule.

    Raises InsufficientHarvestError when the target is at or beyond the
    supremum of what the whole trace can ever deliver.
    """
    if bits <= 0.0:
        return origin, TransmissionPolicy(())
    total = trace.total
    last = max(origin, trace.times[-1]) if len(trace) else origin
    # Raises when bits is unattainable even with unbounded time.
    slack_duration = duration_for_bits(fn, total, bits)

    lo = origin
    hi = last + slack_duration
    for _ in range(MAX_BISECT_STEPS):
        if hi - lo <= SOLVE_RTOL * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        got, _ = max_bits_by_deadline(trace, fn, mid, origin)
        if got >= bits:
            hi = mid
        else:
            lo = mid

    _, policy = max_bits_by_deadline(trace, fn, hi, origin)
    return _trim_to_bits(policy, fn, bits)


def _trim_to_bits(
    policy: TransmissionPolicy, fn: RateFunction, bits: float
) -> tuple[float, TransmissionPolicy]:
    """Cut the policy where its cumulative bits first reach the target."""
    cut = policy.end
    acc = 0.0
    for seg in policy.segments:
        gain = fn.rate(seg.power) * seg.length
        if acc + gain >= bits - BITS_TRIM_TOL * max(1.0, bits):
            need = max(0.0, bits - acc)
            if seg.power == 0.0:
                cut = seg.start
            else:
                cut = min(seg.end, seg.start + need / fn.rate(seg.power))
            break
        acc += gain
    kept: list[PowerSegment] = []
    for seg in policy.segments:
        if seg.end <= cut:
            kept.append(seg)
        elif seg.start < cut:
            kept.append(PowerSegment(seg.start, cut, seg.power))
    return cut, TransmissionPolicy(tuple(kept))
