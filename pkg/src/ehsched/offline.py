"""Offline solver for one receiver window: plateau, pull-back, and stop rules.

The offline problem fixes the full transmitter trace in advance and gives the
receiver a single energy purse at time zero, worth a listening window of
`window = rx_energy / rx_power` seconds.  The solver builds an initial
constant-power plan, then repeatedly moves bits from the expensive tail of the
schedule into a flatter, earlier front until the start hits zero or the busy
span fills the window, and finally interpolates the last two plans so the span
lands exactly on the window when it must.
"""

from __future__ import annotations

from dataclasses import dataclass

from .baseline import min_finish_time
from .errors import (
    InsufficientHarvestError,
    InternalInvariantError,
    OfflineRestrictionError,
)
from .model import (
    HarvestTrace,
    PowerSegment,
    ProblemInstance,
    TransmissionPolicy,
    consumed_energy,
    energy_before,
    energy_through,
    transmitted_bits,
)
from .rates import _bisect, duration_for_bits, power_for_efficiency

TERMINATION_TOL = 1e-9
EPOCH_MATCH_TOL = 1e-9
THRESHOLD_SLACK = 1e-12
STRUCTURE_TOL = 1e-6


def _bind_tol(trace: HarvestTrace) -> float:
    return 1e-9 * max(1.0, trace.total)


def _require_offline(instance: ProblemInstance) -> float:
    if not instance.single_rx_at_origin:
        raise OfflineRestrictionError(
            "offline solving needs exactly one receiver arrival at time zero"
        )
    return instance.initial_on_time


@dataclass(frozen=True)
class InitResult:
    """Initial plan: a constant-power plateau, possibly respliced after its anchor."""

    policy: TransmissionPolicy
    threshold_epoch: float
    planned_duration: float
    plateau_power: float
    anchor_epoch: float
    start: float
    stop: float


def init_policy(instance: ProblemInstance) -> InitResult:
    """Build the starting plan for the pull-back loop.

    The plateau consumes everything harvested through the first epoch at which
    the window could carry the whole bit target, over just enough time to
    deliver that target, and starts as late as causality allows.  When energy
    keeps arriving during the plateau the part after the anchor epoch is
    replaced by the earliest-finish schedule for the same bits.
    """
    window = _require_offline(instance)
    fn = instance.rate
    trace = instance.tx
    bits = instance.bits

    threshold = None
    for t in trace.times:
        have = energy_through(trace, t)
        if window * fn.rate(have / window) >= bits * (1.0 - THRESHOLD_SLACK):
            threshold = t
            break
    if threshold is None:
        raise InsufficientHarvestError(
            "the receiver window cannot carry the bit target on this trace"
        )

    budget = energy_through(trace, threshold)
    planned = min(duration_for_bits(fn, budget, bits), window)
    plateau = budget / planned

    start = 0.0
    for t in trace.times:
        if t > threshold:
            break
        start = max(start, t - energy_before(trace, t) / plateau)
    stop = start + planned

    bind = _bind_tol(trace)
    anchor = None
    for t in trace.times:
        if t <= start:
            continue
        if t >= stop:
            break
        if abs(plateau * (t - start) - energy_before(trace, t)) <= bind:
            anchor = t
            break
    if anchor is None:
        at_start = [t for t in trace.times if abs(t - start) <= 1e-12 * max(1.0, t)]
        anchor = at_start[0] if at_start else 0.0

    if abs(energy_before(trace, stop) - budget) <= bind:
        if start < anchor < stop:
            segments = (
                PowerSegment(start, anchor, plateau),
                PowerSegment(anchor, stop, plateau),
            )
        else:
            segments = (PowerSegment(start, stop, plateau),)
        policy = TransmissionPolicy(segments)
    else:
        # Harvest lands inside the plan: resplice everything after the anchor.
        remaining = (stop - anchor) * fn.rate(plateau)
        tail_trace = HarvestTrace(tuple(a for a in trace.arrivals if a[0] >= anchor))
        _, tail = min_finish_time(tail_trace, fn, remaining, origin=anchor)
        head = (PowerSegment(start, anchor, plateau),) if anchor > start else ()
        policy = TransmissionPolicy(head + tail.segments)

    return InitResult(
        policy=policy,
        threshold_epoch=threshold,
        planned_duration=planned,
        plateau_power=plateau,
        anchor_epoch=anchor,
        start=policy.start,
        stop=policy.end,
    )


@dataclass(frozen=True)
class PullBackState:
    """Front and tail geometry of a plan, read off its segment boundaries."""

    policy: TransmissionPolicy
    start: float
    stop: float
    left_epoch: float
    right_epoch: float
    front_power: float
    tail_power: float

    @staticmethod
    def from_policy(policy: TransmissionPolicy) -> "PullBackState | None":
        if len(policy.segments) < 2:
            return None
        bounds = policy.boundaries
        return PullBackState(
            policy=policy,
            start=bounds[0],
            stop=bounds[-1],
            left_epoch=bounds[1],
            right_epoch=bounds[-2],
            front_power=policy.segments[0].power,
            tail_power=policy.segments[-1].power,
        )


def pull_back_step(
    instance: ProblemInstance, policy: TransmissionPolicy
) -> tuple[TransmissionPolicy, bool]:
    """One reshaping pass: speed up the tail, hand its spare bits to the front.

    Returns the (possibly unchanged) plan and whether the loop is done.  The
    total bits carried by the plan are preserved exactly by construction; only
    the first and last segments are rebuilt, interior segments pass through
    verbatim.
    """
    window = _require_offline(instance)
    fn = instance.rate
    trace = instance.tx

    state = PullBackState.from_policy(policy)
    if state is None:
        return policy, True
    if state.start <= TERMINATION_TOL or state.stop - state.start >= window - TERMINATION_TOL:
        return policy, True

    tau_l = state.left_epoch
    tau_r = state.right_epoch
    front_bits = fn.rate(state.front_power) * (tau_l - state.start)
    tail_energy = energy_before(trace, state.stop) - energy_before(trace, tau_r)
    tail_bits = fn.rate(state.tail_power) * (state.stop - tau_r)
    if tail_energy <= 0.0:
        raise InternalInvariantError("tail consumes no energy; binding broken")

    # Tail pass: steepest feasible tail is the lowest chord to an arrival
    # inside it; with no interior arrival the tail collapses onto its epoch.
    inner = [t for t in trace.times if tau_r < t < state.stop]
    if inner:
        base = energy_before(trace, tau_r)
        pivot = inner[0]
        low = (energy_before(trace, pivot) - base) / (pivot - tau_r)
        for t in inner[1:]:
            chord = (energy_before(trace, t) - base) / (t - tau_r)
            if chord <= low:
                low, pivot = chord, t
        if low <= 0.0:
            raise InternalInvariantError("tail chord must be positive")
        new_stop = tau_r + tail_energy / low
        new_tail_bits = tail_energy * fn.efficiency(low)
        tail_segments = [
            PowerSegment(tau_r, pivot, low),
            PowerSegment(pivot, new_stop, low),
        ]
    else:
        new_tail_bits = 0.0
        tail_segments = []

    front_energy = energy_before(trace, tau_l)
    if front_energy <= 0.0:
        raise InternalInvariantError("front consumes no energy; binding broken")
    front_target = front_bits + (tail_bits - new_tail_bits)

    # Flattest causal front: start no earlier than zero and never outrun an
    # arrival that precedes the front's right edge.
    p_min = front_energy / tau_l
    for t in trace.times:
        if t >= tau_l:
            break
        p_min = max(p_min, (front_energy - energy_before(trace, t)) / (tau_l - t))

    front_segments: list[PowerSegment] | None = None
    supremum = front_energy * fn.peak_efficiency
    if front_target < supremum * (1.0 - THRESHOLD_SLACK):
        duration = duration_for_bits(fn, front_energy, front_target)
        p_front = front_energy / duration
        if p_front >= p_min - 1e-12 * max(1.0, p_min):
            front_segments = [PowerSegment(tau_l - duration, tau_l, p_front)]

    if front_segments is None:
        # The front cannot absorb everything: pin it at its flattest causal
        # power and push the shortfall back into a faster single-segment tail.
        new_start = tau_l - front_energy / p_min
        added = front_energy * fn.efficiency(p_min) - front_bits
        tail_target = tail_bits - added
        if not 0.0 < tail_target < tail_bits + _bind_tol(trace):
            raise InternalInvariantError("pinned front must leave tail work")
        speed = power_for_efficiency(fn, tail_target / tail_energy)
        new_stop = tau_r + tail_energy / speed
        tail_segments = [PowerSegment(tau_r, new_stop, speed)]
        front_segments = [PowerSegment(new_start, tau_l, p_min)]
        bind = _bind_tol(trace)
        for t in trace.times:
            if t <= new_start:
                continue
            if t >= tau_l:
                break
            if abs(p_min * (t - new_start) - energy_before(trace, t)) <= bind:
                front_segments = [
                    PowerSegment(new_start, t, p_min),
                    PowerSegment(t, tau_l, p_min),
                ]
                break

    interior = list(policy.segments[1:-1])
    committed = TransmissionPolicy(tuple(front_segments + interior + tail_segments))
    finished = (
        committed.start <= TERMINATION_TOL
        or committed.span >= window - TERMINATION_TOL
    )
    return committed, finished


def finalize_schedule(
    instance: ProblemInstance,
    previous: TransmissionPolicy | None,
    last: TransmissionPolicy,
) -> TransmissionPolicy:
    """Land the busy span exactly on the window when the last pass overshot it.

    The last two plans bracket the window: the earlier one was strictly inside
    it, the later one at or past it.  Sliding the start point between them
    while conserving bits moves the span continuously, so the exact-window plan
    is found by bisection in the earlier plan's geometry.
    """
    window = _require_offline(instance)
    if last.span <= window + TERMINATION_TOL:
        return last
    if previous is None:
        raise InternalInvariantError("span exceeds the window with no prior plan")
    state = PullBackState.from_policy(previous)
    if state is None:
        raise InternalInvariantError("prior plan has no reshapeable structure")

    fn = instance.rate
    trace = instance.tx
    tau_l = state.left_epoch
    tau_r = state.right_epoch
    front_energy = energy_before(trace, tau_l)
    tail_energy = energy_before(trace, state.stop) - energy_before(trace, tau_r)
    target_total = fn.rate(state.front_power) * (tau_l - state.start) + fn.rate(
        state.tail_power
    ) * (state.stop - tau_r)
    bits_floor = 1e-15 * max(1.0, target_total)

    def tail_duration(front_start: float) -> float:
        fb = (tau_l - front_start) * fn.rate(front_energy / (tau_l - front_start))
        tb = max(0.0, target_total - fb)
        return duration_for_bits(fn, tail_energy, tb) if tb > bits_floor else 0.0

    def overshoot(front_start: float) -> float:
        return tau_r + tail_duration(front_start) - front_start - window

    lo, hi = last.start, state.start
    if not lo < hi:
        raise InternalInvariantError("degenerate bracket for the stop rule")
    root = _bisect(overshoot, lo, hi, overshoot(lo), overshoot(hi))

    front = PowerSegment(root, tau_l, front_energy / (tau_l - root))
    duration = tail_duration(root)
    tail = (
        (PowerSegment(tau_r, tau_r + duration, tail_energy / duration),)
        if duration > 0.0
        else ()
    )
    return TransmissionPolicy((front,) + previous.segments[1:-1] + tail)


@dataclass(frozen=True)
class OfflineSolution:
    """Final plan plus the trail the solver took to reach it.

    duration_trace holds the busy span of the initial plan and of each
    pull-back commit; the final plan's span can land between the last two
    entries when the stop rule interpolates them.
    """

    policy: TransmissionPolicy
    finish: float
    iterations: int
    anchor_epoch: float
    init: InitResult
    duration_trace: tuple[float, ...]
    notes: tuple[str, ...]


def solve_offline(instance: ProblemInstance) -> OfflineSolution:
    """Time-optimal plan for a single receiver purse granted at time zero."""
    window = _require_offline(instance)
    init = init_policy(instance)

    notes: list[str] = []
    durations = [init.policy.span]
    previous: TransmissionPolicy | None = None
    current = init.policy
    cap = 4 * max(1, len(instance.tx)) + 16
    iterations = 0
    while True:
        if iterations > cap:
            raise InternalInvariantError("pull-back failed to terminate")
        candidate, finished = pull_back_step(instance, current)
        iterations += 1
        if candidate is not current:
            previous, current = current, candidate
            durations.append(current.span)
            drift = abs(transmitted_bits(current, instance.rate) - instance.bits)
            if drift > 1e-6 * max(1.0, instance.bits):
                raise InternalInvariantError("bit total drifted during pull-back")
        if finished:
            break

    final = finalize_schedule(instance, previous, current)

    if (
        final.start > TERMINATION_TOL
        and final.span < window - TERMINATION_TOL
        and len(final.segments) == 1
    ):
        notes.append("start is pinned by the first usable arrival")

    return OfflineSolution(
        policy=final,
        finish=final.end,
        iterations=iterations,
        anchor_epoch=init.anchor_epoch,
        init=init,
        duration_trace=tuple(durations),
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class ConditionCheck:
    """Outcome of one structural condition: pass flag plus its worst residual."""

    passed: bool
    residual: float


@dataclass(frozen=True)
class StructureReport:
    """Structural audit of an offline plan against its instance."""

    ok: bool
    bit_target: ConditionCheck
    monotone_powers: ConditionCheck
    epoch_boundaries: ConditionCheck
    duration_rule: ConditionCheck
    anchor_on_boundary: ConditionCheck
    notes: tuple[str, ...]


def verify_structure(
    instance: ProblemInstance,
    policy: TransmissionPolicy,
    tol: float = STRUCTURE_TOL,
) -> StructureReport:
    """Audit the shape an optimal plan must have.

    Checks that the plan delivers the bit target, uses non-decreasing powers,
    places every interior boundary on an arrival epoch with all harvested
    energy spent there, ends exactly when the window closes unless it starts
    at time zero, and keeps the recomputed anchor epoch on a boundary.
    Residuals for energy-valued checks are normalized by the trace total.
    """
    window = _require_offline(instance)
    fn = instance.rate
    trace = instance.tx
    notes: list[str] = []

    bits = transmitted_bits(policy, fn)
    bits_residual = abs(bits - instance.bits) / max(1.0, instance.bits)
    bit_target = ConditionCheck(bits_residual <= tol, bits_residual)

    powers = policy.powers
    drop = max((powers[i] - powers[i + 1] for i in range(len(powers) - 1)), default=0.0)
    drop = max(0.0, drop)
    monotone = ConditionCheck(drop <= tol * max(1.0, max(powers, default=0.0)), drop)

    scale = max(1.0, trace.total)
    bounds = policy.boundaries
    worst_dist = 0.0
    for b in bounds[1:-1]:
        dist = min((abs(b - t) for t in trace.times), default=float("inf"))
        worst_dist = max(worst_dist, dist)
    worst_bind = 0.0
    for b in bounds[1:]:
        gap = abs(consumed_energy(policy, b) - energy_before(trace, b))
        worst_bind = max(worst_bind, gap)
    epoch_ok = worst_dist <= EPOCH_MATCH_TOL and worst_bind <= tol * scale
    epoch_boundaries = ConditionCheck(epoch_ok, max(worst_dist, worst_bind / scale))

    span = policy.span
    start = policy.start if not policy.is_empty else 0.0
    if start > TERMINATION_TOL:
        duration_residual = abs(span - window)
    else:
        duration_residual = max(0.0, span - window)
    duration_ok = duration_residual <= tol * max(1.0, window)
    if not duration_ok and start > TERMINATION_TOL and energy_before(trace, start) == 0.0:
        notes.append("start is pinned by the first usable arrival")
    duration_rule = ConditionCheck(duration_ok, duration_residual)

    anchor = init_policy(instance).anchor_epoch
    anchor_residual = min((abs(b - anchor) for b in bounds), default=float("inf"))
    anchor_on_boundary = ConditionCheck(anchor_residual <= EPOCH_MATCH_TOL, anchor_residual)

    ok = all(
        c.passed
        for c in (bit_target, monotone, epoch_boundaries, duration_rule, anchor_on_boundary)
    )
    return StructureReport(
        ok=ok,
        bit_target=bit_target,
        monotone_powers=monotone,
        epoch_boundaries=epoch_boundaries,
        duration_rule=duration_rule,
        anchor_on_boundary=anchor_on_boundary,
        notes=tuple(notes),
    )
