"""Random instances, an independent discretized oracle, and audit campaigns.

The oracle never looks at the solver's plan shape: it sweeps candidate
listening-window starts on a time grid and bisects the earliest feasible
finish inside each window, so agreement with the solver is evidence rather
than tautology.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .baseline import max_bits_by_deadline, min_finish_time
from .errors import (
    InsufficientHarvestError,
    InternalInvariantError,
    SchedulingError,
)
from .model import (
    HarvestTrace,
    ProblemInstance,
    check_feasibility,
    energy_before,
)
from .offline import _require_offline, solve_offline, verify_structure
from .online import run_online
from .rates import RateFunction, duration_for_bits

logger = logging.getLogger("ehsched.lab")

GRID_FLOOR = 1e-4
GRID_GAP_FRACTION = 50.0
MONOTONE_SLACK = 1e-12
NOT_FASTER_SLACK = 1e-9


@dataclass(frozen=True)
class TraceSpec:
    """Distribution of random instances: Poisson arrivals, uniform marks."""

    horizon: float = 3.0
    intensity: float = 2.0
    energy_low: float = 0.5
    energy_high: float = 2.0
    window_low: float = 0.3
    window_high: float = 2.5
    bits_low: float = 0.3
    bits_high: float = 3.0
    rx_power: float = 1.0
    rate_kind: str = "log2"
    rate_scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.intensity > 0.0:
            raise ValueError("arrival intensity must be positive")
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")
        for low, high, what in (
            (self.energy_low, self.energy_high, "energy"),
            (self.window_low, self.window_high, "window"),
            (self.bits_low, self.bits_high, "bits"),
        ):
            if not 0.0 < low <= high:
                raise ValueError(f"{what} bounds must satisfy 0 < low <= high")
        if not self.rx_power > 0.0:
            raise ValueError("receiver power draw must be positive")
        RateFunction(kind=self.rate_kind, scale=self.rate_scale)

    @property
    def rate(self) -> RateFunction:
        return RateFunction(kind=self.rate_kind, scale=self.rate_scale)


def generate_instance(spec: TraceSpec, seed) -> ProblemInstance:
    """Draw one solvable instance.

    A transmitter arrival is always placed at time zero so the earliest-start
    rule stays attainable, and the bit target is capped at ninety percent of
    what the drawn window can carry so every instance admits a schedule.
    """
    rng = np.random.default_rng(seed)
    times = [0.0]
    t = rng.exponential(1.0 / spec.intensity)
    while t <= spec.horizon:
        times.append(t)
        t += rng.exponential(1.0 / spec.intensity)
    amounts = rng.uniform(spec.energy_low, spec.energy_high, size=len(times))
    window = float(rng.uniform(spec.window_low, spec.window_high))
    bits_drawn = float(rng.uniform(spec.bits_low, spec.bits_high))

    fn = spec.rate
    tx = HarvestTrace(tuple((float(t), float(e)) for t, e in zip(times, amounts)))
    cap = 0.9 * window * fn.rate(tx.total / window)
    return ProblemInstance(
        bits=min(bits_drawn, cap),
        tx=tx,
        rx=HarvestTrace(((0.0, window * spec.rx_power),)),
        rate=fn,
        rx_power=spec.rx_power,
    )


def default_grid_step(instance: ProblemInstance) -> float:
    """Oracle grid pitch: a fraction of the finest instance timescale."""
    times = instance.tx.times
    scales = [b - a for a, b in zip(times, times[1:])]
    scales.append(instance.initial_on_time)
    return max(min(scales) / GRID_GAP_FRACTION, GRID_FLOOR)


def oracle_min_finish(instance: ProblemInstance, grid_step: float | None = None) -> float:
    """Earliest finish found by sweeping listening-window starts on a grid.

    For each candidate start the energy visible inside the window forms a
    small standalone trace whose earliest feasible finish is bisected.  The
    sweep halts once starting later than the incumbent finish cannot help.
    The result is never below the true optimum and at most one grid step
    above it.
    """
    window = _require_offline(instance)
    fn = instance.rate
    trace = instance.tx
    bits = instance.bits
    step = default_grid_step(instance) if grid_step is None else grid_step
    if not step > 0.0:
        raise ValueError("grid step must be positive")

    stock_duration = duration_for_bits(fn, trace.total, bits)
    if stock_duration > window * (1.0 + 1e-9):
        raise InsufficientHarvestError(
            "the receiver window cannot carry the bit target on this trace"
        )
    last = trace.times[-1] if len(trace) else 0.0
    best = last + min(stock_duration, window)

    k = 0
    while True:
        a = k * step
        k += 1
        if a >= best:
            break
        window_end = a + window
        stock = energy_before(trace, a)
        local = [(t, e) for t, e in trace.arrivals if a <= t < window_end]
        if stock > 0.0:
            local.insert(0, (a, stock))
        if not local:
            continue
        w_trace = HarvestTrace(tuple(local))
        cap = min(best, window_end)
        got, _ = max_bits_by_deadline(w_trace, fn, cap, origin=a)
        if got < bits:
            continue
        lo, hi = a, cap
        for _ in range(60):
            if hi - lo <= 1e-12 * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            got_mid, _ = max_bits_by_deadline(w_trace, fn, mid, origin=a)
            if got_mid >= bits:
                hi = mid
            else:
                lo = mid
        best = min(best, hi)
    return best


@dataclass(frozen=True)
class ExperimentConfig:
    """Campaign shape: how many instances, which subset gets the oracle."""

    spec: TraceSpec = TraceSpec()
    instances: int = 1000
    master_seed: int = 0
    oracle_instances: int = 200
    max_tx_arrivals: int = 12
    grid_step: float | None = None

    def __post_init__(self) -> None:
        if self.instances < 0:
            raise ValueError("instance count must be nonnegative")
        if self.oracle_instances < 0:
            raise ValueError("oracle instance count must be nonnegative")
        if self.max_tx_arrivals < 1:
            raise ValueError("arrival cap must be at least one")
        if self.grid_step is not None and not self.grid_step > 0.0:
            raise ValueError("grid step must be positive")


@dataclass(frozen=True)
class ExperimentRecord:
    """One instance's audit: measurements plus one pass flag per invariant."""

    index: int
    digest: str
    arrivals: int
    window: float
    bits: float
    offline_finish: float
    offline_iterations: int
    baseline_finish: float
    online_finish: float
    ratio: float
    oracle_step: float
    oracle_finish: float
    offline_feasible: bool
    structure_ok: bool
    duration_monotone: bool
    iteration_bound_ok: bool
    baseline_not_slower: bool
    online_feasible: bool
    online_powers_monotone: bool
    ratio_below_two: bool
    online_not_faster: bool
    oracle_agrees: bool | None
    error: str
    ok: bool


@dataclass(frozen=True)
class ExperimentResult:
    """Campaign outcome with per-instance records and headline aggregates."""

    config: ExperimentConfig
    records: tuple[ExperimentRecord, ...]
    ok: bool
    failures: int
    max_ratio: float
    mean_iterations: float


def instance_digest(instance: ProblemInstance) -> str:
    """Stable short fingerprint of the instance's canonical JSON form."""
    payload = {
        "bits": instance.bits,
        "rx_power": instance.rx_power,
        "rate": {"kind": instance.rate.kind, "scale": instance.rate.scale},
        "tx": [{"t": t, "e": e} for t, e in instance.tx.arrivals],
        "rx": [{"t": t, "e": e} for t, e in instance.rx.arrivals],
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _non_decreasing(values) -> bool:
    return all(
        b >= a - MONOTONE_SLACK * max(1.0, abs(b)) for a, b in zip(values, values[1:])
    )


def _evaluate(
    instance: ProblemInstance,
    index: int,
    run_oracle: bool,
    grid_step: float | None,
) -> ExperimentRecord:
    solution = solve_offline(instance)
    report = verify_structure(instance, solution.policy)
    offline_feasible = check_feasibility(solution.policy, instance).feasible
    baseline_finish, _ = min_finish_time(instance.tx, instance.rate, instance.bits)

    online = run_online(instance)
    online_feasible = check_feasibility(online.policy, instance).feasible
    ratio = online.finish / solution.finish
    levels = [p for _, p in online.power_steps]

    before_init_stop = sum(1 for t in instance.tx.times if t < solution.init.stop)
    iteration_bound_ok = solution.iterations <= 2 * before_init_stop

    if run_oracle:
        step = default_grid_step(instance) if grid_step is None else grid_step
        oracle_finish = oracle_min_finish(instance, step)
        oracle_agrees = abs(oracle_finish - solution.finish) <= 2.0 * step + 1e-9
    else:
        step = float("nan")
        oracle_finish = float("nan")
        oracle_agrees = None

    checks = {
        "offline_feasible": offline_feasible,
        "structure_ok": report.ok,
        "duration_monotone": _non_decreasing(solution.duration_trace),
        "iteration_bound_ok": iteration_bound_ok,
        "baseline_not_slower": baseline_finish <= solution.finish + NOT_FASTER_SLACK,
        "online_feasible": online_feasible,
        "online_powers_monotone": _non_decreasing(levels),
        "ratio_below_two": ratio < 2.0,
        "online_not_faster": online.finish >= solution.finish - NOT_FASTER_SLACK,
    }
    ok = all(checks.values()) and oracle_agrees is not False
    if not ok:
        failed = [name for name, passed in checks.items() if not passed]
        if oracle_agrees is False:
            failed.append("oracle_agrees")
        logger.warning("instance %d failed checks: %s", index, ", ".join(failed))

    return ExperimentRecord(
        index=index,
        digest=instance_digest(instance),
        arrivals=len(instance.tx),
        window=instance.initial_on_time,
        bits=instance.bits,
        offline_finish=solution.finish,
        offline_iterations=solution.iterations,
        baseline_finish=baseline_finish,
        online_finish=online.finish,
        ratio=ratio,
        oracle_step=step,
        oracle_finish=oracle_finish,
        offline_feasible=checks["offline_feasible"],
        structure_ok=checks["structure_ok"],
        duration_monotone=checks["duration_monotone"],
        iteration_bound_ok=checks["iteration_bound_ok"],
        baseline_not_slower=checks["baseline_not_slower"],
        online_feasible=checks["online_feasible"],
        online_powers_monotone=checks["online_powers_monotone"],
        ratio_below_two=checks["ratio_below_two"],
        online_not_faster=checks["online_not_faster"],
        oracle_agrees=oracle_agrees,
        error="",
        ok=ok,
    )


def _failure_record(instance: ProblemInstance, index: int, error: str) -> ExperimentRecord:
    nan = float("nan")
    return ExperimentRecord(
        index=index,
        digest=instance_digest(instance),
        arrivals=len(instance.tx),
        window=instance.initial_on_time,
        bits=instance.bits,
        offline_finish=nan,
        offline_iterations=0,
        baseline_finish=nan,
        online_finish=nan,
        ratio=nan,
        oracle_step=nan,
        oracle_finish=nan,
        offline_feasible=False,
        structure_ok=False,
        duration_monotone=False,
        iteration_bound_ok=False,
        baseline_not_slower=False,
        online_feasible=False,
        online_powers_monotone=False,
        ratio_below_two=False,
        online_not_faster=False,
        oracle_agrees=None,
        error=error,
        ok=False,
    )


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Generate, solve, and audit a reproducible batch of instances.

    Instances whose arrival count exceeds the configured cap are redrawn from
    the next child seed, so the accepted batch is a deterministic function of
    the master seed alone.  A solver error on one instance is recorded on its
    row and the campaign continues.
    """
    records: list[ExperimentRecord] = []
    attempt = 0
    limit = 50 * config.instances + 100
    while len(records) < config.instances:
        if attempt >= limit:
            raise InternalInvariantError("instance generation kept missing the arrival cap")
        seed = np.random.SeedSequence(config.master_seed, spawn_key=(attempt,))
        attempt += 1
        instance = generate_instance(config.spec, seed)
        if len(instance.tx) > config.max_tx_arrivals:
            continue
        index = len(records)
        try:
            record = _evaluate(
                instance,
                index,
                run_oracle=index < config.oracle_instances,
                grid_step=config.grid_step,
            )
        except SchedulingError as exc:
            logger.warning("instance %d raised %s: %s", index, type(exc).__name__, exc)
            record = _failure_record(instance, index, f"{type(exc).__name__}: {exc}")
        records.append(record)
        if index and index % 200 == 0:
            logger.info("evaluated %d of %d instances", index, config.instances)

    failures = sum(1 for r in records if not r.ok)
    return ExperimentResult(
        config=config,
        records=tuple(records),
        ok=failures == 0,
        failures=failures,
        max_ratio=max((r.ratio for r in records), default=float("nan")),
        mean_iterations=(
            sum(r.offline_iterations for r in records) / len(records) if records else 0.0
        ),
    )


CSV_COLUMNS = (
    "index",
    "digest",
    "arrivals",
    "window",
    "bits",
    "offline_finish",
    "offline_iterations",
    "baseline_finish",
    "online_finish",
    "ratio",
    "oracle_step",
    "oracle_finish",
    "offline_feasible",
    "structure_ok",
    "duration_monotone",
    "iteration_bound_ok",
    "baseline_not_slower",
    "online_feasible",
    "online_powers_monotone",
    "ratio_below_two",
    "online_not_faster",
    "oracle_agrees",
    "error",
    "ok",
    "timestamp",
)


def write_csv(result: ExperimentResult, path) -> None:
    """Write one row per record; the trailing timestamp column is the only
    part of the file that varies between identical runs."""
    stamp = datetime.now(timezone.utc).isoformat()

    def cell(value):
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return repr(value)
        return str(value)

    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for r in result.records:
            row = [
                r.index, r.digest, r.arrivals, r.window, r.bits,
                r.offline_finish, r.offline_iterations, r.baseline_finish,
                r.online_finish, r.ratio, r.oracle_step, r.oracle_finish,
                r.offline_feasible, r.structure_ok, r.duration_monotone,
                r.iteration_bound_ok, r.baseline_not_slower, r.online_feasible,
                r.online_powers_monotone, r.ratio_below_two,
                r.online_not_faster, r.oracle_agrees, r.error, r.ok,
            ]
            writer.writerow([cell(v) for v in row] + [stamp])
