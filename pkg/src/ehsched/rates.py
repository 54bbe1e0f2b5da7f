"""Concave rate functions and the scalar solves the schedulers depend on.

A rate function maps transmit power p (watts) to a bit rate g(p) and must satisfy
g(0) = 0, strict monotonicity, concavity, and a bits-per-joule curve g(p)/p that
decreases toward zero.  The built-in family is scale * log(1 + p) in base 2 or e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InsufficientHarvestError, NumericalFailureError

_LN2 = math.log(2.0)

MAX_BISECT_STEPS = 200
SOLVE_RTOL = 1e-10


@dataclass(frozen=True)
class RateFunction:
    """Logarithmic rate curve g(p) = scale * log(1 + p), base 2 or natural."""

    kind: str = "log2"
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("log2", "ln"):
            raise ValueError(f"unknown rate kind {self.kind!r}")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError("rate scale must be positive and finite")

    def rate(self, power: float) -> float:
        """Bit rate at the given transmit power."""
        if power < 0.0:
            raise ValueError("power must be nonnegative")
        if self.kind == "log2":
            return self.scale * math.log1p(power) / _LN2
        return self.scale * math.log1p(power)

    @property
    def peak_efficiency(self) -> float:
        """Supremum of g(p)/p, attained in the low-power limit."""
        if self.kind == "log2":
            return self.scale / _LN2
        return self.scale

    def efficiency(self, power: float) -> float:
        """Bits per joule g(p)/p; continuous extension at p = 0."""
        if power < 0.0:
            raise ValueError("power must be nonnegative")
        if power == 0.0:
            return self.peak_efficiency
        return self.rate(power) / power


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of the rate-axiom battery; failures list the first violation per axiom."""

    ok: bool
    failures: tuple[str, ...]


def _bisect(func, lo: float, hi: float, f_lo: float, f_hi: float) -> float:
    """Root of a monotone continuous func on [lo, hi] with a verified sign change."""
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise NumericalFailureError("no sign change in bisection bracket")
    for _ in range(MAX_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if (hi - lo) <= SOLVE_RTOL * max(abs(lo), abs(hi)):
            return mid
        f_mid = func(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return 0.5 * (lo + hi)


def power_for_efficiency(fn: RateFunction, target: float) -> float:
    """Unique power p with g(p)/p equal to the target bits-per-joule value.

    The target must lie strictly inside (0, peak efficiency); g(p)/p is strictly
    decreasing so the root is found by doubling the upper bracket and bisecting.
    """
    if not (0.0 < target < fn.peak_efficiency):
        raise ValueError(
            f"efficiency target {target} outside (0, {fn.peak_efficiency})"
        )
    func = lambda p: fn.efficiency(p) - target
    lo = 1e-12
    hi = 1.0
    f_lo = func(lo)
    f_hi = func(hi)
    doublings = 0
    while f_hi > 0.0:
        lo, f_lo = hi, f_hi
        hi *= 2.0
        f_hi = func(hi)
        doublings += 1
        if doublings > 2000:
            raise NumericalFailureError("efficiency bracket expansion failed")
    return _bisect(func, lo, hi, f_lo, f_hi)


def duration_for_bits(fn: RateFunction, energy: float, bits: float) -> float:
    """Shortest duration T over which `energy` joules can carry `bits` bits.

    Solves T * g(energy / T) = bits.  The left side increases in T toward the
    supremum energy * peak_efficiency; a target at or above it is unreachable.
    """
    if energy <= 0.0:
        raise ValueError("energy must be positive")
    if bits < 0.0:
        raise ValueError("bits must be nonnegative")
    if bits == 0.0:
        return 0.0
    supremum = energy * fn.peak_efficiency
    if bits >= supremum * (1.0 - 1e-12):
        raise InsufficientHarvestError(
            f"{bits} bits exceed the {supremum} deliverable with {energy} J"
        )
    func = lambda t: t * fn.rate(energy / t) - bits
    hi = 1.0
    f_hi = func(hi)
    doublings = 0
    while f_hi < 0.0:
        hi *= 2.0
        f_hi = func(hi)
        doublings += 1
        if doublings > 2000:
            raise NumericalFailureError("duration bracket expansion failed")
    lo = hi / 2.0 if doublings else 1e-12
    f_lo = func(lo)
    halvings = 0
    while f_lo > 0.0:
        hi, f_hi = lo, f_lo
        lo /= 2.0
        f_lo = func(lo)
        halvings += 1
        if halvings > 2000:
            raise NumericalFailureError("duration bracket expansion failed")
    return _bisect(func, lo, hi, f_lo, f_hi)


def _default_grid() -> list[float]:
    return [10.0 ** (-3.0 + 6.0 * i / 59.0) for i in range(60)]


def check_rate_axioms(fn, grid: list[float] | None = None) -> AxiomReport:
    """Check the rate-function axioms on a power grid.

    Accepts any object with a rate(p) method so non-conforming curves can be
    probed.  Checks g(0) = 0, strict increase, midpoint concavity, decreasing
    g(p)/p, and decay of g(p)/p at the top of the grid.
    """
    pts = sorted(grid) if grid else _default_grid()
    failures: list[str] = []

    zero = fn.rate(0.0)
    if abs(zero) > 1e-12:
        failures.append(f"g(0) = {zero}, expected 0")

    values = [fn.rate(p) for p in pts]
    for a, b, ga, gb in zip(pts, pts[1:], values, values[1:]):
        if not gb > ga:
            failures.append(f"g not strictly increasing between p={a} and p={b}")
            break

    for a, b, ga, gb in zip(pts, pts[1:], values, values[1:]):
        mid = fn.rate(0.5 * (a + b))
        if mid < 0.5 * (ga + gb) - 1e-12 * max(1.0, abs(ga), abs(gb)):
            failures.append(f"concavity violated on midpoint of [{a}, {b}]")
            break

    ratios = [g / p for p, g in zip(pts, values)]
    for a, b, ra, rb in zip(pts, pts[1:], ratios, ratios[1:]):
        if rb > ra + 1e-12 * max(1.0, ra):
            failures.append(f"g(p)/p not decreasing between p={a} and p={b}")
            break

    if ratios and ratios[-1] > 0.1 * ratios[0]:
        failures.append(
            f"g(p)/p does not decay over the grid ({ratios[-1]} vs {ratios[0]} at the ends)"
        )

    return AxiomReport(ok=not failures, failures=tuple(failures))
