"""Rate-curve values, scalar solves against an independent root finder, axioms."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from ehsched import (
    InsufficientHarvestError,
    RateFunction,
    check_rate_axioms,
    duration_for_bits,
    power_for_efficiency,
)

SOLVE_MATCH_RTOL = 1e-8
ROUND_TRIP_RTOL = 1e-9

ALL_RATES = [
    RateFunction(kind="log2", scale=1.0),
    RateFunction(kind="log2", scale=0.4),
    RateFunction(kind="ln", scale=1.0),
    RateFunction(kind="ln", scale=2.5),
]


def oracle_power_for_efficiency(fn, target):
    """Independent solve of g(p)/p = target via scipy."""
    hi = 1.0
    while fn.efficiency(hi) > target:
        hi *= 2.0
    return brentq(lambda p: fn.efficiency(p) - target, 1e-15, hi, xtol=1e-14, rtol=1e-14)


def oracle_duration_for_bits(fn, energy, bits):
    """Independent solve of t * g(energy / t) = bits via scipy."""
    hi = 1.0
    while hi * fn.rate(energy / hi) < bits:
        hi *= 2.0
    lo = 1e-9
    while lo * fn.rate(energy / lo) > bits:
        lo /= 2.0
    return brentq(lambda t: t * fn.rate(energy / t) - bits, lo, hi, xtol=1e-15, rtol=1e-14)


class TestRateValues:
    def test_log2_known_points(self):
        fn = RateFunction(kind="log2", scale=1.0)
        assert fn.rate(0.0) == 0.0
        assert fn.rate(1.0) == pytest.approx(1.0, rel=1e-12)
        assert fn.rate(3.0) == pytest.approx(2.0, rel=1e-12)

    def test_ln_known_points(self):
        fn = RateFunction(kind="ln", scale=2.0)
        assert fn.rate(0.0) == 0.0
        assert fn.rate(math.e - 1.0) == pytest.approx(2.0, rel=1e-12)

    def test_scale_multiplies_rate(self):
        base = RateFunction(kind="log2", scale=1.0)
        scaled = RateFunction(kind="log2", scale=3.0)
        assert scaled.rate(5.0) == pytest.approx(3.0 * base.rate(5.0), rel=1e-12)

    def test_negative_power_rejected(self):
        fn = RateFunction()
        with pytest.raises(ValueError):
            fn.rate(-0.1)
        with pytest.raises(ValueError):
            fn.efficiency(-0.1)

    def test_peak_efficiency(self):
        assert RateFunction(kind="log2", scale=1.0).peak_efficiency == pytest.approx(
            1.0 / math.log(2.0), rel=1e-14
        )
        assert RateFunction(kind="ln", scale=1.7).peak_efficiency == pytest.approx(
            1.7, rel=1e-14
        )

    def test_efficiency_extends_continuously_to_zero(self):
        fn = RateFunction(kind="log2", scale=1.0)
        assert fn.efficiency(0.0) == fn.peak_efficiency
        assert fn.efficiency(1e-9) == pytest.approx(fn.peak_efficiency, rel=1e-8)

    def test_efficiency_strictly_decreasing(self):
        fn = RateFunction(kind="ln", scale=1.0)
        powers = [0.01, 0.1, 1.0, 10.0, 100.0]
        effs = [fn.efficiency(p) for p in powers]
        assert all(a > b for a, b in zip(effs, effs[1:]))

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            RateFunction(kind="linear", scale=1.0)
        with pytest.raises(ValueError):
            RateFunction(kind="log2", scale=0.0)
        with pytest.raises(ValueError):
            RateFunction(kind="log2", scale=-2.0)
        with pytest.raises(ValueError):
            RateFunction(kind="log2", scale=math.inf)


class TestPowerForEfficiency:
    def test_matches_independent_solver(self):
        for fn in ALL_RATES:
            peak = fn.peak_efficiency
            for frac in (0.05, 0.2, 0.5, 0.8, 0.95, 0.999):
                target = frac * peak
                got = power_for_efficiency(fn, target)
                want = oracle_power_for_efficiency(fn, target)
                assert got == pytest.approx(want, rel=SOLVE_MATCH_RTOL)

    def test_frozen_half_peak_value(self):
        fn = RateFunction(kind="log2", scale=1.0)
        assert power_for_efficiency(fn, 0.5) == pytest.approx(
            5.319722355838365, rel=SOLVE_MATCH_RTOL
        )

    def test_targets_outside_open_interval_rejected(self):
        fn = RateFunction(kind="log2", scale=1.0)
        for bad in (0.0, -0.5, fn.peak_efficiency, fn.peak_efficiency * 1.5):
            with pytest.raises(ValueError):
                power_for_efficiency(fn, bad)

    @given(
        frac=st.floats(min_value=0.01, max_value=0.99),
        scale=st.floats(min_value=0.2, max_value=4.0),
        kind=st.sampled_from(["log2", "ln"]),
    )
    def test_round_trip_through_efficiency(self, frac, scale, kind):
        fn = RateFunction(kind=kind, scale=scale)
        target = frac * fn.peak_efficiency
        power = power_for_efficiency(fn, target)
        assert fn.efficiency(power) == pytest.approx(target, rel=ROUND_TRIP_RTOL)


class TestDurationForBits:
    def test_matches_independent_solver(self):
        for fn in ALL_RATES:
            for energy in (0.3, 1.0, 4.0, 20.0):
                supremum = energy * fn.peak_efficiency
                for frac in (0.05, 0.3, 0.7, 0.95):
                    bits = frac * supremum
                    got = duration_for_bits(fn, energy, bits)
                    want = oracle_duration_for_bits(fn, energy, bits)
                    assert got == pytest.approx(want, rel=SOLVE_MATCH_RTOL)

    def test_frozen_worked_value(self):
        fn = RateFunction(kind="log2", scale=1.0)
        assert duration_for_bits(fn, 4.0, 2.0) == pytest.approx(
            0.7519189409593947, rel=SOLVE_MATCH_RTOL
        )

    def test_zero_bits_take_no_time(self):
        fn = RateFunction()
        assert duration_for_bits(fn, 3.0, 0.0) == 0.0

    def test_unreachable_targets_raise(self):
        fn = RateFunction(kind="ln", scale=1.0)
        supremum = 2.0 * fn.peak_efficiency
        with pytest.raises(InsufficientHarvestError):
            duration_for_bits(fn, 2.0, supremum)
        with pytest.raises(InsufficientHarvestError):
            duration_for_bits(fn, 2.0, supremum * 2.0)

    def test_invalid_arguments_raise(self):
        fn = RateFunction()
        with pytest.raises(ValueError):
            duration_for_bits(fn, 0.0, 1.0)
        with pytest.raises(ValueError):
            duration_for_bits(fn, -1.0, 1.0)
        with pytest.raises(ValueError):
            duration_for_bits(fn, 1.0, -0.5)

    @given(
        energy=st.floats(min_value=0.1, max_value=50.0),
        frac=st.floats(min_value=0.01, max_value=0.98),
        kind=st.sampled_from(["log2", "ln"]),
    )
    def test_duration_delivers_requested_bits(self, energy, frac, kind):
        fn = RateFunction(kind=kind, scale=1.0)
        bits = frac * energy * fn.peak_efficiency
        duration = duration_for_bits(fn, energy, bits)
        assert duration * fn.rate(energy / duration) == pytest.approx(
            bits, rel=ROUND_TRIP_RTOL
        )

    def test_duration_increases_with_bits(self):
        fn = RateFunction(kind="log2", scale=1.0)
        supremum = 4.0 * fn.peak_efficiency
        durations = [
            duration_for_bits(fn, 4.0, frac * supremum)
            for frac in (0.1, 0.3, 0.5, 0.7, 0.9)
        ]
        assert all(a < b for a, b in zip(durations, durations[1:]))


class _QuadraticRate:
    def rate(self, power):
        return power * power


class _LinearRate:
    def rate(self, power):
        return power


class _OffsetRate:
    def rate(self, power):
        return power + 1.0


class TestAxiomBattery:
    def test_builtin_curves_pass(self):
        for fn in ALL_RATES:
            report = check_rate_axioms(fn)
            assert report.ok
            assert report.failures == ()

    def test_convex_curve_fails_concavity(self):
        report = check_rate_axioms(_QuadraticRate())
        assert not report.ok
        assert any("concavity" in f for f in report.failures)

    def test_linear_curve_fails_efficiency_decay(self):
        report = check_rate_axioms(_LinearRate())
        assert not report.ok
        assert any("decay" in f for f in report.failures)

    def test_nonzero_origin_fails(self):
        report = check_rate_axioms(_OffsetRate())
        assert not report.ok
        assert any("g(0)" in f for f in report.failures)

    def test_custom_grid_is_used(self):
        fn = RateFunction(kind="log2", scale=1.0)
        report = check_rate_axioms(fn, grid=[0.01, 0.1, 1.0, 10.0, 100.0, 1000.0])
        assert report.ok
