"""JSON wire formats for instances, policies, and the service endpoints."""

from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, Field

from .lab import ExperimentConfig, ExperimentResult, TraceSpec
from .model import HarvestTrace, PowerSegment, ProblemInstance, TransmissionPolicy
from .offline import OfflineSolution, StructureReport
from .online import OnlineResult, RatioResult
from .rates import RateFunction


class RateModel(BaseModel):
    kind: Literal["log2", "ln"] = "log2"
    scale: float = Field(default=1.0, gt=0)

    def to_core(self) -> RateFunction:
        return RateFunction(kind=self.kind, scale=self.scale)

    @classmethod
    def from_core(cls, fn: RateFunction) -> "RateModel":
        return cls(kind=fn.kind, scale=fn.scale)


class ArrivalModel(BaseModel):
    t: float = Field(ge=0)
    e: float = Field(gt=0)


class InstanceModel(BaseModel):
    """An instance as stored on disk and sent over the wire."""

    bits: float = Field(gt=0)
    rx_power: float = Field(default=1.0, gt=0)
    rate: RateModel = RateModel()
    tx: list[ArrivalModel]
    rx: list[ArrivalModel]

    def to_core(self) -> ProblemInstance:
        return ProblemInstance(
            bits=self.bits,
            tx=HarvestTrace(tuple((a.t, a.e) for a in self.tx)),
            rx=HarvestTrace(tuple((a.t, a.e) for a in self.rx)),
            rate=self.rate.to_core(),
            rx_power=self.rx_power,
        )

    @classmethod
    def from_core(cls, instance: ProblemInstance) -> "InstanceModel":
        return cls(
            bits=instance.bits,
            rx_power=instance.rx_power,
            rate=RateModel.from_core(instance.rate),
            tx=[ArrivalModel(t=t, e=e) for t, e in instance.tx.arrivals],
            rx=[ArrivalModel(t=t, e=e) for t, e in instance.rx.arrivals],
        )


class SegmentModel(BaseModel):
    start: float
    end: float
    power: float = Field(ge=0)


class PolicyModel(BaseModel):
    """A transmission policy as stored on disk and sent over the wire."""

    segments: list[SegmentModel]

    def to_core(self) -> TransmissionPolicy:
        return TransmissionPolicy(
            tuple(PowerSegment(s.start, s.end, s.power) for s in self.segments)
        )

    @classmethod
    def from_core(cls, policy: TransmissionPolicy) -> "PolicyModel":
        return cls(
            segments=[
                SegmentModel(start=s.start, end=s.end, power=s.power)
                for s in policy.segments
            ]
        )


class TraceSpecModel(BaseModel):
    horizon: float = Field(default=3.0, gt=0)
    intensity: float = Field(default=2.0, gt=0)
    energy_low: float = Field(default=0.5, gt=0)
    energy_high: float = Field(default=2.0, gt=0)
    window_low: float = Field(default=0.3, gt=0)
    window_high: float = Field(default=2.5, gt=0)
    bits_low: float = Field(default=0.3, gt=0)
    bits_high: float = Field(default=3.0, gt=0)
    rx_power: float = Field(default=1.0, gt=0)
    rate_kind: Literal["log2", "ln"] = "log2"
    rate_scale: float = Field(default=1.0, gt=0)

    def to_core(self) -> TraceSpec:
        return TraceSpec(**self.model_dump())


class SolveRequest(BaseModel):
    instance: InstanceModel


class OfflineSolveResponse(BaseModel):
    policy: PolicyModel
    start: float
    finish: float
    iterations: int
    anchor_epoch: float
    duration_trace: list[float]
    notes: list[str]

    @classmethod
    def from_core(cls, solution: OfflineSolution) -> "OfflineSolveResponse":
        return cls(
            policy=PolicyModel.from_core(solution.policy),
            start=solution.policy.start,
            finish=solution.finish,
            iterations=solution.iterations,
            anchor_epoch=solution.anchor_epoch,
            duration_trace=list(solution.duration_trace),
            notes=list(solution.notes),
        )


class PowerStepModel(BaseModel):
    t: float
    power: float


class RatioModel(BaseModel):
    ratio: float
    basis: Literal["exact-offline", "lower-bound"]
    online_finish: float
    reference: float

    @classmethod
    def from_core(cls, ratio: RatioResult) -> "RatioModel":
        return cls(
            ratio=ratio.ratio,
            basis=ratio.basis,
            online_finish=ratio.online_finish,
            reference=ratio.reference,
        )


class OnlineSolveResponse(BaseModel):
    policy: PolicyModel
    start: float
    finish: float
    power_steps: list[PowerStepModel]
    ratio: RatioModel

    @classmethod
    def from_core(cls, result: OnlineResult, ratio: RatioResult) -> "OnlineSolveResponse":
        return cls(
            policy=PolicyModel.from_core(result.policy),
            start=result.start,
            finish=result.finish,
            power_steps=[PowerStepModel(t=t, power=p) for t, p in result.power_steps],
            ratio=RatioModel.from_core(ratio),
        )


class OracleRequest(BaseModel):
    instance: InstanceModel
    grid_step: float | None = Field(default=None, gt=0)


class OracleResponse(BaseModel):
    finish: float
    grid_step: float


class VerifyRequest(BaseModel):
    instance: InstanceModel
    policy: PolicyModel
    tol: float = Field(default=1e-6, gt=0)


class ConditionModel(BaseModel):
    passed: bool
    residual: float


class VerifyResponse(BaseModel):
    ok: bool
    feasible: bool
    bit_target: ConditionModel
    monotone_powers: ConditionModel
    epoch_boundaries: ConditionModel
    duration_rule: ConditionModel
    anchor_on_boundary: ConditionModel
    notes: list[str]

    @classmethod
    def from_core(cls, report: StructureReport, feasible: bool) -> "VerifyResponse":
        def cond(c) -> ConditionModel:
            return ConditionModel(passed=c.passed, residual=c.residual)

        return cls(
            ok=report.ok and feasible,
            feasible=feasible,
            bit_target=cond(report.bit_target),
            monotone_powers=cond(report.monotone_powers),
            epoch_boundaries=cond(report.epoch_boundaries),
            duration_rule=cond(report.duration_rule),
            anchor_on_boundary=cond(report.anchor_on_boundary),
            notes=list(report.notes),
        )


class GenerateRequest(BaseModel):
    spec: TraceSpecModel = TraceSpecModel()
    seed: int = 0


class GenerateResponse(BaseModel):
    instance: InstanceModel
    digest: str


class ExperimentRequest(BaseModel):
    spec: TraceSpecModel = TraceSpecModel()
    instances: int = Field(default=1000, ge=0)
    master_seed: int = 0
    oracle_instances: int = Field(default=200, ge=0)
    max_tx_arrivals: int = Field(default=12, ge=1)
    grid_step: float | None = Field(default=None, gt=0)
    include_records: bool = False

    def to_core(self) -> ExperimentConfig:
        return ExperimentConfig(
            spec=self.spec.to_core(),
            instances=self.instances,
            master_seed=self.master_seed,
            oracle_instances=self.oracle_instances,
            max_tx_arrivals=self.max_tx_arrivals,
            grid_step=self.grid_step,
        )


def _none_if_nan(value: float) -> float | None:
    return None if math.isnan(value) else value


class ExperimentRecordModel(BaseModel):
    index: int
    digest: str
    arrivals: int
    window: float
    bits: float
    offline_finish: float | None
    offline_iterations: int
    online_finish: float | None
    ratio: float | None
    error: str = ""
    ok: bool


class ExperimentResponse(BaseModel):
    ok: bool
    failures: int
    instances: int
    max_ratio: float | None
    mean_iterations: float
    records: list[ExperimentRecordModel] | None = None

    @classmethod
    def from_core(
        cls, result: ExperimentResult, include_records: bool
    ) -> "ExperimentResponse":
        records = None
        if include_records:
            records = [
                ExperimentRecordModel(
                    index=r.index,
                    digest=r.digest,
                    arrivals=r.arrivals,
                    window=r.window,
                    bits=r.bits,
                    offline_finish=_none_if_nan(r.offline_finish),
                    offline_iterations=r.offline_iterations,
                    online_finish=_none_if_nan(r.online_finish),
                    ratio=_none_if_nan(r.ratio),
                    error=r.error,
                    ok=r.ok,
                )
                for r in result.records
            ]
        return cls(
            ok=result.ok,
            failures=result.failures,
            instances=len(result.records),
            max_ratio=_none_if_nan(result.max_ratio),
            mean_iterations=result.mean_iterations,
            records=records,
        )


class HealthResponse(BaseModel):
    status: str
    version: str
