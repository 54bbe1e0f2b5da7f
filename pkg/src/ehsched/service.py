"""FastAPI service exposing the solvers, the oracle, and the experiment harness."""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__
from .errors import InternalInvariantError, NumericalFailureError, SchedulingError
from .lab import (
    default_grid_step,
    generate_instance,
    instance_digest,
    oracle_min_finish,
    run_experiment,
)
from .model import check_feasibility
from .offline import solve_offline, verify_structure
from .online import competitive_ratio, run_online
from .schemas import (
    ExperimentRequest,
    ExperimentResponse,
    GenerateRequest,
    GenerateResponse,
    HealthResponse,
    InstanceModel,
    OfflineSolveResponse,
    OnlineSolveResponse,
    OracleRequest,
    OracleResponse,
    SolveRequest,
    VerifyRequest,
    VerifyResponse,
)

app = FastAPI(
    title="ehsched",
    version=__version__,
    description=(
        "Time-optimal transmission schedules for an energy-harvesting "
        "transmitter talking to an energy-harvesting receiver."
    ),
)


@app.exception_handler(SchedulingError)
async def _scheduling_error(request, exc: SchedulingError):
    status = 500 if isinstance(exc, (InternalInvariantError, NumericalFailureError)) else 422
    return JSONResponse(
        status_code=status,
        content={"detail": str(exc), "kind": type(exc).__name__},
    )


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/solve/offline", response_model=OfflineSolveResponse)
def solve_offline_endpoint(request: SolveRequest) -> OfflineSolveResponse:
    solution = solve_offline(request.instance.to_core())
    return OfflineSolveResponse.from_core(solution)


@app.post("/solve/online", response_model=OnlineSolveResponse)
def solve_online_endpoint(request: SolveRequest) -> OnlineSolveResponse:
    instance = request.instance.to_core()
    result = run_online(instance)
    ratio = competitive_ratio(instance)
    return OnlineSolveResponse.from_core(result, ratio)


@app.post("/oracle", response_model=OracleResponse)
def oracle_endpoint(request: OracleRequest) -> OracleResponse:
    instance = request.instance.to_core()
    step = request.grid_step if request.grid_step is not None else default_grid_step(instance)
    return OracleResponse(finish=oracle_min_finish(instance, step), grid_step=step)


@app.post("/verify", response_model=VerifyResponse)
def verify_endpoint(request: VerifyRequest) -> VerifyResponse:
    instance = request.instance.to_core()
    policy = request.policy.to_core()
    report = verify_structure(instance, policy, tol=request.tol)
    feasible = check_feasibility(policy, instance).feasible
    return VerifyResponse.from_core(report, feasible)


@app.post("/generate", response_model=GenerateResponse)
def generate_endpoint(request: GenerateRequest) -> GenerateResponse:
    instance = generate_instance(request.spec.to_core(), request.seed)
    return GenerateResponse(
        instance=InstanceModel.from_core(instance),
        digest=instance_digest(instance),
    )


@app.post("/experiment", response_model=ExperimentResponse)
def experiment_endpoint(request: ExperimentRequest) -> ExperimentResponse:
    result = run_experiment(request.to_core())
    return ExperimentResponse.from_core(result, request.include_records)
