"""Command line front end.

Subcommands call the library directly; `serve` starts the HTTP service that
wraps the same calls.  Set EH_SCHED_LOG to a level name (DEBUG, INFO, ...) to
see progress logging from long campaigns.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .errors import SchedulingError
from .lab import (
    default_grid_step,
    generate_instance,
    instance_digest,
    oracle_min_finish,
    run_experiment,
    write_csv,
)
from .model import check_feasibility
from .offline import solve_offline, verify_structure
from .online import competitive_ratio, run_online
from .schemas import (
    ExperimentRequest,
    ExperimentResponse,
    GenerateResponse,
    InstanceModel,
    OfflineSolveResponse,
    OnlineSolveResponse,
    OracleResponse,
    PolicyModel,
    RateModel,
    TraceSpecModel,
    VerifyResponse,
)


def _load_instance(path: str, rate_kind: str | None) -> InstanceModel:
    model = InstanceModel.model_validate_json(Path(path).read_text())
    if rate_kind is not None:
        model = model.model_copy(
            update={"rate": RateModel(kind=rate_kind, scale=model.rate.scale)}
        )
    return model


def _print_model(model) -> None:
    print(model.model_dump_json(indent=2))


def _print_policy(policy_model: PolicyModel) -> None:
    for seg in policy_model.segments:
        print(f"  [{seg.start:.9g}, {seg.end:.9g})  power {seg.power:.9g}")


def cmd_solve_offline(args) -> int:
    instance = _load_instance(args.instance, args.rate)
    solution = solve_offline(instance.to_core())
    response = OfflineSolveResponse.from_core(solution)
    if args.out:
        Path(args.out).write_text(response.policy.model_dump_json(indent=2) + "\n")
    if args.json:
        _print_model(response)
    else:
        print(f"start      {response.start:.9g}")
        print(f"finish     {response.finish:.9g}")
        print(f"span       {response.finish - response.start:.9g}")
        print(f"iterations {response.iterations}")
        print(f"anchor     {response.anchor_epoch:.9g}")
        for note in response.notes:
            print(f"note: {note}")
        print("segments:")
        _print_policy(response.policy)
    return 0


def cmd_solve_online(args) -> int:
    instance = _load_instance(args.instance, args.rate)
    core = instance.to_core()
    result = run_online(core)
    ratio = competitive_ratio(core)
    response = OnlineSolveResponse.from_core(result, ratio)
    if args.out:
        Path(args.out).write_text(response.policy.model_dump_json(indent=2) + "\n")
    if args.json:
        _print_model(response)
    else:
        print(f"start  {response.start:.9g}")
        print(f"finish {response.finish:.9g}")
        print(f"ratio  {response.ratio.ratio:.9g} ({response.ratio.basis})")
        print("power steps:")
        for step in response.power_steps:
            print(f"  t {step.t:.9g}  power {step.power:.9g}")
    return 0


def cmd_oracle(args) -> int:
    instance = _load_instance(args.instance, args.rate).to_core()
    step = args.grid if args.grid is not None else default_grid_step(instance)
    finish = oracle_min_finish(instance, step)
    response = OracleResponse(finish=finish, grid_step=step)
    if args.json:
        _print_model(response)
    else:
        print(f"finish {finish:.9g} (grid step {step:.9g})")
    return 0


def cmd_verify(args) -> int:
    instance = _load_instance(args.instance, args.rate).to_core()
    policy = PolicyModel.model_validate_json(Path(args.policy).read_text()).to_core()
    report = verify_structure(instance, policy, tol=args.tol)
    feasible = check_feasibility(policy, instance).feasible
    response = VerifyResponse.from_core(report, feasible)
    if args.json:
        _print_model(response)
    else:
        print(f"feasible           {'PASS' if feasible else 'FAIL'}")
        for name in (
            "bit_target",
            "monotone_powers",
            "epoch_boundaries",
            "duration_rule",
            "anchor_on_boundary",
        ):
            cond = getattr(response, name)
            state = "PASS" if cond.passed else "FAIL"
            print(f"{name:<18} {state} (residual {cond.residual:.3g})")
        for note in response.notes:
            print(f"note: {note}")
        print(f"overall            {'PASS' if response.ok else 'FAIL'}")
    return 0 if response.ok else 1


def cmd_gen(args) -> int:
    spec_model = TraceSpecModel()
    if args.spec:
        spec_model = TraceSpecModel.model_validate_json(Path(args.spec).read_text())
    if args.rate:
        spec_model = spec_model.model_copy(update={"rate_kind": args.rate})
    instance = generate_instance(spec_model.to_core(), args.seed)
    response = GenerateResponse(
        instance=InstanceModel.from_core(instance), digest=instance_digest(instance)
    )
    if args.out:
        Path(args.out).write_text(response.instance.model_dump_json(indent=2) + "\n")
        print(f"wrote {args.out} (digest {response.digest})")
    elif args.json:
        _print_model(response)
    else:
        _print_model(response.instance)
    return 0


def cmd_experiment(args) -> int:
    request = ExperimentRequest()
    if args.config:
        request = ExperimentRequest.model_validate_json(Path(args.config).read_text())
    result = run_experiment(request.to_core())
    if args.out:
        write_csv(result, args.out)
    if args.json:
        _print_model(ExperimentResponse.from_core(result, include_records=False))
    else:
        print(f"instances       {len(result.records)}")
        print(f"failures        {result.failures}")
        print(f"max ratio       {result.max_ratio:.9g}")
        print(f"mean iterations {result.mean_iterations:.3g}")
        if args.out:
            print(f"wrote {args.out}")
    return 0 if result.ok else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehsched",
        description="Time-optimal schedules for energy-harvesting links.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_rate(p):
        p.add_argument(
            "--rate",
            choices=("log2", "ln"),
            default=None,
            help="override the rate function family",
        )

    p = sub.add_parser("solve-offline", help="optimal schedule for one receiver purse")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--out", help="write the policy JSON here")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    add_rate(p)
    p.set_defaults(func=cmd_solve_offline)

    p = sub.add_parser("solve-online", help="causal schedule seen arrival by arrival")
    p.add_argument("instance")
    p.add_argument("--out", help="write the policy JSON here")
    p.add_argument("--json", action="store_true")
    add_rate(p)
    p.set_defaults(func=cmd_solve_online)

    p = sub.add_parser("oracle", help="grid-search reference finish time")
    p.add_argument("instance")
    p.add_argument("--grid", type=float, default=None, help="grid step in seconds")
    p.add_argument("--json", action="store_true")
    add_rate(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="audit a policy against an instance")
    p.add_argument("instance")
    p.add_argument("policy")
    p.add_argument("--tol", type=float, default=1e-6, help="residual tolerance")
    p.add_argument("--json", action="store_true")
    add_rate(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="draw a random instance")
    p.add_argument("--spec", help="trace spec JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the instance JSON here")
    p.add_argument("--json", action="store_true")
    add_rate(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run an invariant-check campaign")
    p.add_argument("--config", help="experiment config JSON file")
    p.add_argument("--out", help="write the per-instance CSV here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("EH_SCHED_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchedulingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
