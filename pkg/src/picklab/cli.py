"""Command line entry point ``picklab``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from picklab.bounds import audit_instance
from picklab.ciopt import SolverBudget, solve_ciopt
from picklab.harness import ExperimentConfig, run_experiment
from picklab.instance import (ADVERSARIAL_FAMILIES, SETTINGS, InstanceError, PolicyKind,
                              generate_adversarial, generate_setting, read_instance, write_instance)
from picklab.reopt import simulate
from picklab.routing import Unsolved

SYSTEMS = [k.value for k in PolicyKind]


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _system(args, inst) -> PolicyKind:
    if args.system:
        return PolicyKind.parse(args.system)
    if inst.system is None:
        raise SystemExit("error: --system is required (the instance names none)")
    return inst.system


def cmd_generate(args) -> int:
    inst = generate_setting(args.setting, args.n, args.seed, args.system)
    write_instance(inst, args.out)
    return 0


def cmd_generate_adversarial(args) -> int:
    params = {k: v for k, v in (("k", args.k), ("W", args.W), ("L", args.L), ("eps", args.eps),
                                ("delta", args.delta), ("t", args.t), ("scale", args.scale))
              if v is not None}
    inst = generate_adversarial(args.family, **params)
    write_instance(inst, args.out)
    return 0


def _budget(args) -> SolverBudget:
    return SolverBudget(time_limit=args.budget_secs)


def cmd_solve(args) -> int:
    inst = read_instance(args.inp)
    try:
        sol = solve_ciopt(inst, _system(args, inst), _budget(args))
    except Unsolved as e:
        _emit({"status": "unsolved", "reason": e.reason}, args.out)
        return 3
    _emit(sol.to_json(), args.out)
    return 0


def cmd_simulate(args) -> int:
    inst = read_instance(args.inp)
    try:
        res = simulate(inst, _system(args, inst), _budget(args))
    except Unsolved as e:
        _emit({"status": "unsolved", "reason": e.reason}, args.out)
        return 3
    if args.trace:
        Path(args.trace).write_text(json.dumps(res.trace.to_json(), indent=2) + "\n", encoding="utf-8")
    _emit({"objective_ticks": res.objective, "replans": len(res.trace.replans())}, args.out)
    return 0


def cmd_audit(args) -> int:
    inst = read_instance(args.inp)
    try:
        rep = audit_instance(inst, _system(args, inst), _budget(args))
    except Unsolved as e:
        _emit({"status": "unsolved", "reason": e.reason}, args.out)
        return 3
    _emit(rep.to_json(), args.out)
    return 0 if rep.ok else 4


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    records, text, _ = run_experiment(cfg, args.out, args.report)
    if not (args.out or cfg.out):
        sys.stdout.write(text)
    bad = sum(1 for r in records if r.audit_failures)
    return 4 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="picklab", description="Order batching, routing and Reopt experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample one instance of a named setting")
    g.add_argument("--setting", default="Base", choices=sorted(SETTINGS))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--system", default="pcart", choices=SYSTEMS)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("generate-adversarial", help="build a worst-case family member")
    a.add_argument("--family", required=True, choices=ADVERSARIAL_FAMILIES)
    a.add_argument("--k", type=int)
    a.add_argument("--W", type=int)
    a.add_argument("--L", type=int)
    a.add_argument("--eps", type=int)
    a.add_argument("--delta", type=int)
    a.add_argument("--t", type=int, help="dispatch time (early-dispatch)")
    a.add_argument("--scale", type=int)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_generate_adversarial)

    for name, func, text in (("solve", cmd_solve, "exact complete-information optimum"),
                             ("simulate", cmd_simulate, "run a Reopt policy"),
                             ("audit", cmd_audit, "check analytical bounds")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--in", dest="inp", required=True)
        s.add_argument("--system", choices=SYSTEMS)
        s.add_argument("--budget-secs", type=float, default=300.0)
        s.add_argument("--out", help="write JSON here instead of stdout")
        if name == "simulate":
            s.add_argument("--trace", help="write the event trace JSON here")
        s.set_defaults(func=func)

    e = sub.add_parser("experiment", help="run a configured grid")
    e.add_argument("--config", required=True)
    e.add_argument("--out")
    e.add_argument("--report")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InstanceError as e:
        print(f"error: invalid instance at {e.path}: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
