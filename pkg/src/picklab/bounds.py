"""Analytical bound checks on (instance, Reopt, CIOPT) triples, in exact arithmetic."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from picklab.ciopt import SolverBudget, Solution, lower_bounds, solve_ciopt
from picklab.instance import Instance, PolicyKind
from picklab.reopt import SimulationResult, simulate
from picklab.routing import Unsolved

CHECKS = ("lemma2_ub", "lemma3_lb", "lemma4_release", "prop4_asymptotic", "prop6_strict")


def strict_threshold(kind: "PolicyKind | str") -> Fraction:
    return Fraction(5, 2) if PolicyKind.parse(kind) is PolicyKind.PCARTN else Fraction(4)


@dataclass
class BoundReport:
    instance_id: str
    kind: PolicyKind
    reopt: int
    ciopt: int
    ciopt_r0: int
    u: int
    r_n: int
    lb_makespan: int
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ratio(self) -> Fraction:
        if self.ciopt == 0:
            return Fraction(1) if self.reopt == 0 else Fraction(self.reopt)
        return Fraction(self.reopt, self.ciopt)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_json(self) -> dict:
        r = self.ratio
        return {
            "instance_id": self.instance_id, "kind": self.kind.value,
            "reopt_ticks": self.reopt, "ciopt_ticks": self.ciopt, "ciopt_r0_ticks": self.ciopt_r0,
            "u_ticks": self.u, "r_n": self.r_n, "lb_makespan": self.lb_makespan,
            "checks": dict(self.checks),
            "ratio": {"num": r.numerator, "den": r.denominator, "decimal": f"{float(r):.6f}"},
        }


def _value(x, what: str) -> int:
    if isinstance(x, Unsolved) or x is None:
        raise ValueError(f"{what} is unsolved; the audit needs exact values")
    if isinstance(x, SimulationResult):
        return int(x.objective)
    if isinstance(x, Solution):
        return int(x.objective)
    if isinstance(x, bool) or not isinstance(x, int):
        raise TypeError(f"{what} must be an int, Solution or SimulationResult")
    return x


def _instance_id(instance: Instance) -> str:
    p = instance.provenance
    if p.get("generator") == "setting":
        return f"{p['setting']}/{p['system']}/n{p['n']}/s{p['seed']}"
    return str(p.get("family", p.get("generator", "instance")))


def audit(instance: Instance, reopt, ciopt, ciopt_r0,
          kind: "PolicyKind | str | None" = None) -> BoundReport:
    """Evaluate every bound on one triple.

    ``reopt``, ``ciopt`` and ``ciopt_r0`` (the optimum with all arrivals at 0)
    may be ints, solver/simulator results, but never ``Unsolved``. The bounds
    are stated for zero pick times, so the caller should pass such a variant.
    ``kind`` defaults to the instance's system.
    """
    kind = kind if kind is not None else instance.system
    if kind is None:
        raise ValueError("no system given and the instance names none")
    kind = PolicyKind.parse(kind)
    reo = _value(reopt, "reopt")
    opt = _value(ciopt, "ciopt")
    opt0 = _value(ciopt_r0, "ciopt_r0")
    lbs = lower_bounds(instance, kind)
    r_n, lbm, u = lbs["lb_release"], lbs["lb_makespan"], instance.u
    rep = BoundReport(_instance_id(instance), kind, reo, opt, opt0, u, r_n, lbm)
    rep.checks = {
        "lemma2_ub": reo <= r_n + opt0 + u,
        "lemma3_lb": opt0 >= lbm and opt >= opt0,
        "lemma4_release": opt >= r_n,
        "prop4_asymptotic": reo <= 2 * opt + u,
        "prop6_strict": opt > 0 and Fraction(reo, opt) <= strict_threshold(kind) or reo == opt == 0,
    }
    return rep


def audit_instance(instance: Instance, kind: "PolicyKind | str",
                   budget: SolverBudget | None = None) -> BoundReport:
    """Solve, simulate and audit the zero-pick-time variant of ``instance``."""
    kind = PolicyKind.parse(kind)
    inst = instance.without_pick_time()
    reo = simulate(inst, kind, budget)
    opt = solve_ciopt(inst, kind, budget)
    opt0 = solve_ciopt(inst.released(), kind, budget)
    return audit(inst, reo, opt, opt0, kind)


def single_item_asymptotics(instances: Sequence[Instance],
                            budget: SolverBudget | None = None) -> list[dict]:
    """Robot ratios on single-item instances, with the ``(r_n + u) / r_n`` consistency bound."""
    out = []
    for inst in instances:
        if any(len(o.slots) != 1 for o in inst.orders):
            raise ValueError("every order must hold exactly one item")
        reo = simulate(inst, PolicyKind.ROBOT, budget).objective
        opt = solve_ciopt(inst, PolicyKind.ROBOT, budget).objective
        ratio = Fraction(reo, opt) if opt else Fraction(1)
        r_n = inst.arrivals[-1] if inst.n else 0
        bound = Fraction(r_n + inst.u, r_n) if r_n else None
        out.append({"n": inst.n, "reopt": reo, "ciopt": opt, "ratio": ratio, "bound": bound,
                    "within": bound is None or ratio <= bound})
    return out


__all__ = ["BoundReport", "CHECKS", "audit", "audit_instance", "single_item_asymptotics",
           "strict_threshold"]
