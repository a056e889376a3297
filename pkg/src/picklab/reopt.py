"""Event-driven simulation of the Reopt policies.

Interventionist policies (Pcart, Robot) replan at every arrival time. Orders
that already have a picked item stay in the current batch; every other
arrived, unfinished order may be (re)assigned. The non-interventionist
policy (Pcart-N) replans only when the picker is at the depot and then
executes one batch without interruption.

Conventions at an interruption time ``t``:

* an item whose pick started at or before ``t`` counts as picked, and the
  picker is free again when that pick completes;
* a pushcart batch completes when the cart reaches the depot, a robot batch
  with its last pick;
* with nothing left to do, pushcarts wait at the depot and the robot waits
  where it is;
* orders arriving at the same time are handled by one replan.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from picklab.ciopt import Planner, PlanOrder, Solution, SolverBudget
from picklab.geometry import Layout
from picklab.instance import Instance, PolicyKind
from picklab.routing import Item, Position, TimedRoute, Unsolved


@dataclass
class SimulationTrace:
    events: list[dict[str, Any]] = field(default_factory=list)
    queue: list[int] = field(default_factory=list)      # |Q| after each arrival event
    objective: int | None = None

    def log(self, t: int, kind: str, **data: Any) -> None:
        self.events.append({"t": int(t), "event": kind, **data})

    def finalize(self) -> None:
        self.events.sort(key=lambda e: e["t"])

    def replans(self) -> list[dict[str, Any]]:
        return [e for e in self.events if e["event"] == "replan"]

    def to_json(self) -> dict[str, Any]:
        return {"objective_ticks": self.objective, "queue": self.queue, "events": self.events}


@dataclass
class SimulationResult:
    objective: int
    trace: SimulationTrace


@dataclass
class Snapshot:
    """Where an executing plan stands at a given time."""

    position: Position
    free_time: int
    picked: set                         # item keys picked so far in this plan
    done_routes: int                    # routes whose batch has completed
    active: int | None                  # index of the route in progress, if any
    finished: bool


def _walk(layout: Layout, travel: int, start: Position, target: int, elapsed: int) -> Position:
    """Position after walking ``elapsed`` ticks from ``start`` towards ``target``."""
    td = layout.dist
    if elapsed <= 0:
        return start.normalized()
    if not start.is_node:
        a, b = start.to_u, start.to_v
        if a + td[start.u, target] * travel <= b + td[start.v, target] * travel:
            head, gap, other, ogap = start.u, a, start.v, b
        else:
            head, gap, other, ogap = start.v, b, start.u, a
        if elapsed < gap:
            return Position(head, other, gap - elapsed, ogap + elapsed)
        elapsed -= gap
        node = head
    else:
        node = start.node
    path = layout.node_path(node, target)
    for p, q in zip(path, path[1:]):
        wt = layout.edge_weight(p, q) * travel
        if elapsed < wt:
            return Position(p, q, elapsed, wt - elapsed).normalized()
        elapsed -= wt
    return Position.at(target)


def position_at(instance: Instance, routes: list[TimedRoute], t: int, pushcart: bool) -> Snapshot:
    """Locate the picker executing ``routes`` at time ``t``.

    Routes are executed back to back: each starts at its ``start_time`` from
    its ``start`` position, visits in order, and (pushcart) walks back to
    ``end``. Beyond the plan horizon the final state is returned.
    """
    layout, travel = instance.layout, instance.travel
    picked: set = set()
    if not routes:
        raise ValueError("empty plan")
    for k, r in enumerate(routes):
        pos, depart = r.start, r.start_time
        for v in r.visits:
            pick_start = v.completion - instance.pick_time
            if t < v.arrival:
                p = _walk(layout, travel, pos, v.item.node, t - depart) if t > depart else pos.normalized()
                return Snapshot(p, t, picked, k, k, False)
            if t < pick_start:          # waiting at the item for its release
                return Snapshot(Position.at(v.item.node), t, picked, k, k, False)
            picked.add(v.item.key)
            pos, depart = Position.at(v.item.node), v.completion
            if t < v.completion:
                last = v is r.visits[-1] and not pushcart
                return Snapshot(pos, v.completion, picked, k + 1 if last else k,
                                None if last else k, False)
        if pushcart and r.end is not None:
            if t < r.finish:
                return Snapshot(_walk(layout, travel, pos, r.end, t - depart), t, picked, k, k, False)
            pos = Position.at(r.end)
        if k == len(routes) - 1:
            return Snapshot(pos, max(t, r.finish), picked, k + 1, None, True)
    raise AssertionError("unreachable")


class _Sim:
    def __init__(self, instance: Instance, kind: PolicyKind, budget: SolverBudget | None):
        self.I = instance
        self.kind = kind
        self.budget = budget or SolverBudget()
        self.trace = SimulationTrace()
        self.completed: set[int] = set()
        self.picked: set = set()
        self.arrived: list[int] = []

    def _plan_orders(self, forced: dict[int, list[Item]], pending: list[int]) -> list[PlanOrder]:
        out = [PlanOrder(j, tuple(items), 0, True) for j, items in sorted(forced.items())]
        for j in pending:
            items = tuple(Item((j, s), int(self.I.layout.slot_node[s]), 0, j)
                          for s in self.I.orders[j].slots)
            out.append(PlanOrder(j, items, 0))
        return out

    def _solve(self, forced: dict[int, list[Item]], pending: list[int], pos: Position, t: int) -> Solution:
        planner = Planner(self.I.tdist, self.I.layout.depot, self.I.capacity, self.I.pick_time,
                          self.kind.pushcart, self._plan_orders(forced, pending), pos, t, self.budget)
        return planner.solve()

    def _arrive(self, t: int, upto: int) -> int:
        """Register every order with arrival <= t starting at index ``upto``."""
        I = self.I
        while upto < I.n and I.arrivals[upto] <= t:
            at = I.arrivals[upto]
            new = []
            while upto < I.n and I.arrivals[upto] == at:
                new.append(upto)
                upto += 1
            self.arrived.extend(new)
            self.trace.log(at, "arrival", orders=new)
            open_ = sum(1 for j in self.arrived if j not in self.completed)
            self.trace.queue.extend([open_] * len(new))
        return upto

    def _log_route(self, r: TimedRoute, upto_t: int | None = None) -> None:
        for v in r.visits:
            start = v.completion - self.I.pick_time
            if upto_t is not None and start > upto_t:
                break
            if v.item.key not in self.picked:
                self.picked.add(v.item.key)
                self.trace.log(start, "pick", order=v.item.order, node=v.item.node,
                               completion=v.completion)

    # -- Pcart-N --------------------------------------------------------------

    def run_noninterventionist(self) -> int:
        I = self.I
        t, nxt = 0, 0
        depot = Position.at(I.layout.depot)
        while len(self.completed) < I.n:
            open_ = [j for j in self.arrived if j not in self.completed]
            if not open_:
                ta = I.arrivals[nxt]
                if ta > t:
                    self.trace.log(t, "idle-start", position=depot.to_json())
                    self.trace.log(ta, "idle-end", position=depot.to_json())
                t = max(t, ta)
                nxt = self._arrive(t, nxt)
                continue
            sol = self._solve({}, sorted(open_), depot, t)
            self.trace.log(t, "replan", position=depot.to_json(), plan=[list(b) for b in sol.batches],
                           planned_objective=sol.objective)
            first = sol.routes[0]
            self._log_route(first)
            t = first.finish
            nxt = self._arrive(t - 1, nxt)
            for j in sol.batches[0]:
                self.completed.add(j)
            self.trace.log(t, "batch-complete", orders=list(sol.batches[0]))
            nxt = self._arrive(t, nxt)
        return t

    # -- Pcart / Robot ----------------------------------------------------------

    def run_interventionist(self) -> int:
        I = self.I
        pushcart = self.kind.pushcart
        routes: list[TimedRoute] = []
        batches: list[tuple[int, ...]] = []
        done = 0
        pos = Position.at(I.layout.depot)
        nxt = 0
        while nxt < I.n:
            ta = I.arrivals[nxt]
            forced: dict[int, list[Item]] = {}
            if routes:
                snap = position_at(I, routes, ta, pushcart)
                self._record_progress(routes, batches, done, snap, ta)
                pos, t_free = snap.position, snap.free_time
                if snap.finished and ta > routes[-1].finish:
                    self.trace.log(routes[-1].finish, "idle-start", position=pos.to_json())
                    self.trace.log(ta, "idle-end", position=pos.to_json())
                if snap.active is not None:
                    r = routes[snap.active]
                    for j in batches[snap.active]:
                        if any((j, s) in self.picked for s in I.orders[j].slots):
                            mine = [v.item for v in r.visits if v.item.order == j]
                            forced[j] = [it for it in mine if it.key not in self.picked]
            else:
                if ta > 0:
                    self.trace.log(0, "idle-start", position=pos.to_json())
                    self.trace.log(ta, "idle-end", position=pos.to_json())
                t_free = ta
            nxt = self._arrive(ta, nxt)
            pending = sorted(j for j in self.arrived if j not in self.completed and j not in forced)
            sol = self._solve(forced, pending, pos, t_free)
            self.trace.log(ta, "replan", position=pos.to_json(), free_time=t_free,
                           commenced=sorted(forced), plan=[list(b) for b in sol.batches],
                           planned_objective=sol.objective)
            routes, batches, done = sol.routes, sol.batches, 0
        # no further arrivals: the last plan runs to completion
        end = routes[-1].finish
        self._record_progress(routes, batches, done, position_at(I, routes, end, pushcart), end)
        return end

    def _record_progress(self, routes, batches, done_before, snap: Snapshot, t: int) -> None:
        for r in routes:
            self._log_route(r, t)
        for k in range(done_before, snap.done_routes):
            r = routes[k]
            when = r.finish if self.kind.pushcart or not r.visits else r.visits[-1].completion
            for j in batches[k]:
                self.completed.add(j)
            self.trace.log(when, "batch-complete", orders=list(batches[k]))


def simulate(instance: Instance, kind: "PolicyKind | str", budget: SolverBudget | None = None) -> SimulationResult:
    """Run one Reopt policy over ``instance``; raises :class:`Unsolved` if a replan is out of budget."""
    kind = PolicyKind.parse(kind)
    sim = _Sim(instance, kind, budget)
    if instance.n == 0:
        obj = 0
    elif kind is PolicyKind.PCARTN:
        obj = sim.run_noninterventionist()
    else:
        obj = sim.run_interventionist()
    sim.trace.objective = int(obj)
    sim.trace.finalize()
    return SimulationResult(int(obj), sim.trace)


def replan(instance: Instance, kind: "PolicyKind | str", position: Position, clock: int,
           commenced: dict[int, list[int]], pending: list[int],
           budget: SolverBudget | None = None) -> Solution:
    """Exact continuation from a picker state.

    ``commenced`` maps order ids to their still unpicked slots; those orders
    must finish in the first batch, which starts at ``position`` at ``clock``.
    """
    kind = PolicyKind.parse(kind)
    sim = _Sim(instance, kind, budget)
    forced = {j: [Item((j, s), int(instance.layout.slot_node[s]), 0, j) for s in slots]
              for j, slots in commenced.items()}
    return sim._solve(forced, sorted(pending), position, clock)


def queue_probe(instance: Instance, kind: "PolicyKind | str", budget: SolverBudget | None = None,
                max_open: int = 12) -> tuple[list[float], bool]:
    """Normalized queue lengths ``|Q_j| / j`` at each arrival.

    The run stops early, returning ``complete=False``, if a replan is out of
    budget or more than ``max_open`` orders are open at once.
    """
    kind = PolicyKind.parse(kind)
    partial: list[float] = []
    lo, hi = 1, instance.n
    try:
        res = simulate(instance, kind, budget) if _max_open(instance, kind, budget) <= max_open else None
    except Unsolved:
        res = None
    if res is not None:
        return [q / (j + 1) for j, q in enumerate(res.trace.queue)], True
    # find the longest prefix that stays within budget
    while lo < hi:
        mid = (lo + hi + 1) // 2
        try:
            sub = instance.subset(range(mid))
            if _max_open(sub, kind, budget) > max_open:
                raise Unsolved("memory", "queue too long")
            simulate(sub, kind, budget)
            lo = mid
        except Unsolved:
            hi = mid - 1
    res = simulate(instance.subset(range(lo)), kind, budget)
    partial = [q / (j + 1) for j, q in enumerate(res.trace.queue)]
    return partial, False


def _max_open(instance: Instance, kind: PolicyKind, budget) -> int:
    """Cheap upper estimate of the open-order count: arrivals within one traversal of each other."""
    arr = np.asarray(instance.arrivals)
    horizon = instance.u + 2 * instance.tdist.max() + instance.pick_time * 8
    return int(max(np.searchsorted(arr, a + horizon * 2, side="right") - i for i, a in enumerate(arr)))


__all__ = ["SimulationResult", "SimulationTrace", "Snapshot", "position_at", "queue_probe",
           "replan", "simulate"]
