"""Exact intra-batch routing with release times, and order makespans."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from picklab.kernels import INF, hk_table

DEFAULT_ITEM_LIMIT = 18


class Unsolved(RuntimeError):
    """Raised instead of returning a value when an exact answer is out of budget.

    ``reason`` is one of ``"time"``, ``"memory"`` or ``"batch-too-large"``.
    """

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass(frozen=True)
class Position:
    """A point on edge ``(u, v)``, ``to_u``/``to_v`` time ticks from either end.

    Nodes are represented as ``Position(u, u, 0, 0)``.
    """

    u: int
    v: int
    to_u: int = 0
    to_v: int = 0

    @classmethod
    def at(cls, node: int) -> "Position":
        return cls(int(node), int(node), 0, 0)

    @property
    def is_node(self) -> bool:
        return self.to_u == 0 or self.to_v == 0

    @property
    def node(self) -> int:
        if self.to_u == 0:
            return self.u
        if self.to_v == 0:
            return self.v
        raise ValueError("position is strictly inside an edge")

    def time_to(self, tdist: np.ndarray, w: int) -> int:
        if self.to_u == 0:
            return int(tdist[self.u, w])
        return int(min(self.to_u + tdist[self.u, w], self.to_v + tdist[self.v, w]))

    def times_to(self, tdist: np.ndarray, nodes: Sequence[int]) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=np.int64)
        if self.to_u == 0:
            return tdist[self.u, nodes].astype(np.int64)
        return np.minimum(self.to_u + tdist[self.u, nodes], self.to_v + tdist[self.v, nodes])

    def normalized(self) -> "Position":
        if self.to_u == 0:
            return Position.at(self.u)
        if self.to_v == 0:
            return Position.at(self.v)
        return self

    def to_json(self) -> dict:
        p = self.normalized()
        if p.is_node:
            return {"node": p.u}
        return {"edge": [p.u, p.v], "to_u": p.to_u, "to_v": p.to_v}


@dataclass(frozen=True)
class Item:
    key: object          # caller's identifier, e.g. (order, slot)
    node: int
    release: int = 0
    order: int = -1


@dataclass
class RoutingTask:
    tdist: np.ndarray
    items: Sequence[Item]
    start: Position
    start_time: int = 0
    end: int | None = None          # node to return to; None means free end
    pick_time: int = 0
    limit: int = DEFAULT_ITEM_LIMIT


@dataclass(frozen=True)
class Visit:
    item: Item
    arrival: int
    completion: int


@dataclass
class TimedRoute:
    start: Position
    start_time: int
    visits: list[Visit]
    end: int | None
    finish: int
    end_map: dict[int, int] = field(default_factory=dict)   # free end: last index -> finish

    @property
    def final_node(self) -> int | None:
        if self.end is not None:
            return self.end
        return self.visits[-1].item.node if self.visits else None


def _best(task: RoutingTask, idx: list[int], start: Position, t: int, last: int | None) -> int:
    """Optimal finish over items ``idx`` from ``start`` at ``t`` (``last`` fixes the final item)."""
    items = [task.items[i] for i in idx]
    m = len(items)
    nodes = np.array([it.node for it in items], dtype=np.int64)
    rel = np.array([it.release for it in items], dtype=np.int64)
    arr0 = t + start.times_to(task.tdist, nodes)
    row = hk_table(arr0, task.tdist[np.ix_(nodes, nodes)], rel, task.pick_time)[(1 << m) - 1]
    if last is not None:
        row = row[[idx.index(last)]]
        return int(row[0] + (task.tdist[nodes[idx.index(last)], task.end] if task.end is not None else 0))
    if task.end is not None:
        row = row + task.tdist[nodes, task.end]
    return int(row.min())


def route_value(task: RoutingTask) -> int:
    """Optimal finish time of ``task`` without building the route."""
    if not task.items:
        if task.end is None:
            return task.start_time
        return task.start_time + task.start.time_to(task.tdist, task.end)
    if len(task.items) > task.limit:
        raise Unsolved("batch-too-large", f"{len(task.items)} items exceed the limit of {task.limit}")
    return _best(task, list(range(len(task.items))), task.start, task.start_time, None)


def route_batch(task: RoutingTask, last: int | None = None) -> TimedRoute:
    """Earliest-finish visit order for ``task``.

    Among equally fast routes the lexicographically smallest sequence of item
    indices is returned, so results are reproducible. ``last`` forces the
    index of the final item (free-end tasks only).
    """
    m = len(task.items)
    if m == 0:
        fin = route_value(task)
        return TimedRoute(task.start, task.start_time, [], task.end, fin)
    if m > task.limit:
        raise Unsolved("batch-too-large", f"{m} items exceed the limit of {task.limit}")
    target = _best(task, list(range(m)), task.start, task.start_time, last)
    rest = list(range(m))
    pos, t = task.start, task.start_time
    visits = []
    while rest:
        for i in rest:
            if last is not None and i == last and len(rest) > 1:
                continue
            it = task.items[i]
            arrive = t + pos.time_to(task.tdist, it.node)
            done = max(arrive, it.release) + task.pick_time
            remaining = [k for k in rest if k != i]
            here = Position.at(it.node)
            if remaining:
                fin = _best(task, remaining, here, done, last)
            else:
                fin = done + (int(task.tdist[it.node, task.end]) if task.end is not None else 0)
            if fin == target:
                break
        else:  # pragma: no cover - the optimum is always attained
            raise AssertionError("no optimal continuation found")
        visits.append(Visit(it, arrive, done))
        rest.remove(i)
        pos, t = here, done
    end_map = {}
    if task.end is None:
        nodes = np.array([it.node for it in task.items], dtype=np.int64)
        rel = np.array([it.release for it in task.items], dtype=np.int64)
        arr0 = task.start_time + task.start.times_to(task.tdist, nodes)
        row = hk_table(arr0, task.tdist[np.ix_(nodes, nodes)], rel, task.pick_time)[(1 << m) - 1]
        end_map = {i: int(v) for i, v in enumerate(row)}
    return TimedRoute(task.start, task.start_time, visits, task.end, target, end_map)


def brute_route(task: RoutingTask) -> int:
    """Exhaustive permutation minimum; an oracle for small tasks."""
    from itertools import permutations

    best = None
    for perm in permutations(range(len(task.items))):
        t = task.start_time
        pos = None
        for i in perm:
            it = task.items[i]
            t += task.start.time_to(task.tdist, it.node) if pos is None else int(task.tdist[pos, it.node])
            t = max(t, it.release) + task.pick_time
            pos = it.node
        if task.end is not None:
            t += task.start.time_to(task.tdist, task.end) if pos is None else int(task.tdist[pos, task.end])
        best = t if best is None else min(best, t)
    if best is None:
        best = task.start_time
    return best


def makespan(nodes: Sequence[int], dist: np.ndarray, depot: int, pushcart: bool,
             limit: int = DEFAULT_ITEM_LIMIT) -> int:
    """Shortest closed tour from ``depot`` (pushcart) or open path with free ends (robot)."""
    nodes = list(nodes)
    if not nodes:
        return 0
    if pushcart:
        task = RoutingTask(dist, [Item(i, n) for i, n in enumerate(nodes)], Position.at(depot),
                           end=depot, limit=limit)
        return route_batch(task).finish
    if len(nodes) > limit:
        raise Unsolved("batch-too-large", f"{len(nodes)} items exceed the limit of {limit}")
    idx = np.asarray(nodes, dtype=np.int64)
    sub = dist[np.ix_(idx, idx)]
    dp = hk_table(np.zeros(len(nodes), dtype=np.int64), sub, np.zeros(len(nodes), dtype=np.int64), 0)
    return int(dp[(1 << len(nodes)) - 1].min())


def order_makespan(instance, j: int, kind) -> int:
    """``M(o_j)`` in length ticks."""
    from picklab.instance import PolicyKind

    kind = PolicyKind.parse(kind)
    return makespan(instance.nodes(j), instance.layout.dist, instance.layout.depot, kind.pushcart)


__all__ = ["INF", "Item", "Position", "RoutingTask", "TimedRoute", "Unsolved", "Visit",
           "brute_route", "makespan", "order_makespan", "route_batch", "route_value"]
