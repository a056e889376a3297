"""Warehouse movement graphs and their exact integer distance metric.

A :class:`Layout` is an undirected weighted graph whose nodes are aisle and
cross-aisle intersections, item access points and the depot. Edge weights
are integer length-ticks; ``layout.dist`` holds all-pairs shortest paths.

Three constructors cover the use cases:

* :func:`build_layout` - the parametric rectangular warehouse
  (aisles, cross-aisles, shelves and slots).
* :func:`aisle_layout` - explicit aisle/cross-aisle coordinates with
  free-form access points, used by the adversarial instance families.
* :func:`grid_layout` - a unit-cell grid with named cells, used by the
  illustrative fixture.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import minimum_spanning_tree, shortest_path


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class WarehouseSpec:
    """Dimensions of a rectangular multi-block warehouse, in meters."""

    aisles: int = 10
    cross_aisles: int = 3
    shelves_per_aisle: int = 20
    slots_per_shelf: int = 3
    aisle_width: Fraction | int = 3
    cross_aisle_width: Fraction | int = 3
    shelf_width: Fraction | int = 3
    shelf_depth: Fraction | int = 1
    ticks_per_meter: int = 1

    @property
    def length(self) -> Fraction:
        # one shelf row on each outer border, two between neighbouring aisles
        return self.aisles * Fraction(self.aisle_width) + 2 * self.aisles * Fraction(self.shelf_depth)

    @property
    def width(self) -> Fraction:
        return (self.shelves_per_aisle * Fraction(self.shelf_width)
                + self.cross_aisles * Fraction(self.cross_aisle_width))

    @property
    def slot_count(self) -> int:
        return self.aisles * 2 * self.shelves_per_aisle * self.slots_per_shelf

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            out[name] = str(v) if isinstance(v, Fraction) and v.denominator != 1 else int(v)
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "WarehouseSpec":
        kw: dict[str, Any] = {}
        for name in cls.__dataclass_fields__:
            if name in d:
                v = d[name]
                kw[name] = Fraction(v) if isinstance(v, str) else v
        return cls(**kw)


@dataclass(eq=False)
class Layout:
    kind: str
    coords: np.ndarray             # (N, 2) int64, length ticks
    edges: list[tuple[int, int, int]]
    depot: int
    slot_node: np.ndarray          # slot index -> node id
    params: dict[str, Any]
    aisle_x: tuple[int, ...] = ()
    cross_y: tuple[int, ...] = ()
    names: dict[str, int] = field(default_factory=dict)
    dist: np.ndarray = field(init=False, repr=False)
    _adj: list[list[tuple[int, int]]] = field(init=False, repr=False)
    _bound: int | None = None

    def __post_init__(self) -> None:
        n = len(self.coords)
        if not 0 <= self.depot < n:
            raise LayoutError("depot is not a node of the layout")
        rows = [u for u, v, _ in self.edges] + [v for u, v, _ in self.edges]
        cols = [v for u, v, _ in self.edges] + [u for u, v, _ in self.edges]
        w = [w for *_, w in self.edges] * 2
        graph = coo_matrix((np.asarray(w, dtype=float), (rows, cols)), shape=(n, n)).tocsr()
        d = shortest_path(graph, method="D", directed=False)
        if not np.isfinite(d).all():
            raise LayoutError("movement graph is not connected")
        self.dist = np.rint(d).astype(np.int64)
        self.dist.setflags(write=False)
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for u, v, wt in self.edges:
            adj[u].append((v, wt))
            adj[v].append((u, wt))
        for lst in adj:
            lst.sort()
        self._adj = adj
        self.slot_node = np.asarray(self.slot_node, dtype=np.int64)
        self.slot_node.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_slots(self) -> int:
        return len(self.slot_node)

    def neighbors(self, u: int) -> list[tuple[int, int]]:
        return self._adj[u]

    def distance(self, u: int, v: int) -> int:
        return int(self.dist[u, v])

    def node(self, name: str) -> int:
        return self.names[name]

    def node_path(self, u: int, v: int) -> list[int]:
        """A shortest node path from ``u`` to ``v``.

        Among equally short continuations the neighbour with the largest node
        id is taken, so paths are deterministic.
        """
        path = [u]
        d = self.dist
        while u != v:
            nxt = -1
            for w, wt in self._adj[u]:
                if wt + d[w, v] == d[u, v] and w > nxt:
                    nxt = w
            path.append(nxt)
            u = nxt
        return path

    def edge_weight(self, u: int, v: int) -> int:
        for w, wt in self._adj[u]:
            if w == v:
                return wt
        raise LayoutError(f"no edge between {u} and {v}")

    # -- geometry summaries -------------------------------------------------

    @property
    def length(self) -> int:
        """Horizontal extent L in length ticks."""
        if self.kind == "warehouse":
            return _ticks(WarehouseSpec.from_dict(self.params["spec"]).length,
                          self.params["spec"]["ticks_per_meter"])
        if self.aisle_x:
            return max(self.aisle_x) - min(self.aisle_x)
        return int(np.ptp(self.coords[:, 0]))

    @property
    def width(self) -> int:
        """Vertical extent W in length ticks."""
        if self.kind == "warehouse":
            return _ticks(WarehouseSpec.from_dict(self.params["spec"]).width,
                          self.params["spec"]["ticks_per_meter"])
        if self.cross_y:
            return max(self.cross_y) - min(self.cross_y)
        return int(np.ptp(self.coords[:, 1]))

    def traversal_bound(self) -> int:
        """Upper bound on visiting every access point between any two positions.

        Aisle layouts use ``(a + 1) * W + 2 * L``. Grid layouts, which have no
        aisle structure, fall back to twice a spanning tree plus the diameter.
        """
        if self._bound is not None:
            return self._bound
        if self.aisle_x:
            self._bound = (len(self.aisle_x) + 1) * self.width + 2 * self.length
        else:
            n = self.n_nodes
            rows = [u for u, _, _ in self.edges]
            cols = [v for _, v, _ in self.edges]
            w = [float(x) for *_, x in self.edges]
            mst = minimum_spanning_tree(coo_matrix((w, (rows, cols)), shape=(n, n)))
            self._bound = int(round(2 * mst.sum())) + int(self.dist.max())
        return self._bound

    def to_dict(self) -> dict[str, Any]:
        return dict(self.params)


def _ticks(value: Fraction, scale: int) -> int:
    v = Fraction(value) * scale
    if v.denominator != 1:
        raise LayoutError(f"{value} m is not an integer number of ticks at scale {scale}")
    return int(v)


def aisle_layout(
    aisle_x: list[int],
    cross_y: list[int],
    access: list[tuple[int, int]],
    depot: tuple[int, int],
    *,
    params: dict[str, Any] | None = None,
    kind: str = "aisles",
) -> Layout:
    """Build a layout from aisle x-coordinates and cross-aisle y-coordinates.

    ``access`` lists one ``(aisle index, y)`` access point per slot; slots may
    share a point. ``depot`` is an ``(x, y)`` point on an aisle or a
    cross-aisle line.
    """
    aisle_x = sorted(int(x) for x in aisle_x)
    cross_y = sorted(int(y) for y in cross_y)
    if len(aisle_x) < 1:
        raise LayoutError("need at least one aisle")
    if len(cross_y) < 2:
        raise LayoutError("need at least two cross-aisles")
    if len(set(aisle_x)) != len(aisle_x) or len(set(cross_y)) != len(cross_y):
        raise LayoutError("aisle and cross-aisle coordinates must be distinct")
    lo, hi = cross_y[0], cross_y[-1]
    if hi == lo:
        raise LayoutError("zero-size warehouse")

    points: set[tuple[int, int]] = set()
    for x in aisle_x:
        for y in cross_y:
            points.add((x, y))
    slot_pts = []
    for a, y in access:
        if not 0 <= a < len(aisle_x):
            raise LayoutError(f"access point aisle {a} out of range")
        if not lo < y < hi or y in cross_y:
            raise LayoutError(f"access point ({a}, {y}) is not inside an aisle")
        slot_pts.append((aisle_x[a], int(y)))
    points.update(slot_pts)
    dx, dy = int(depot[0]), int(depot[1])
    on_aisle = dx in aisle_x and lo <= dy <= hi
    on_cross = dy in cross_y and aisle_x[0] <= dx <= aisle_x[-1]
    if not (on_aisle or on_cross):
        raise LayoutError("depot must lie on an aisle or a cross-aisle")
    points.add((dx, dy))

    # aisle points first, ordered by (aisle, offset); others after by (x, y)
    aisle_rank = {x: i for i, x in enumerate(aisle_x)}
    def key(p):
        return (0, aisle_rank[p[0]], p[1]) if p[0] in aisle_rank else (1, p[0], p[1])
    ordered = sorted(points, key=key)
    index = {p: i for i, p in enumerate(ordered)}

    edges = []
    for x in aisle_x:
        col = sorted(p for p in ordered if p[0] == x)
        edges += [(index[a], index[b], b[1] - a[1]) for a, b in zip(col, col[1:])]
    for y in cross_y:
        row = sorted(p for p in ordered if p[1] == y)
        edges += [(index[a], index[b], b[0] - a[0]) for a, b in zip(row, row[1:])]

    if params is None:
        params = {
            "kind": kind,
            "aisle_x": aisle_x,
            "cross_y": cross_y,
            "access": [[int(a), int(y)] for a, y in access],
            "depot": [dx, dy],
        }
    return Layout(
        kind=kind,
        coords=np.asarray(ordered, dtype=np.int64),
        edges=edges,
        depot=index[(dx, dy)],
        slot_node=np.asarray([index[p] for p in slot_pts], dtype=np.int64),
        params=params,
        aisle_x=tuple(aisle_x),
        cross_y=tuple(cross_y),
    )


def build_layout(spec: WarehouseSpec | None = None, **overrides: Any) -> Layout:
    """Rectangular warehouse with the depot at the lower-left corner.

    Slot ``s`` decomposes as ``((aisle * 2 + side) * shelves + shelf) * slots
    + k``. Both sides of an aisle share the access point at the slot's
    offset. Offsets are measured from the centre line of the bottom
    cross-aisle, horizontal positions from the centre of the first aisle.
    """
    if spec is None:
        spec = WarehouseSpec(**overrides)
    elif overrides:
        raise TypeError("pass either a spec or keyword overrides")
    a, b = spec.aisles, spec.cross_aisles
    if a < 1:
        raise LayoutError("need at least one aisle")
    if b < 2:
        raise LayoutError("need at least two cross-aisles")
    if spec.shelves_per_aisle < 1 or spec.slots_per_shelf < 1 or spec.ticks_per_meter < 1:
        raise LayoutError("zero-size warehouse")
    dims = [spec.aisle_width, spec.cross_aisle_width, spec.shelf_width, spec.shelf_depth]
    if any(Fraction(v) <= 0 for v in dims):
        raise LayoutError("zero-size warehouse")
    if spec.shelves_per_aisle % (b - 1):
        raise LayoutError("shelves per aisle must split evenly into blocks")
    scale = spec.ticks_per_meter
    aw, cw = Fraction(spec.aisle_width), Fraction(spec.cross_aisle_width)
    sw, sd = Fraction(spec.shelf_width), Fraction(spec.shelf_depth)
    per_block = spec.shelves_per_aisle // (b - 1)
    slot_len = sw / spec.slots_per_shelf

    aisle_x = [_ticks(i * (aw + 2 * sd), scale) for i in range(a)]
    block = per_block * sw
    cross_y = [_ticks(j * (block + cw), scale) for j in range(b)]
    access = []
    for aisle in range(a):
        for side in range(2):
            for shelf in range(spec.shelves_per_aisle):
                blk, pos = divmod(shelf, per_block)
                base = blk * (block + cw) + cw / 2 + pos * sw
                for k in range(spec.slots_per_shelf):
                    access.append((aisle, _ticks(base + (k + Fraction(1, 2)) * slot_len, scale)))
    params = {"kind": "warehouse", "spec": spec.to_dict()}
    return aisle_layout(aisle_x, cross_y, access, (aisle_x[0], cross_y[0]),
                        params=params, kind="warehouse")


def grid_layout(free: list[tuple[int, int]], names: dict[str, tuple[int, int]],
                slots: list[str], depot: str) -> Layout:
    """Unit-cell grid graph over ``free`` ``(col, row)`` cells.

    ``slots`` are cell names; each becomes one slot at that cell.
    """
    cells = sorted(set((int(c), int(r)) for c, r in free))
    index = {p: i for i, p in enumerate(cells)}
    for name, cell in names.items():
        if tuple(cell) not in index:
            raise LayoutError(f"named cell {name} is blocked")
    edges = []
    for (c, r), i in index.items():
        for nb in ((c + 1, r), (c, r + 1)):
            if nb in index:
                edges.append((i, index[nb], 1))
    named = {k: index[tuple(v)] for k, v in names.items()}
    for s in [*slots, depot]:
        if s not in named:
            raise LayoutError(f"unknown cell name {s}")
    params = {
        "kind": "grid",
        "free": [list(p) for p in cells],
        "names": {k: list(v) for k, v in names.items()},
        "slots": list(slots),
        "depot": depot,
    }
    return Layout(
        kind="grid",
        coords=np.asarray(cells, dtype=np.int64),
        edges=edges,
        depot=named[depot],
        slot_node=np.asarray([named[s] for s in slots], dtype=np.int64),
        params=params,
        names=named,
    )


def layout_from_dict(d: dict[str, Any]) -> Layout:
    kind = d.get("kind")
    if kind == "warehouse":
        return build_layout(WarehouseSpec.from_dict(d["spec"]))
    if kind == "aisles":
        return aisle_layout(d["aisle_x"], d["cross_y"], [tuple(p) for p in d["access"]],
                            tuple(d["depot"]))
    if kind == "grid":
        return grid_layout([tuple(p) for p in d["free"]],
                           {k: tuple(v) for k, v in d["names"].items()},
                           d["slots"], d["depot"])
    raise LayoutError(f"unknown layout kind {kind!r}")


# -- warehouse traversal --------------------------------------------------------

def _aisle_of(layout: Layout, node: int) -> tuple[int, int]:
    x, y = layout.coords[node]
    return int(x), int(y)


def s_shape_traversal(layout: Layout, start: int, end: int) -> tuple[list[int], int]:
    """Route from ``start`` through every access point to ``end``.

    Walks to a corner, serpentines through every aisle along the outer
    cross-aisles, then walks to ``end``. The first corner is chosen so that
    the entry and exit legs together stay within ``W + L``.
    Returns ``(nodes, length)``.
    """
    if not layout.aisle_x:
        raise LayoutError("S-shape traversal needs an aisle layout")
    xs, ys = layout.aisle_x, layout.cross_y
    a = len(xs)
    bottom, top = ys[0], ys[-1]
    left, right = xs[0], xs[-1]
    sx, sy = _aisle_of(layout, start)
    tx, ty = _aisle_of(layout, end)

    ws, wt = min(sy - bottom, top - sy), min(ty - bottom, top - ty)
    s_low, t_low = sy - bottom <= top - sy, ty - bottom <= top - ty
    # odd aisle counts end on the opposite cross-aisle
    flip = a % 2 == 1
    if ws <= wt:
        first_low = s_low
    else:
        first_low = (not t_low) if flip else t_low

    ls, lt = min(sx - left, right - sx), min(tx - left, right - tx)
    s_left, t_left = sx - left <= right - sx, tx - left <= right - tx
    if ls <= lt:
        first_left = s_left
    else:
        first_left = not t_left

    aisles = list(range(a)) if first_left else list(range(a - 1, -1, -1))
    by_coord = {(int(x), int(y)): i for i, (x, y) in enumerate(layout.coords)}
    serp = []
    low = first_low
    for ai in aisles:
        x = xs[ai]
        col = sorted((int(y), by_coord[(x, int(y))]) for (xx, y) in layout.coords if xx == x
                     and bottom <= y <= top)
        nodes = [n for _, n in col]
        serp.extend(nodes if low else nodes[::-1])
        low = not low
    route = layout.node_path(start, serp[0])[:-1] + serp + layout.node_path(serp[-1], end)[1:]
    length = int(sum(layout.dist[u, v] for u, v in zip(route, route[1:])))
    return route, length


def s_shape_length(layout: Layout, start: int, end: int) -> int:
    return s_shape_traversal(layout, start, end)[1]


def traversal_bound(layout: Layout) -> int:
    return layout.traversal_bound()
