"""Location routing with capacitated depots and one uncapacitated vehicle each.

A solution is a tuple with one route per depot; a route is a tuple of
0-based client indices and a depot is open iff its route is non-empty.
Capacity violations are allowed and priced by ``alpha`` per unit of excess
demand.

Neighborhoods (ids as used by the engine; ``r`` is a route length):

    1  reinsert a client inside its route                   r(r-1) per route
    2  move a client to any slot of another depot's route   (open or closed)
    3  swap two clients of one route                        r(r-1)/2
    4  swap two clients of two routes
    5  reverse a segment of one route (2-opt)               r(r-1)/2
    6  exchange the tails of two routes (2-opt*)
    7  relocate a sub-route (length 2..r-1) inside its route
    8  move a sub-route (length 2..r-1) into another route
    9  as 7, sub-route reversed
    10 as 8, sub-route reversed
    11 move an open depot's whole route to a closed depot

Travel matrix rows/columns 0..n-1 are clients, n..n+m-1 depots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ntsearch import _accel
from ntsearch.core import StepKind, StepResult
from ntsearch.problem import ProblemAdapter
from ntsearch.rng import Rng

K = 11
INTRA = (1, 3, 5, 7, 9)
ORDERED_PAIRS = (2, 8, 10)
UNORDERED_PAIRS = (4, 6)

#: union groups and shake neighborhoods of the reference VNS
VNS_GROUPS = ((1, 2), (3, 4), (5, 6), (7, 8), (9, 10), (11,))
VNS_SHAKE = (1, 2, 11)


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class LrpInstance:
    demand: tuple[float, ...]
    capacity: tuple[float, ...]
    opening_cost: tuple[float, ...]
    travel: tuple[tuple[float, ...], ...]
    alpha: float | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "demand", tuple(float(v) for v in self.demand))
        object.__setattr__(self, "capacity", tuple(float(v) for v in self.capacity))
        object.__setattr__(self, "opening_cost", tuple(float(v) for v in self.opening_cost))
        object.__setattr__(self, "travel", tuple(tuple(float(v) for v in row) for row in self.travel))
        n, m = len(self.demand), len(self.capacity)
        if m < 1:
            raise ValueError("at least one depot is required")
        if len(self.opening_cost) != m:
            raise ValueError("capacity and opening_cost must have one entry per depot")
        size = n + m
        if len(self.travel) != size or any(len(row) != size for row in self.travel):
            raise ValueError(f"travel matrix must be {size}x{size}")
        for a in range(size):
            if self.travel[a][a] != 0.0:
                raise ValueError(f"travel matrix diagonal must be zero (entry {a})")
            for b in range(a + 1, size):
                if self.travel[a][b] != self.travel[b][a]:
                    raise ValueError(f"travel matrix is not symmetric at ({a}, {b})")
        values = self.demand + self.capacity + self.opening_cost + tuple(v for r in self.travel for v in r)
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise ValueError("demands, capacities, costs and travel must be finite and non-negative")
        if self.alpha is None:
            top = max((v for row in self.travel for v in row), default=0.0)
            object.__setattr__(self, "alpha", 10.0 * top if top > 0 else 1.0)
        object.__setattr__(self, "alpha", float(self.alpha))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def n(self) -> int:
        return len(self.demand)

    @property
    def m(self) -> int:
        return len(self.capacity)

    @cached_property
    def arrays(self):
        f = np.float64
        return (np.ascontiguousarray(self.demand, dtype=f), np.ascontiguousarray(self.capacity, dtype=f),
                np.ascontiguousarray(self.opening_cost, dtype=f), np.ascontiguousarray(self.travel, dtype=f))


# -- evaluation -------------------------------------------------------------

def check_solution(inst: LrpInstance, routes) -> None:
    if len(routes) != inst.m:
        raise ValueError(f"expected {inst.m} routes, got {len(routes)}")
    served = sorted(c for r in routes for c in r)
    if served != list(range(inst.n)):
        raise ValueError("every client must appear in exactly one route exactly once")


def make_solution(inst: LrpInstance, routes) -> tuple[tuple[int, ...], ...]:
    sol = tuple(tuple(int(c) for c in r) for r in routes)
    check_solution(inst, sol)
    return sol


def routing_and_opening_cost(inst: LrpInstance, routes) -> float:
    n, T, opening = inst.n, inst.travel, inst.opening_cost
    cost = 0.0
    for j, route in enumerate(routes):
        if route:
            cost += opening[j]
            prev = n + j
            for c in route:
                cost += T[prev][c]
                prev = c
            cost += T[prev][n + j]
    return cost


def penalty(inst: LrpInstance, routes) -> float:
    demand, cap, alpha = inst.demand, inst.capacity, inst.alpha
    pen = 0.0
    for j, route in enumerate(routes):
        q = 0.0
        for c in route:
            q += demand[c]
        if q > cap[j]:
            pen += alpha * (q - cap[j])
    return pen


def evaluate(inst: LrpInstance, routes) -> float:
    return routing_and_opening_cost(inst, routes) + penalty(inst, routes)


def is_feasible(inst: LrpInstance, routes) -> bool:
    return penalty(inst, routes) == 0.0


def open_depots(routes) -> list[int]:
    return [j for j, r in enumerate(routes) if r]


def random_solution(inst: LrpInstance, rng: Rng):
    routes = [[] for _ in range(inst.m)]
    for c in range(inst.n):
        routes[rng.randbelow(inst.m)].append(c)
    for r in routes:
        rng.shuffle(r)
    return tuple(tuple(r) for r in routes)


# -- neighborhoods ------------------------------------------------------------

def _bone_intra(r: int) -> int:
    return sum((r - L + 1) * (r - L) for L in range(2, r))


def _bone_starts(r: int) -> int:
    return sum(r - L + 1 for L in range(2, r))


def _pair(q: int, r: int) -> tuple[int, int]:
    a, row = 0, r - 1
    while q >= row:
        q -= row
        a += 1
        row -= 1
    return a, a + 1 + q


def _skip_index(q: int, width: int) -> tuple[int, int]:
    i, tt = divmod(q, width)
    return i, (tt + 1 if tt >= i else tt)


def move_blocks(routes, nid: int) -> list:
    lens = [len(r) for r in routes]
    m = len(routes)
    if nid in INTRA:
        if nid == 1:
            counts = [r * (r - 1) for r in lens]
        elif nid in (3, 5):
            counts = [r * (r - 1) // 2 for r in lens]
        else:
            counts = [_bone_intra(r) for r in lens]
        return [(c, j) for j, c in enumerate(counts)]
    if nid in ORDERED_PAIRS:
        out = []
        for j in range(m):
            per = lens[j] if nid == 2 else _bone_starts(lens[j])
            for j2 in range(m):
                if j2 != j:
                    out.append((per * (lens[j2] + 1), (j, j2)))
        return out
    if nid in UNORDERED_PAIRS:
        out = []
        for j in range(m):
            for j2 in range(j + 1, m):
                r, r2 = lens[j], lens[j2]
                out.append((r * r2 if nid == 4 else (r + 1) * (r2 + 1) - 1, (j, j2)))
        return out
    if nid == 11:
        opened = [j for j in range(m) if lens[j]]
        closed = [j for j in range(m) if not lens[j]]
        return [(len(opened) * len(closed), (opened, closed))]
    raise ValueError(f"unknown LRP neighborhood {nid}")


def _replace(routes, changes: dict):
    return tuple(changes.get(j, r) for j, r in enumerate(routes))


def block_move(routes, nid: int, key, q: int):
    if nid == 11:
        opened, closed = key
        src, dst = opened[q // len(closed)], closed[q % len(closed)]
        return _replace(routes, {src: (), dst: routes[src]})
    if nid in INTRA:
        j = key
        R = routes[j]
        r = len(R)
        if nid == 1:
            i, t = _skip_index(q, r - 1)
            rest = R[:i] + R[i + 1:]
            new = rest[:t] + (R[i],) + rest[t:]
        elif nid in (3, 5):
            a, b = _pair(q, r)
            if nid == 3:
                new = R[:a] + (R[b],) + R[a + 1:b] + (R[a],) + R[b + 1:]
            else:
                new = R[:a] + R[a:b + 1][::-1] + R[b + 1:]
        else:
            L = 2
            while q >= (cnt := (r - L + 1) * (r - L)):
                q -= cnt
                L += 1
            i, t = _skip_index(q, r - L)
            seg = R[i:i + L]
            if nid == 9:
                seg = seg[::-1]
            rest = R[:i] + R[i + L:]
            new = rest[:t] + seg + rest[t:]
        return _replace(routes, {j: new})

    j, j2 = key
    R, R2 = routes[j], routes[j2]
    r, r2 = len(R), len(R2)
    if nid == 2:
        i, t = divmod(q, r2 + 1)
        return _replace(routes, {j: R[:i] + R[i + 1:], j2: R2[:t] + (R[i],) + R2[t:]})
    if nid in (8, 10):
        L = 2
        while q >= (cnt := (r - L + 1) * (r2 + 1)):
            q -= cnt
            L += 1
        i, t = divmod(q, r2 + 1)
        seg = R[i:i + L]
        if nid == 10:
            seg = seg[::-1]
        return _replace(routes, {j: R[:i] + R[i + L:], j2: R2[:t] + seg + R2[t:]})
    if nid == 4:
        a, b = divmod(q, r2)
        return _replace(routes, {j: R[:a] + (R2[b],) + R[a + 1:], j2: R2[:b] + (R[a],) + R2[b + 1:]})
    a, b = divmod(q, r2 + 1)
    return _replace(routes, {j: R[:a] + R2[b:], j2: R2[:b] + R[a:]})


class LrpAdapter(ProblemAdapter):
    k = K
    name = "lrp"

    def __init__(self, inst: LrpInstance, accelerate: bool | None = None):
        self.inst = inst
        self.accelerated = _accel.use_kernels(accelerate)

    def evaluate(self, solution) -> float:
        return evaluate(self.inst, solution)

    def random_solution(self, rng: Rng):
        return random_solution(self.inst, rng)

    def move_blocks(self, solution, nid):
        return move_blocks(solution, nid)

    def block_move(self, solution, nid, key, index):
        return block_move(solution, nid, key, index)

    def step(self, solution, fitness, nids, kind, rng, budget) -> StepResult:
        if not self.accelerated:
            return super().step(solution, fitness, nids, kind, rng, budget)
        if isinstance(nids, int):
            nids = (nids,)
        demand, cap, opening, travel = self.inst.arrays
        return StepResult(*_accel.kernels.lrp_step(
            solution, demand, cap, opening, travel, self.inst.alpha, tuple(nids),
            _accel.STEP_CODES[StepKind(kind).value], rng.capsule, budget, fitness))


def neighbors(inst: LrpInstance, routes, nid: int, rng: Rng | None = None):
    return LrpAdapter(inst, accelerate=False).neighbors(routes, nid, rng)


# -- canonical text format ------------------------------------------------------

def _num(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: expected a number, got {tok!r}") from None


def parse_lrp(text: str, name: str = "") -> LrpInstance:
    """Parse the canonical LRP format.

    Header ``n m alpha rounding`` (alpha may be ``default``; rounding is
    ``none`` or ``nearest-integer``), then n demand lines, m lines
    ``capacity opening_cost``, then ``MATRIX`` with n+m rows or ``COORDS``
    with n+m ``x y`` lines.  Blank lines and ``#`` comments are ignored.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body.split()))
    if not lines:
        raise ParseError("line 1: empty LRP file")
    it = iter(lines)

    def take(expect: int | None = None):
        try:
            lineno, toks = next(it)
        except StopIteration:
            raise ParseError(f"line {lines[-1][0] + 1}: unexpected end of file") from None
        if expect is not None and len(toks) != expect:
            raise ParseError(f"line {lineno}: expected {expect} fields, got {len(toks)}")
        return lineno, toks

    lineno, head = take(4)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(f"line {lineno}: n and m must be integers") from None
    if n < 0 or m < 1:
        raise ParseError(f"line {lineno}: need n >= 0 and m >= 1")
    alpha = None if head[2].lower() == "default" else _num(head[2], lineno)
    rounding = head[3].lower()
    if rounding not in ("none", "nearest-integer"):
        raise ParseError(f"line {lineno}: rounding must be 'none' or 'nearest-integer'")

    demand = []
    for _ in range(n):
        ln, toks = take(1)
        demand.append(_num(toks[0], ln))
    capacity, opening = [], []
    for _ in range(m):
        ln, toks = take(2)
        capacity.append(_num(toks[0], ln))
        opening.append(_num(toks[1], ln))

    ln, toks = take(1)
    kind = toks[0].upper()
    size = n + m
    if kind == "MATRIX":
        travel = []
        for _ in range(size):
            ln, toks = take(size)
            travel.append([_num(t, ln) for t in toks])
    elif kind == "COORDS":
        pts = []
        for _ in range(size):
            ln, toks = take(2)
            pts.append((_num(toks[0], ln), _num(toks[1], ln)))
        travel = [[_distance(a, b, rounding) for b in pts] for a in pts]
    else:
        raise ParseError(f"line {ln}: expected MATRIX or COORDS, got {toks[0]!r}")
    extra = next(it, None)
    if extra is not None:
        raise ParseError(f"line {extra[0]}: unexpected trailing content")
    try:
        return LrpInstance(demand, capacity, opening, travel, alpha=alpha, name=name)
    except ValueError as exc:
        raise ParseError(f"line {ln}: {exc}") from None


def _distance(a, b, rounding: str) -> float:
    dist = math.hypot(a[0] - b[0], a[1] - b[1])
    if rounding == "nearest-integer":
        return float(math.floor(dist + 0.5))
    return dist


def format_lrp(inst: LrpInstance) -> str:
    out = [f"{inst.n} {inst.m} {inst.alpha!r} none"]
    out += [repr(v) for v in inst.demand]
    out += [f"{c!r} {o!r}" for c, o in zip(inst.capacity, inst.opening_cost)]
    out.append("MATRIX")
    out += [" ".join(repr(v) for v in row) for row in inst.travel]
    return "\n".join(out) + "\n"


def load_bounds(text: str) -> dict[str, float]:
    """Sidecar file of ``instance-id value`` lines (lower or best-known bounds)."""
    bounds = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        toks = body.split()
        if len(toks) != 2:
            raise ParseError(f"line {lineno}: expected 'instance-id value'")
        bounds[toks[0]] = _num(toks[1], lineno)
    return bounds


def random_instance(n: int, m: int, seed: int, *, grid: float = 100.0,
                    demand_range=(1, 20), capacity_factor: float = 2.0,
                    opening_range=(100, 300), rounding: str = "nearest-integer",
                    name: str = "") -> LrpInstance:
    """Uniform random Euclidean instance.

    Depot capacities are drawn so that the total capacity is about
    ``capacity_factor`` times the total demand.
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, grid, size=(n + m, 2))
    demand = rng.integers(demand_range[0], demand_range[1] + 1, size=n).astype(float)
    mean_cap = capacity_factor * demand.sum() / m
    capacity = np.round(rng.uniform(0.7, 1.3, size=m) * mean_cap)
    opening = rng.integers(opening_range[0], opening_range[1] + 1, size=m).astype(float)
    travel = [[_distance(a, b, rounding) for b in pts] for a in pts]
    return LrpInstance(demand, capacity, opening, travel, name=name or f"lrp-{n}-{m}-{seed}")
