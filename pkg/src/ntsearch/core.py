"""Neighborhood tree search engine.

The search keeps a trajectory path of accepted solutions.  Each entry
remembers which neighborhoods have already been explored from it; once every
neighborhood of the head has been tried the search backtracks to an earlier
entry that still has unexplored branches, keeping that entry's usage mask so
explored branches stay pruned.  The run ends when no entry has an unexplored
branch left or the evaluation budget is spent.

Strategies are selected with :class:`SearchConfig`; the naming follows the
usual ``NTS-(step, accept, backtrack)`` triples, e.g. ``NTS-(FD,AA,BR)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

from ntsearch.rng import RNG_ALGORITHM, Rng


class ContractViolation(RuntimeError):
    """Raised when an engine operation is called outside its precondition."""


class StepKind(str, enum.Enum):
    FI = "fi"  # first improvement, shuffled enumeration
    BI = "bi"  # best improvement, deterministic enumeration
    FD = "fd"  # FI repeated until no improving neighbor
    BD = "bd"  # BI repeated until no improving neighbor

    @property
    def is_descent(self) -> bool:
        return self in (StepKind.FD, StepKind.BD)

    @property
    def is_first(self) -> bool:
        return self in (StepKind.FI, StepKind.FD)


class AcceptKind(str, enum.Enum):
    AA = "aa"
    AI = "ai"
    AT = "at"


class BacktrackKind(str, enum.Enum):
    BR = "br"
    BH = "bh"
    BU = "bu"


class Termination(str, enum.Enum):
    PATH_EMPTY = "PATH_EMPTY"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


@dataclass(frozen=True)
class SearchConfig:
    step: StepKind = StepKind.FD
    accept: AcceptKind = AcceptKind.AA
    backtrack: BacktrackKind = BacktrackKind.BR
    max_evals: int = 10**7
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "step", StepKind(self.step))
        object.__setattr__(self, "accept", AcceptKind(self.accept))
        object.__setattr__(self, "backtrack", BacktrackKind(self.backtrack))
        if self.max_evals < 1:
            raise ValueError(f"max_evals must be >= 1, got {self.max_evals}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")

    @property
    def label(self) -> str:
        return f"NTS-({self.step.name},{self.accept.name},{self.backtrack.name})"


@dataclass(slots=True)
class PathEntry:
    solution: Any
    fitness: float
    usage: list[bool]
    best_child_fitness: float
    depth: int

    @classmethod
    def fresh(cls, solution, fitness, k: int, depth: int) -> "PathEntry":
        return cls(solution, fitness, [False] * k, fitness, depth)

    def unused(self) -> list[int]:
        """Unexplored neighborhood ids (1-based)."""
        return [i + 1 for i, used in enumerate(self.usage) if not used]

    @property
    def exhausted(self) -> bool:
        return all(self.usage)

    @property
    def used_count(self) -> int:
        return sum(self.usage)


TrajectoryPath = list[PathEntry]


class StepResult(NamedTuple):
    solution: Any
    fitness: float
    evals: int
    # evaluation index (1-based, within this step) at which `solution` was
    # produced; 0 when the step returns its input unchanged
    found_at: int


@dataclass(frozen=True)
class RunRecord:
    best_solution: Any
    best_fitness: float
    evals_total: int
    evals_to_best: int
    h_max: int
    trace: tuple[tuple[int, float], ...]
    termination: Termination
    meta: dict = field(default_factory=dict, compare=False)


def select_neighborhood(entry: PathEntry, rng: Rng) -> int:
    """Pick an unexplored neighborhood of ``entry`` uniformly at random."""
    candidates = entry.unused()
    if not candidates:
        raise ContractViolation("select_neighborhood called on a fully explored entry")
    return candidates[rng.randbelow(len(candidates))]


def apply_step(adapter, solution, fitness, nids: Sequence[int] | int, kind: StepKind,
               rng: Rng, budget: int) -> StepResult:
    """Pure-Python step function over the adapter's neighbor streams.

    ``nids`` may name several neighborhoods; their move lists are then
    concatenated and searched as one composite neighborhood.
    """
    if budget < 1:
        raise ContractViolation("apply_step needs a budget of at least one evaluation")
    if isinstance(nids, int):
        nids = (nids,)
    kind = StepKind(kind)
    if not kind.is_descent:
        return _scan(adapter, solution, fitness, nids, kind.is_first, rng, budget)

    cur, cur_f, evals, found_at = solution, fitness, 0, 0
    while evals < budget:
        res = _scan(adapter, cur, cur_f, nids, kind.is_first, rng, budget - evals)
        if res.fitness < cur_f:
            found_at = evals + res.found_at
            cur, cur_f = res.solution, res.fitness
            evals += res.evals
        else:
            evals += res.evals
            break
    return StepResult(cur, cur_f, evals, found_at)


def _scan(adapter, solution, fitness, nids, first: bool, rng: Rng, budget: int) -> StepResult:
    evals = 0
    if first:
        for cand in adapter.neighbors(solution, nids, rng):
            f = adapter.evaluate(cand)
            evals += 1
            if f < fitness:
                return StepResult(cand, f, evals, evals)
            if evals >= budget:
                break
        return StepResult(solution, fitness, evals, 0)

    best, best_f, best_at = solution, fitness, 0
    for cand in adapter.neighbors(solution, nids, None):
        f = adapter.evaluate(cand)
        evals += 1
        if best_at == 0 or f < best_f:
            best, best_f, best_at = cand, f, evals
        if evals >= budget:
            break
    return StepResult(best, best_f, evals, best_at)


def decide_accept(kind: AcceptKind, entry: PathEntry, f_s: float, f_sp: float, rng: Rng) -> bool:
    """Branching decision for a stepped solution of fitness ``f_sp``.

    Reads ``entry.best_child_fitness`` as it was before this step; the caller
    lowers it afterwards.
    """
    if kind is AcceptKind.AA:
        return f_sp < f_s
    if kind is AcceptKind.AI:
        return f_sp < entry.best_child_fitness
    if f_sp < entry.best_child_fitness:
        return True
    if f_sp < f_s:
        return rng.random() < 1.0 / entry.depth
    return False


def backtrack(path: TrajectoryPath, kind: BacktrackKind, rng: Rng) -> TrajectoryPath:
    """Return the prefix of ``path`` ending at the chosen backtrack target.

    The head must be fully explored.  An empty list means no entry has an
    unexplored neighborhood left.
    """
    if not path or not path[-1].exhausted:
        raise ContractViolation("backtrack requires a fully explored head")
    candidates = [pos for pos, e in enumerate(path) if not e.exhausted]
    if not candidates:
        return []
    if kind is BacktrackKind.BR or len(candidates) == 1:
        target = candidates[rng.randbelow(len(candidates))]
    else:
        a = rng.randbelow(len(candidates))
        b = rng.randbelow(len(candidates) - 1)
        if b >= a:
            b += 1
        pa, pb = candidates[a], candidates[b]
        if kind is BacktrackKind.BH:
            target = min(pa, pb)
        else:
            ua, ub = path[pa].used_count, path[pb].used_count
            if ua == ub:
                target = (pa, pb)[rng.randbelow(2)]
            else:
                target = pa if ua < ub else pb
    return path[: target + 1]


class _Tracker:
    """Best-so-far bookkeeping shared by all search drivers."""

    __slots__ = ("best", "best_f", "evals", "evals_to_best", "trace")

    def __init__(self):
        self.best = None
        self.best_f = None
        self.evals = 0
        self.evals_to_best = 0
        self.trace: list[tuple[int, float]] = []

    def offer(self, solution, fitness, at_eval: int) -> None:
        if self.best_f is None or fitness < self.best_f:
            self.best, self.best_f = solution, fitness
            self.evals_to_best = at_eval
            self.trace.append((at_eval, fitness))

    def record(self, h_max: int, termination: Termination, **meta) -> RunRecord:
        meta.setdefault("rng", RNG_ALGORITHM)
        return RunRecord(
            best_solution=self.best,
            best_fitness=self.best_f,
            evals_total=self.evals,
            evals_to_best=self.evals_to_best,
            h_max=h_max,
            trace=tuple(self.trace),
            termination=termination,
            meta=meta,
        )


def run_nts(adapter, config: SearchConfig, rng: Rng | None = None, observer=None) -> RunRecord:
    """Run one NTS trial.

    ``observer``, when given, is called as ``observer(event, path)`` after each
    ``"step"``, ``"push"`` and ``"backtrack"``; tests use it to check path
    invariants.
    """
    if adapter.k < 1:
        raise ValueError("adapter must expose at least one neighborhood")
    if rng is None:
        rng = Rng(config.seed)
    k = adapter.k
    tr = _Tracker()

    s0 = adapter.random_solution(rng)
    f0 = adapter.evaluate(s0)
    tr.evals = 1
    tr.offer(s0, f0, 1)
    path: TrajectoryPath = [PathEntry.fresh(s0, f0, k, 1)]
    h_max = 1

    while path and tr.evals < config.max_evals:
        head = path[-1]
        i = select_neighborhood(head, rng)
        res = adapter.step(head.solution, head.fitness, i, config.step, rng,
                           config.max_evals - tr.evals)
        if res.found_at:
            tr.offer(res.solution, res.fitness, tr.evals + res.found_at)
        tr.evals += res.evals
        head.usage[i - 1] = True
        accepted = decide_accept(config.accept, head, head.fitness, res.fitness, rng)
        if res.fitness < head.best_child_fitness:
            head.best_child_fitness = res.fitness
        if observer:
            observer("step", path)
        if accepted:
            path.append(PathEntry.fresh(res.solution, res.fitness, k, head.depth + 1))
            h_max = max(h_max, len(path))
            if observer:
                observer("push", path)
        elif head.exhausted:
            path = backtrack(path, config.backtrack, rng)
            if observer:
                observer("backtrack", path)

    term = Termination.PATH_EMPTY if not path else Termination.BUDGET_EXHAUSTED
    return tr.record(h_max, term, algorithm=config.label, seed=config.seed)
