"""Problem adapter interface used by every search driver.

A neighborhood's moves are laid out as a sequence of *blocks* (for example
one block per route, or per pair of routes).  Each block knows how many moves
it holds and how to build the neighbor for a block-local index, so any move
can be addressed by a single integer.  Deterministic enumeration walks those
integers in order; shuffled enumeration draws them through
:meth:`Rng.permutation_stream`.  Several neighborhood ids passed together form
a composite neighborhood whose move list is the concatenation of its members.
"""

from __future__ import annotations

import abc
from bisect import bisect_right
from itertools import accumulate
from typing import Any, Iterator, Sequence

from ntsearch.core import StepKind, StepResult, apply_step
from ntsearch.rng import Rng


class ProblemAdapter(abc.ABC):
    #: number of neighborhood structures; ids run from 1 to k
    k: int
    name: str = "problem"

    @abc.abstractmethod
    def evaluate(self, solution) -> float: ...

    @abc.abstractmethod
    def random_solution(self, rng: Rng): ...

    @abc.abstractmethod
    def move_blocks(self, solution, nid: int) -> list[tuple[int, Any]]:
        """``(count, key)`` pairs describing the move list of neighborhood ``nid``."""

    @abc.abstractmethod
    def block_move(self, solution, nid: int, key, index: int):
        """Neighbor reached by move ``index`` of block ``key``."""

    # -- derived helpers -------------------------------------------------

    def _layout(self, solution, nids: Sequence[int]):
        keys = []
        counts = []
        for nid in nids:
            self._check_nid(nid)
            for count, key in self.move_blocks(solution, nid):
                counts.append(count)
                keys.append((nid, key))
        return list(accumulate(counts)), keys

    def _check_nid(self, nid: int) -> None:
        if not 1 <= nid <= self.k:
            raise ValueError(f"neighborhood id {nid} outside 1..{self.k}")

    def move_count(self, solution, nids: Sequence[int] | int) -> int:
        if isinstance(nids, int):
            nids = (nids,)
        ends, _ = self._layout(solution, nids)
        return ends[-1] if ends else 0

    def apply_move(self, solution, nids: Sequence[int] | int, index: int):
        if isinstance(nids, int):
            nids = (nids,)
        ends, keys = self._layout(solution, nids)
        return self._decode(solution, ends, keys, index)

    def _decode(self, solution, ends, keys, index):
        b = bisect_right(ends, index)
        start = ends[b - 1] if b else 0
        nid, key = keys[b]
        return self.block_move(solution, nid, key, index - start)

    def neighbors(self, solution, nids: Sequence[int] | int, rng: Rng | None = None) -> Iterator:
        """Stream every neighbor once; shuffled when ``rng`` is given."""
        if isinstance(nids, int):
            nids = (nids,)
        ends, keys = self._layout(solution, nids)
        total = ends[-1] if ends else 0
        order = range(total) if rng is None else rng.permutation_stream(total)
        for index in order:
            yield self._decode(solution, ends, keys, index)

    def random_neighbor(self, solution, nids: Sequence[int], rng: Rng):
        """One uniformly drawn move from a uniformly drawn non-empty neighborhood.

        Returns ``solution`` itself when every listed neighborhood is empty.
        """
        live = [(nid, c) for nid in nids if (c := self.move_count(solution, nid)) > 0]
        if not live:
            return solution
        nid, count = live[rng.randbelow(len(live))]
        return self.apply_move(solution, nid, rng.randbelow(count))

    def step(self, solution, fitness, nids, kind: StepKind, rng: Rng, budget: int) -> StepResult:
        """Step function; adapters with compiled kernels override this."""
        return apply_step(self, solution, fitness, nids, kind, rng, budget)


class CountingAdapter:
    """Wraps an adapter and counts ``evaluate`` calls (pure-Python path only)."""

    def __init__(self, inner: ProblemAdapter):
        self.inner = inner
        self.k = inner.k
        self.calls = 0

    def evaluate(self, solution):
        self.calls += 1
        return self.inner.evaluate(solution)

    def random_solution(self, rng):
        return self.inner.random_solution(rng)

    def neighbors(self, solution, nids, rng=None):
        return self.inner.neighbors(solution, nids, rng)

    def move_count(self, solution, nids):
        return self.inner.move_count(solution, nids)

    def random_neighbor(self, solution, nids, rng):
        return self.inner.random_neighbor(solution, nids, rng)

    def step(self, solution, fitness, nids, kind, rng, budget):
        return apply_step(self, solution, fitness, nids, kind, rng, budget)
