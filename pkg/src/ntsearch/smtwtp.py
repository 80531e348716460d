"""Single machine total weighted tardiness: instances, evaluation, neighborhoods.

Schedules are tuples of 0-based job indices in processing order.  The three
neighborhoods are numbered for the search engine as

    1  Exchange  adjacent transposition               n-1 moves
    2  Swap      exchange of any two positions        n(n-1)/2 moves
    3  Insert    remove a job, reinsert at index t    n(n-1) moves

An Insert move ``(i, t)`` places the removed job at index ``t`` of the
resulting sequence, ``t != i``.  Moves ``(i, i+1)`` and ``(i+1, i)`` give the
same schedule; both are kept so the move count is exactly n(n-1).

OR-Library ``wt40/wt50/wt100`` files hold 125 instances each, every instance
written as n processing times, n weights, then n due dates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ntsearch import _accel
from ntsearch.core import StepKind, StepResult
from ntsearch.problem import ProblemAdapter
from ntsearch.rng import Rng

EXCHANGE, SWAP, INSERT = 1, 2, 3
NEIGHBORHOOD_NAMES = {EXCHANGE: "Exchange", SWAP: "Swap", INSERT: "Insert"}
LETTERS = {"E": EXCHANGE, "S": SWAP, "I": INSERT}

ORLIB_INSTANCES = 125


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class SmtwtpInstance:
    p: tuple[int, ...]
    w: tuple[int, ...]
    d: tuple[int, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for attr in ("p", "w", "d"):
            object.__setattr__(self, attr, tuple(int(v) for v in getattr(self, attr)))
        n = len(self.p)
        if len(self.w) != n or len(self.d) != n:
            raise ValueError("p, w and d must have the same length")
        if any(v < 1 for v in self.p):
            raise ValueError("processing times must be >= 1")
        if any(v < 0 for v in self.w) or any(v < 0 for v in self.d):
            raise ValueError("weights and due dates must be >= 0")

    @property
    def n(self) -> int:
        return len(self.p)

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.ascontiguousarray(v, dtype=np.int64) for v in (self.p, self.w, self.d))


def evaluate(inst: SmtwtpInstance, perm: Sequence[int]) -> int:
    """Total weighted tardiness of processing jobs in ``perm`` order."""
    p, w, d = inst.p, inst.w, inst.d
    time = 0
    total = 0
    for j in perm:
        time += p[j]
        if time > d[j]:
            total += w[j] * (time - d[j])
    return total


def is_schedule(inst: SmtwtpInstance, perm: Sequence[int]) -> bool:
    return len(perm) == inst.n and sorted(perm) == list(range(inst.n))


def move_count(n: int, nid: int) -> int:
    if n < 2:
        return 0
    if nid == EXCHANGE:
        return n - 1
    if nid == SWAP:
        return n * (n - 1) // 2
    if nid == INSERT:
        return n * (n - 1)
    raise ValueError(f"unknown SMTWTP neighborhood {nid}")


def apply_move(perm: tuple, nid: int, index: int) -> tuple:
    n = len(perm)
    if nid == EXCHANGE:
        i = index
        return perm[:i] + (perm[i + 1], perm[i]) + perm[i + 2:]
    if nid == SWAP:
        a, row = 0, n - 1
        while index >= row:
            index -= row
            a += 1
            row -= 1
        b = a + 1 + index
        out = list(perm)
        out[a], out[b] = out[b], out[a]
        return tuple(out)
    i, tt = divmod(index, n - 1)
    t = tt + 1 if tt >= i else tt
    out = list(perm)
    job = out.pop(i)
    out.insert(t, job)
    return tuple(out)


def neighbors(inst: SmtwtpInstance, perm: tuple, nid: int, rng: Rng | None = None):
    """Stream the neighbors of ``perm``; shuffled when ``rng`` is given."""
    return SmtwtpAdapter(inst, accelerate=False).neighbors(perm, nid, rng)


def random_schedule(inst: SmtwtpInstance, rng: Rng) -> tuple[int, ...]:
    perm = list(range(inst.n))
    rng.shuffle(perm)
    return tuple(perm)


def parse_ordering(text: str) -> tuple[int, ...]:
    """``"ESI"`` or ``"1,2,3"`` to neighborhood ids."""
    text = text.strip()
    if text and all(ch.upper() in LETTERS for ch in text):
        ids = tuple(LETTERS[ch.upper()] for ch in text)
    else:
        ids = tuple(int(tok) for tok in text.replace(",", " ").split())
    if sorted(ids) != [1, 2, 3]:
        raise ValueError(f"ordering must be a permutation of E, S, I; got {text!r}")
    return ids


class SmtwtpAdapter(ProblemAdapter):
    k = 3
    name = "smtwtp"

    def __init__(self, inst: SmtwtpInstance, accelerate: bool | None = None):
        self.inst = inst
        self.accelerated = _accel.use_kernels(accelerate)

    def evaluate(self, solution) -> int:
        return evaluate(self.inst, solution)

    def random_solution(self, rng: Rng):
        return random_schedule(self.inst, rng)

    def move_blocks(self, solution, nid):
        return [(move_count(len(solution), nid), None)]

    def block_move(self, solution, nid, key, index):
        return apply_move(solution, nid, index)

    def step(self, solution, fitness, nids, kind, rng, budget) -> StepResult:
        if not self.accelerated:
            return super().step(solution, fitness, nids, kind, rng, budget)
        if isinstance(nids, int):
            nids = (nids,)
        p, w, d = self.inst.arrays
        return StepResult(*_accel.kernels.smtwtp_step(
            solution, p, w, d, tuple(nids), _accel.STEP_CODES[StepKind(kind).value],
            rng.capsule, budget, fitness))


# -- file formats -----------------------------------------------------------

def _int_tokens(text: str) -> list[int]:
    tokens = text.split()
    values = []
    for offset, tok in enumerate(tokens):
        try:
            values.append(int(tok))
        except ValueError:
            raise ParseError(f"token {offset}: expected an integer, got {tok!r}") from None
    return values


def parse_orlib(text: str, n: int | None = None, name: str = "wt") -> list[SmtwtpInstance]:
    """Parse an OR-Library weighted tardiness file into 125 instances.

    ``n`` is inferred from the token count when omitted.
    """
    values = _int_tokens(text)
    if not values:
        raise ParseError("token 0: empty instance file")
    if n is None:
        n, rem = divmod(len(values), 3 * ORLIB_INSTANCES)
        if rem or n == 0:
            raise ParseError(f"token {len(values)}: count is not a multiple of {3 * ORLIB_INSTANCES}")
    expected = ORLIB_INSTANCES * 3 * n
    if len(values) != expected:
        raise ParseError(f"token {min(len(values), expected)}: expected {expected} integers "
                         f"for 125 instances of n={n}, found {len(values)}")
    out = []
    for j in range(ORLIB_INSTANCES):
        base = j * 3 * n
        try:
            out.append(SmtwtpInstance(values[base:base + n], values[base + n:base + 2 * n],
                                      values[base + 2 * n:base + 3 * n], name=f"{name}:{j + 1}"))
        except ValueError as exc:
            raise ParseError(f"token {base}: instance {j + 1}: {exc}") from None
    return out


def format_orlib(instances: Sequence[SmtwtpInstance], per_line: int = 20) -> str:
    lines = []
    for inst in instances:
        for seq in (inst.p, inst.w, inst.d):
            for s in range(0, len(seq), per_line):
                lines.append(" ".join(f"{v:5d}" for v in seq[s:s + per_line]))
    return "\n".join(lines) + "\n"


def load_optima(text: str) -> list[int]:
    values = _int_tokens(text)
    if len(values) != ORLIB_INSTANCES:
        raise ParseError(f"token {len(values)}: expected {ORLIB_INSTANCES} optimal values, found {len(values)}")
    if any(v < 0 for v in values):
        raise ParseError("optimal values must be non-negative")
    return values


def parse_instance(text: str, name: str = "") -> SmtwtpInstance:
    """Canonical single-instance format: ``n`` then lines of p, w and d."""
    values = _int_tokens(text)
    if not values:
        raise ParseError("token 0: empty instance file")
    n = values[0]
    if n < 1 or len(values) != 1 + 3 * n:
        raise ParseError(f"token {len(values)}: expected 1 + 3*{n} integers, found {len(values)}")
    return SmtwtpInstance(values[1:1 + n], values[1 + n:1 + 2 * n], values[1 + 2 * n:], name=name)


def format_instance(inst: SmtwtpInstance) -> str:
    rows = [str(inst.n)] + [" ".join(map(str, seq)) for seq in (inst.p, inst.w, inst.d)]
    return "\n".join(rows) + "\n"


def load_instances(text: str, name: str = "wt") -> list[SmtwtpInstance]:
    """Either format: canonical single instance or a full OR-Library file."""
    values = text.split()
    if values and values[0].lstrip("-").isdigit() and len(values) == 1 + 3 * int(values[0]):
        return [parse_instance(text, name=f"{name}:1")]
    return parse_orlib(text, name=name)
