"""Variable neighborhood descent and variable neighborhood search baselines."""

from __future__ import annotations

from typing import Sequence

from ntsearch.core import StepKind, Termination, _Tracker
from ntsearch.rng import Rng


def _descend(adapter, s, f, groups, step, rng, tr: _Tracker, max_evals: int):
    """Classic VND pass: back to the first group after every improvement.

    Returns ``(solution, fitness, completed)``; ``completed`` is False when
    the budget ran out first.
    """
    idx = 0
    while idx < len(groups):
        if tr.evals >= max_evals:
            return s, f, False
        res = adapter.step(s, f, groups[idx], step, rng, max_evals - tr.evals)
        if res.found_at:
            tr.offer(res.solution, res.fitness, tr.evals + res.found_at)
        tr.evals += res.evals
        if res.fitness < f:
            s, f = res.solution, res.fitness
            idx = 0
        else:
            idx += 1
    return s, f, True


def _start(adapter, rng: Rng, tr: _Tracker):
    s = adapter.random_solution(rng)
    f = adapter.evaluate(s)
    tr.evals += 1
    tr.offer(s, f, tr.evals)
    return s, f


def run_vnd(adapter, ordering: Sequence[int], step: StepKind = StepKind.FI, rng: Rng | None = None,
            max_evals: int = 10**7, restart: bool = False, seed: int = 0):
    """VND from a random solution, optionally restarted until the budget is spent.

    The record keeps the best solution over all restarts; without restart
    the run ends ``PATH_EMPTY`` once the last neighborhood fails.
    """
    ordering = tuple(ordering)
    if sorted(ordering) != list(range(1, adapter.k + 1)):
        raise ValueError(f"ordering must be a permutation of 1..{adapter.k}")
    if max_evals < 1:
        raise ValueError("max_evals must be >= 1")
    step = StepKind(step)
    rng = rng if rng is not None else Rng(seed)
    tr = _Tracker()
    groups = [(nid,) for nid in ordering]
    completed = False
    while tr.evals < max_evals:
        s, f = _start(adapter, rng, tr)
        _, _, completed = _descend(adapter, s, f, groups, step, rng, tr, max_evals)
        if not restart:
            break
    if restart or not completed:
        term = Termination.BUDGET_EXHAUSTED
    else:
        term = Termination.PATH_EMPTY
    label = "VND-" + "-".join(map(str, ordering)) + f"-{step.name}" + ("-restart" if restart else "")
    return tr.record(1, term, algorithm=label, seed=seed)


def shake(adapter, solution, strength: int, shake_ids: Sequence[int], rng: Rng):
    """``strength`` successive random moves drawn from ``shake_ids``."""
    for _ in range(strength):
        solution = adapter.random_neighbor(solution, shake_ids, rng)
    return solution


def run_vns(adapter, shake_ids: Sequence[int], union_groups: Sequence[Sequence[int]],
            step: StepKind = StepKind.FD, max_shake: int = 1, rng: Rng | None = None,
            max_evals: int = 10**7, seed: int = 0):
    """Basic VNS: shake with strength 1..max_shake, then VND over union groups.

    Each union group is searched as one composite neighborhood.  Strength
    resets to 1 after an improvement and wraps around after ``max_shake``.
    Runs until the budget is spent.
    """
    groups = [tuple(g) for g in union_groups]
    if not groups or any(not g for g in groups):
        raise ValueError("union_groups must be a non-empty sequence of non-empty groups")
    if max_shake < 1:
        raise ValueError("max_shake must be >= 1")
    if max_evals < 1:
        raise ValueError("max_evals must be >= 1")
    step = StepKind(step)
    rng = rng if rng is not None else Rng(seed)
    tr = _Tracker()
    x, fx = _start(adapter, rng, tr)
    strength = 1
    while tr.evals < max_evals:
        x1 = shake(adapter, x, strength, shake_ids, rng)
        f1 = adapter.evaluate(x1)
        tr.evals += 1
        tr.offer(x1, f1, tr.evals)
        x2, f2, _ = _descend(adapter, x1, f1, groups, step, rng, tr, max_evals)
        if f2 < fx:
            x, fx = x2, f2
            strength = 1
        else:
            strength += 1
            if strength > max_shake:
                strength = 1
    return tr.record(1, Termination.BUDGET_EXHAUSTED, algorithm="VNS", seed=seed)
