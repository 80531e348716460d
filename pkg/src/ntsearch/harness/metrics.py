"""Evaluation metrics over trial rows.

Percentage deviations use ``max(reference, 1)`` as denominator so that
instances whose optimum is 0 stay in the averages (f = 0 scores 0%,
f = 4 scores 400%).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from ntsearch.harness.experiment import DataError, TrialRow

ZERO_REFERENCE_CONVENTION = "deviation = 100 * (f - ref) / max(ref, 1)"


def deviation(f: float, ref: float) -> float:
    return 100.0 * (f - ref) / max(ref, 1)


def group_by(rows: Sequence[TrialRow], attr: str) -> dict[str, list[TrialRow]]:
    out: dict[str, list[TrialRow]] = defaultdict(list)
    for r in rows:
        out[getattr(r, attr)].append(r)
    return dict(out)


@dataclass(frozen=True)
class Summary:
    n_opt: int
    mean_deviation: float
    mean_evals: float
    success_rate: float
    instances: int
    trials: int

    def to_json(self) -> dict:
        return {
            "n_opt": self.n_opt,
            "mean_deviation": self.mean_deviation,
            "mean_evals": self.mean_evals,
            "success_rate": self.success_rate,
            "instances": self.instances,
            "trials": self.trials,
        }


def summarize(rows: Sequence[TrialRow], optima: Mapping[str, float]) -> Summary:
    """N_opt, mean % deviation, mean evaluations and success rate (%)."""
    if not rows:
        raise DataError("no rows to summarize")
    per_instance = group_by(rows, "instance")
    n_opt = 0
    devs = []
    rates = []
    for inst, group in per_instance.items():
        if inst not in optima:
            raise DataError(f"no optimum for instance {inst}")
        opt = optima[inst]
        best = [r.best_fitness for r in group]
        if min(best) < opt:
            raise DataError(f"instance {inst}: fitness {min(best)} below the listed optimum {opt}")
        hits = sum(1 for f in best if f == opt)
        n_opt += hits > 0
        rates.append(hits / len(group))
        devs.extend(deviation(f, opt) for f in best)
    return Summary(
        n_opt=n_opt,
        mean_deviation=float(np.mean(devs)),
        mean_evals=float(np.mean([r.evals_total for r in rows])),
        success_rate=100.0 * float(np.mean(rates)),
        instances=len(per_instance),
        trials=len(rows),
    )


@dataclass(frozen=True)
class RtdCurve:
    delta: float
    points: tuple[tuple[int, float], ...]

    def probability_at(self, evals: int) -> float:
        p = 0.0
        for e, prob in self.points:
            if e > evals:
                break
            p = prob
        return p

    def to_text(self) -> str:
        return "".join(f"{e} {prob:.17g}\n" for e, prob in self.points)


def hitting_eval(trace: Sequence[tuple[int, float]], ref: float, delta: float) -> int | None:
    """First evaluation count at which the trace is within ``delta`` % of ``ref``."""
    for evals, best in trace:
        if deviation(best, ref) <= delta:
            return evals
    return None


def rtd(traces: Sequence[Sequence[tuple[int, float]]], f_opt, delta: float) -> RtdCurve:
    """Empirical run-time distribution in evaluations.

    ``f_opt`` is one reference value or a sequence aligned with ``traces``
    (pooling trials of several instances).
    """
    if not traces:
        raise DataError("rtd needs at least one trace")
    refs = list(f_opt) if isinstance(f_opt, (list, tuple, np.ndarray)) else [f_opt] * len(traces)
    if len(refs) != len(traces):
        raise DataError("one reference value per trace is required")
    hits = sorted(e for tr, ref in zip(traces, refs) if (e := hitting_eval(tr, ref, delta)) is not None)
    total = len(traces)
    points = []
    for i, e in enumerate(hits, 1):
        if points and points[-1][0] == e:
            points[-1] = (e, i / total)
        else:
            points.append((e, i / total))
    return RtdCurve(delta, tuple(points))


def mean_gaps(rows: Sequence[TrialRow], bounds: Mapping[str, float]) -> dict[str, float]:
    """Average % gap to the bound, per instance."""
    out = {}
    for inst, group in group_by(rows, "instance").items():
        if inst not in bounds:
            raise DataError(f"no bound for instance {inst}")
        out[inst] = float(np.mean([deviation(r.best_fitness, bounds[inst]) for r in group]))
    return out


def borda(per_instance_gaps: Mapping[str, Sequence[float]]) -> dict[str, float]:
    """Borda count: per instance rank algorithms by gap (1 = smallest), sum ranks.

    Tied algorithms share the mean of their ranks.  Lower totals are better.
    """
    names = list(per_instance_gaps)
    if not names:
        return {}
    table = np.array([list(per_instance_gaps[a]) for a in names], dtype=float)
    if table.ndim != 2:
        raise DataError("every algorithm needs a gap for every instance")
    ranks = rankdata(table, method="average", axis=0)
    return {a: float(s) for a, s in zip(names, ranks.sum(axis=1))}


def head_to_head(rows_a: Sequence[TrialRow], rows_b: Sequence[TrialRow], bounds: Mapping[str, float],
                 evals_to_best: bool = False) -> tuple[int, float]:
    """``(n_gt, r_eval)``: +1/0/-1 per instance on mean gap, and evaluation ratio a/b.

    With ``evals_to_best`` the ratio uses evaluations until the best solution
    was found instead of evaluations until termination.
    """
    gaps_a, gaps_b = mean_gaps(rows_a, bounds), mean_gaps(rows_b, bounds)
    if set(gaps_a) != set(gaps_b):
        raise DataError("both row sets must cover the same instances")
    trials_a = {k: len(v) for k, v in group_by(rows_a, "instance").items()}
    trials_b = {k: len(v) for k, v in group_by(rows_b, "instance").items()}
    if trials_a != trials_b:
        raise DataError("both row sets must have the same trial counts")
    n_gt = 0
    for inst in gaps_a:
        if gaps_a[inst] < gaps_b[inst]:
            n_gt += 1
        elif gaps_a[inst] > gaps_b[inst]:
            n_gt -= 1
    attr = "evals_to_best" if evals_to_best else "evals_total"
    total_a = sum(getattr(r, attr) for r in rows_a)
    total_b = sum(getattr(r, attr) for r in rows_b)
    if total_b == 0:
        raise DataError("reference rows performed zero evaluations")
    return n_gt, total_a / total_b
