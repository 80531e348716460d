"""Multi-trial experiment runner and the CSV records it produces."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ntsearch import lrp, smtwtp
from ntsearch.baselines import run_vnd, run_vns
from ntsearch.core import AcceptKind, BacktrackKind, SearchConfig, StepKind, run_nts
from ntsearch.rng import RNG_ALGORITHM, Rng

PROBLEMS = ("smtwtp", "lrp")
ALGORITHMS = ("nts", "vnd", "vnd-restart", "vns")
ROW_COLUMNS = ("instance", "algorithm", "trial", "seed", "best_fitness", "evals_to_best",
               "evals_total", "h_max", "feasible", "termination")
TRACE_COLUMNS = ("instance", "algorithm", "trial", "evals", "best_fitness")


class DataError(Exception):
    """Bad or inconsistent input data (exit code 2 in the CLI)."""


def fmt_number(x) -> str:
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return format(x, ".17g")


def parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


@dataclass(frozen=True)
class ExperimentSpec:
    problem: str
    instances: str
    algorithm: str = "nts"
    step: StepKind = StepKind.FD
    accept: AcceptKind = AcceptKind.AA
    backtrack: BacktrackKind = BacktrackKind.BR
    ordering: tuple[int, ...] | None = None
    shake_ids: tuple[int, ...] | None = None
    groups: tuple[tuple[int, ...], ...] | None = None
    max_shake: int | None = None
    trials: int = 30
    base_seed: int = 0
    max_evals: int = 10**7
    limit: int | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"problem must be one of {PROBLEMS}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        for name, enum_type in (("step", StepKind), ("accept", AcceptKind), ("backtrack", BacktrackKind)):
            object.__setattr__(self, name, enum_type(getattr(self, name)))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.algorithm.startswith("vnd") and self.ordering is None:
            default = (1, 2, 3) if self.problem == "smtwtp" else tuple(range(1, lrp.K + 1))
            object.__setattr__(self, "ordering", default)
        if self.algorithm == "nts" and self.ordering is not None:
            raise ValueError("ordering only applies to VND")

    @property
    def label(self) -> str:
        if self.algorithm == "nts":
            return SearchConfig(self.step, self.accept, self.backtrack).label
        if self.algorithm.startswith("vnd"):
            if self.problem == "smtwtp":
                names = {v: k for k, v in smtwtp.LETTERS.items()}
                order = "".join(names[i] for i in self.ordering)
            else:
                order = ".".join(map(str, self.ordering))
            suffix = "-restart" if self.algorithm == "vnd-restart" else ""
            return f"VND-{order}-{self.step.name}{suffix}"
        return f"VNS-{self.step.name}"

    def to_json(self) -> dict:
        d = asdict(self)
        for key in ("step", "accept", "backtrack"):
            d[key] = d[key].value
        d["label"] = self.label
        d["rng"] = RNG_ALGORITHM
        return d


@dataclass(frozen=True)
class TrialRow:
    instance: str
    algorithm: str
    trial: int
    seed: int
    best_fitness: float
    evals_to_best: int
    evals_total: int
    h_max: int
    feasible: bool | None
    termination: str
    trace: tuple[tuple[int, float], ...] = field(default=(), compare=False, repr=False)

    def csv_fields(self) -> list[str]:
        feasible = "" if self.feasible is None else str(self.feasible)
        return [self.instance, self.algorithm, str(self.trial), str(self.seed),
                fmt_number(self.best_fitness), str(self.evals_to_best), str(self.evals_total),
                str(self.h_max), feasible, self.termination]


# -- instance loading -----------------------------------------------------------

def load_instance_set(problem: str, path: str | os.PathLike, limit: int | None = None) -> list:
    path = Path(path)
    if not path.exists():
        raise DataError(f"instance path not found: {path}")
    files = sorted(p for p in path.iterdir() if p.is_file()) if path.is_dir() else [path]
    out = []
    try:
        for f in files:
            text = f.read_text()
            if problem == "smtwtp":
                out.extend(smtwtp.load_instances(text, name=f.stem))
            else:
                out.append(lrp.parse_lrp(text, name=f.stem))
    except (smtwtp.ParseError, lrp.ParseError) as exc:
        raise DataError(f"{f}: {exc}") from None
    if not out:
        raise DataError(f"no instances found under {path}")
    return out[:limit] if limit else out


def make_adapter(problem: str, inst):
    return smtwtp.SmtwtpAdapter(inst) if problem == "smtwtp" else lrp.LrpAdapter(inst)


# -- running ------------------------------------------------------------------------

def run_trial(spec: ExperimentSpec, inst, trial: int) -> TrialRow:
    seed = spec.base_seed + trial
    adapter = make_adapter(spec.problem, inst)
    rng = Rng(seed)
    if spec.algorithm == "nts":
        config = SearchConfig(spec.step, spec.accept, spec.backtrack, spec.max_evals, seed)
        rec = run_nts(adapter, config, rng)
    elif spec.algorithm.startswith("vnd"):
        rec = run_vnd(adapter, spec.ordering, spec.step, rng, spec.max_evals,
                      restart=spec.algorithm == "vnd-restart", seed=seed)
    else:
        shake_ids, groups, max_shake = vns_parameters(spec, inst)
        rec = run_vns(adapter, shake_ids, groups, spec.step, max_shake, rng, spec.max_evals, seed=seed)
    feasible = lrp.is_feasible(inst, rec.best_solution) if spec.problem == "lrp" else None
    return TrialRow(inst.name, spec.label, trial, seed, rec.best_fitness, rec.evals_to_best,
                    rec.evals_total, rec.h_max, feasible, rec.termination.value, rec.trace)


def vns_parameters(spec: ExperimentSpec, inst):
    if spec.problem == "lrp":
        shake_ids = spec.shake_ids or lrp.VNS_SHAKE
        groups = spec.groups or lrp.VNS_GROUPS
        max_shake = spec.max_shake or inst.n + inst.m
    else:
        shake_ids = spec.shake_ids or (1, 2, 3)
        groups = spec.groups or ((1,), (2,), (3,))
        max_shake = spec.max_shake or inst.n
    return shake_ids, groups, max_shake


def _task(args):
    spec, inst, trial = args
    return run_trial(spec, inst, trial)


def run_trials(spec: ExperimentSpec, instances: Sequence) -> list[TrialRow]:
    tasks = [(spec, inst, t) for inst in instances for t in range(spec.trials)]
    if spec.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            rows = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * spec.jobs))))
    else:
        rows = [_task(t) for t in tasks]
    order = {inst.name: i for i, inst in enumerate(instances)}
    return sorted(rows, key=lambda r: (order[r.instance], r.trial))


def run_experiment(spec: ExperimentSpec) -> list[TrialRow]:
    instances = load_instance_set(spec.problem, spec.instances, spec.limit)
    names = [inst.name for inst in instances]
    if len(set(names)) != len(names):
        raise DataError("instance ids are not unique")
    return run_trials(spec, instances)


# -- persistence -------------------------------------------------------------------

def write_rows(out_dir: str | os.PathLike, rows: Iterable[TrialRow], spec: ExperimentSpec | None = None,
               append: bool = False) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    mode = "a" if append else "w"
    rows_path, traces_path = out / "rows.csv", out / "traces.csv"
    new_rows = not append or not rows_path.exists()
    new_traces = not append or not traces_path.exists()
    with open(rows_path, mode, newline="") as fh:
        w = csv.writer(fh)
        if new_rows:
            w.writerow(ROW_COLUMNS)
        for r in rows:
            w.writerow(r.csv_fields())
    with open(traces_path, mode, newline="") as fh:
        w = csv.writer(fh)
        if new_traces:
            w.writerow(TRACE_COLUMNS)
        for r in rows:
            for evals, best in r.trace:
                w.writerow([r.instance, r.algorithm, r.trial, evals, fmt_number(best)])
    if spec is not None:
        specs_path = out / "experiments.json"
        existing = json.loads(specs_path.read_text()) if append and specs_path.exists() else []
        existing.append(spec.to_json())
        specs_path.write_text(json.dumps(existing, indent=2) + "\n")
    return rows_path


def read_rows(directory: str | os.PathLike) -> list[TrialRow]:
    d = Path(directory)
    rows_path = d / "rows.csv" if d.is_dir() else d
    if not rows_path.exists():
        raise DataError(f"rows file not found: {rows_path}")
    traces: dict[tuple, list] = {}
    traces_path = rows_path.with_name("traces.csv")
    if traces_path.exists():
        with open(traces_path, newline="") as fh:
            for rec in csv.DictReader(fh):
                key = (rec["instance"], rec["algorithm"], int(rec["trial"]))
                traces.setdefault(key, []).append((int(rec["evals"]), parse_number(rec["best_fitness"])))
    rows = []
    with open(rows_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != ROW_COLUMNS:
            raise DataError(f"{rows_path}: unexpected columns {reader.fieldnames}")
        try:
            for rec in reader:
                key = (rec["instance"], rec["algorithm"], int(rec["trial"]))
                feasible = None if rec["feasible"] == "" else rec["feasible"] == "True"
                rows.append(TrialRow(rec["instance"], rec["algorithm"], int(rec["trial"]), int(rec["seed"]),
                                     parse_number(rec["best_fitness"]), int(rec["evals_to_best"]),
                                     int(rec["evals_total"]), int(rec["h_max"]), feasible,
                                     rec["termination"], tuple(traces.get(key, ()))))
        except (ValueError, KeyError) as exc:
            raise DataError(f"{rows_path}: malformed row: {exc}") from None
    return rows
