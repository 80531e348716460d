"""Neighborhood tree search (NTS) with VND/VNS baselines.

Problem adapters: :mod:`ntsearch.smtwtp` (single machine total weighted
tardiness) and :mod:`ntsearch.lrp` (location routing).  Experiment tooling
lives in :mod:`ntsearch.harness`.
"""

from ntsearch._accel import HAVE_KERNELS
from ntsearch.core import (
    AcceptKind,
    BacktrackKind,
    ContractViolation,
    PathEntry,
    RunRecord,
    SearchConfig,
    StepKind,
    Termination,
    apply_step,
    backtrack,
    decide_accept,
    run_nts,
    select_neighborhood,
)
from ntsearch.baselines import run_vnd, run_vns
from ntsearch.problem import ProblemAdapter
from ntsearch.rng import RNG_ALGORITHM, Rng

__all__ = [
    "AcceptKind", "BacktrackKind", "ContractViolation", "HAVE_KERNELS", "PathEntry",
    "ProblemAdapter", "RNG_ALGORITHM", "Rng", "RunRecord", "SearchConfig", "StepKind",
    "Termination", "apply_step", "backtrack", "decide_accept", "run_nts", "run_vnd",
    "run_vns", "select_neighborhood",
]
