"""Experiment harness: trial runner, metrics and the ``nts`` command line."""

from ntsearch.harness.experiment import DataError, ExperimentSpec, TrialRow, read_rows, run_experiment, write_rows
from ntsearch.harness.metrics import borda, deviation, head_to_head, rtd, summarize

__all__ = ["DataError", "ExperimentSpec", "TrialRow", "read_rows", "run_experiment", "write_rows",
           "borda", "deviation", "head_to_head", "rtd", "summarize"]
