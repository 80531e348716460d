"""Command line entry point: ``nts run`` and ``nts analyze``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ntsearch import lrp, smtwtp
from ntsearch.harness import metrics
from ntsearch.harness.experiment import DataError, ExperimentSpec, read_rows, run_experiment, write_rows

log = logging.getLogger("ntsearch")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _groups(text: str) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(t) for t in part.split(",")) for part in text.split(";") if part.strip())


def _ids(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nts", description="Neighborhood tree search experiments")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", parents=[common], help="run trials and write rows.csv / traces.csv")
    run.add_argument("--problem", choices=["smtwtp", "lrp"], required=True)
    run.add_argument("--instances", required=True, help="instance file or directory")
    run.add_argument("--algo", choices=["nts", "vnd", "vnd-restart", "vns"], default="nts")
    run.add_argument("--step", choices=["fi", "bi", "fd", "bd"], default="fd")
    run.add_argument("--accept", choices=["aa", "ai", "at"], default="aa")
    run.add_argument("--backtrack", choices=["br", "bh", "bu"], default="br")
    run.add_argument("--ordering", help="VND ordering, e.g. ESI or 1,3,2")
    run.add_argument("--shake", type=_ids, help="VNS shake neighborhood ids, e.g. 1,2,11")
    run.add_argument("--groups", type=_groups, help="VNS union groups, e.g. '1,2;3,4;11'")
    run.add_argument("--max-shake", type=int, help="VNS maximum shake strength (default n+m / n)")
    run.add_argument("--trials", type=int, default=30)
    run.add_argument("--max-evals", type=int, default=10**7)
    run.add_argument("--seed", type=int, default=0, help="base seed; trial t uses seed + t")
    run.add_argument("--limit", type=int, help="use only the first N instances")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--append", action="store_true", help="append to existing rows in --out")
    run.add_argument("--out", required=True, help="output directory")

    an = sub.add_parser("analyze", parents=[common], help="compute metrics from rows.csv")
    an.add_argument("--rows", required=True, help="directory holding rows.csv (and traces.csv)")
    an.add_argument("--optima", required=True,
                    help="125 optimal values (OR-Library order) or 'instance-id value' lines")
    an.add_argument("--report", choices=["summary", "rtd", "borda", "h2h"], default="summary")
    an.add_argument("--delta", type=float, default=0.0, help="RTD quality bound in percent")
    an.add_argument("--instance", help="restrict to one instance id")
    an.add_argument("--a", help="h2h: algorithm label scored (default: first label)")
    an.add_argument("--b", help="h2h: reference algorithm label (default: second label)")
    an.add_argument("--evals-to-best", action="store_true", help="h2h: ratio of evaluations to best")
    an.add_argument("--out", help="output file (default stdout)")
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    ordering = None
    if args.ordering:
        if args.algo not in ("vnd", "vnd-restart"):
            raise UsageError("--ordering only applies to --algo vnd / vnd-restart")
        try:
            if args.problem == "smtwtp":
                ordering = smtwtp.parse_ordering(args.ordering)
            else:
                ordering = _ids(args.ordering)
                if sorted(ordering) != list(range(1, lrp.K + 1)):
                    raise ValueError("LRP ordering must be a permutation of 1..11")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        return ExperimentSpec(
            problem=args.problem, instances=args.instances, algorithm=args.algo, step=args.step,
            accept=args.accept, backtrack=args.backtrack, ordering=ordering, shake_ids=args.shake,
            groups=args.groups, max_shake=args.max_shake, trials=args.trials, base_seed=args.seed,
            max_evals=args.max_evals, limit=args.limit, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def load_references(path: str, instance_ids) -> dict[str, float]:
    """Map instance ids to optimum/bound values from either supported file layout."""
    p = Path(path)
    if not p.exists():
        raise DataError(f"optima file not found: {p}")
    text = p.read_text()
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    try:
        if lines and all(len(ln) == 2 for ln in lines) and not all(_is_int(t) for ln in lines for t in ln):
            return lrp.load_bounds(text)
        values = smtwtp.load_optima(text)
    except (smtwtp.ParseError, lrp.ParseError) as exc:
        raise DataError(f"{p}: {exc}") from None
    out = {}
    for inst in instance_ids:
        _, _, idx = inst.rpartition(":")
        if not idx.isdigit() or not 1 <= int(idx) <= len(values):
            raise DataError(f"cannot align instance id {inst!r} with {p}")
        out[inst] = values[int(idx) - 1]
    return out


def _is_int(tok: str) -> bool:
    return tok.lstrip("-").isdigit()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    spec = _spec_from_args(args)
    log.info("running %s on %s (%d trials, budget %d)", spec.label, spec.instances, spec.trials, spec.max_evals)
    rows = run_experiment(spec)
    path = write_rows(args.out, rows, spec, append=args.append)
    log.info("wrote %d rows to %s", len(rows), path)
    return EXIT_OK


def cmd_analyze(args) -> int:
    rows = read_rows(args.rows)
    if args.instance:
        rows = [r for r in rows if r.instance == args.instance]
    if not rows:
        raise DataError("no rows selected")
    refs = load_references(args.optima, {r.instance for r in rows})
    by_alg = metrics.group_by(rows, "algorithm")

    if args.report == "summary":
        report = {alg: metrics.summarize(rs, refs).to_json() for alg, rs in by_alg.items()}
        report["_convention"] = metrics.ZERO_REFERENCE_CONVENTION
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    elif args.report == "rtd":
        blocks = []
        for alg, rs in by_alg.items():
            curve = metrics.rtd([r.trace for r in rs], [refs[r.instance] for r in rs], args.delta)
            blocks.append(f"# {alg} delta={args.delta:g}\n" + curve.to_text())
        _emit("\n\n".join(blocks), args.out)
    elif args.report == "borda":
        instances = sorted({r.instance for r in rows})
        gaps = {}
        for alg, rs in by_alg.items():
            g = metrics.mean_gaps(rs, refs)
            if set(g) != set(instances):
                raise DataError(f"algorithm {alg} does not cover every instance")
            gaps[alg] = [g[i] for i in instances]
        _emit(json.dumps(metrics.borda(gaps), indent=2) + "\n", args.out)
    else:
        labels = list(by_alg)
        a = args.a or (labels[0] if labels else None)
        b = args.b or (labels[1] if len(labels) > 1 else None)
        if a not in by_alg or b not in by_alg:
            raise UsageError(f"h2h needs two algorithm labels present in the rows; have {labels}")
        n_gt, r_eval = metrics.head_to_head(by_alg[a], by_alg[b], refs, args.evals_to_best)
        _emit(json.dumps({"a": a, "b": b, "n_gt": n_gt, "r_eval": r_eval,
                          "evals": "to-best" if args.evals_to_best else "total"}, indent=2) + "\n", args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return cmd_run(args) if args.command == "run" else cmd_analyze(args)
    except UsageError as exc:
        print(f"nts: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"nts: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
