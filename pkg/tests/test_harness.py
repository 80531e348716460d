import json

import pytest
from hypothesis import given, settings, strategies as st

from ntsearch import lrp, smtwtp
from ntsearch.harness import cli, metrics
from ntsearch.harness.experiment import (DataError, ExperimentSpec, TrialRow, read_rows, run_experiment,
                                         run_trials, write_rows)
from tests.instances import wt_style_set
from tests.oracles import borda_by_hand


def row(inst="a:1", alg="X", trial=0, f=10, evals=100, to_best=50, trace=()):
    return TrialRow(inst, alg, trial, trial, f, to_best, evals, 3, None, "PATH_EMPTY", tuple(trace))


# -- summarize ---------------------------------------------------------------

def test_summary_all_optimal():
    rows = [row(f"a:{i}", trial=t, f=7) for i in range(1, 4) for t in range(3)]
    s = metrics.summarize(rows, {f"a:{i}": 7 for i in range(1, 4)})
    assert (s.n_opt, s.mean_deviation, s.success_rate, s.instances, s.trials) == (3, 0.0, 100.0, 3, 9)
    assert s.mean_evals == 100.0


def test_deviation_examples():
    assert metrics.deviation(103, 100) == pytest.approx(3.0)
    assert metrics.deviation(0, 0) == 0.0
    assert metrics.deviation(4, 0) == 400.0
    assert metrics.deviation(100, 100) == 0.0


def test_summary_mixed():
    rows = [row("a:1", trial=0, f=100), row("a:1", trial=1, f=103), row("a:2", trial=0, f=4), row("a:2", trial=1, f=4)]
    s = metrics.summarize(rows, {"a:1": 100, "a:2": 0})
    assert s.n_opt == 1
    assert s.mean_deviation == pytest.approx((0 + 3 + 400 + 400) / 4)
    assert s.success_rate == pytest.approx(25.0)


def test_summary_rejects_fitness_below_optimum():
    with pytest.raises(DataError, match="below"):
        metrics.summarize([row(f=5)], {"a:1": 6})
    with pytest.raises(DataError):
        metrics.summarize([row()], {})


# -- rtd ---------------------------------------------------------------------

def test_rtd_large_delta_hits_at_one():
    traces = [((1, 50.0), (30, 10.0)), ((1, 80.0),)]
    curve = metrics.rtd(traces, 10.0, 1e6)
    assert curve.points == ((1, 1.0),)


def test_rtd_shape():
    traces = [((1, 50.0), (30, 10.0)), ((1, 80.0), (40, 11.0)), ((1, 60.0),)]
    exact = metrics.rtd(traces, 10.0, 0.0)
    loose = metrics.rtd(traces, 10.0, 10.0)
    assert exact.points == ((30, 1 / 3),)
    assert loose.points == ((30, 1 / 3), (40, 2 / 3))
    assert exact.to_text() == f"30 {1/3:.17g}\n"


@given(st.lists(st.lists(st.tuples(st.integers(1, 1000), st.integers(0, 100)), min_size=1, max_size=6),
                min_size=1, max_size=12), st.floats(0, 50), st.floats(0, 50))
@settings(max_examples=150, deadline=None)
def test_rtd_monotone_and_nested(raw, d1, d2):
    traces = []
    for pts in raw:
        pts = sorted(pts)
        tr, best = [], None
        for e, f in pts:
            if best is None or f < best:
                best = f
                tr.append((e, float(f)))
        traces.append(tuple(tr))
    lo, hi = sorted((d1, d2))
    a, b = metrics.rtd(traces, 10.0, lo), metrics.rtd(traces, 10.0, hi)
    probs = [p for _, p in b.points]
    assert probs == sorted(probs) and all(0 <= p <= 1 for p in probs)
    for e in sorted({e for tr in traces for e, _ in tr}):
        assert a.probability_at(e) <= b.probability_at(e)


# -- borda -------------------------------------------------------------------

def test_borda_one_always_best():
    gaps = {f"alg{a}": [a + 0.5 for _ in range(90)] for a in range(7)}
    scores = metrics.borda(gaps)
    assert scores["alg0"] == 90 and scores["alg6"] == 630


def test_borda_ties():
    assert metrics.borda({"a": [1.0] * 10, "b": [1.0] * 10}) == {"a": 15.0, "b": 15.0}


@given(st.integers(1, 6), st.integers(1, 15), st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_borda_rank_sum_and_oracle(n_alg, n_inst, rnd):
    table = {f"a{i}": [float(rnd.randint(0, 3)) for _ in range(n_inst)] for i in range(n_alg)}
    scores = metrics.borda(table)
    assert sum(scores.values()) == pytest.approx(n_inst * n_alg * (n_alg + 1) / 2)
    assert scores == pytest.approx(borda_by_hand(table))
    order = list(range(n_inst))
    rnd.shuffle(order)
    shuffled = {a: [v[i] for i in order] for a, v in table.items()}
    assert metrics.borda(shuffled) == pytest.approx(scores)


# -- head to head --------------------------------------------------------------

def test_h2h_self_and_halves():
    rows = [row(f"a:{i}", f=10 + i) for i in range(1, 5)]
    bounds = {f"a:{i}": 10 for i in range(1, 5)}
    assert metrics.head_to_head(rows, rows, bounds) == (0, 1.0)
    half = [row(r.instance, f=r.best_fitness, evals=50) for r in rows]
    assert metrics.head_to_head(half, rows, bounds)[1] == 0.5


def test_h2h_all_better_and_variant():
    bounds = {f"a:{i}": 10 for i in range(90)}
    a = [row(f"a:{i}", f=10, to_best=20) for i in range(90)]
    b = [row(f"a:{i}", f=11, to_best=10) for i in range(90)]
    assert metrics.head_to_head(a, b, bounds) == (90, 1.0)
    assert metrics.head_to_head(b, a, bounds, evals_to_best=True) == (-90, 0.5)


def test_h2h_errors():
    with pytest.raises(DataError):
        metrics.head_to_head([row(evals=0)], [row(evals=0)], {"a:1": 1})
    with pytest.raises(DataError):
        metrics.head_to_head([row("a:1")], [row("a:2")], {"a:1": 1, "a:2": 1})


# -- experiments and persistence ---------------------------------------------------

@pytest.fixture
def wt_file(tmp_path):
    path = tmp_path / "wt12.txt"
    path.write_text(smtwtp.format_orlib(wt_style_set(12, seed=1)))
    return path


def test_run_experiment_counts_and_determinism(wt_file):
    spec = ExperimentSpec("smtwtp", str(wt_file), "nts", "fi", "aa", "br", trials=1, limit=2, max_evals=2_000)
    rows = run_experiment(spec)
    assert len(rows) == 2 and [r.instance for r in rows] == ["wt12:1", "wt12:2"]
    assert rows == run_experiment(spec)
    three = run_experiment(ExperimentSpec("smtwtp", str(wt_file), trials=3, limit=2, max_evals=500, base_seed=7))
    assert [r.seed for r in three] == [7, 8, 9, 7, 8, 9]


def test_full_set_row_count(wt_file):
    spec = ExperimentSpec("smtwtp", str(wt_file), "vnd", "fi", trials=30, max_evals=1)
    assert len(run_experiment(spec)) == 3_750


def test_parallel_matches_serial(wt_file):
    base = ExperimentSpec("smtwtp", str(wt_file), trials=3, limit=2, max_evals=3_000)
    insts = smtwtp.parse_orlib(wt_file.read_text(), name="wt12")[:2]
    par = ExperimentSpec("smtwtp", str(wt_file), trials=3, limit=2, max_evals=3_000, jobs=2)
    assert run_trials(base, insts) == run_trials(par, insts)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("tsp", "x")
    with pytest.raises(ValueError):
        ExperimentSpec("smtwtp", "x", trials=0)
    with pytest.raises(ValueError):
        ExperimentSpec("smtwtp", "x", "nts", ordering=(1, 2, 3))
    assert ExperimentSpec("smtwtp", "x", "vnd-restart", "fi", ordering=(1, 2, 3)).label == "VND-ESI-FI-restart"


def test_csv_round_trip(tmp_path, wt_file):
    rows = run_experiment(ExperimentSpec("smtwtp", str(wt_file), trials=2, limit=2, max_evals=3_000))
    lrp_file = tmp_path / "lrp.txt"
    lrp_file.write_text(lrp.format_lrp(lrp.random_instance(6, 2, 0, rounding="none")))
    rows += run_experiment(ExperimentSpec("lrp", str(lrp_file), "vns", trials=2, max_evals=2_000))
    write_rows(tmp_path / "out", rows)
    back = read_rows(tmp_path / "out")
    assert back == rows
    assert [r.trace for r in back] == [r.trace for r in rows]
    assert all(isinstance(r.feasible, bool) for r in back if r.instance == "lrp")
    header = (tmp_path / "out" / "rows.csv").read_text().splitlines()[0]
    assert header == "instance,algorithm,trial,seed,best_fitness,evals_to_best,evals_total,h_max,feasible,termination"
    refs = {r.instance: min(x.best_fitness for x in rows if x.instance == r.instance) for r in rows}
    assert metrics.summarize(back, refs) == metrics.summarize(rows, refs)


def test_read_rows_rejects_bad_files(tmp_path):
    with pytest.raises(DataError):
        read_rows(tmp_path)
    (tmp_path / "rows.csv").write_text("a,b\n1,2\n")
    with pytest.raises(DataError, match="columns"):
        read_rows(tmp_path)


# -- command line -------------------------------------------------------------------

def test_cli_run_and_analyze(tmp_path, wt_file, capsys):
    out = tmp_path / "res"
    base = ["run", "--problem", "smtwtp", "--instances", str(wt_file), "--limit", "3", "--trials", "2",
            "--max-evals", "3000", "--out", str(out)]
    assert cli.main(base + ["--step", "fi"]) == 0
    assert cli.main(base + ["--algo", "vnd-restart", "--ordering", "ESI", "--step", "fi", "--append"]) == 0
    rows = read_rows(out)
    optima = tmp_path / "opt.txt"
    best = {r.instance: min(x.best_fitness for x in rows if x.instance == r.instance) for r in rows}
    optima.write_text(" ".join(str(best.get(f"wt12:{j}", 0)) for j in range(1, 126)))
    capsys.readouterr()

    assert cli.main(["analyze", "--rows", str(out), "--optima", str(optima), "--report", "summary"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary) == {"NTS-(FI,AA,BR)", "VND-ESI-FI-restart", "_convention"}
    assert "max(ref, 1)" in summary["_convention"]

    rtd_path = tmp_path / "rtd.txt"
    assert cli.main(["analyze", "--rows", str(out), "--optima", str(optima), "--report", "rtd",
                     "--delta", "5", "--out", str(rtd_path)]) == 0
    assert rtd_path.read_text().startswith("# NTS-(FI,AA,BR) delta=5")

    assert cli.main(["analyze", "--rows", str(out), "--optima", str(optima), "--report", "borda"]) == 0
    scores = json.loads(capsys.readouterr().out)
    assert sum(scores.values()) == pytest.approx(3 * 3)
    assert cli.main(["analyze", "--rows", str(out), "--optima", str(optima), "--report", "h2h",
                     "--a", "NTS-(FI,AA,BR)", "--b", "VND-ESI-FI-restart"]) == 0
    h2h = json.loads(capsys.readouterr().out)
    assert h2h["r_eval"] == 1.0 and -3 <= h2h["n_gt"] <= 3


def test_cli_lrp_with_sidecar(tmp_path, capsys):
    d = tmp_path / "inst"
    d.mkdir()
    for i in range(2):
        (d / f"p{i}.txt").write_text(lrp.format_lrp(lrp.random_instance(7, 2, i)))
    out = tmp_path / "res"
    assert cli.main(["run", "--problem", "lrp", "--instances", str(d), "--algo", "vns", "--trials", "1",
                     "--max-evals", "2000", "--out", str(out)]) == 0
    (tmp_path / "b.txt").write_text("p0 1\np1 1\n")
    assert cli.main(["analyze", "--rows", str(out), "--optima", str(tmp_path / "b.txt"), "--report", "borda"]) == 0
    assert json.loads(capsys.readouterr().out) == {"VNS-FD": 2.0}


@pytest.mark.parametrize("argv", [
    [], ["bogus"], ["run", "--problem", "smtwtp"], ["run", "--problem", "x", "--instances", "a", "--out", "b"],
    ["run", "--problem", "smtwtp", "--instances", "a", "--out", "b", "--trials", "0"],
    ["run", "--problem", "smtwtp", "--instances", "a", "--out", "b", "--ordering", "ESI"],
    ["run", "--problem", "smtwtp", "--instances", "a", "--out", "b", "--algo", "vnd", "--ordering", "EEI"],
])
def test_cli_usage_errors_exit_1(argv, capsys):
    assert cli.main(argv) == 1


def test_cli_data_errors_exit_2(tmp_path, wt_file, capsys):
    assert cli.main(["run", "--problem", "smtwtp", "--instances", str(tmp_path / "none"), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 three")
    assert cli.main(["run", "--problem", "smtwtp", "--instances", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert cli.main(["analyze", "--rows", str(tmp_path / "nothing"), "--optima", str(bad)]) == 2
    out = tmp_path / "res"
    cli.main(["run", "--problem", "smtwtp", "--instances", str(wt_file), "--limit", "1", "--trials", "1",
              "--max-evals", "200", "--out", str(out)])
    too_high = tmp_path / "high.txt"
    too_high.write_text(" ".join([str(10**9)] * 125))
    assert cli.main(["analyze", "--rows", str(out), "--optima", str(too_high)]) == 2
    assert cli.main(["analyze", "--rows", str(out), "--optima", str(tmp_path / "short.txt")]) == 2
    (tmp_path / "short.txt").write_text("1 2 3")
    assert cli.main(["analyze", "--rows", str(out), "--optima", str(tmp_path / "short.txt")]) == 2


def test_help_exits_zero(capsys):
    assert cli.main(["--help"]) == 0
