import pytest

from ntsearch import lrp, smtwtp
from ntsearch.baselines import run_vnd, run_vns, shake
from ntsearch.core import StepKind, Termination
from ntsearch.problem import CountingAdapter, ProblemAdapter
from ntsearch.rng import Rng
from tests.test_core import Line, Single, small_smtwtp


class Flat(ProblemAdapter):
    """Every solution has the same fitness, so nothing ever improves."""

    k = 2

    def evaluate(self, s):
        return 1.0

    def random_solution(self, rng):
        return 0

    def move_blocks(self, s, nid):
        return [(3, None)]

    def block_move(self, s, nid, key, i):
        return s + i + 1


def test_vnd_global_fixed_point_single_pass():
    rec = run_vnd(CountingAdapter(Flat()), (2, 1), StepKind.FI, Rng(0))
    assert rec.termination is Termination.PATH_EMPTY
    assert rec.evals_total == 1 + 3 + 3 and rec.trace == ((1, 1.0),)


def test_vnd_single_neighborhood_is_one_descent():
    rec = run_vnd(Single(), (1,), StepKind.FD, Rng(3))
    assert rec.best_fitness == 0.0 and rec.termination is Termination.PATH_EMPTY


def test_vnd_restart_uses_whole_budget():
    counter = CountingAdapter(small_smtwtp(1, n=6))
    rec = run_vnd(counter, (1, 2, 3), StepKind.FI, Rng(0), max_evals=5_000, restart=True)
    assert rec.termination is Termination.BUDGET_EXHAUSTED
    assert rec.evals_total == counter.calls == 5_000
    fits = [f for _, f in rec.trace]
    assert all(a > b for a, b in zip(fits, fits[1:]))


def test_vnd_rejects_bad_ordering():
    with pytest.raises(ValueError):
        run_vnd(small_smtwtp(0), (1, 1, 2))


def test_vnd_result_is_local_optimum_for_every_neighborhood():
    adapter = small_smtwtp(4, n=7)
    rec = run_vnd(adapter, (1, 3, 2), StepKind.FI, Rng(2))
    for nid in (1, 2, 3):
        assert all(adapter.evaluate(q) >= rec.best_fitness for q in adapter.neighbors(rec.best_solution, nid))


def test_vnd_deterministic():
    adapter = small_smtwtp(5, n=9)
    a = run_vnd(adapter, (1, 2, 3), StepKind.FI, max_evals=20_000, restart=True, seed=4)
    b = run_vnd(adapter, (1, 2, 3), StepKind.FI, max_evals=20_000, restart=True, seed=4)
    assert a == b


def test_shake_strength_is_number_of_moves():
    line = Line(top=50)
    assert shake(line, 25, 1, (1,), Rng(0)) == 24
    assert shake(line, 25, 5, (2,), Rng(0)) == 30
    assert shake(line, 25, 0, (1,), Rng(0)) == 25


def test_vns_budget_floor():
    counter = CountingAdapter(small_smtwtp(1, n=8))
    rec = run_vns(counter, (1, 2, 3), ((1,), (2,), (3,)), StepKind.FD, 8, Rng(0), max_evals=3)
    assert rec.termination is Termination.BUDGET_EXHAUSTED
    assert rec.evals_total == counter.calls == 3


def record_strengths(monkeypatch):
    import ntsearch.baselines as baselines

    seen = []
    real = baselines.shake

    def spy(adapter, solution, strength, shake_ids, rng):
        seen.append(strength)
        return real(adapter, solution, strength, shake_ids, rng)

    monkeypatch.setattr(baselines, "shake", spy)
    return seen


def test_vns_strength_cycles_without_improvement(monkeypatch):
    seen = record_strengths(monkeypatch)
    run_vns(Flat(), (1, 2), ((1,), (2,)), StepKind.FI, 3, Rng(0), max_evals=60)
    assert seen[:7] == [1, 2, 3, 1, 2, 3, 1]


def test_vns_strength_resets_after_improvement(monkeypatch):
    seen = record_strengths(monkeypatch)

    class Ramp(Line):
        # start high so the first descent improves; afterwards x=0 can never be beaten
        def random_solution(self, rng):
            return 30

    run_vns(Ramp(top=40), (2,), ((1,),), StepKind.FD, 4, Rng(0), max_evals=400)
    assert seen[0] == 1 and seen[1] == 1
    assert seen[1:6] == [1, 2, 3, 4, 1]


def test_vns_lrp_defaults_run():
    inst = lrp.random_instance(8, 3, 1)
    adapter = CountingAdapter(lrp.LrpAdapter(inst, accelerate=False))
    rec = run_vns(adapter, lrp.VNS_SHAKE, lrp.VNS_GROUPS, StepKind.FD, inst.n + inst.m, Rng(1), max_evals=4_000)
    assert rec.evals_total == adapter.calls == 4_000
    lrp.check_solution(inst, rec.best_solution)
    assert rec.best_fitness == lrp.evaluate(inst, rec.best_solution)


def test_vns_validation():
    adapter = small_smtwtp(0)
    with pytest.raises(ValueError):
        run_vns(adapter, (1,), (), max_shake=1)
    with pytest.raises(ValueError):
        run_vns(adapter, (1,), ((1,),), max_shake=0)


def test_vns_kernel_matches_fallback():
    inst = smtwtp.SmtwtpInstance([3, 5, 2, 7, 4, 6, 1], [2, 1, 3, 1, 2, 2, 1], [4, 9, 6, 15, 12, 20, 3])
    a = run_vns(smtwtp.SmtwtpAdapter(inst), (1, 2, 3), ((1,), (2,), (3,)), StepKind.FD, 7, Rng(3), 10_000)
    b = run_vns(smtwtp.SmtwtpAdapter(inst, False), (1, 2, 3), ((1,), (2,), (3,)), StepKind.FD, 7, Rng(3), 10_000)
    assert a == b
