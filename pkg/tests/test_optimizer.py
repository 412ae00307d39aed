import math

import numpy as np
import pytest

from depbounds.bounds import lower_bound_score, sharp_upper_scc
from depbounds.copulas import Copula, JointDist, comonotone, discretize, symmetrize
from depbounds.functionals import FunctionalParams, energy_score
from depbounds.optimizer import (
    SearchProblem,
    brute_force,
    local_search,
    objective_value,
    verify_hat_counterexample,
)


def problem(objective, n=5, d=2, beta=1.0, **kw):
    return SearchProblem(objective, beta=beta, d=d, n=n, **kw)


# -- validation ------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(objective="max-foo"),
        dict(objective="max-scc", n=1),
        dict(objective="max-scc", beta=2.0),
        dict(objective="max-scc", restarts=0),
        dict(objective="min-es"),
        dict(objective="min-es", y=(0.5,)),
        dict(objective="min-es", y=(0.5, 1.5)),
    ],
)
def test_invalid_problems(kwargs):
    with pytest.raises(ValueError):
        SearchProblem(**kwargs)


# -- oracles ---------------------------------------------------------------------


def test_n2_tie():
    res = local_search(problem("max-scc", n=2))
    assert res.value == pytest.approx(math.sqrt(2) / 4, abs=1e-15)
    bf = brute_force(problem("max-scc", n=2))
    assert bf.evaluations == 2


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_min_scc_is_identity(n):
    bf = brute_force(problem("min-scc", n=n))
    assert np.array_equal(bf.permutations[0], np.arange(n))
    ls = local_search(problem("min-scc", n=n, restarts=5, seed=n))
    assert np.array_equal(ls.permutations[0], np.arange(n))


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("objective", ["max-scc", "min-scc"])
def test_local_search_matches_brute_force_n6(objective, beta):
    p = problem(objective, n=6, beta=beta, restarts=50, seed=1)
    assert local_search(p).value == brute_force(p).value


@pytest.mark.parametrize("objective, y", [("min-es", (0.5, 0.5)), ("max-es", (0.0, 0.0)), ("min-es", (0.0, 0.3))])
def test_es_objectives_match_brute_force(objective, y):
    p = problem(objective, n=5, y=y, restarts=50, seed=2)
    assert local_search(p).value == pytest.approx(brute_force(p).value, abs=1e-12)


def test_d3_small_brute_force():
    p = problem("max-scc", n=3, d=3, restarts=30, seed=0)
    bf = brute_force(p)
    assert bf.evaluations == 36
    assert local_search(p).value == pytest.approx(bf.value, abs=1e-12)


def test_brute_force_limit():
    with pytest.raises(ValueError, match="limit >= 40320"):
        brute_force(problem("max-scc", n=8), limit=1000)


# -- result invariants ---------------------------------------------------------------


@pytest.mark.parametrize("objective", ["max-scc", "min-scc", "min-es", "max-es"])
def test_result_invariants(objective):
    y = (0.2, 0.7) if objective.endswith("es") else None
    p = problem(objective, n=12, y=y, restarts=6, seed=3)
    res = local_search(p)
    assert res.value == pytest.approx(objective_value(p, res.best), abs=1e-10)
    finals = [t.final_value for t in res.restarts]
    assert res.value == (max(finals) if p.maximize else min(finals))
    for t in res.restarts:
        assert (t.final_value >= t.start_value - 1e-12) if p.maximize else (t.final_value <= t.start_value + 1e-12)
    # each trace is monotone in the objective
    for r in range(p.restarts):
        vals = [v for rr, _, v in res.history if rr == r]
        steps = np.diff(vals)
        assert np.all(steps > 0) if p.maximize else np.all(steps < 0)


def test_restart_zero_starts_at_identity():
    res = local_search(problem("min-scc", n=10, restarts=1))
    assert res.restarts[0].iterations == 0


@pytest.mark.parametrize("workers", [1, 3])
def test_bit_identical(workers):
    p = problem("max-scc", n=16, restarts=4, seed=9, workers=workers)
    a, b = local_search(p), local_search(p)
    assert a.value == b.value and a.best == b.best and a.history == b.history


def test_worker_count_does_not_change_result():
    a = local_search(problem("max-scc", n=16, restarts=4, seed=9, workers=1))
    b = local_search(problem("max-scc", n=16, restarts=4, seed=9, workers=4))
    assert a.value == b.value and a.history == b.history


def test_d3_search_runs():
    res = local_search(problem("max-scc", n=10, d=3, restarts=3, seed=0))
    assert len(res.permutations) == 2
    assert res.value <= sharp_upper_scc(3)[0] + 1 / 10


@pytest.mark.parametrize("beta", [1.0, 1.5])
def test_symmetrized_min_es_not_worse(beta):
    p = problem("min-es", n=8, beta=beta, y=(0.5, 0.5), restarts=10, seed=4)
    res = local_search(p)
    sym = JointDist.uniform(Copula.from_discrete(symmetrize(res.best)))
    value = energy_score(sym, [0.5, 0.5], FunctionalParams(beta, "exact")).value
    assert value <= res.value + 1e-10


def test_min_es_respects_bound_floor():
    res = local_search(problem("min-es", n=32, y=(0.5, 0.5), restarts=3, seed=0))
    assert res.value >= lower_bound_score(2, 1.0) - 0.5 * sharp_upper_scc(2)[0]


def test_max_scc_n64():
    res = local_search(problem("max-scc", n=64, restarts=20, seed=0))
    assert 0.515 <= res.value <= math.pi / 6 + 1 / 64


def test_es_minimizer_at_origin_is_not_comonotone():
    p = problem("min-es", n=6, y=(0.0, 0.0))
    best = brute_force(p)
    plus = objective_value(p, discretize(comonotone(), 6))
    assert best.value < plus - 1e-9


def test_write_trace(tmp_path):
    res = local_search(problem("max-scc", n=6, restarts=2))
    path = tmp_path / "trace.csv"
    res.write_trace(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "restart,iteration,objective"
    assert len(lines) == 1 + len(res.history)


# -- hat comparison ---------------------------------------------------------------


def test_hat_comparison_record():
    cmp_ = verify_hat_counterexample(samples=20_000, seed=0)
    rec = cmp_.to_record()
    assert rec["reference"] == pytest.approx(math.sqrt(2) / 3)
    assert cmp_.status in {"confirmed", "inconclusive", "contradicted"}
    assert cmp_.es_hat.value >= cmp_.floor


def test_hat_comparison_small_sample_is_inconclusive():
    assert verify_hat_counterexample(samples=2_000, seed=1).status == "inconclusive"
