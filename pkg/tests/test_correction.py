import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpcircle.circle import Partition, SampledFunction, dyadic_partition, function_from_string, random_partition
from lpcircle.correction import (
    CorrectionResult,
    _zero_nearest,
    correct,
    corrected_mass,
    default_b_grid,
    log_fit,
    pointwise_bound,
    sweep,
    verify_result,
)
from lpcircle.errors import PreconditionViolated
from lpcircle.multipliers import square_function
from lpcircle.weights import catalog


def _phases(seed, n, density=0.7):
    return function_from_string(f"phases:density={density}", n, np.random.default_rng(seed))


def test_corrected_mass_by_hand():
    f = SampledFunction(np.array([1, 1, 0.5, 0, 1, 1, 1, 1], dtype=complex))
    g = SampledFunction(np.array([1, 0, 0.5, 0, 1, 0.5, 1, 1], dtype=complex))
    a = np.array([1, 2, 1, 1, 1, 3, 1, 1.0])
    w = np.full(8, 2.0)
    # changed at samples 1 and 5: a-mass 5; sum |f|/w * a = (1+2+0.5+0+1+3+1+1)/2
    assert corrected_mass(f, g, w, a) == pytest.approx(5 / 4.75)
    assert corrected_mass(SampledFunction(np.zeros(8)), SampledFunction(np.zeros(8)), w, a) == 0.0


@pytest.mark.parametrize("strategy", ["zero-offenders", "damp"])
def test_correction_meets_target(strategy):
    n = 128
    f = _phases(1, n)
    w = np.ones(n)
    part = dyadic_partition(n)
    target = 0.5 * pointwise_bound(f, w, part)
    res = correct(f, w, w, part, target, strategy)
    assert res.converged
    assert np.max(square_function(res.g, part)) <= target
    assert verify_result(res, f, w, w, part)["passed"]
    assert ((res.phi >= 0) & (res.phi <= 1)).all()
    if strategy == "zero-offenders":
        assert set(np.unique(res.phi)) <= {0.0, 1.0}


def test_no_work_when_target_already_met():
    n = 64
    f = _phases(2, n)
    part = random_partition(np.random.default_rng(0), n, 4)
    res = correct(f, np.ones(n), np.ones(n), part, 10.0)
    assert res.iterations == 0 and res.epsilon_achieved == 0.0 and (res.phi == 1).all()


def test_weighted_correction():
    n = 64
    w = catalog("cosine", {"c": 2.0}, n)
    a = catalog("power", {"delta": -0.2}, n)
    f = SampledFunction(_phases(3, n).samples * w.values)
    part = dyadic_partition(n)
    res = correct(f, w, a, part, 0.3 * pointwise_bound(f, w, part), "damp")
    assert verify_result(res, f, w, a, part)["passed"]


def test_precondition():
    f = SampledFunction(np.full(16, 2.0 + 0j))
    with pytest.raises(PreconditionViolated):
        correct(f, np.ones(16), np.ones(16), dyadic_partition(16), 1.0)
    with pytest.raises(ValueError):
        correct(SampledFunction(np.ones(16)), np.ones(16), np.ones(16), dyadic_partition(16), 0.0)
    with pytest.raises(ValueError):
        correct(SampledFunction(np.ones(16)), np.ones(16), np.ones(16), dyadic_partition(16), 1.0, "shave")


def test_unreachable_target_ends_at_zero():
    # sigma = |mean g| everywhere, so only g = 0 meets a tiny target
    n = 16
    f = SampledFunction(np.ones(n, dtype=complex))
    res = correct(f, np.ones(n), np.ones(n), Partition.of([(0, 0)]), 0.01)
    assert res.converged and np.all(res.g.samples == 0)


def test_fallback_zeroes_nearest_live_sample_across_the_seam():
    phi = np.array([1.0, 0, 0, 0, 0, 0, 1.0, 0])
    fv = np.ones(8, dtype=complex)
    _zero_nearest(phi, fv, 7)
    assert phi.tolist() == [0.0, 0, 0, 0, 0, 0, 1.0, 0]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_sweep_is_monotone(seed):
    n = 64
    f = _phases(seed, n)
    w = np.ones(n)
    part = random_partition(np.random.default_rng(seed), n, 5)
    grid = default_b_grid(f, w, part, points=8)
    curve = sweep(f, w, w, part, grid, keep_results=True)
    eps = [r["epsilon"] for r in curve.rows]
    assert all(x >= y for x, y in zip(eps, eps[1:]))
    for r in curve.rows:
        assert verify_result(r["result"], f, w, w, part)["passed"]


def test_sweep_rejects_bad_grid():
    f = SampledFunction(np.ones(16))
    with pytest.raises(ValueError):
        sweep(f, np.ones(16), np.ones(16), dyadic_partition(16), [2.0, 1.0])
    with pytest.raises(ValueError):
        sweep(f, np.ones(16), np.ones(16), dyadic_partition(16), [])


def test_sweep_csv_format():
    n = 32
    f = _phases(4, n)
    curve = sweep(f, np.ones(n), np.ones(n), dyadic_partition(n), [0.3, 0.6, 0.9])
    lines = curve.to_csv().splitlines()
    assert lines[0] == "B_target,epsilon,B_achieved,iterations,converged"
    assert len(lines) == 4 and lines[1].startswith("0.3,")


def test_log_fit_recovers_a_line():
    rows = [{"epsilon": e, "B_achieved": 2.0 * (1 + abs(math.log(e))) + 0.5} for e in (0.5, 0.1, 0.01)]
    fit = log_fit(rows)
    assert fit["slope"] == pytest.approx(2.0) and fit["intercept"] == pytest.approx(0.5)
    assert log_fit(rows[:1]) is None
    assert log_fit([{"epsilon": 0.0, "B_achieved": 1.0}] * 3) is None


def test_result_json_round_trip():
    n = 32
    f = _phases(5, n)
    res = correct(f, np.ones(n), np.ones(n), dyadic_partition(n), 0.4)
    back = CorrectionResult.from_json(res.to_json())
    assert back.g.samples.tolist() == res.g.samples.tolist()
    assert back.phi.tolist() == res.phi.tolist() and back.converged == res.converged


def test_verify_flags_inconsistent_result():
    n = 32
    f = _phases(6, n)
    part = dyadic_partition(n)
    res = correct(f, np.ones(n), np.ones(n), part, 0.4)
    res.epsilon_achieved += 0.1
    assert not verify_result(res, f, np.ones(n), np.ones(n), part)["passed"]


def test_default_grid_spans_the_initial_bound():
    n = 32
    f = _phases(7, n)
    part = dyadic_partition(n)
    grid = default_b_grid(f, np.ones(n), part, points=5)
    top = pointwise_bound(f, np.ones(n), part)
    assert grid[-1] == pytest.approx(1.05 * top) and grid[0] == pytest.approx(0.05 * top)
    assert default_b_grid(SampledFunction(np.zeros(n)), np.ones(n), part) == [1.0]
