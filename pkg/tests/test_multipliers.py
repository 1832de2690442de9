import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from lpcircle.circle import (
    FreqInterval,
    Partition,
    SampledFunction,
    dyadic_partition,
    lp_norm,
    random_function,
    random_partition,
    relative_error,
    singleton_partition,
)
from lpcircle.errors import IntervalOutOfWindow, LengthMismatch, NonpositiveWeight, ZeroDenominator
from lpcircle.multipliers import (
    FunctionSequence,
    apply_multiplier,
    embed,
    op_P_u,
    op_T,
    op_T_u,
    random_sequence,
    riesz_multiplier,
    riesz_projection,
    square_function,
    theorem2_ratio,
    theorem2_sweep,
)
from lpcircle.weights import catalog

seeds = st.integers(0, 2**32 - 1)


def _interval(rng, n):
    a = int(rng.integers(-n // 2, n // 2))
    b = int(rng.integers(a, n // 2))
    return FreqInterval(a, b)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_multiplier_matches_direct_sum(seed):
    rng = np.random.default_rng(seed)
    f = random_function(rng, 32)
    iv = _interval(rng, 32)
    want = oracles.multiplier(f.samples, iv.a, iv.b)
    assert relative_error(apply_multiplier(f, iv).samples, want) < 1e-10


def test_multiplier_on_exponentials():
    f = SampledFunction.exponential(3, 16) + SampledFunction.exponential(-5, 16)
    kept = apply_multiplier(f, FreqInterval(0, 7))
    assert kept.allclose(SampledFunction.exponential(3, 16))
    assert np.allclose(apply_multiplier(f, FreqInterval(4, 6)).samples, 0)


def test_multiplier_is_idempotent_and_rejects_out_of_window():
    f = random_function(np.random.default_rng(3), 32)
    iv = FreqInterval(-4, 9)
    once = apply_multiplier(f, iv)
    assert relative_error(apply_multiplier(once, iv).samples, once.samples) < 1e-13
    with pytest.raises(IntervalOutOfWindow):
        apply_multiplier(f, FreqInterval(0, 16))


def test_riesz_projection_keeps_analytic_part():
    f = SampledFunction.exponential(2, 16) + SampledFunction.exponential(-2, 16) + SampledFunction.constant(1, 16)
    want = SampledFunction.exponential(2, 16) + SampledFunction.constant(1, 16)
    assert riesz_projection(f).allclose(want)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_two_term_identity(seed):
    rng = np.random.default_rng(seed)
    f = random_function(rng, 64)
    iv = _interval(rng, 64)
    assert relative_error(riesz_multiplier(f, iv).samples, apply_multiplier(f, iv).samples) < 1e-10


def test_two_term_identity_at_window_edges():
    f = random_function(np.random.default_rng(5), 32)
    for iv in (FreqInterval(-16, 15), FreqInterval(-16, -16), FreqInterval(15, 15)):
        assert relative_error(riesz_multiplier(f, iv).samples, apply_multiplier(f, iv).samples) < 1e-10


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_square_function_parseval(seed):
    rng = np.random.default_rng(seed)
    f = random_function(rng, 64)
    full = dyadic_partition(64)
    assert math.isclose(lp_norm(square_function(f, full), 2), lp_norm(f, 2), rel_tol=1e-12)
    part = random_partition(rng, 64, 5)
    assert lp_norm(square_function(f, part), 2) <= lp_norm(f, 2) + 1e-10


def test_square_function_of_single_exponential():
    f = SampledFunction.exponential(5, 32, 3.0)
    assert np.allclose(square_function(f, singleton_partition(32)), 3.0)
    assert np.allclose(square_function(f, Partition.of([(0, 4)])), 0.0)
    assert square_function(f, Partition(())).tolist() == [0.0] * 32


def test_square_function_matches_oracle():
    rng = np.random.default_rng(8)
    f = random_function(rng, 32)
    part = random_partition(rng, 32, 4)
    pieces = [oracles.multiplier(f.samples, iv.a, iv.b) for iv in part]
    want = np.sqrt(sum(np.abs(p) ** 2 for p in pieces))
    assert relative_error(square_function(f, part), want) < 1e-12


def test_op_T_matches_oracle():
    rng = np.random.default_rng(9)
    part = random_partition(rng, 32, 5)
    fs = random_sequence(rng, part, 32)
    want = oracles.op_T(fs.values, [(iv.a, iv.b) for iv in part])
    assert relative_error(op_T(fs, part).samples, want) < 1e-10


def test_op_T_on_embedded_sequence_is_sum():
    rng = np.random.default_rng(10)
    part = dyadic_partition(32)
    fs = embed([random_function(rng, 32) for _ in part], part)
    assert relative_error(op_T(fs, part).samples, fs.values.sum(axis=0)) < 1e-12


def test_T_u_with_unit_weight_is_T():
    rng = np.random.default_rng(11)
    part = random_partition(rng, 32, 3)
    fs = random_sequence(rng, part, 32)
    assert relative_error(op_T_u(fs, part, np.ones(32)).samples, op_T(fs, part).samples) < 1e-13


def test_P_u_rows_sum_to_T_u():
    rng = np.random.default_rng(12)
    part = random_partition(rng, 64, 6)
    fs = random_sequence(rng, part, 64)
    u = catalog("cosine", {"c": 2.0}, 64).values
    rows = op_P_u(fs, part, u)
    assert relative_error(rows.values.sum(axis=0), op_T_u(fs, part, u).samples) < 1e-12


def test_T_u_intertwines():
    # u T_u(fs) = T(u fs)
    rng = np.random.default_rng(13)
    part = random_partition(rng, 64, 4)
    fs = random_sequence(rng, part, 64)
    u = catalog("power", {"delta": -0.3}, 64).values
    lhs = u * op_T_u(fs, part, u).samples
    rhs = op_T(FunctionSequence(fs.values * u), part).samples
    assert relative_error(lhs, rhs) < 1e-12


def test_length_and_weight_errors():
    part = Partition.of([(0, 1), (2, 3)])
    with pytest.raises(LengthMismatch):
        op_T(FunctionSequence.zeros(3, 16), part)
    with pytest.raises(LengthMismatch):
        FunctionSequence([np.zeros(8), np.zeros(16)])
    with pytest.raises(NonpositiveWeight):
        op_T_u(FunctionSequence.zeros(2, 16), part, -np.ones(16))


def test_function_sequence_is_read_only():
    fs = FunctionSequence.zeros(2, 8)
    with pytest.raises(ValueError):
        fs.values[0, 0] = 1


def test_theorem2_ratio_against_threshold_oracle():
    rng = np.random.default_rng(14)
    n = 32
    a = catalog("cosine", {"c": 2.0}, n)
    w = catalog("power", {"delta": -0.2}, n)
    part = random_partition(rng, n, 3)
    fs = random_sequence(rng, part, n)
    u = a.values / w.values
    t = oracles.op_T(fs.values * u, [(iv.a, iv.b) for iv in part]) / u
    num = oracles.weak_quasinorm(list(np.abs(t)), list(a.values))
    sq = np.sqrt(np.sum(np.abs(fs.values) ** 2, axis=0))
    den = 2 * math.pi / n * float(np.sum(sq * a.values))
    assert theorem2_ratio(fs, part, a, w) == pytest.approx(num / den, rel=1e-12)


def test_theorem2_ratio_zero_cases():
    part = Partition.of([(0, 3)])
    one = np.ones(16)
    assert theorem2_ratio(FunctionSequence.zeros(1, 16), part, one, one) == 0.0
    # spectrum outside the interval: numerator vanishes, denominator does not
    fs = FunctionSequence([SampledFunction.exponential(6, 16).samples])
    assert abs(theorem2_ratio(fs, part, one, one)) < 1e-15


def test_theorem2_ratio_rejects_zero_denominator():
    # a genuine sequence cannot have a zero envelope and a nonzero T, so force it
    class Hollow(FunctionSequence):
        def l2_pointwise(self):
            return np.zeros(self.n_samples)

    fs = Hollow([SampledFunction.exponential(1, 16).samples])
    with pytest.raises(ZeroDenominator):
        theorem2_ratio(fs, Partition.of([(0, 3)]), np.ones(16), np.ones(16))


def test_theorem2_ratio_warns_for_bad_weights():
    part = Partition.of([(0, 3)])
    fs = FunctionSequence([SampledFunction.exponential(1, 32).samples])
    w = catalog("step", {"low": 1.0, "high": 1e3}, 32)
    with pytest.warns(UserWarning):
        theorem2_ratio(fs, part, np.ones(32), w, check_classes=True)


def test_sweep_is_seeded():
    a = catalog("unit", n=32)
    s1 = theorem2_sweep(32, 10, 7, a, a)
    s2 = theorem2_sweep(32, 10, 7, a, a)
    assert s1.ratios.tolist() == s2.ratios.tolist()
    assert s1.max_ratio > 0
