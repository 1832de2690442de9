import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from lpcircle.circle import SampledFunction
from lpcircle.errors import NonpositiveWeight, UnknownCatalogEntry
from lpcircle.weights import (
    CatalogSpec,
    Weight,
    a1_implied_by_alpha1,
    a_infinity_certificate,
    alpha_p_constant,
    alpha_p_dual_constant,
    ap_constant,
    arc_averages,
    arc_minima,
    arc_sums,
    bootstrap_alpha_exponent,
    catalog,
    certify,
    lemma1_probe,
    lemma2_probe,
    lemma4_certificate,
    lemma4_constants,
    maximal_function,
    mix,
    parse_catalog_string,
    reverse_holder_probe,
    weak_quasinorm,
    weighted_lp_norm,
)

positive = st.lists(st.floats(0.1, 10.0), min_size=8, max_size=8)


def test_weight_rejects_nonpositive_and_complex():
    with pytest.raises(NonpositiveWeight):
        Weight(np.array([1.0, 0.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0]))
    with pytest.raises(NonpositiveWeight):
        Weight(np.ones(8) + 1e-3j)


def test_arc_tables_against_loops():
    v = np.arange(1.0, 9.0)
    sums, mins = arc_sums(v), arc_minima(v)
    for s in range(8):
        for length in range(1, 9):
            idx = [(s + i) % 8 for i in range(length)]
            assert sums[length - 1, s] == sum(v[i] for i in idx)
            assert mins[length - 1, s] == min(v[i] for i in idx)
    assert np.allclose(arc_averages(v)[-1], v.mean())


@given(positive)
@settings(max_examples=40, deadline=None)
def test_maximal_function_matches_arc_enumeration(vals):
    got = maximal_function(np.array(vals)).samples.real
    assert got.tolist() == oracles.maximal(vals)


def test_maximal_function_of_constant():
    assert np.allclose(maximal_function(np.full(16, 3.0)).samples, 3.0)


@given(positive, st.sampled_from([1.0, 1.5, 2.0, 3.0]))
@settings(max_examples=30, deadline=None)
def test_ap_constant_matches_oracle(vals, p):
    assert ap_constant(np.array(vals), p) == pytest.approx(oracles.ap_constant(vals, p), rel=1e-12)


def test_step_weight_a2_is_exact():
    # values 1 and 4 on halves: the worst arc straddles the jump with weight
    # fraction t on the high side, <w><w^-1> = (1 + 3t)(1 - 3t/4), maximal at t = 1/2
    w = catalog("step", {"low": 1.0, "high": 4.0, "fraction": 0.5}, 16)
    t = Fraction(1, 2)
    want = (1 + 3 * t) * (1 - Fraction(3, 4) * t)
    assert ap_constant(w, 2.0) == pytest.approx(float(want), rel=1e-14)
    assert float(want) == 1.5625


def test_unit_weight_constants_are_one():
    w = catalog("unit", n=64)
    for p in (1.0, 1.25, 1.5, 2.0, 4.0, 8.0):
        assert ap_constant(w, p) == 1.0
    for p in (1.0, 1.5, 2.0):
        assert alpha_p_constant(w, p) == 1.0


@given(positive)
@settings(max_examples=30, deadline=None)
def test_ap_is_nonincreasing_in_p(vals):
    w = Weight(np.array(vals))
    consts = [ap_constant(w, p) for p in (1.0, 1.25, 1.5, 2.0, 4.0, 8.0)]
    assert all(x >= y * (1 - 1e-13) for x, y in zip(consts, consts[1:]))
    assert consts[-1] >= 1.0 - 1e-13


def test_alpha_boundary_cases():
    w = catalog("cosine", {"c": 2.0}, 32)
    assert alpha_p_constant(w, 1.0) == ap_constant(w.power(2.0), 1.0)
    assert alpha_p_constant(w, 2.0) == ap_constant(w.power(-1.0), 1.0)


@pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
def test_alpha_dual_form_is_a_power(p):
    # arc by arc, [w^{-1/(p-1)}]_{A_{p'/2}} is alpha_p raised to 1/(p-1)
    w = catalog("power", {"delta": -0.3}, 64)
    assert alpha_p_dual_constant(w, p) == pytest.approx(alpha_p_constant(w, p) ** (1 / (p - 1)), rel=1e-12)


def test_alpha1_implies_a1():
    for text in ("power:delta=-0.2", "cosine:c=1.5", "step:low=1,high=3", "maximal-power:gamma=0.3"):
        w = parse_catalog_string(text).at(128)
        assert a1_implied_by_alpha1(w)["passed"], text


def test_constants_are_cached():
    w = catalog("power", {"delta": 0.3}, 32)
    first = ap_constant(w, 2.0)
    assert ("A", 2.0) in w.cached_constants
    assert ap_constant(w, 2.0) == first


def test_weighted_norm_and_weak_quasinorm():
    f = np.array([1.0, 2.0, 2.0, 0.0, 3.0, 0.5, 1.0, 4.0])
    a = np.array([1.0, 2.0, 1.0, 1.0, 0.5, 1.0, 3.0, 1.0])
    assert weak_quasinorm(f, a) == pytest.approx(oracles.weak_quasinorm(list(f), list(a)), rel=1e-14)
    assert weighted_lp_norm(f, 1.0, a) == pytest.approx(2 * math.pi / 8 * float(np.sum(f * a)))
    assert weak_quasinorm(np.zeros(8), a) == 0.0


@given(st.lists(st.floats(0.0, 5.0), min_size=8, max_size=8), positive)
@settings(max_examples=40, deadline=None)
def test_weak_quasinorm_matches_threshold_oracle(mags, a):
    assert weak_quasinorm(np.array(mags), np.array(a)) == pytest.approx(oracles.weak_quasinorm(mags, a), rel=1e-12)


def test_weak_below_strong():
    rng = np.random.default_rng(0)
    f = rng.random(64)
    a = catalog("cosine", {"c": 3.0}, 64)
    assert weak_quasinorm(f, a) <= weighted_lp_norm(f, 1.0, a) * (1 + 1e-12)


def test_mix_endpoints():
    w = catalog("power", {"delta": -0.2}, 32)
    a = catalog("cosine", {"c": 2.0}, 32)
    assert np.allclose(mix(w, a, 1.0).values, w.values)
    assert np.allclose(mix(w, a, 0.0).values, a.values)


def test_lemma4_constants_frozen():
    # exact rational values from the defining formulas
    for p, (c, a, b) in {
        Fraction(3, 2): (Fraction(3, 8), Fraction(1, 4), Fraction(3, 4)),
        Fraction(5, 4): (Fraction(5, 12), Fraction(1, 6), Fraction(5, 6)),
    }.items():
        k = lemma4_constants(float(p))
        assert k["c"] == pytest.approx(float(c), abs=1e-15)
        assert k["a"] == pytest.approx(float(a), abs=1e-15)
        assert k["b"] == pytest.approx(float(b), abs=1e-15)


@pytest.mark.parametrize("p", np.linspace(1.01, 1.99, 12))
def test_lemma4_identities_and_conjugate_exponents(p):
    k = lemma4_constants(p)
    c, a, b = k["c"], k["a"], k["b"]
    assert abs(b - 2 * c) < 1e-12
    assert abs((1 - a) / c - 2) < 1e-12
    assert abs(a * (p - 1) / c + (2 - p) / (2 * c) - 1) < 1e-12
    assert 0 < a < 1


def test_lemma4_certificate_on_member_weight():
    rep = lemma4_certificate(catalog("power", {"delta": -0.2}, 64), 1.5)
    assert rep["passed"] and rep["worst_margin"] >= 0
    assert rep["worst_holder1_margin"] >= -1e-12 and rep["worst_holder2_margin"] >= -1e-12
    with pytest.raises(ValueError):
        lemma4_certificate(catalog("unit", n=16), 2.0)


def test_reverse_holder_and_bootstrap():
    w = catalog("power", {"delta": -0.2}, 128)
    rh = reverse_holder_probe(w, [1.05, 1.5, 2.0])
    assert rh["best_s"] == 2.0 and rh["constant"] < 2.0
    q = bootstrap_alpha_exponent(w)
    assert q is not None and 1 < q < 2
    with pytest.raises(ValueError):
        reverse_holder_probe(w, [1.0])


def test_a_infinity_certificate():
    assert a_infinity_certificate(catalog("unit", n=32))["p"] == 1.0
    heavy = Weight(np.concatenate([np.full(16, 1e-8), np.ones(16)]))
    assert a_infinity_certificate(heavy)["p"] is None


def test_mixing_probe_shapes_and_guards():
    w = parse_catalog_string("power:delta=-0.1").at(32)
    a = parse_catalog_string("cosine:c=2").at(32)
    rep = lemma1_probe(w, a, 1.5, [0.95, 0.99])
    assert [r["t"] for r in rep["rows"]] == [0.95, 0.99]
    assert all(r["growth"] > 0 for r in rep["rows"])
    assert lemma2_probe(w, a, 1.5, [1.05])["rows"][0]["r"] == pytest.approx(1.575)
    with pytest.raises(ValueError):
        lemma1_probe(w, a, 1.5, [1.2])
    with pytest.raises(ValueError):
        lemma1_probe(Weight(np.ones(32)), a, 1.5, [0.9])


def test_maximal_power_weight_squares_into_a1():
    # w = (Mf)^gamma with gamma < 1/2 has w^2 = (Mf)^{2 gamma} in A_1
    spec = parse_catalog_string("maximal-power:gamma=0.4,arc=0.25")
    cert = certify(spec, lambda w: alpha_p_constant(w, 1.0), n=64)
    assert cert["certified"]


def test_catalog_parsing():
    spec = parse_catalog_string("power:delta=-0.4,x0=0")
    assert spec == CatalogSpec("power", (("x0", 0.0), ("delta", -0.4)))
    assert str(spec) == "power:delta=-0.4,x0=0.0"
    assert spec.at(16).source == spec
    with pytest.raises(UnknownCatalogEntry):
        parse_catalog_string("nope")
    with pytest.raises(ValueError):
        catalog("cosine", {"c": 0.5}, 16)


def test_power_weight_is_clipped_not_infinite():
    w = catalog("power", {"delta": -0.5}, 16)
    assert np.isfinite(w.values).all()
    assert w.values[0] == pytest.approx((math.pi / 16) ** -0.5)


def test_weight_resampling_needs_source():
    with pytest.raises(ValueError):
        Weight(np.ones(8)).at(16)
    assert catalog("unit", n=8).at(32).n_samples == 32


def test_weight_from_sampled_function():
    w = Weight(SampledFunction(np.full(8, 2.0 + 0j)))
    assert w.values.tolist() == [2.0] * 8
