"""Weights on the sampled circle and their class constants.

Arcs are all N*N contiguous windows of samples (start s, length L, wrapping
modulo N). Every supremum over arcs is an exhaustive scan. Arc sums are
accumulated sample by sample in a fixed order, S(s, L) = S(s, L-1) + w[s+L-1],
so any evaluation that follows the same order reproduces them bitwise.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import maximum_filter1d

from .circle import SampledFunction, check_resolution, grid
from .errors import NonpositiveWeight, UnknownCatalogEntry

POSITIVITY_FLOOR = 1e-12
A_INFINITY_GRID = (1.0, 1.25, 1.5, 2.0, 4.0, 8.0)
A_INFINITY_CAP = 100.0
GROWTH_THRESHOLD = 1.1


class Weight:
    """Strictly positive sampled function with a cache of class constants."""

    def __init__(self, base, source: "CatalogSpec | None" = None):
        if not isinstance(base, SampledFunction):
            base = SampledFunction(np.asarray(base, dtype=complex))
        if np.any(base.samples.imag != 0):
            raise NonpositiveWeight("weights are real valued")
        values = base.samples.real.copy()
        if not np.all(values > POSITIVITY_FLOOR):
            raise NonpositiveWeight(f"weight has samples <= {POSITIVITY_FLOOR}")
        values.setflags(write=False)
        self.base = base
        self.values = values
        self.source = source
        self._cache: dict[tuple, float] = {}
        self._lock = threading.Lock()

    @property
    def n_samples(self) -> int:
        return self.values.size

    @property
    def samples(self) -> np.ndarray:
        return self.values

    def cached(self, key: tuple, compute: Callable[[], float]) -> float:
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = compute()
        with self._lock:
            return self._cache.setdefault(key, value)

    @property
    def cached_constants(self) -> dict[tuple, float]:
        with self._lock:
            return dict(self._cache)

    def power(self, exponent: float) -> "Weight":
        return Weight(self.values ** exponent)

    def at(self, n: int) -> "Weight":
        """Resample from the catalog entry this weight was built from."""
        if self.source is None:
            raise ValueError("weight has no catalog source; cannot change resolution")
        return self.source.at(n)

    def __repr__(self) -> str:
        label = str(self.source) if self.source is not None else "sampled"
        return f"Weight({label}, N={self.n_samples})"


def _values(w) -> np.ndarray:
    if isinstance(w, Weight):
        return w.values
    if isinstance(w, SampledFunction):
        return w.samples.real
    return np.asarray(w, dtype=float)


# ----------------------------------------------------------------------------
# arc scans


def arc_sums(values: np.ndarray) -> np.ndarray:
    """Row L-1, column s holds values[s] + ... + values[s+L-1] (indices mod N)."""
    v = np.asarray(values, dtype=float)
    n = v.size
    out = np.empty((n, n))
    acc = np.zeros(n)
    for length in range(1, n + 1):
        acc = acc + np.roll(v, -(length - 1))
        out[length - 1] = acc
    return out


def arc_averages(values: np.ndarray) -> np.ndarray:
    n = np.asarray(values).size
    return arc_sums(values) / np.arange(1, n + 1)[:, None]


def arc_minima(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    n = v.size
    out = np.empty((n, n))
    acc = np.full(n, np.inf)
    for length in range(1, n + 1):
        acc = np.minimum(acc, np.roll(v, -(length - 1)))
        out[length - 1] = acc
    return out


def _max_over_containing_arcs(table: np.ndarray) -> np.ndarray:
    """For each sample m, the max of table[L-1, s] over arcs (s, L) containing m."""
    n = table.shape[1]
    out = np.full(n, -np.inf)
    for length in range(1, n + 1):
        # window of starts s in [m-L+1, m]
        best = maximum_filter1d(table[length - 1], size=length, mode="wrap", origin=(length - 1) // 2)
        np.maximum(out, best, out=out)
    return out


def maximal_function(w) -> SampledFunction:
    """Uncentred Hardy-Littlewood maximal function over all arcs through each sample."""
    values = _values(w)
    return SampledFunction(_max_over_containing_arcs(arc_averages(values)))


def ap_constant(w, p: float) -> float:
    """Muckenhoupt constant sup_I <w>_I <w^{-1/(p-1)}>_I^{p-1}; for p = 1, max Mw/w."""
    if p < 1:
        raise ValueError("p must be >= 1")
    weight = w if isinstance(w, Weight) else Weight(_values(w))
    return weight.cached(("A", float(p)), lambda: _ap_constant(weight.values, p))


def _ap_constant(values: np.ndarray, p: float) -> float:
    if p == 1:
        return float(np.max(_max_over_containing_arcs(arc_averages(values)) / values))
    dual = arc_averages(values ** (-1.0 / (p - 1)))
    return float(np.max(arc_averages(values) * dual ** (p - 1)))


def alpha_p_constant(w, p: float) -> float:
    """sup_I <w^{-1/(p-1)}>^{p-1} <w^{2/(2-p)}>^{(2-p)/2}; alpha_1 = [w^2]_A1, alpha_2 = [w^-1]_A1."""
    if not 1 <= p <= 2:
        raise ValueError("alpha_p is defined for 1 <= p <= 2")
    weight = w if isinstance(w, Weight) else Weight(_values(w))
    return weight.cached(("alpha", float(p)), lambda: _alpha_p_constant(weight.values, p))


def _alpha_p_constant(values: np.ndarray, p: float) -> float:
    if p == 1:
        return _ap_constant(values ** 2, 1.0)
    if p == 2:
        return _ap_constant(1.0 / values, 1.0)
    neg = arc_averages(values ** (-1.0 / (p - 1)))
    pos = arc_averages(values ** (2.0 / (2 - p)))
    return float(np.max(neg ** (p - 1) * pos ** ((2 - p) / 2)))


def alpha_p_dual_constant(w, p: float) -> float:
    """[w^{-1/(p-1)}]_{A_{p'/2}}, the equivalent form of alpha_p for 1 < p < 2."""
    if not 1 < p < 2:
        raise ValueError("dual form needs 1 < p < 2")
    q = p / (p - 1) / 2
    return ap_constant(Weight(_values(w) ** (-1.0 / (p - 1))), q)


def a1_implied_by_alpha1(w, rtol: float = 0.0) -> dict:
    """[w]_A1 <= sqrt([w]_alpha1), the Cauchy-Schwarz inclusion alpha_1 in A_1."""
    a1 = ap_constant(w, 1.0)
    alpha1 = alpha_p_constant(w, 1.0)
    bound = math.sqrt(alpha1)
    return {"a1": a1, "alpha1": alpha1, "bound": bound, "passed": a1 <= bound * (1 + rtol)}


def a_infinity_certificate(w, cap: float = A_INFINITY_CAP, p_grid: Sequence[float] = A_INFINITY_GRID) -> dict:
    """First p in the grid whose A_p constant is below the cap (p is None if none)."""
    scanned = {}
    for p in p_grid:
        value = ap_constant(w, p)
        scanned[p] = value
        if value < cap:
            return {"p": p, "constant": value, "scanned": scanned}
    return {"p": None, "constant": None, "scanned": scanned}


def weighted_lp_norm(f, p: float, w) -> float:
    """(2pi/N sum |f|^p w)^(1/p)."""
    if p <= 0:
        raise ValueError("p must be positive")
    mags = np.abs(f.samples if isinstance(f, SampledFunction) else np.asarray(f))
    wv = _values(w)
    return float((2 * np.pi / mags.size * np.sum(mags ** p * wv)) ** (1.0 / p))


def weak_quasinorm(f, a) -> float:
    """sup_t t * a({|f| > t}), evaluated exactly at the sample magnitudes.

    As t increases to a sample value v the level set is {|f| >= v}, so the
    supremum is the largest v * a({|f| >= v}).
    """
    mags = np.abs(f.samples if isinstance(f, SampledFunction) else np.asarray(f))
    av = _values(a)
    order = np.argsort(-mags, kind="stable")
    v = mags[order]
    mass = np.cumsum(av[order]) * (2 * np.pi / mags.size)
    last_of_tie = np.append(v[1:] != v[:-1], True)
    cand = v[last_of_tie] * mass[last_of_tie]
    return float(cand.max(initial=0.0))


def mix(w, a, t: float) -> Weight:
    """Pointwise w^t a^(1-t)."""
    return Weight(_values(w) ** t * _values(a) ** (1 - t))


# ----------------------------------------------------------------------------
# probes and certificates


def reverse_holder_constant(w, s: float) -> float:
    values = _values(w)
    return float(np.max(arc_averages(values ** s) ** (1.0 / s) / arc_averages(values)))


def reverse_holder_probe(w, s_grid: Sequence[float], cap: float = 2.0) -> dict:
    """Largest s in the grid with sup_I <w^s>^{1/s} / <w> below the cap."""
    rows = []
    best = None
    for s in sorted(s_grid):
        if s <= 1:
            raise ValueError("reverse Holder exponents must exceed 1")
        value = reverse_holder_constant(w, s)
        ok = value < cap
        rows.append({"s": s, "constant": value, "below_cap": ok})
        if ok:
            best = (s, value)
    return {
        "best_s": None if best is None else best[0],
        "constant": None if best is None else best[1],
        "cap": cap,
        "rows": rows,
    }


def bootstrap_alpha_exponent(w, s_grid: Sequence[float] = (1.05, 1.1, 1.2, 1.3, 1.5), cap: float = 2.0) -> float | None:
    """alpha_1 -> alpha_{2-1/s}: reverse Holder for w^2 at exponent s gives w^{2s} in A_1."""
    rh = reverse_holder_probe(Weight(_values(w) ** 2), s_grid, cap)
    if rh["best_s"] is None:
        return None
    return 2.0 - 1.0 / rh["best_s"]


def mixing_probe(w, a, q: float, t_grid: Sequence[float], n: int | None = None) -> dict:
    """alpha_{tq} constant of w^t a^(1-t) at N and 2N for each t.

    Both weights must carry a catalog source so they can be rebuilt at 2N.
    With q = 1 the exponent is first raised to 2 - 1/s using the reverse
    Holder exponent s of w^2.
    """
    if not isinstance(w, Weight) or not isinstance(a, Weight) or w.source is None or a.source is None:
        raise ValueError("mixing probes need catalog weights (resampled at N and 2N)")
    n = w.n_samples if n is None else n
    q_used = q
    if q == 1:
        q_used = bootstrap_alpha_exponent(w.at(n))
        if q_used is None:
            raise ValueError("reverse Holder bootstrap found no exponent")
    rows = []
    for t in t_grid:
        r = t * q_used
        if not 1 < r < 2:
            rows.append({"t": t, "r": r, "const_n": None, "const_2n": None, "growth": None})
            continue
        c1 = alpha_p_constant(mix(w.at(n), a.at(n), t), r)
        c2 = alpha_p_constant(mix(w.at(2 * n), a.at(2 * n), t), r)
        rows.append({"t": t, "r": r, "const_n": c1, "const_2n": c2, "growth": c2 / c1})
    return {"w": str(w.source), "a": str(a.source), "q": q, "q_used": q_used, "n": n, "rows": rows}


def lemma1_probe(w, a, q: float, t_grid: Sequence[float], n: int | None = None) -> dict:
    if any(not 0 < t < 1 for t in t_grid):
        raise ValueError("mixing below one needs t in (0, 1)")
    return mixing_probe(w, a, q, t_grid, n)


def lemma2_probe(w, a, q: float, t_grid: Sequence[float], n: int | None = None) -> dict:
    if any(t <= 1 for t in t_grid):
        raise ValueError("mixing above one needs t > 1")
    return mixing_probe(w, a, q, t_grid, n)


def lemma4_constants(p: float) -> dict:
    ratio = (p - 1) / (p - 1 + (2 - p) / 2)
    c = 1.0 / (ratio + 2)
    a = ratio * c
    b = 1 - a
    return {"c": c, "a": a, "b": b}


def lemma4_certificate(w, p: float, identity_tol: float = 1e-12) -> dict:
    """Exponent bookkeeping and per-arc check of (<w^2>_I)^c <= [w]_alpha_p [w]_A1 min_I w^b.

    The two Holder steps leading there are checked on every arc as well.
    Margins are right side minus left side; the worst (smallest) is reported.
    """
    if not 1 < p < 2:
        raise ValueError("lemma 4 needs 1 < p < 2")
    k = lemma4_constants(p)
    c, a, b = k["c"], k["a"], k["b"]
    id_b = abs(b - 2 * c)
    id_exp = abs((-a / c + 1 / c) - 2)
    values = _values(w)
    alpha = alpha_p_constant(w, p)
    a1 = ap_constant(w, 1.0)
    neg = arc_averages(values ** (-1.0 / (p - 1)))
    pos = arc_averages(values ** (2.0 / (2 - p)))
    sq = arc_averages(values ** 2)
    avg = arc_averages(values)
    lhs = sq ** c
    holder1 = neg ** ((p - 1) * a) * pos ** ((2 - p) / 2) - lhs
    holder2 = neg ** ((p - 1) * (1 - a)) * avg ** (1 - a) - 1.0
    rhs = alpha * a1 * arc_minima(values ** b)
    margin = rhs - lhs
    worst = np.unravel_index(np.argmin(margin), margin.shape)
    return {
        "p": p,
        "c": c,
        "a": a,
        "b": b,
        "identity_b_eq_2c": id_b,
        "identity_exponent": id_exp,
        "identities_hold": id_b <= identity_tol and id_exp <= identity_tol,
        "alpha_p": alpha,
        "a1": a1,
        "worst_margin": float(margin[worst]),
        "worst_arc": {"start": int(worst[1]), "length": int(worst[0]) + 1},
        "worst_holder1_margin": float(holder1.min()),
        "worst_holder2_margin": float(holder2.min()),
        "passed": bool(margin.min() >= 0) and id_b <= identity_tol and id_exp <= identity_tol,
    }


def growth_factor(spec: "CatalogSpec", functional: Callable[[Weight], float], n: int) -> float:
    """functional(spec at 2N) / functional(spec at N)."""
    return functional(spec.at(2 * n)) / functional(spec.at(n))


def certify(spec: "CatalogSpec", functional: Callable[[Weight], float], n: int = 128, threshold: float = GROWTH_THRESHOLD) -> dict:
    """Class membership read as stability of a constant from N to 2N."""
    g = growth_factor(spec, functional, n)
    return {"weight": str(spec), "n": n, "growth": g, "threshold": threshold, "certified": g <= threshold}


# ----------------------------------------------------------------------------
# catalog


def circle_distance(x: np.ndarray, x0: float) -> np.ndarray:
    d = np.abs((x - x0 + np.pi) % (2 * np.pi) - np.pi)
    return d


def _unit(n: int) -> np.ndarray:
    return np.ones(n)


def _power(n: int, delta: float = -0.2, x0: float = 0.0) -> np.ndarray:
    # clip the distance at half a grid step so the singular sample stays finite
    d = np.maximum(circle_distance(grid(n), x0), np.pi / n)
    return d ** delta


def _cosine(n: int, c: float = 2.0, x0: float = 0.0) -> np.ndarray:
    if c <= 1:
        raise ValueError("cosine weight needs c > 1")
    return c + np.cos(grid(n) - x0)


def _step(n: int, low: float = 1.0, high: float = 4.0, fraction: float = 0.5) -> np.ndarray:
    x = grid(n)
    return np.where(x < 2 * np.pi * fraction, high, low).astype(float)


def _maximal_power(n: int, gamma: float = 0.4, arc: float = 0.25, x0: float = 0.0, f=None) -> np.ndarray:
    if not 0 < gamma < 0.5:
        raise ValueError("gamma must lie in (0, 1/2)")
    if f is None:
        x = (grid(n) - x0) % (2 * np.pi)
        fv = (x < 2 * np.pi * arc).astype(float)
    elif callable(f):
        fv = np.abs(np.asarray(f(grid(n))))
    else:
        fv = np.abs(f.samples if isinstance(f, SampledFunction) else np.asarray(f))
        if fv.size != n:
            raise ValueError("supplied f has the wrong resolution")
    return maximal_function(fv).samples.real ** gamma


CATALOG: dict[str, Callable[..., np.ndarray]] = {
    "unit": _unit,
    "power": _power,
    "cosine": _cosine,
    "step": _step,
    "maximal-power": _maximal_power,
}


@dataclass(frozen=True)
class CatalogSpec:
    name: str
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.name not in CATALOG:
            raise UnknownCatalogEntry(f"unknown weight {self.name!r}; known: {sorted(CATALOG)}")
        object.__setattr__(self, "params", tuple(sorted(dict(self.params).items())))

    def at(self, n: int) -> Weight:
        n = check_resolution(n)
        return Weight(CATALOG[self.name](n, **dict(self.params)), source=self)

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={v}" for k, v in self.params)


def parse_catalog_string(text: str) -> CatalogSpec:
    """'power:delta=-0.4,x0=0' -> CatalogSpec('power', {'delta': -0.4, 'x0': 0.0})."""
    name, _, rest = text.strip().partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"malformed parameter {item!r} in {text!r}")
        params[key.strip()] = float(value)
    return CatalogSpec(name.strip(), tuple(params.items()))


def catalog(name: str, params: dict | None = None, n: int = 256) -> Weight:
    return CatalogSpec(name, tuple((params or {}).items())).at(n)
