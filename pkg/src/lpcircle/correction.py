"""Heuristic correction: shrink f to g = phi * f with 0 <= phi <= 1 until the
square function of g is dominated by B * w, and measure what that costs.

Two strategies are provided. Neither is claimed to reach the optimal
logarithmic trade-off; both always satisfy |g| + |f - g| = |f|.

zero-offenders
    phi in {0, 1}; every pass zeroes f wherever sigma(g) > B w. When all
    offending samples are already zero, the nonzero sample nearest to the
    worst offender is zeroed instead, so each pass removes at least one sample.
damp
    phi in [0, 1]; offending samples are scaled by 0.99 * B w / sigma(g),
    and values that drop below 0.05 are set to zero.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circle import Partition, SampledFunction
from .errors import PreconditionViolated
from .multipliers import square_function
from .weights import _values

STRATEGIES = ("zero-offenders", "damp")
DAMP_SAFETY = 0.99
DAMP_FLOOR = 0.05
MODULUS_TOL = 1e-14
# |f| <= w is checked up to rounding of |f|
DOMINATION_RTOL = 1e-12


@dataclass
class CorrectionResult:
    g: SampledFunction
    phi: np.ndarray
    epsilon_achieved: float
    bound_achieved: float
    iterations: int
    strategy: str
    converged: bool
    B_target: float = math.nan

    def to_json(self) -> str:
        return json.dumps(
            {
                "g": [[float(z.real), float(z.imag)] for z in self.g.samples],
                "phi": [float(x) for x in self.phi],
                "epsilon_achieved": self.epsilon_achieved,
                "bound_achieved": self.bound_achieved,
                "iterations": self.iterations,
                "strategy": self.strategy,
                "converged": self.converged,
                "B_target": self.B_target,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CorrectionResult":
        doc = json.loads(text)
        return cls(
            g=SampledFunction(np.array([complex(re, im) for re, im in doc["g"]])),
            phi=np.array(doc["phi"], dtype=float),
            epsilon_achieved=doc["epsilon_achieved"],
            bound_achieved=doc["bound_achieved"],
            iterations=doc["iterations"],
            strategy=doc["strategy"],
            converged=doc["converged"],
            B_target=doc["B_target"],
        )


def corrected_mass(f: SampledFunction, g: SampledFunction, w, a) -> float:
    """a({g != f}) / integral |f / w| a, with 0/0 read as 0."""
    fv, gv = f.samples, g.samples
    av, wv = _values(a), _values(w)
    den = float(np.sum(np.abs(fv) / wv * av))
    num = float(np.sum(av[gv != fv]))
    if den == 0.0:
        return 0.0
    return num / den


def pointwise_bound(g: SampledFunction, w, partition: Partition) -> float:
    """max sigma(g) / w."""
    return float(np.max(square_function(g, partition) / _values(w)))


def correct(
    f: SampledFunction,
    w,
    a,
    partition: Partition,
    B_target: float,
    strategy: str = "zero-offenders",
    start: np.ndarray | None = None,
    max_iter: int | None = None,
) -> CorrectionResult:
    """Correct f until sigma(g) <= B_target * w, starting from the mask `start` (default all ones)."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if not B_target > 0:
        raise ValueError("B_target must be positive")
    wv = _values(w)
    fv = f.samples
    if np.any(np.abs(fv) > wv * (1 + DOMINATION_RTOL)):
        raise PreconditionViolated("|f| exceeds w at some sample")
    n = f.n_samples
    max_iter = 10 * n if max_iter is None else max_iter
    phi = np.ones(n) if start is None else np.clip(np.asarray(start, dtype=float), 0.0, 1.0).copy()
    cap = B_target * wv
    iterations = 0
    converged = False
    while True:
        g = SampledFunction(phi * fv)
        sigma = square_function(g, partition)
        offenders = sigma > cap
        if not offenders.any():
            converged = True
            break
        if iterations >= max_iter:
            break
        iterations += 1
        live = offenders & (phi * np.abs(fv) > 0)
        if not live.any():
            _zero_nearest(phi, fv, int(np.argmax(sigma / cap)))
        elif strategy == "zero-offenders":
            phi[live] = 0.0
        else:
            phi[live] *= DAMP_SAFETY * cap[live] / sigma[live]
            phi[phi < DAMP_FLOOR] = 0.0
    return CorrectionResult(
        g=g,
        phi=phi,
        epsilon_achieved=corrected_mass(f, g, w, a),
        bound_achieved=float(np.max(sigma / wv)),
        iterations=iterations,
        strategy=strategy,
        converged=converged,
        B_target=float(B_target),
    )


def _zero_nearest(phi: np.ndarray, fv: np.ndarray, center: int) -> None:
    n = phi.size
    alive = np.nonzero(phi * np.abs(fv) > 0)[0]
    dist = np.minimum((alive - center) % n, (center - alive) % n)
    phi[alive[np.argmin(dist)]] = 0.0


@dataclass
class SweepCurve:
    rows: list[dict]
    fit: dict | None = field(default=None)

    def to_csv(self) -> str:
        lines = ["B_target,epsilon,B_achieved,iterations,converged"]
        for r in self.rows:
            lines.append(
                f"{r['B_target']!r},{r['epsilon']!r},{r['B_achieved']!r},{r['iterations']},{str(r['converged']).lower()}"
            )
        return "\n".join(lines) + "\n"


def sweep(
    f: SampledFunction,
    w,
    a,
    partition: Partition,
    B_grid,
    strategy: str = "zero-offenders",
    keep_results: bool = False,
) -> SweepCurve:
    """Run correct over an increasing grid of targets.

    Targets are processed from the largest down and each run starts from the
    previous mask, so corrected sets are nested and epsilon cannot increase
    with B_target. Returns rows in increasing B_target order, plus a least
    squares fit of B_achieved against 1 + |log epsilon| over rows with epsilon > 0.
    """
    grid = [float(b) for b in B_grid]
    if not grid:
        raise ValueError("B_grid must not be empty")
    if any(x >= y for x, y in zip(grid, grid[1:])):
        raise ValueError("B_grid must be strictly increasing")
    rows = []
    mask = None
    for b in reversed(grid):
        res = correct(f, w, a, partition, b, strategy, start=mask)
        mask = res.phi
        row = {
            "B_target": b,
            "epsilon": res.epsilon_achieved,
            "B_achieved": res.bound_achieved,
            "iterations": res.iterations,
            "converged": res.converged,
        }
        if keep_results:
            row["result"] = res
        rows.append(row)
    rows.reverse()
    return SweepCurve(rows=rows, fit=log_fit(rows))


def log_fit(rows: list[dict]) -> dict | None:
    """B_achieved ~ slope * (1 + |log eps|) + intercept; None with fewer than two usable rows."""
    pts = [(1 + abs(math.log(r["epsilon"])), r["B_achieved"]) for r in rows if r["epsilon"] > 0]
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        return None
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return {"slope": float(slope), "intercept": float(intercept), "rms_residual": float(np.sqrt(np.mean(resid ** 2))), "points": len(pts)}


def verify_result(result: CorrectionResult, f: SampledFunction, w, a, partition: Partition, tol: float = 1e-12) -> dict:
    """Recompute everything about a correction from scratch and compare."""
    fv, gv = f.samples, result.g.samples
    wv = _values(w)
    modulus_gap = float(np.max(np.abs(np.abs(gv) + np.abs(fv - gv) - np.abs(fv)) / np.maximum(1.0, np.abs(fv))))
    phi_ok = bool(np.all((result.phi >= 0) & (result.phi <= 1)))
    consistent = bool(np.array_equal(gv, result.phi * fv))
    eps = corrected_mass(f, result.g, w, a)
    bound = pointwise_bound(result.g, w, partition)
    av = _values(a)
    lhs1 = float(np.sum(av[gv != fv]))
    rhs1 = eps * float(np.sum(np.abs(fv) / wv * av))
    checks = {
        "modulus_identity": modulus_gap <= MODULUS_TOL and phi_ok,
        "g_equals_phi_f": consistent,
        "epsilon_recomputed": abs(eps - result.epsilon_achieved) <= tol * max(1.0, abs(eps)),
        "bound_recomputed": abs(bound - result.bound_achieved) <= tol * max(1.0, abs(bound)),
        "corrected_set": lhs1 <= rhs1 * (1 + tol) + tol,
        "target_met": (not result.converged) or bound <= result.B_target,
    }
    return {
        "modulus_gap": modulus_gap,
        "epsilon": eps,
        "bound": bound,
        "checks": checks,
        "passed": all(checks.values()),
    }


def default_b_grid(f: SampledFunction, w, partition: Partition, points: int = 16, low: float = 0.05) -> list[float]:
    """Geometric grid from low * B0 up to 1.05 * B0, with B0 = max sigma(f) / w."""
    top = pointwise_bound(f, w, partition)
    if top == 0.0:
        return [1.0]
    return [float(b) for b in np.geomspace(low * top, 1.05 * top, points)]
