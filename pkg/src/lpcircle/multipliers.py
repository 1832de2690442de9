"""Interval multipliers, the square function and the intertwined operators T, T_u, P_u."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circle import (
    FreqInterval,
    Partition,
    SampledFunction,
    Spectrum,
    check_in_window,
    from_spectrum,
    frequencies,
    random_function,
    random_partition,
    samples_from_spectra,
    spectra,
    to_spectrum,
)
from .errors import LengthMismatch, NonpositiveWeight, ZeroDenominator

# theorem2_ratio warns when [w]_alpha1 exceeds this
ALPHA1_WARN_CAP = 1e3


class FunctionSequence:
    """J sampled functions on a common grid, stored as a (J, N) complex array."""

    def __init__(self, values, partition: Partition | None = None):
        if isinstance(values, np.ndarray) and values.ndim == 2:
            arr = np.array(values, dtype=complex)
        else:
            rows = [v.samples if isinstance(v, SampledFunction) else np.asarray(v) for v in values]
            if not rows:
                raise ValueError("empty function sequence needs an explicit (0, N) array")
            sizes = {r.size for r in rows}
            if len(sizes) != 1:
                raise LengthMismatch(f"entries have different N: {sorted(sizes)}")
            arr = np.array(rows, dtype=complex)
        if partition is not None and len(partition) != arr.shape[0]:
            raise LengthMismatch(f"{arr.shape[0]} functions for {len(partition)} intervals")
        arr.setflags(write=False)
        self.values = arr
        self.partition = partition

    @classmethod
    def zeros(cls, count: int, n: int) -> "FunctionSequence":
        return cls(np.zeros((count, n), dtype=complex))

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, j: int) -> SampledFunction:
        return SampledFunction(self.values[j])

    def __iter__(self):
        return (SampledFunction(row) for row in self.values)

    def l2_pointwise(self) -> np.ndarray:
        """(sum_j |f_j|^2)^(1/2) at each sample."""
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=0))


def _weight_values(u) -> np.ndarray:
    vals = np.asarray(getattr(u, "values", getattr(u, "samples", u)))
    if np.iscomplexobj(vals):
        if np.any(vals.imag != 0):
            raise NonpositiveWeight("weight has a nonzero imaginary part")
        vals = vals.real
    if np.any(~(vals > 0)):
        raise NonpositiveWeight("weight must be strictly positive")
    return vals


def _check_lengths(fs: FunctionSequence, partition: Partition) -> None:
    if len(fs) != len(partition):
        raise LengthMismatch(f"{len(fs)} functions for {len(partition)} intervals")


def apply_multiplier(f: SampledFunction, interval: FreqInterval) -> SampledFunction:
    """Zero every Fourier coefficient of f outside the interval."""
    n = f.n_samples
    check_in_window(interval, n)
    coeffs = to_spectrum(f).coefficients * interval.mask(n)
    return from_spectrum(Spectrum(coeffs))


def riesz_projection(f: SampledFunction) -> SampledFunction:
    """Keep the coefficients with n >= 0."""
    n = f.n_samples
    coeffs = to_spectrum(f).coefficients * (frequencies(n) >= 0)
    return from_spectrum(Spectrum(coeffs))


def _upsample(f: SampledFunction) -> np.ndarray:
    """Samples of the same trigonometric polynomial on the 2N grid."""
    n = f.n_samples
    coeffs = np.zeros(2 * n, dtype=complex)
    coeffs[n // 2: n // 2 + n] = to_spectrum(f).coefficients
    return from_spectrum(Spectrum(coeffs)).samples


def riesz_multiplier(f: SampledFunction, interval: FreqInterval) -> SampledFunction:
    """M_[a, b-1] f = e^{iax} P+(e^{-iax} f) - e^{ibx} P+(e^{-ibx} f).

    The unimodular conjugations are carried out on the doubled grid, where
    a shift by at most N/2 cannot wrap the spectrum around the window; the
    result is band-limited to the original window and is read back on the
    even samples.
    """
    n = f.n_samples
    check_in_window(interval, n)
    a, b = interval.a, interval.b + 1
    big = SampledFunction(_upsample(f))
    out = np.zeros(2 * n, dtype=complex)
    for k, sign in ((a, 1.0), (b, -1.0)):
        down = SampledFunction.exponential(-k, 2 * n).samples
        up = SampledFunction.exponential(k, 2 * n).samples
        out += sign * up * riesz_projection(SampledFunction(down * big.samples)).samples
    return SampledFunction(out[::2])


def multiplier_pieces(f: SampledFunction, partition: Partition) -> np.ndarray:
    """(J, N) array whose row j holds M_{Delta_j} f."""
    n = f.n_samples
    masks = partition.masks(n)
    return samples_from_spectra(masks * to_spectrum(f).coefficients)


def square_function(f: SampledFunction, partition: Partition) -> np.ndarray:
    """Pointwise (sum_j |M_{Delta_j} f|^2)^(1/2) as a real array of length N."""
    if len(partition) == 0:
        return np.zeros(f.n_samples)
    pieces = multiplier_pieces(f, partition)
    return np.sqrt(np.sum(np.abs(pieces) ** 2, axis=0))


def op_T(fs: FunctionSequence, partition: Partition) -> SampledFunction:
    """sum_j M_{Delta_j} f_j."""
    _check_lengths(fs, partition)
    n = fs.n_samples
    coeffs = spectra(fs.values) * partition.masks(n)
    return from_spectrum(Spectrum(coeffs.sum(axis=0)))


def op_T_u(fs: FunctionSequence, partition: Partition, u) -> SampledFunction:
    """u^{-1} T({u f_j})."""
    uv = _weight_values(u)
    _check_lengths(fs, partition)
    inner = op_T(FunctionSequence(fs.values * uv), partition)
    return SampledFunction(inner.samples / uv)


def op_P_u(fs: FunctionSequence, partition: Partition, u) -> FunctionSequence:
    """Entry j is u^{-1} M_{Delta_j}(u f_j)."""
    uv = _weight_values(u)
    _check_lengths(fs, partition)
    n = fs.n_samples
    pieces = samples_from_spectra(spectra(fs.values * uv) * partition.masks(n))
    return FunctionSequence(pieces / uv, partition)


def theorem2_ratio(fs: FunctionSequence, partition: Partition, a, w, check_classes: bool = False) -> float:
    """||T_u fs||_{L^{1,inf}(a)} / ||(sum |f_j|^2)^(1/2)||_{L^1(a)} with u = a/w.

    0/0 is read as 0. With ``check_classes`` the A_inf / alpha_1 status of the
    weights is probed and a warning is issued when a certificate fails.
    """
    from .weights import Weight, a_infinity_certificate, weak_quasinorm, weighted_lp_norm, alpha_p_constant

    a = a if isinstance(a, Weight) else Weight(a)
    w = w if isinstance(w, Weight) else Weight(w)
    if check_classes:
        if a_infinity_certificate(a)["p"] is None:
            warnings.warn("weight a failed the A_inf certificate", stacklevel=2)
        if alpha_p_constant(w, 1.0) > ALPHA1_WARN_CAP:
            warnings.warn("weight w failed the alpha_1 cap", stacklevel=2)
    u = a.values / w.values
    num = weak_quasinorm(op_T_u(fs, partition, u), a)
    den = weighted_lp_norm(fs.l2_pointwise(), 1.0, a)
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ZeroDenominator("nonzero numerator over a vanishing denominator")
    return num / den


@dataclass
class Theorem2Sweep:
    n: int
    trials: int
    seed: int
    ratios: np.ndarray

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max(initial=0.0))


def random_sequence(rng: np.random.Generator, partition: Partition, n: int) -> FunctionSequence:
    """Independent complex Gaussian trigonometric polynomials, one per interval."""
    return FunctionSequence([random_function(rng, n).samples for _ in partition], partition)


def theorem2_sweep(
    n: int,
    trials: int,
    seed: int,
    a,
    w,
    max_intervals: int = 8,
) -> Theorem2Sweep:
    """theorem2_ratio over seeded random partitions and sequences.

    `a` and `w` are weights already sampled at resolution n. Each trial draws
    between 1 and `max_intervals` disjoint intervals anywhere in the window
    and one Gaussian polynomial per interval.
    """
    rng = np.random.default_rng(seed)
    ratios = np.empty(trials)
    for i in range(trials):
        count = int(rng.integers(1, max_intervals + 1))
        partition = random_partition(rng, n, count)
        fs = random_sequence(rng, partition, n)
        ratios[i] = theorem2_ratio(fs, partition, a, w)
    return Theorem2Sweep(n=n, trials=trials, seed=seed, ratios=ratios)


def embed(functions: Sequence[SampledFunction] | Iterable[SampledFunction], partition: Partition) -> FunctionSequence:
    """Sequence with entry j projected onto Delta_j, so op_T acts as plain summation."""
    fs = list(functions)
    return FunctionSequence([apply_multiplier(f, iv).samples for f, iv in zip(fs, partition)], partition)
