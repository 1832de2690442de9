"""Sampled functions on the circle, their spectra, and frequency partitions.

A function lives on the uniform grid x_m = 2*pi*m/N, m = 0..N-1, with N a
power of two. Spectra are indexed by the integer frequencies
n in [-N/2, N/2) under the convention f(x_m) = sum_n c_n exp(i n x_m), so the
analysis transform carries the 1/N.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import IntervalOutOfWindow, OverlappingIntervals, SpectrumOverflow

# relative size below which a coefficient counts as numerical noise
SPECTRAL_NOISE = 1e-13


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def check_resolution(n: int) -> int:
    n = int(n)
    if n < 8 or not is_power_of_two(n):
        raise ValueError(f"N must be a power of two >= 8, got {n}")
    return n


def grid(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def frequencies(n: int) -> np.ndarray:
    """Integer frequencies -N/2..N/2-1 in spectrum storage order."""
    return np.arange(-n // 2, n // 2)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledFunction:
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        check_resolution(samples.size)
        object.__setattr__(self, "samples", _frozen(samples))

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        return grid(self.n_samples)

    @classmethod
    def from_callable(cls, func: Callable[[np.ndarray], np.ndarray], n: int) -> "SampledFunction":
        return cls(np.broadcast_to(func(grid(check_resolution(n))), (n,)))

    @classmethod
    def constant(cls, value: complex, n: int) -> "SampledFunction":
        return cls(np.full(check_resolution(n), value, dtype=complex))

    @classmethod
    def exponential(cls, k: int, n: int, coef: complex = 1.0) -> "SampledFunction":
        """coef * exp(i k x) on the N-point grid."""
        m = np.arange(check_resolution(n))
        # exact reduction of k*m modulo N keeps the phases accurate for large k
        return cls(coef * np.exp(2j * np.pi * ((k * m) % n) / n))

    @property
    def real(self) -> np.ndarray:
        return self.samples.real

    def abs(self) -> np.ndarray:
        return np.abs(self.samples)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        return SampledFunction(self.samples + _samples_of(other))

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        return SampledFunction(self.samples - _samples_of(other))

    def __mul__(self, other) -> "SampledFunction":
        if isinstance(other, SampledFunction):
            other = other.samples
        return SampledFunction(self.samples * other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SampledFunction":
        if isinstance(other, SampledFunction):
            other = other.samples
        return SampledFunction(self.samples / other)

    def allclose(self, other: "SampledFunction", rtol: float = 1e-10) -> bool:
        return relative_error(self.samples, _samples_of(other)) <= rtol

    # serialization: JSON array of [re, im] pairs, CSV index,re,im
    def to_json(self) -> str:
        return json.dumps([[float(z.real), float(z.imag)] for z in self.samples])

    @classmethod
    def from_json(cls, text: str) -> "SampledFunction":
        pairs = json.loads(text)
        return cls(np.array([complex(re, im) for re, im in pairs]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "re", "im"])
        for m, z in enumerate(self.samples):
            writer.writerow([m, repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampledFunction":
        rows = list(csv.DictReader(io.StringIO(text)))
        values = np.zeros(len(rows), dtype=complex)
        for row in rows:
            values[int(row["index"])] = complex(float(row["re"]), float(row["im"]))
        return cls(values)


def _samples_of(f) -> np.ndarray:
    return f.samples if isinstance(f, SampledFunction) else np.asarray(f)


def relative_error(got: np.ndarray, want: np.ndarray) -> float:
    """max |got - want| relative to max(|want|, 1e-300) in sup norm."""
    got = np.asarray(got)
    want = np.asarray(want)
    scale = max(float(np.max(np.abs(want), initial=0.0)), 1e-300)
    return float(np.max(np.abs(got - want), initial=0.0)) / scale


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients c_n for n = -N/2..N/2-1 (in that order)."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients)
        if coeffs.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        check_resolution(coeffs.size)
        object.__setattr__(self, "coefficients", _frozen(coeffs))

    @property
    def n_samples(self) -> int:
        return self.coefficients.size

    @property
    def freqs(self) -> np.ndarray:
        return frequencies(self.n_samples)

    def __getitem__(self, n: int) -> complex:
        half = self.n_samples // 2
        if not -half <= n < half:
            raise IndexError(f"frequency {n} outside [-{half}, {half})")
        return complex(self.coefficients[n + half])

    def support(self, rtol: float = SPECTRAL_NOISE) -> np.ndarray:
        """Frequencies whose coefficient is not numerical noise."""
        mag = np.abs(self.coefficients)
        peak = mag.max(initial=0.0)
        if peak == 0.0:
            return np.array([], dtype=int)
        return self.freqs[mag > rtol * peak]


def to_spectrum(f: SampledFunction) -> Spectrum:
    return Spectrum(np.fft.fftshift(np.fft.fft(f.samples) / f.n_samples))


def from_spectrum(s: Spectrum) -> SampledFunction:
    return SampledFunction(np.fft.ifft(np.fft.ifftshift(s.coefficients)) * s.n_samples)


def spectra(values: np.ndarray) -> np.ndarray:
    """Row-wise to_spectrum for a (J, N) array of samples."""
    n = values.shape[-1]
    return np.fft.fftshift(np.fft.fft(values, axis=-1) / n, axes=-1)


def samples_from_spectra(coeffs: np.ndarray) -> np.ndarray:
    """Row-wise from_spectrum for a (J, N) array of coefficients."""
    n = coeffs.shape[-1]
    return np.fft.ifft(np.fft.ifftshift(coeffs, axes=-1), axis=-1) * n


def shift_coefficients(coeffs: np.ndarray, k: int, rtol: float = SPECTRAL_NOISE) -> np.ndarray:
    """Move coefficient c_n to frequency n + k along the last axis.

    Raises SpectrumOverflow when non-negligible mass would leave the window.
    """
    n = coeffs.shape[-1]
    if k == 0:
        return np.array(coeffs, copy=True)
    if abs(k) > n:
        raise SpectrumOverflow(f"shift {k} exceeds the window size {n}")
    mag = np.abs(coeffs)
    peak = mag.max(initial=0.0)
    leaving = mag[..., n - k:] if k > 0 else mag[..., :-k]
    if peak > 0 and leaving.max(initial=0.0) > rtol * peak:
        raise SpectrumOverflow(f"modulation by {k} moves spectral mass outside the window")
    out = np.zeros_like(coeffs)
    if k > 0:
        out[..., k:] = coeffs[..., : n - k]
    else:
        out[..., :k] = coeffs[..., -k:]
    return out


def modulate(f: SampledFunction, k: int) -> SampledFunction:
    """exp(i k x) * f, refusing shifts that push the spectrum out of the window."""
    n = f.n_samples
    if abs(k) > n // 2:
        raise SpectrumOverflow(f"|k| = {abs(k)} exceeds N/2 = {n // 2}")
    shift_coefficients(to_spectrum(f).coefficients, k)
    return SampledFunction(f.samples * SampledFunction.exponential(k, n).samples)


def lp_norm(f: SampledFunction | np.ndarray, p: float) -> float:
    """(2pi/N sum |f|^p)^(1/p); p = inf gives the max. A quasinorm for p < 1."""
    values = np.abs(_samples_of(f))
    if p == math.inf:
        return float(values.max(initial=0.0))
    if p <= 0:
        raise ValueError("p must be positive")
    return float((2 * np.pi / values.size * np.sum(values ** p)) ** (1.0 / p))


@dataclass(frozen=True, order=True)
class FreqInterval:
    """The integer interval [a, b] (both ends included)."""

    a: int
    b: int

    def __post_init__(self):
        if int(self.a) != self.a or int(self.b) != self.b:
            raise ValueError("interval endpoints must be integers")
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "b", int(self.b))
        if self.a > self.b:
            raise ValueError(f"empty interval [{self.a}, {self.b}]")

    @property
    def length(self) -> int:
        return self.b - self.a + 1

    def __contains__(self, n: int) -> bool:
        return self.a <= n <= self.b

    def intersects(self, other: "FreqInterval") -> bool:
        return self.a <= other.b and other.a <= self.b

    def dilate(self, factor: int) -> "FreqInterval":
        """Concentric interval with `factor` times the length (factor odd)."""
        if factor < 1 or factor % 2 == 0:
            raise ValueError("dilation factor must be a positive odd integer")
        ext = (factor - 1) // 2 * self.length
        return FreqInterval(self.a - ext, self.b + ext)

    def shift(self, k: int) -> "FreqInterval":
        return FreqInterval(self.a + k, self.b + k)

    def in_window(self, n: int) -> bool:
        return -n // 2 <= self.a and self.b < n // 2

    def mask(self, n: int) -> np.ndarray:
        freqs = frequencies(n)
        return (freqs >= self.a) & (freqs <= self.b)


def check_in_window(interval: FreqInterval, n: int) -> None:
    if not interval.in_window(n):
        raise IntervalOutOfWindow(f"[{interval.a}, {interval.b}] is not inside [{-n // 2}, {n // 2})")


@dataclass(frozen=True)
class Partition:
    """Finite ordered family of pairwise disjoint integer intervals."""

    intervals: tuple[FreqInterval, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ivs = tuple(iv if isinstance(iv, FreqInterval) else FreqInterval(*iv) for iv in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        order = sorted(range(len(ivs)), key=lambda j: ivs[j].a)
        for prev, cur in zip(order, order[1:]):
            if ivs[prev].intersects(ivs[cur]):
                raise OverlappingIntervals(
                    f"intervals {ivs[prev].a, ivs[prev].b} and {ivs[cur].a, ivs[cur].b} overlap"
                )

    @classmethod
    def of(cls, pairs: Iterable[Sequence[int]]) -> "Partition":
        return cls(tuple(FreqInterval(int(a), int(b)) for a, b in pairs))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[FreqInterval]:
        return iter(self.intervals)

    def __getitem__(self, j: int) -> FreqInterval:
        return self.intervals[j]

    @property
    def left_endpoints(self) -> list[int]:
        return [iv.a for iv in self.intervals]

    def check_window(self, n: int) -> None:
        for iv in self.intervals:
            check_in_window(iv, n)

    def dyadic_classes(self) -> dict[int, list[int]]:
        """B_k = indices j with length 2^k; non-dyadic lengths are left out."""
        classes: dict[int, list[int]] = {}
        for j, iv in enumerate(self.intervals):
            if is_power_of_two(iv.length):
                classes.setdefault(iv.length.bit_length() - 1, []).append(j)
        return classes

    def masks(self, n: int) -> np.ndarray:
        """(J, N) boolean array of spectral indicator masks."""
        self.check_window(n)
        return np.array([iv.mask(n) for iv in self.intervals], dtype=bool).reshape(len(self), n)

    def covers_window(self, n: int) -> bool:
        return int(sum(iv.length for iv in self.intervals)) == n and all(iv.in_window(n) for iv in self)

    def to_json(self) -> str:
        return json.dumps([[iv.a, iv.b] for iv in self.intervals])

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        return cls.of(json.loads(text))


def dyadic_partition(n: int) -> Partition:
    """{0}, {-1}, then [2^k, 2^(k+1)-1] and its mirror, clipped to the window."""
    half = check_resolution(n) // 2
    pairs = [(0, 0), (-1, -1)]
    k = 1
    while k < half:
        hi = min(2 * k - 1, half - 1)
        pairs.append((k, hi))
        pairs.append((-min(2 * k, half), -k - 1))
        k *= 2
    pairs = [(a, b) for a, b in pairs if a <= b]
    return Partition.of(sorted(pairs))


def singleton_partition(n: int) -> Partition:
    half = check_resolution(n) // 2
    return Partition.of((k, k) for k in range(-half, half))


def random_partition(
    rng: np.random.Generator,
    n: int,
    count: int,
    lo: int | None = None,
    hi: int | None = None,
    max_length: int | None = None,
) -> Partition:
    """`count` disjoint random intervals inside [lo, hi] (default: the window).

    Cut points are drawn without replacement, then a random subset of the
    resulting blocks is kept so that gaps appear between intervals.
    """
    half = n // 2
    lo = -half if lo is None else lo
    hi = half - 1 if hi is None else hi
    span = hi - lo + 1
    blocks = min(span, 2 * count)
    cuts = np.sort(rng.choice(np.arange(1, span), size=blocks - 1, replace=False)) if blocks > 1 else []
    edges = [0, *[int(c) for c in cuts], span]
    pieces = [(lo + edges[i], lo + edges[i + 1] - 1) for i in range(len(edges) - 1)]
    keep = np.sort(rng.choice(len(pieces), size=min(count, len(pieces)), replace=False))
    chosen = [pieces[i] for i in keep]
    if max_length is not None:
        chosen = [(a, min(b, a + max_length - 1)) for a, b in chosen]
    return Partition.of(chosen)


def random_function(rng: np.random.Generator, n: int, band: FreqInterval | None = None) -> SampledFunction:
    """Complex Gaussian random trigonometric polynomial, optionally band-limited."""
    coeffs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if band is not None:
        coeffs = coeffs * band.mask(n)
    return from_spectrum(Spectrum(coeffs))


def _parse_params(rest: str, text: str) -> dict[str, str]:
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"malformed parameter {item!r} in {text!r}")
        params[key.strip()] = value.strip()
    return params


def function_from_string(text: str, n: int, rng: np.random.Generator | None = None) -> SampledFunction:
    """Build a test function from 'name:key=value,...'.

    exp:k=3,c=1            c * exp(i k x)
    constant:c=1           constant
    indicator:start=0,stop=0.5
                           indicator of the arc [2pi start, 2pi stop)
    random:lo=-4,hi=4      Gaussian polynomial with spectrum in [lo, hi] (needs rng)
    phases:density=1       unimodular random phases on a random subset (needs rng)
    """
    name, _, rest = text.strip().partition(":")
    params = _parse_params(rest, text)
    n = check_resolution(n)
    if name == "exp":
        return SampledFunction.exponential(int(params.get("k", 0)), n, complex(params.get("c", 1)))
    if name == "constant":
        return SampledFunction.constant(complex(params.get("c", 1)), n)
    if name == "indicator":
        x = grid(n)
        start, stop = float(params.get("start", 0)), float(params.get("stop", 0.5))
        return SampledFunction(((x >= 2 * np.pi * start) & (x < 2 * np.pi * stop)).astype(complex))
    if name in ("random", "phases"):
        if rng is None:
            raise ValueError(f"function {name!r} is random and needs a seed")
        if name == "random":
            band = FreqInterval(int(params.get("lo", -n // 2)), int(params.get("hi", n // 2 - 1)))
            return random_function(rng, n, band)
        density = float(params.get("density", 1.0))
        keep = rng.random(n) < density
        return SampledFunction(np.exp(2j * np.pi * rng.random(n)) * keep)
    raise ValueError(f"unknown function {name!r}")


def partition_from_string(text: str, n: int, rng: np.random.Generator | None = None) -> Partition:
    """JSON list of [a, b] pairs, or one of 'dyadic', 'singletons', 'random:count=..,lo=..,hi=..'."""
    text = text.strip()
    if text.startswith("["):
        return Partition.from_json(text)
    name, _, rest = text.partition(":")
    params = _parse_params(rest, text)
    if name == "dyadic":
        return dyadic_partition(n)
    if name == "singletons":
        return singleton_partition(n)
    if name == "random":
        if rng is None:
            raise ValueError("random partitions need a seed")
        lo = int(params["lo"]) if "lo" in params else None
        hi = int(params["hi"]) if "hi" in params else None
        return random_partition(rng, n, int(params.get("count", 10)), lo=lo, hi=hi)
    raise ValueError(f"unknown partition {text!r}")
