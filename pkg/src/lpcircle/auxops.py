"""Auxiliary operator constructions: the phi_m and beta_j polynomial families,
the operators S and R, and the interval cutting procedure that rewrites the
sum of projected pieces as a composition of R-cuts and S-batches.

All convolutions are spectral multiplications and all modulations by integer
frequencies are index shifts of the coefficient array, so the reconstruction
identities hold to rounding of a single FFT pair.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .circle import (
    FreqInterval,
    Partition,
    SampledFunction,
    Spectrum,
    frequencies,
    from_spectrum,
    is_power_of_two,
    samples_from_spectra,
    shift_coefficients,
    spectra,
)
from .errors import CoverageGap, NonDyadicLength, PlanMismatch, SignMixed, SpectrumOverflow, WindowOverflow
from .multipliers import FunctionSequence, _weight_values, riesz_multiplier

DEFAULT_XI = 0.9
CUT_BASE = 2 ** 0.1
SHORT_MAX_LENGTH = 11
MAX_SHORT_COLORS = 100
N_CLASSES = 10
# hat values are rounded to multiples of 2^-40 so that 1 - v and v add to 1 exactly
_HAT_QUANTUM = 2.0 ** 40


# ----------------------------------------------------------------------------
# phi family


def smoothstep(t: np.ndarray) -> np.ndarray:
    """C^2 quintic ramp: 0 at t <= 0, 1 at t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6 * t - 15) + 10)


def phi_profile(y: np.ndarray, xi: float) -> np.ndarray:
    """Bump on [0, 1], equal to 1 on [(1-xi)/2, (1+xi)/2]."""
    y = np.asarray(y, dtype=float)
    edge = (1 - xi) / 2
    rise = smoothstep(y / edge)
    fall = smoothstep((1 - y) / edge)
    out = np.minimum(rise, fall)
    out[(y < 0) | (y > 1)] = 0.0
    return out


@dataclass
class PhiFamily:
    xi: float
    n: int
    polys: dict[int, np.ndarray]  # m -> coefficients over the window [-N/2, N/2)

    def coefficient(self, m: int, freq: int) -> float:
        half = self.n // 2
        if not -half <= freq < half:
            return 0.0
        return float(self.polys[m][freq + half].real)

    def passband(self, m: int) -> np.ndarray:
        """Frequencies where phi_m-hat equals 1 exactly."""
        return frequencies(self.n)[self.polys[m].real == 1.0]

    def samples(self, m: int, n_eval: int | None = None) -> np.ndarray:
        """phi_m on a grid of n_eval points over [0, 2pi)."""
        n_eval = n_eval or self.n
        if n_eval < self.n:
            raise ValueError("evaluation grid must be at least as fine as the window")
        coeffs = np.zeros(n_eval, dtype=complex)
        lo = n_eval // 2 - self.n // 2
        coeffs[lo: lo + self.n] = self.polys[m]
        return samples_from_spectra(coeffs)


def build_phi_family(m_max: int, xi: float = DEFAULT_XI, n: int | None = None) -> PhiFamily:
    """phi_m-hat(k) = eta(k / 2^m) for m = 0..m_max on a window of size n."""
    if not 0 < xi < 1:
        raise ValueError("xi must lie in (0, 1)")
    n = n if n is not None else max(8, 2 ** (m_max + 1))
    if 2 ** m_max > n // 2:
        raise WindowOverflow(f"2^{m_max} does not fit the window of N = {n}")
    freqs = frequencies(n)
    polys = {}
    for m in range(m_max + 1):
        coeffs = phi_profile(freqs / 2.0 ** m, xi).astype(complex)
        coeffs[freqs < 0] = 0.0
        polys[m] = coeffs
    return PhiFamily(xi=xi, n=n, polys=polys)


def phi_decay_probe(family: PhiFamily, ms: Sequence[int], n_eval: int = 1 << 14) -> dict:
    """Fitted C_m = 2^m max_sigma |phi_m(sigma)| sigma^2 for the (r, u) = (0, 2) decay bound."""
    sigma = 2 * np.pi * np.arange(n_eval) / n_eval
    sigma = np.where(sigma > np.pi, sigma - 2 * np.pi, sigma)
    fitted = {}
    for m in ms:
        vals = np.abs(family.samples(m, n_eval))
        fitted[m] = float(2.0 ** m * np.max(vals * sigma ** 2))
    spread = max(fitted.values()) / min(fitted.values())
    return {"C": fitted, "spread": spread}


# ----------------------------------------------------------------------------
# beta family


@dataclass
class BetaFamily:
    """Nonnegative hats in log_A scale; values[j - 1, k] = beta_j-hat(k) for k = 0..covered."""

    A: float
    covered: int
    values: np.ndarray

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def coefficient(self, j: int, freq: int) -> float:
        if j < 1 or j > self.count or freq < 0 or freq > self.covered:
            return 0.0
        return float(self.values[j - 1, freq])

    def support(self, j: int) -> tuple[int, int] | None:
        nz = np.nonzero(self.values[j - 1])[0]
        if nz.size == 0:
            return None
        return int(nz[0]), int(nz[-1])

    def window_coefficients(self, j: int, n: int) -> np.ndarray:
        """beta_j-hat laid out over [-N/2, N/2)."""
        out = np.zeros(n)
        half = n // 2
        top = min(self.covered, half - 1)
        out[half: half + top + 1] = self.values[j - 1, : top + 1]
        return out


def _log_position(k: int, A: float) -> float:
    y = math.log(k) / math.log(A)
    near = round(y)
    return float(near) if abs(y - near) < 1e-9 else y


def build_beta_family(A: float, window: FreqInterval) -> BetaFamily:
    """Hats beta_j with sum_j beta_j-hat(k) = 1 for 1 <= k <= window.b.

    In y = log_A k: beta_1 = 1 on [0, 1] and falls linearly to 0 at y = 2;
    beta_j for j >= 2 is the tent centred at j with feet at j - 1 and j + 1.
    So beta_j-hat vanishes off [A^(j-1), A^(j+1)], and adjacent tents sum to one.
    """
    if A <= 1:
        raise ValueError("A must exceed 1")
    covered = int(window.b)
    if covered < 1:
        raise ValueError("window must reach positive frequencies")
    top = max(2, int(math.ceil(_log_position(covered, A))) + 1)
    values = np.zeros((top, covered + 1))
    for k in range(1, covered + 1):
        y = _log_position(k, A)
        if y <= 1:
            values[0, k] = 1.0
            continue
        base = math.floor(y)
        frac = round((y - base) * _HAT_QUANTUM) / _HAT_QUANTUM
        if frac == 1.0:
            base, frac = base + 1, 0.0
        values[base - 1, k] = 1.0 - frac
        if frac > 0:
            values[base, k] = frac
    # drop trailing empty hats
    alive = np.nonzero(values.any(axis=1))[0]
    values = values[: alive[-1] + 1]
    return BetaFamily(A=A, covered=covered, values=values)


# ----------------------------------------------------------------------------
# operators S and R


def _intervals(partition) -> list[FreqInterval]:
    return list(partition.intervals if isinstance(partition, Partition) else partition)


def op_S(hs: FunctionSequence, partition: Partition | Sequence[FreqInterval], phi: PhiFamily) -> SampledFunction:
    """sum_k sum_{j in B_k} e^{i a_j x} (h_j * phi_k)(x).

    Interval j must have dyadic length 2^k; a_j is its left end. The
    intervals only supply shifts and scales, so they may overlap.
    """
    ivs = _intervals(partition)
    if len(ivs) != len(hs):
        raise PlanMismatch(f"{len(hs)} functions for {len(ivs)} intervals")
    n = hs.n_samples
    if phi.n != n:
        raise ValueError(f"phi family built for N = {phi.n}, input has N = {n}")
    coeffs = spectra(hs.values)
    total = np.zeros(n, dtype=complex)
    for j, iv in enumerate(ivs):
        total += _s_term(coeffs[j], iv, phi)
    return from_spectrum(Spectrum(total))


def _s_term(coeffs: np.ndarray, iv: FreqInterval, phi: PhiFamily) -> np.ndarray:
    if not is_power_of_two(iv.length):
        raise NonDyadicLength(f"[{iv.a}, {iv.b}] has length {iv.length}")
    k = iv.length.bit_length() - 1
    if k not in phi.polys:
        raise WindowOverflow(f"phi family has no member for 2^{k}")
    try:
        return shift_coefficients(coeffs * phi.polys[k], iv.a)
    except SpectrumOverflow as exc:
        raise WindowOverflow(str(exc)) from exc


def op_R(fs: FunctionSequence, beta: BetaFamily) -> np.ndarray:
    """Array of shape (K, J, N) whose entry [k, j] samples f_k * beta_j."""
    n = fs.n_samples
    coeffs = spectra(fs.values)
    _check_coverage(coeffs, beta, n)
    kernels = np.array([beta.window_coefficients(j, n) for j in range(1, beta.count + 1)])
    return samples_from_spectra(coeffs[:, None, :] * kernels[None, :, :])


def _check_coverage(coeffs: np.ndarray, beta: BetaFamily, n: int, rtol: float = 1e-13) -> None:
    freqs = frequencies(n)
    outside = (freqs < 0) | (freqs > beta.covered)
    mag = np.abs(coeffs)
    peak = mag.max(initial=0.0)
    if peak > 0 and mag[..., outside].max(initial=0.0) > rtol * peak:
        raise CoverageGap(f"spectrum leaves the covered range [0, {beta.covered}]")


# ----------------------------------------------------------------------------
# the cutting plan


@dataclass
class Member:
    """One summand handed to an S-batch.

    kind is 'short', 'forward' or 'reverse'; `support` is the integer spectral
    support in original coordinates; the S placement moves it by -shift into
    the pass band of phi_scale.
    """

    kind: str
    j: int
    k: int | None
    support: FreqInterval
    cls: int
    scale: int = 0
    shift: int = 0

    @property
    def s_interval(self) -> FreqInterval:
        return FreqInterval(self.shift, self.shift + 2 ** self.scale - 1)


@dataclass
class LongCut:
    j: int
    interval: FreqInterval
    forward: dict[int, FreqInterval]  # k -> support in original coordinates
    top: tuple[int, ...]  # the largest and second largest k, routed to the reverse pass
    reverse_region: FreqInterval
    reverse: dict[int, FreqInterval]


@dataclass
class DecompositionPlan:
    partition: Partition
    n: int
    A: float
    xi: float
    branch: list[str]
    colors: dict[int, int]
    cuts: dict[int, LongCut]
    batches: list[list[Member]]
    beta: BetaFamily = field(repr=False)
    phi: PhiFamily = field(repr=False)

    def summary(self) -> dict:
        classes = {}
        for batch in self.batches:
            key = f"{batch[0].kind}:{batch[0].cls}"
            classes.setdefault(key, []).append(len(batch))
        return {
            "n": self.n,
            "intervals": len(self.partition),
            "short": self.branch.count("short"),
            "long": self.branch.count("long"),
            "colors_used": len(set(self.colors.values())),
            "forward_pieces": sum(len(c.forward) for c in self.cuts.values()),
            "reverse_pieces": sum(len(c.reverse) for c in self.cuts.values()),
            "batches": len(self.batches),
            "batch_sizes": [len(b) for b in self.batches],
            "classes": classes,
        }

    def to_json(self) -> str:
        def iv(x: FreqInterval) -> list[int]:
            return [x.a, x.b]

        doc = {
            "partition": [iv(x) for x in self.partition],
            "n": self.n,
            "A": self.A,
            "xi": self.xi,
            "branch": self.branch,
            "colors": {str(j): c for j, c in self.colors.items()},
            "cuts": {
                str(j): {
                    "interval": iv(c.interval),
                    "forward": {str(k): iv(s) for k, s in c.forward.items()},
                    "top": list(c.top),
                    "reverse_region": iv(c.reverse_region),
                    "reverse": {str(k): iv(s) for k, s in c.reverse.items()},
                }
                for j, c in self.cuts.items()
            },
            "batches": [
                [{**asdict(m), "support": iv(m.support)} for m in batch] for batch in self.batches
            ],
            "summary": self.summary(),
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def _hat_supports(beta: BetaFamily, length: int) -> dict[int, tuple[int, int]]:
    """k -> integer support of beta_k-hat restricted to [1, length]."""
    out = {}
    for k in range(1, beta.count + 1):
        vals = beta.values[k - 1, 1: length + 1]
        nz = np.nonzero(vals)[0]
        if nz.size:
            out[k] = (int(nz[0]) + 1, int(nz[-1]) + 1)
    return out


def _color_short(intervals: dict[int, FreqInterval]) -> dict[int, int]:
    """Greedy first-fit colouring: members of one colour avoid each other's 9-fold dilates."""
    colors: dict[int, int] = {}
    members: dict[int, list[int]] = {}
    for j in sorted(intervals, key=lambda i: intervals[i].a):
        iv = intervals[j]
        dil = iv.dilate(9)
        c = 0
        while True:
            clash = any(
                intervals[o].intersects(dil) or iv.intersects(intervals[o].dilate(9)) for o in members.get(c, [])
            )
            if not clash:
                break
            c += 1
        colors[j] = c
        members.setdefault(c, []).append(j)
    return colors


def _separate(members: list[Member]) -> list[list[Member]]:
    """Split one class into batches whose members have pairwise disjoint 3-fold dilates."""
    batches: list[list[Member]] = []
    for m in sorted(members, key=lambda x: (x.support.a, x.support.b)):
        dil = m.support.dilate(3)
        for batch in batches:
            if not any(dil.intersects(o.support.dilate(3)) for o in batch):
                batch.append(m)
                break
        else:
            batches.append([m])
    return batches


def _place(member: Member, phi: PhiFamily) -> Member:
    """Smallest phi scale whose pass band holds the support, and the matching shift."""
    length = member.support.length
    for scale in sorted(phi.polys):
        band = phi.passband(scale)
        if band.size >= length:
            member.scale = scale
            member.shift = member.support.a - int(band[0])
            return member
    raise WindowOverflow(f"no phi pass band holds an interval of length {length} at N = {phi.n}")


def regularize_partition(
    partition: Partition,
    n: int,
    A: float = CUT_BASE,
    xi: float = DEFAULT_XI,
    short_max: int = SHORT_MAX_LENGTH,
) -> DecompositionPlan:
    """Cutting plan for a partition of nonnegative frequencies at resolution n."""
    partition.check_window(n)
    if any(iv.a < 0 for iv in partition):
        raise SignMixed("cutting plans need intervals in the nonnegative frequencies")
    phi = build_phi_family(int(math.log2(n // 2)), xi, n)
    longest = max((iv.length for iv in partition), default=1)
    beta = build_beta_family(A, FreqInterval(1, max(longest, 2)))

    branch = ["short" if iv.length <= short_max else "long" for iv in partition]
    shorts = {j: iv for j, iv in enumerate(partition) if branch[j] == "short"}
    colors = _color_short(shorts)
    if colors and max(colors.values()) >= MAX_SHORT_COLORS:
        raise PlanMismatch(f"short intervals needed {max(colors.values()) + 1} colours")

    batches: list[list[Member]] = []
    by_color: dict[int, list[Member]] = {}
    for j, iv in shorts.items():
        by_color.setdefault(colors[j], []).append(Member("short", j, None, iv, colors[j]))
    for c in sorted(by_color):
        batches.append(by_color[c])

    cuts: dict[int, LongCut] = {}
    forward_cls: dict[int, list[Member]] = {}
    reverse_cls: dict[int, list[Member]] = {}
    for j, iv in enumerate(partition):
        if branch[j] != "long":
            continue
        # shift the left end to 1, cut, shift back
        hats = _hat_supports(beta, iv.length)
        forward = {k: FreqInterval(lo + iv.a - 1, hi + iv.a - 1) for k, (lo, hi) in hats.items()}
        top = tuple(sorted(forward)[-2:])
        region = FreqInterval(min(forward[k].a for k in top), iv.b)
        # reversed pass: right end to -1, reflect, cut, reflect and shift back
        rhats = _hat_supports(beta, region.length)
        reverse = {k: FreqInterval(iv.b + 1 - hi, iv.b + 1 - lo) for k, (lo, hi) in rhats.items()}
        cuts[j] = LongCut(j, iv, forward, top, region, reverse)
        for k, sup in forward.items():
            if k not in top:
                forward_cls.setdefault(k % N_CLASSES, []).append(Member("forward", j, k, sup, k % N_CLASSES))
        for k, sup in reverse.items():
            reverse_cls.setdefault(k % N_CLASSES, []).append(Member("reverse", j, k, sup, k % N_CLASSES))

    for table in (forward_cls, reverse_cls):
        for cls in sorted(table):
            batches.extend(_separate(table[cls]))

    for batch in batches:
        for m in batch:
            _place(m, phi)

    return DecompositionPlan(
        partition=partition,
        n=n,
        A=A,
        xi=xi,
        branch=branch,
        colors=colors,
        cuts=cuts,
        batches=batches,
        beta=beta,
        phi=phi,
    )


def validate_plan(plan: DecompositionPlan) -> list[str]:
    """Every violated structural invariant, as a message; empty means the plan is sound."""
    problems = []
    part = plan.partition
    if set(plan.colors.values()) and max(plan.colors.values()) >= MAX_SHORT_COLORS:
        problems.append("more than 100 colours")
    for j, iv in enumerate(part):
        tag = plan.branch[j]
        if tag == "short" and iv.length > SHORT_MAX_LENGTH or tag == "long" and iv.length <= SHORT_MAX_LENGTH:
            problems.append(f"interval {j} tagged {tag} with length {iv.length}")
    for j, cut in plan.cuts.items():
        iv = cut.interval
        covered = np.zeros(iv.length, dtype=bool)
        for k, sup in cut.forward.items():
            if not (iv.a <= sup.a and sup.b <= iv.b):
                problems.append(f"forward piece ({j},{k}) leaves its interval")
            covered[sup.a - iv.a: sup.b - iv.a + 1] = True
        if not covered.all():
            problems.append(f"forward pieces do not cover interval {j}")
        nonzero = sorted(cut.forward)
        if tuple(nonzero[-2:]) != cut.top:
            problems.append(f"interval {j}: flagged pieces are not the two largest k")
        rcovered = np.zeros(cut.reverse_region.length, dtype=bool)
        for k, sup in cut.reverse.items():
            if not (cut.reverse_region.a <= sup.a and sup.b <= cut.reverse_region.b):
                problems.append(f"reverse piece ({j},{k}) leaves the reversed region")
            rcovered[sup.a - cut.reverse_region.a: sup.b - cut.reverse_region.a + 1] = True
        if not rcovered.all():
            problems.append(f"reverse pieces do not cover the reversed region of {j}")
    for b, batch in enumerate(plan.batches):
        kinds = {(m.kind, m.cls) for m in batch}
        if len(kinds) != 1:
            problems.append(f"batch {b} mixes classes {sorted(kinds)}")
        for m in batch:
            if m.kind != "short" and m.cls != m.k % N_CLASSES:
                problems.append(f"piece ({m.j},{m.k}) filed under class {m.cls}")
            band = plan.phi.passband(m.scale)
            lo, hi = m.support.a - m.shift, m.support.b - m.shift
            if band.size == 0 or lo < band[0] or hi > band[-1]:
                problems.append(f"member ({m.kind},{m.j},{m.k}) is not inside its pass band")
        for x in range(len(batch)):
            for y in range(x + 1, len(batch)):
                p, q = batch[x], batch[y]
                if p.support.dilate(3).intersects(q.support.dilate(3)):
                    problems.append(f"batch {b}: 3-fold dilates of {p.support} and {q.support} meet")
                if p.kind == "short" and (
                    p.support.dilate(9).intersects(q.support) or q.support.dilate(9).intersects(p.support)
                ):
                    problems.append(f"colour {p.cls}: 9-fold rule fails for {p.support} and {q.support}")
    classes = {m.cls for batch in plan.batches for m in batch if m.kind != "short"}
    if not classes <= set(range(N_CLASSES)):
        problems.append(f"classes outside 0..9: {sorted(classes)}")
    return problems


def _reflect(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of conj(h): c_n -> conj(c_{-n}); frequency -N/2 has no mirror and must vanish."""
    out = np.zeros_like(coeffs)
    out[1:] = np.conj(coeffs[1:][::-1])
    return out


def _pad(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.size
    out = np.zeros(2 * n, dtype=complex)
    out[n // 2: n // 2 + n] = coeffs
    return out


def _crop(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.size // 2
    return coeffs[n // 2: n // 2 + n].copy()


def execute_plan(plan: DecompositionPlan, fs: FunctionSequence, u=None) -> SampledFunction:
    """Evaluate T_u(fs) through the plan: projections, cuts, S-batches, summation.

    Stage 1 replaces f_j by M_{Delta_j}(u f_j) via the two-term Riesz
    representation; the S-batches then rebuild the sum from the pieces and the
    result is divided by u.
    """
    n = plan.n
    if fs.n_samples != n or len(fs) != len(plan.partition):
        raise PlanMismatch("function sequence does not match the plan")
    uv = np.ones(n) if u is None else _weight_values(u)
    projected = np.array(
        [to_coeffs(riesz_multiplier(SampledFunction(fs.values[j] * uv), iv)) for j, iv in enumerate(plan.partition)]
    ).reshape(len(fs), n)

    # cuts run on a doubled coefficient array: moving [a, b] to start at 1 may
    # push b past N/2 - 1, while every finished piece lies back inside [a, b]
    big = 2 * n
    pieces: dict[tuple[str, int, int | None], np.ndarray] = {}
    for j, cut in plan.cuts.items():
        iv = cut.interval
        g = shift_coefficients(_pad(projected[j]), -(iv.a - 1))
        top_sum = np.zeros(big, dtype=complex)
        for k in cut.forward:
            piece = shift_coefficients(g * plan.beta.window_coefficients(k, big), iv.a - 1)
            if k in cut.top:
                top_sum += piece
            else:
                pieces[("forward", j, k)] = _crop(piece)
        r = _reflect(shift_coefficients(top_sum, -(iv.b + 1)))
        for k in cut.reverse:
            rp = _reflect(r * plan.beta.window_coefficients(k, big))
            pieces[("reverse", j, k)] = _crop(shift_coefficients(rp, iv.b + 1))
    for j, tag in enumerate(plan.branch):
        if tag == "short":
            pieces[("short", j, None)] = projected[j]

    total = np.zeros(n, dtype=complex)
    for batch in plan.batches:
        hs = np.array([shift_coefficients(pieces[(m.kind, m.j, m.k)], -m.shift) for m in batch])
        hs = FunctionSequence(samples_from_spectra(hs))
        total += to_coeffs(op_S(hs, [m.s_interval for m in batch], plan.phi))
    return SampledFunction(from_spectrum(Spectrum(total)).samples / uv)


def to_coeffs(f: SampledFunction) -> np.ndarray:
    return spectra(f.samples[None, :])[0]


# ----------------------------------------------------------------------------
# signed partitions


def split_by_sign(partition: Partition) -> tuple[list[tuple[int, FreqInterval]], list[tuple[int, FreqInterval]]]:
    """(owner j, nonnegative part) and (owner j, reflected negative part) lists.

    An interval straddling zero contributes to both lists.
    """
    pos, neg = [], []
    for j, iv in enumerate(partition):
        if iv.b >= 0:
            pos.append((j, FreqInterval(max(iv.a, 0), iv.b)))
        if iv.a < 0:
            neg.append((j, FreqInterval(-min(iv.b, -1), -iv.a)))
    return pos, neg


@dataclass
class SignedPlan:
    positive: DecompositionPlan | None
    negative: DecompositionPlan | None
    pos_owner: list[int]
    neg_owner: list[int]
    edge_owner: int | None = None  # interval holding -N/2, applied as a single-frequency multiplier


def regularize_signed(partition: Partition, n: int, **kwargs) -> SignedPlan:
    """Plans for the nonnegative part and for the mirror image of the negative part.

    Frequency -N/2 mirrors to N/2, which is outside the window, so it is split
    off and handled directly by its owner's one-point multiplier.
    """
    pos, neg = split_by_sign(partition)
    half = n // 2
    edge = None
    mirrored = []
    for j, iv in neg:
        if iv.b >= half:
            edge = j
            if iv.a <= half - 1:
                mirrored.append((j, FreqInterval(iv.a, half - 1)))
        else:
            mirrored.append((j, iv))
    plan_pos = regularize_partition(Partition(tuple(iv for _, iv in pos)), n, **kwargs) if pos else None
    plan_neg = regularize_partition(Partition(tuple(iv for _, iv in mirrored)), n, **kwargs) if mirrored else None
    return SignedPlan(plan_pos, plan_neg, [j for j, _ in pos], [j for j, _ in mirrored], edge)


def execute_signed(plan: SignedPlan, fs: FunctionSequence, u=None) -> SampledFunction:
    """T_u over a signed partition; the negative half runs on conjugated inputs."""
    n = fs.n_samples
    uv = np.ones(n) if u is None else _weight_values(u)
    total = np.zeros(n, dtype=complex)
    if plan.positive is not None:
        total += execute_plan(plan.positive, FunctionSequence(fs.values[plan.pos_owner]), uv).samples
    if plan.negative is not None:
        mirrored = FunctionSequence(np.conj(fs.values[plan.neg_owner]))
        total += np.conj(execute_plan(plan.negative, mirrored, uv).samples)
    if plan.edge_owner is not None:
        c = to_coeffs(SampledFunction(fs.values[plan.edge_owner] * uv))
        edge = np.zeros(n, dtype=complex)
        edge[0] = c[0]
        total += samples_from_spectra(edge) / uv
    return SampledFunction(total)
