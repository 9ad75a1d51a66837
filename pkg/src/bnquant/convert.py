"""Integer ``(T, B)`` for a given ``(t, b)`` at a fixed shared scale ``K``.

The replacement must reproduce ``clip(floor((N + b) / t), y_min, y_max)``
for every integer ``N`` with ``clip(floor((N*K + B) / T), y_min, y_max)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Optional

from ._rational import RationalLike, clip, to_fraction
from .seqgen import CeilSequence


class NoSolution(ValueError):
    """No nonzero ``T`` admits a ``B`` at this scale."""

    def __init__(self, message: str, sequence: Optional[CeilSequence] = None, k: Optional[int] = None):
        super().__init__(message)
        self.sequence = sequence
        self.k = k


class DegenerateSign(ValueError):
    """The clipped floor is a two-level step; use :func:`detect_degenerate_sign`."""

    def __init__(self, threshold: "SignThreshold"):
        super().__init__(
            f"operator collapses to a step at N0={threshold.n0}; "
            "use the sign-threshold replacement"
        )
        self.threshold = threshold


@dataclass(frozen=True)
class QuantRange:
    y_min: int
    y_max: int

    def __post_init__(self):
        if int(self.y_min) != self.y_min or int(self.y_max) != self.y_max:
            raise ValueError("clip bounds must be integers")
        if self.y_min >= self.y_max:
            raise ValueError(f"need y_min < y_max, got [{self.y_min}, {self.y_max}]")

    @property
    def width(self) -> int:
        """Number of activation levels above the floor, ``A = y_max - y_min``."""
        return self.y_max - self.y_min

    @classmethod
    def canonical(cls, a: int) -> "QuantRange":
        return cls(0, a)


@dataclass(frozen=True)
class FixedAffine:
    T: int
    B: int
    K: int
    range: QuantRange

    def __post_init__(self):
        if self.T == 0:
            raise ValueError("T must be nonzero")
        if self.K < 1:
            raise ValueError("K must be positive")

    def evaluate(self, n: int) -> int:
        return clip((n * self.K + self.B) // self.T, self.range.y_min, self.range.y_max)

    def as_dict(self) -> dict:
        return {"T": self.T, "B": self.B, "K": self.K}


@dataclass(frozen=True)
class SignThreshold:
    """Two-level replacement.

    With ``increasing`` set the output is ``y_max`` for ``N > n0`` and
    ``y_min`` otherwise; when cleared (negative slope) it is ``y_max`` for
    ``N < n0``.
    """

    n0: int
    range: QuantRange
    increasing: bool = True

    def evaluate(self, n: int) -> int:
        high = n > self.n0 if self.increasing else n < self.n0
        return self.range.y_max if high else self.range.y_min

    def as_dict(self) -> dict:
        return {"n0": self.n0, "increasing": self.increasing}


def shift_range(t: RationalLike, b: RationalLike, rng: QuantRange) -> tuple[Fraction, Fraction, QuantRange]:
    """Move the clip range to ``[0, A]``: ``b' = b - t*y_min``."""
    t, b = to_fraction(t), to_fraction(b)
    return t, b - t * rng.y_min, QuantRange.canonical(rng.width)


def unshift_offset(T: int, b_shifted: int, rng: QuantRange) -> int:
    """Inverse of the range shift on the integer side: ``B = B' + T*y_min``."""
    return b_shifted + T * rng.y_min


def ceil_sequence(t: Fraction, b: Fraction, rng: QuantRange) -> list[int]:
    """``ceil(i*t - b)`` for the thresholds ``i = y_min+1 .. y_max``."""
    return [math.ceil(i * t - b) for i in range(rng.y_min + 1, rng.y_max + 1)]


def _t_bounds(seq: list[int], k: int) -> tuple[int, int]:
    """Exclusive integer bounds on ``T`` from every ordered index pair."""
    n = len(seq)
    lo, hi = None, None
    for i in range(1, n):
        for j in range(i):
            d = i - j
            diff = seq[i] - seq[j]
            low = ((diff - 1) * k) // d
            high = -((-(diff + 1) * k) // d)
            lo = low if lo is None else max(lo, low)
            hi = high if hi is None else min(hi, high)
    return lo, hi


def _positive_solutions(t: Fraction, b: Fraction, k: int, rng: QuantRange, mode: str):
    """Solve for ``t > 0`` directly on the thresholds of ``rng``."""
    seq = ceil_sequence(t, b, rng)
    idx = list(range(rng.y_min + 1, rng.y_max + 1))
    n = len(seq)
    kt = k * t
    # T must share the sign of t, and the ceiling identity assumes T > 0
    if n == 1:
        candidates = sorted({math.floor(kt), math.ceil(kt)} - {0}) or [1]
    else:
        lo, hi = _t_bounds(seq, k)
        candidates = list(range(max(lo + 1, 1), hi))
    candidates.sort(key=lambda T: (abs(T - kt), T))
    found = []
    for T in candidates:
        vals = [i * T - k * s for i, s in zip(idx, seq)]
        b_lo, b_hi = max(vals), min(vals) + k
        if b_lo < b_hi:
            if mode == "first":
                return [(T, b_lo)], seq
            found.extend((T, B) for B in range(b_lo, b_hi))
    return sorted(found), seq


def detect_degenerate_sign(t: RationalLike, b: RationalLike, rng: QuantRange) -> Optional[SignThreshold]:
    """Step-function replacement when the operator only ever outputs the clip bounds.

    Applies when ``0 < |t| < 1/(A-1)`` and the first and last thresholds
    share a ceiling, ``ceil(t - b') == ceil(A*t - b')`` on the shifted range.
    """
    t, b = to_fraction(t), to_fraction(b)
    if t == 0:
        raise ValueError("t must be nonzero")
    increasing = t > 0
    if not increasing:
        t, b = -t, -b
    _, b_shift, canon = shift_range(t, b, rng)
    a = canon.width
    if a > 1 and not t < Fraction(1, a - 1):
        return None
    first = math.ceil(t - b_shift)
    if first != math.ceil(a * t - b_shift):
        return None
    n0 = first - 1
    if increasing:
        return SignThreshold(n0, rng, True)
    # N = -M: high for M > n0, i.e. N < -n0
    return SignThreshold(-n0, rng, False)


def solve_tb(
    t: RationalLike,
    b: RationalLike,
    k: int,
    rng: QuantRange,
    mode: Literal["first", "all"] = "first",
    allow_degenerate: bool = False,
) -> list[FixedAffine]:
    """Integer replacements ``(T, B)`` at scale ``k``.

    ``T`` is scanned inside the pairwise window by distance to ``k*t`` (ties
    toward the smaller ``T``), and ``B`` is reported at the low end of its
    admissible range.  ``mode="all"`` returns every valid pair, sorted.

    Raises :class:`DegenerateSign` when the operator collapses to a step on
    a range with at least two levels (unless ``allow_degenerate``, which
    solves for a nonzero ``T`` anyway), and :class:`NoSolution` when ``k``
    is too coarse for this ``(t, b)``.
    """
    if mode not in ("first", "all"):
        raise ValueError(f"unknown mode {mode!r}")
    if k < 1:
        raise ValueError("k must be positive")
    t, b = to_fraction(t), to_fraction(b)
    if t == 0:
        raise ValueError("t must be nonzero")
    if rng.width > 1 and not allow_degenerate:
        sign = detect_degenerate_sign(t, b, rng)
        if sign is not None:
            raise DegenerateSign(sign)
    flip = t < 0
    tp, bp = (-t, -b) if flip else (t, b)
    pairs, seq = _positive_solutions(tp, bp, k, rng, mode)
    if not pairs:
        raise NoSolution(
            f"no (T, B) at K={k} for t={t}, b={b} on [{rng.y_min}, {rng.y_max}]",
            sequence=CeilSequence.of(seq),
            k=k,
        )
    if flip:
        pairs = sorted((-T, -B) for T, B in pairs) if mode == "all" else [(-T, -B) for T, B in pairs]
    return [FixedAffine(T, B, k, rng) for T, B in pairs]


def candidate_windows(t: RationalLike, b: RationalLike, k: int, n: int) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    """Open intervals that contain every valid ``T`` and ``B`` on ``[0, n]``.

    ``T`` lies within ``2k/(n-1)`` of ``k*t`` and ``B`` within
    ``k(n+1)/(n-1)`` of ``k*b``.  For ``t < 0`` the intervals are mirrored.
    """
    if n < 2:
        raise ValueError("candidate windows need n >= 2")
    t, b = to_fraction(t), to_fraction(b)
    dt = Fraction(2 * k, n - 1)
    db = Fraction(k * (n + 1), n - 1)
    return (k * t - dt, k * t + dt), (k * b - db, k * b + db)


def intuitive_candidates(t: RationalLike, b: RationalLike, k: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """The rounding neighbours ``floor/ceil(k*t)`` and ``floor/ceil(k*b)``."""
    kt, kb = k * to_fraction(t), k * to_fraction(b)
    return (math.floor(kt), math.ceil(kt)), (math.floor(kb), math.ceil(kb))


def reduce_stride(k: int, alpha: int, beta: int = 0) -> int:
    """Scale for inputs restricted to ``alpha*N + beta``.

    The solve then runs at ``alpha * K'``, so ``K' = k / alpha`` is valid
    whenever ``k`` is satisfied.  ``beta`` does not change the scale.
    """
    if alpha < 1:
        raise ValueError("alpha must be positive")
    if k < 1:
        raise ValueError("k must be positive")
    if k % alpha:
        raise ValueError(f"scale {k} is not a multiple of stride {alpha}")
    return k // alpha


def solve_tb_strided(
    t: RationalLike,
    b: RationalLike,
    k_reduced: int,
    alpha: int,
    beta: int,
    rng: QuantRange,
    mode: Literal["first", "all"] = "first",
) -> list[FixedAffine]:
    """Replacements at scale ``k_reduced`` valid for inputs ``alpha*N + beta``.

    Solves ``(t/alpha, (b + beta)/alpha)`` at scale ``alpha * k_reduced`` and
    moves ``beta * k_reduced`` back out of ``B``.
    """
    if alpha < 1:
        raise ValueError("alpha must be positive")
    t, b = to_fraction(t), to_fraction(b)
    inner = solve_tb(t / alpha, (b + beta) / alpha, alpha * k_reduced, rng, mode)
    return [FixedAffine(fa.T, fa.B - beta * k_reduced, k_reduced, rng) for fa in inner]
