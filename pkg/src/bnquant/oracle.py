"""Brute-force reference for both sides of the replacement identity.

Both sides are monotone in ``N``, constant outside a finite transition
window, so agreement on the window plus two far sentinels certifies
agreement on all integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from ._rational import RationalLike, clip, to_fraction
from .convert import FixedAffine, QuantRange, SignThreshold, candidate_windows

DEFAULT_MARGIN = 5

Replacement = Union[FixedAffine, SignThreshold]


@dataclass
class EquivalenceReport:
    window: tuple[int, int]
    checked_count: int = 0
    mismatches: list[tuple[int, int, int]] = field(default_factory=list)
    sentinels_checked: bool = False
    stride: tuple[int, int] = (1, 0)

    @property
    def certified(self) -> bool:
        return self.sentinels_checked and not self.mismatches

    @property
    def first_failure(self):
        return self.mismatches[0] if self.mismatches else None

    def as_dict(self) -> dict:
        return {
            "window": list(self.window),
            "checked": self.checked_count,
            "sentinels_checked": self.sentinels_checked,
            "stride": list(self.stride),
            "certified": self.certified,
            "mismatches": [list(m) for m in self.mismatches],
        }


def eval_float_side(n: int, t: RationalLike, b: RationalLike, rng: QuantRange) -> int:
    t, b = to_fraction(t), to_fraction(b)
    if t == 0:
        raise ValueError("t must be nonzero")
    return clip(math.floor((n + b) / t), rng.y_min, rng.y_max)


def eval_fixed_side(n: int, fa: Replacement) -> int:
    if isinstance(fa, SignThreshold):
        return fa.evaluate(n)
    # Python's // is the mathematical floor for either sign of T
    return clip((n * fa.K + fa.B) // fa.T, fa.range.y_min, fa.range.y_max)


def transition_window(t: Fraction, b: Fraction, rng: QuantRange, margin: int = DEFAULT_MARGIN) -> tuple[int, int]:
    """Inputs spanning every step of the float side, widened by ``margin``."""
    first = math.ceil((rng.y_min + 1) * t - b)
    last = math.ceil(rng.y_max * t - b)
    lo, hi = min(first, last), max(first, last)
    return lo - margin, hi + margin


def verify_equivalence(
    t: RationalLike,
    b: RationalLike,
    fa: Replacement,
    margin: int = DEFAULT_MARGIN,
    stride: tuple[int, int] = (1, 0),
    max_mismatches: int = 100,
) -> EquivalenceReport:
    """Compare both sides over the transition window and two far sentinels.

    With ``stride=(alpha, beta)`` the inputs are ``x = alpha*N + beta`` and
    the window is taken over ``N``.
    """
    if margin < 1:
        raise ValueError("margin must be positive")
    t, b = to_fraction(t), to_fraction(b)
    if t == 0:
        raise ValueError("t must be nonzero")
    alpha, beta = stride
    if alpha < 1:
        raise ValueError("stride alpha must be positive")
    rng = fa.range
    # x = alpha*N + beta; (x + b)/t == (N + (b + beta)/alpha) / (t/alpha)
    lo, hi = transition_window(t / alpha, (b + beta) / alpha, rng, margin)
    width = hi - lo + 1
    report = EquivalenceReport(window=(lo, hi), stride=(alpha, beta))
    points = list(range(lo, hi + 1)) + [lo - 10 * width, hi + 10 * width]
    for n in points:
        x = alpha * n + beta
        lhs = eval_float_side(x, t, b, rng)
        rhs = eval_fixed_side(x, fa)
        report.checked_count += 1
        if lhs != rhs and len(report.mismatches) < max_mismatches:
            report.mismatches.append((x, lhs, rhs))
    report.sentinels_checked = True
    return report


def brute_force_tb(t: RationalLike, b: RationalLike, k: int, rng: QuantRange, margin: int = DEFAULT_MARGIN) -> set[tuple[int, int]]:
    """Every nonzero ``(T, B)`` passing exhaustive verification.

    Scans the full candidate rectangle for ``T`` and ``B`` on the shifted
    range, without consulting ceiling sequences; meant as ground truth in
    tests.  Needs at least two activation levels.
    """
    t, b = to_fraction(t), to_fraction(b)
    if t == 0:
        raise ValueError("t must be nonzero")
    n = rng.width
    flip = t < 0
    tp, bp = (-t, -b) if flip else (t, b)
    b_shift = bp - tp * rng.y_min
    (t_lo, t_hi), (b_lo, b_hi) = candidate_windows(tp, b_shift, k, n)
    lo, hi = transition_window(t, b, rng, margin)
    width = hi - lo + 1
    points = list(range(lo, hi + 1)) + [lo - 10 * width, hi + 10 * width]
    expected = [eval_float_side(x, t, b, rng) for x in points]
    y_min, y_max = rng.y_min, rng.y_max
    found = set()
    for T in range(math.floor(t_lo) + 1, math.ceil(t_hi)):
        if T == 0:
            continue
        for b_prime in range(math.floor(b_lo) + 1, math.ceil(b_hi)):
            B = b_prime + T * y_min
            if flip:
                T_out, B_out = -T, -B
            else:
                T_out, B_out = T, B
            for x, want in zip(points, expected):
                got = (x * k + B_out) // T_out
                got = y_min if got < y_min else y_max if got > y_max else got
                if got != want:
                    break
            else:
                found.add((T_out, B_out))
    return found
