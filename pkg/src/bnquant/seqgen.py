"""Ceiling sequences ``S_i = ceil(i*t - b)`` and their exhaustive enumeration.

A clipped floor ``clip(floor((N + b) / t), 0, n)`` is fully determined by
where it steps, and those step points are the ceilings ``S_1..S_n``.  Every
one-affine operator therefore maps to one such sequence, and the set of
sequences reachable from real ``(t, b)`` is finite for each ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from ._rational import RationalLike, to_fraction

DEFAULT_WINDOW = 100_000
DEFAULT_BUDGET = 100_000_000


class SequenceBudgetExceeded(RuntimeError):
    """Enumeration would produce more sequences than the configured budget."""

    def __init__(self, n: int, count: int, budget: int):
        super().__init__(
            f"length-{n} enumeration reached {count} sequences, budget is {budget}"
        )
        self.n = n
        self.count = count
        self.budget = budget


@dataclass(frozen=True)
class AffineReal:
    """The folded operator ``N -> (N + b) / t`` with exact rational fields."""

    t: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "t", to_fraction(self.t))
        object.__setattr__(self, "b", to_fraction(self.b))
        if self.t == 0:
            raise ValueError("t must be nonzero")

    @classmethod
    def parse(cls, t: RationalLike, b: RationalLike) -> "AffineReal":
        return cls(to_fraction(t), to_fraction(b))


@dataclass(frozen=True)
class NormalizedAffine:
    """Canonical form with ``0 <= t < 1`` and ``ceil(t - b) == 1``.

    The original affine is recovered as follows: undo the integer shifts,
    ``t_orig' = t + int_shift`` and ``b_orig' = b + offset_shift``, then negate
    both when ``sign_flipped`` is set.
    """

    t: Fraction
    b: Fraction
    int_shift: int = 0
    offset_shift: int = 0
    sign_flipped: bool = False

    def __post_init__(self):
        if not 0 <= self.t < 1:
            raise ValueError(f"normalized t must lie in [0, 1), got {self.t}")
        if math.ceil(self.t - self.b) != 1:
            raise ValueError("normalized pair must satisfy ceil(t - b) == 1")

    def positive_affine(self) -> tuple[Fraction, Fraction]:
        """The ``t >= 0`` pair before the integer shifts were removed."""
        return self.t + self.int_shift, self.b + self.offset_shift

    def original(self) -> AffineReal:
        t, b = self.positive_affine()
        if self.sign_flipped:
            t, b = -t, -b
        return AffineReal(t, b)

    def original_sequence(self, n: int) -> list[int]:
        """Ceilings of the positive-slope pair, rebuilt from the shifts alone."""
        base = make_sequence(self, n).s
        return [s + i * self.int_shift - self.offset_shift for i, s in enumerate(base, 1)]


@dataclass(frozen=True)
class CeilSequence:
    n: int
    s: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(int(v) for v in self.s))
        if self.n < 1 or len(self.s) != self.n:
            raise ValueError(f"sequence length {len(self.s)} does not match n={self.n}")

    @classmethod
    def of(cls, values: Iterable[int]) -> "CeilSequence":
        s = tuple(values)
        return cls(len(s), s)

    def __iter__(self):
        return iter(self.s)

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.s[i]

    def has_step_shape(self) -> bool:
        """``s[1] == 1``, unit-or-zero steps, ``s[i] <= i``."""
        if self.s[0] != 1:
            return False
        return all(0 <= b - a <= 1 for a, b in zip(self.s, self.s[1:]))

    def __str__(self):
        return ",".join(str(v) for v in self.s)


def normalize_affine(a: AffineReal) -> NormalizedAffine:
    t, b = a.t, a.b
    flipped = t < 0
    if flipped:
        t, b = -t, -b
    k = math.floor(t)
    t -= k
    # integer offset that moves ceil(t - b) to exactly 1
    shift = 1 - math.ceil(t - b)
    b -= shift
    return NormalizedAffine(t, b, int_shift=k, offset_shift=shift, sign_flipped=flipped)


def make_sequence(a: NormalizedAffine | AffineReal, n: int) -> CeilSequence:
    if n < 1:
        raise ValueError("n must be positive")
    t, b = a.t, a.b
    return CeilSequence(n, tuple(math.ceil(i * t - b) for i in range(1, n + 1)))


def feasible_offset_interval(s: Iterable[int]) -> tuple[Fraction | None, Fraction | None]:
    """Open interval of offsets ``b`` for which some ``t`` generates ``s``.

    ``None`` marks an unbounded side.  The interval is empty when
    ``lo >= hi``.
    """
    s = tuple(int(v) for v in s)
    n = len(s)
    lo = hi = None
    for i in range(1, n + 1):
        si = s[i - 1]
        for j in range(1, n + 1):
            if i == j:
                continue
            f = Fraction(j * (si - 1) - i * s[j - 1], i - j)
            if j > i:
                if hi is None or f < hi:
                    hi = f
            elif lo is None or f > lo:
                lo = f
    return lo, hi


def is_realizable(s: CeilSequence | Iterable[int]) -> bool:
    """True iff some canonical ``(t, b)`` generates ``s`` exactly."""
    seq = s if isinstance(s, CeilSequence) else CeilSequence.of(s)
    if not seq.has_step_shape():
        return False
    lo, hi = feasible_offset_interval(seq.s)
    return lo is None or hi is None or lo < hi


def extend_sequences(seqs: Iterable[CeilSequence]) -> list[CeilSequence]:
    """All realizable one-step extensions, in lexicographic order."""
    out = set()
    for seq in seqs:
        last = seq.s[-1]
        for nxt in (last, last + 1):
            cand = CeilSequence(seq.n + 1, seq.s + (nxt,))
            if is_realizable(cand):
                out.add(cand)
    return sorted(out, key=lambda c: c.s)


def _dtype_for(n: int):
    return np.uint8 if n <= 255 else np.int32


def enumerate_sequences(n: int, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Every realizable length-``n`` sequence as rows of an array, lexicographic.

    Grows all sequences one position at a time, carrying each row's feasible
    offset interval as an exact fraction ``num/den`` in int64.  A candidate
    ``s_{m+1}`` in ``{s_m, s_m + 1}`` survives when the interval stays
    non-empty, which is the same criterion :func:`is_realizable` applies.
    """
    if n < 1:
        raise ValueError("n must be positive")
    dtype = _dtype_for(n)
    # |j(S_i - 1) - i S_j| < n^2 bounds every finite endpoint
    big = n * n + n + 1
    seqs = np.ones((1, 1), dtype=dtype)
    lo_num = np.array([-big], dtype=np.int64)
    lo_den = np.ones(1, dtype=np.int64)
    hi_num = np.array([big], dtype=np.int64)
    hi_den = np.ones(1, dtype=np.int64)

    for m in range(2, n + 1):
        rows = seqs.shape[0]
        last = seqs[:, -1].astype(np.int64)
        v = np.concatenate([last, last + 1])
        base = np.concatenate([seqs, seqs]).astype(np.int64)
        ln, ld = np.tile(lo_num, 2), np.tile(lo_den, 2)
        hn, hd = np.tile(hi_num, 2), np.tile(hi_den, 2)
        for j in range(1, m):
            sj = base[:, j - 1]
            d = m - j
            a = j * (v - 1) - m * sj
            upd = a * ld > ln * d
            ln = np.where(upd, a, ln)
            ld = np.where(upd, d, ld)
            c = j * v - m * (sj - 1)
            upd = c * hd < hn * d
            hn = np.where(upd, c, hn)
            hd = np.where(upd, d, hd)
        keep = ln * hd < hn * ld
        count = int(keep.sum())
        if count > budget:
            raise SequenceBudgetExceeded(m, count, budget)
        # the stacked halves are (all s_m) then (all s_m + 1); interleave to keep order
        order = np.empty(2 * rows, dtype=np.int64)
        order[0::2] = np.arange(rows)
        order[1::2] = np.arange(rows, 2 * rows)
        order = order[keep[order]]
        seqs = np.concatenate([base, v[:, None]], axis=1)[order].astype(dtype)
        lo_num, lo_den, hi_num, hi_den = ln[order], ld[order], hn[order], hd[order]
    return seqs


def iter_windows(seqs: np.ndarray, window: int = DEFAULT_WINDOW) -> Iterator[np.ndarray]:
    if window < 1:
        raise ValueError("window must be positive")
    for start in range(0, seqs.shape[0], window):
        yield seqs[start:start + window]


def write_sequences(path: str | Path, seqs: Iterable[Iterable[int]]) -> int:
    """Newline-delimited dump, one comma-separated sequence per line."""
    count = 0
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for row in seqs:
            fh.write(",".join(str(int(v)) for v in row))
            fh.write("\n")
            count += 1
    return count


def read_sequences(path: str | Path) -> list[CeilSequence]:
    out = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(CeilSequence.of(int(v) for v in line.split(",")))
    return out
