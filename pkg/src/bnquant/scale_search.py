"""Search for the shared quantized scale ``K``.

A scale ``K`` is *satisfied* for length ``n`` when every realizable ceiling
sequence ``S`` admits integers ``T, B`` with ``ceil((i*T - B) / K) == S_i``
for ``i = 1..n``.  ``K_n`` is the least satisfied scale.  Satisfied scales
are not contiguous above ``K_n``; every ``K > (n-1)(n-3)/2`` is satisfied
once ``n > 4``.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ._rational import ceil_div
from .seqgen import (
    DEFAULT_BUDGET,
    DEFAULT_WINDOW,
    CeilSequence,
    enumerate_sequences,
    iter_windows,
)

log = logging.getLogger(__name__)


class MinimalityError(RuntimeError):
    """The search result could not be certified as the least satisfied scale."""


@dataclass(frozen=True)
class ScaleSearchConfig:
    n: int
    k0: Optional[int] = None
    window: int = DEFAULT_WINDOW
    budget: int = DEFAULT_BUDGET
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.k0 is not None and self.k0 < 1:
            raise ValueError("k0 must be positive")
        if self.window < 1:
            raise ValueError("window must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @property
    def start(self) -> int:
        return self.k0 if self.k0 is not None else default_start(self.n)


@dataclass
class ScaleResult:
    n: int
    kn: int
    start: int
    sequence_count: int
    passes: int
    elapsed: float
    witness_counts: dict[int, int] = field(default_factory=dict)
    bounds: tuple[int, int] = (1, 1)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "kn": self.kn,
            "lower": self.bounds[0],
            "upper": self.bounds[1],
            "start": self.start,
            "sequences": self.sequence_count,
            "passes": self.passes,
            "elapsed": round(self.elapsed, 6),
            "witness_counts": {str(k): v for k, v in sorted(self.witness_counts.items())},
        }


def default_start(n: int) -> int:
    """Lower bound on ``K_n`` used to seed the search."""
    return ceil_div((n - 1) ** 2, 4) if n >= 15 else 1


def kn_bounds(n: int) -> tuple[int, int]:
    """Proven ``(lower, upper)`` bracket for ``K_n``."""
    if n < 1:
        raise ValueError("n must be positive")
    if n >= 27:
        lower = n * n // 4 + 1
    elif n >= 15:
        lower = ceil_div((n - 1) ** 2, 4)
    else:
        lower = 1
    if n > 4:
        upper = (n - 1) * (n - 3) // 2 + 1
    elif n <= 2:
        upper = 1
    else:
        upper = (n - 1) * (n - 2) + 1
    return lower, upper


def blanket_threshold(n: int) -> Optional[int]:
    """Every ``K`` strictly above this value is satisfied (``None`` if no such claim)."""
    if n <= 2:
        return 0
    if n > 4:
        return (n - 1) * (n - 3) // 2
    return (n - 1) * (n - 2)


def t_window(seq: CeilSequence | Iterable[int], k: int) -> tuple[int, int]:
    """Closed integer range of ``T`` scanned for ``seq`` at scale ``k``.

    Uses the first/last-term window ``(k*S_n - 2k + 1)/(n-1) <= T <=
    (k*S_n - 1)/(n-1)``, clamped to ``T >= 0``.  Only valid for ``n >= 2``.
    """
    s = seq.s if isinstance(seq, CeilSequence) else tuple(int(v) for v in seq)
    n = len(s)
    if n < 2:
        raise ValueError("window needs n >= 2")
    lo = ceil_div(k * s[-1] - 2 * k + 1, n - 1)
    hi = (k * s[-1] - 1) // (n - 1)
    return max(lo, 0), hi


def find_tb_for_k(seq: CeilSequence | Iterable[int], k: int) -> Optional[tuple[int, int]]:
    """First ``(T, B)`` in ascending ``T`` order realizing ``seq`` at scale ``k``.

    ``B`` is the smallest admissible offset ``max_i(i*T - k*S_i)``.  Returns
    ``None`` when no ``T`` in the window admits any ``B``.
    """
    s = seq.s if isinstance(seq, CeilSequence) else tuple(int(v) for v in seq)
    if k < 1:
        raise ValueError("k must be positive")
    n = len(s)
    if n == 1:
        # any T works; B in [T - k*S_1, T - k*S_1 + k)
        return 1, 1 - k * s[0]
    lo, hi = t_window(s, k)
    for T in range(lo, hi + 1):
        vals = [i * T - k * si for i, si in enumerate(s, 1)]
        top = max(vals)
        if top < min(vals) + k:
            return T, top
    return None


def satisfied_mask(seqs: np.ndarray, k) -> np.ndarray:
    """Vectorized :func:`find_tb_for_k` existence test for each row.

    ``k`` may be a scalar or a per-row array.
    """
    seqs = np.asarray(seqs)
    rows, n = seqs.shape
    if rows == 0 or n == 1:
        return np.ones(rows, dtype=bool)
    S = seqs.astype(np.int64)
    K = np.broadcast_to(np.asarray(k, dtype=np.int64), (rows,))
    idx = np.arange(1, n + 1, dtype=np.int64)
    last = S[:, -1]
    lo = np.maximum(-((-(K * last - 2 * K + 1)) // (n - 1)), 0)
    hi = (K * last - 1) // (n - 1)
    ok = np.zeros(rows, dtype=bool)
    span = int((hi - lo).max()) + 1
    for d in range(max(span, 0)):
        live = np.flatnonzero(~ok & (lo + d <= hi))
        if live.size == 0:
            break
        T = lo[live] + d
        vals = T[:, None] * idx - K[live, None] * S[live]
        good = vals.max(axis=1) - vals.min(axis=1) < K[live]
        ok[live[good]] = True
    return ok


def _search_window(seqs: np.ndarray, k: int, witness: dict[int, int]) -> int:
    """Smallest ``K >= k`` satisfying every row of ``seqs``, by repeated rescans.

    Each row's ``K`` only moves up one step at a time past scales that fail
    it, so the returned value is the least common satisfied ``K >= k``.
    """
    while True:
        per_row = np.full(seqs.shape[0], k, dtype=np.int64)
        pending = np.arange(seqs.shape[0])
        while pending.size:
            good = satisfied_mask(seqs[pending], per_row[pending])
            failed = pending[~good]
            for kk, cnt in zip(*np.unique(per_row[failed], return_counts=True)):
                witness[int(kk)] = witness.get(int(kk), 0) + int(cnt)
            per_row[failed] += 1
            pending = failed
        k_max = int(per_row.max()) if per_row.size else k
        if k_max > k:
            k = k_max
        else:
            return k


def search_kn(cfg: ScaleSearchConfig, seqs: Optional[np.ndarray] = None) -> ScaleResult:
    """Least satisfied scale for length ``cfg.n``.

    Windows of ``cfg.window`` sequences are searched in turn, each one
    raising the running ``K``; full passes repeat until a pass leaves ``K``
    unchanged.  The result is then certified against ``K - 1``.
    """
    started = time.perf_counter()
    n = cfg.n
    if seqs is None:
        seqs = enumerate_sequences(n, budget=cfg.budget)
    elif seqs.shape[0] > cfg.budget:
        raise ValueError(f"{seqs.shape[0]} sequences exceed budget {cfg.budget}")
    k = cfg.start
    witness: dict[int, int] = {}
    passes = 0
    windows = list(iter_windows(seqs, cfg.window))
    while True:
        passes += 1
        before = k
        if cfg.workers > 1 and len(windows) > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                parts = [{} for _ in windows]
                found = list(pool.map(lambda a: _search_window(a[0], k, a[1]), zip(windows, parts)))
            for part in parts:
                for kk, cnt in part.items():
                    witness[kk] = witness.get(kk, 0) + cnt
            k = max(found + [k])
        else:
            for w, chunk in enumerate(windows):
                k_new = _search_window(chunk, k, witness)
                if k_new > k:
                    log.info("n=%d window %d/%d raised K to %d", n, w + 1, len(windows), k_new)
                    k = k_new
        if k == before:
            break

    if k > 1:
        fails = int((~satisfied_mask(seqs, k - 1)).sum())
        if fails == 0:
            raise MinimalityError(f"K={k - 1} is also satisfied; start {cfg.start} is above K_n")
        witness[k - 1] = max(witness.get(k - 1, 0), fails)
    return ScaleResult(
        n=n,
        kn=k,
        start=cfg.start,
        sequence_count=int(seqs.shape[0]),
        passes=passes,
        elapsed=time.perf_counter() - started,
        witness_counts=witness,
        bounds=kn_bounds(n),
    )


def certify_minimal(n: int, kn: int, seqs: Optional[np.ndarray] = None) -> bool:
    """True iff ``kn`` is satisfied and no smaller positive scale is."""
    if seqs is None:
        seqs = enumerate_sequences(n)
    if not satisfied_mask(seqs, kn).all():
        return False
    return all(not satisfied_mask(seqs, k).all() for k in range(1, kn))


def is_satisfied_k(n: int, k: int, seqs: Optional[np.ndarray] = None) -> bool:
    if k < 1:
        raise ValueError("k must be positive")
    if seqs is None:
        seqs = enumerate_sequences(n)
    return bool(satisfied_mask(seqs, k).all())


def first_failing_sequence(n: int, k: int, seqs: Optional[np.ndarray] = None) -> Optional[CeilSequence]:
    if seqs is None:
        seqs = enumerate_sequences(n)
    bad = np.flatnonzero(~satisfied_mask(seqs, k))
    if bad.size == 0:
        return None
    return CeilSequence(n, tuple(int(v) for v in seqs[bad[0]]))


def list_satisfied_k(
    n: int,
    k_max: int,
    seqs: Optional[np.ndarray] = None,
    shortcut: bool = True,
    budget: int = DEFAULT_BUDGET,
) -> list[int]:
    """Ascending satisfied scales up to ``k_max``.

    With ``shortcut`` set, scales above the blanket threshold are accepted
    without a check.
    """
    if k_max < 1:
        raise ValueError("k_max must be positive")
    threshold = blanket_threshold(n)
    out = []
    for k in range(1, k_max + 1):
        if shortcut and threshold is not None and k > threshold:
            out.append(k)
            continue
        if seqs is None:
            seqs = enumerate_sequences(n, budget=budget)
        if satisfied_mask(seqs, k).all():
            out.append(k)
    return out


def next_satisfied_k(n: int, k: int, seqs: Optional[np.ndarray] = None) -> int:
    """Smallest satisfied scale strictly above ``k``."""
    threshold = blanket_threshold(n)
    cand = k + 1
    while threshold is None or cand <= threshold:
        if seqs is None:
            seqs = enumerate_sequences(n)
        if satisfied_mask(seqs, cand).all():
            return cand
        cand += 1
    return cand


def default_scale(n: int) -> int:
    """Hardware-friendly satisfied scale for ``n`` activation levels.

    64 for 4-bit, 512 for 5-bit and 2**16 for 8-bit; otherwise the first
    power of two above the blanket threshold, which is always satisfied.
    """
    preset = {15: 64, 31: 512, 255: 2 ** 16}
    if n in preset:
        return preset[n]
    threshold = blanket_threshold(n)
    return 1 << max(0, math.ceil(math.log2(threshold + 1)))
