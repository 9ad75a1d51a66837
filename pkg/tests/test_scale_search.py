import math

import numpy as np
import pytest

from bnquant.scale_search import (
    MinimalityError,
    ScaleSearchConfig,
    blanket_threshold,
    certify_minimal,
    default_scale,
    find_tb_for_k,
    first_failing_sequence,
    is_satisfied_k,
    kn_bounds,
    list_satisfied_k,
    next_satisfied_k,
    satisfied_mask,
    search_kn,
    t_window,
)
from bnquant.seqgen import enumerate_sequences

from helpers import SATISFIED_15, KN_GOLDEN


def brute_realizes(seq, k):
    """Exhaustive ``(T, B)`` scan with ``0 <= T <= 2k``; independent of any window formula."""
    s = [int(v) for v in seq]
    for T in range(0, 2 * k + 1):
        for B in range(T - k, T):
            if all(math.ceil((i * T - B) / k) == si for i, si in enumerate(s, 1)):
                return True
    return False


def test_find_tb_simple():
    assert find_tb_for_k([1], 5) == (1, -4)
    T, B = find_tb_for_k([1, 2, 2, 3], 8)
    assert [math.ceil((i * T - B) / 8) for i in range(1, 5)] == [1, 2, 2, 3]


def test_find_tb_golden_sequence():
    seq = [1, 2, 2, 3, 3, 4, 5, 5, 6, 6, 7, 8, 8, 9, 10]
    T, B = find_tb_for_k(seq, 64)
    assert [-((-(i * T - B)) // 64) for i in range(1, 16)] == seq


def test_find_tb_reports_failure():
    seq = first_failing_sequence(15, 50)
    assert seq is not None
    assert find_tb_for_k(seq, 50) is None
    assert not brute_realizes(seq, 50)
    assert brute_realizes(seq, 51)


@pytest.mark.parametrize("n", range(2, 9))
def test_mask_matches_brute_force(n):
    seqs = enumerate_sequences(n)
    for k in range(1, 16):
        mask = satisfied_mask(seqs, k)
        assert [bool(m) for m in mask] == [brute_realizes(r, k) for r in seqs]


@pytest.mark.parametrize("n", [5, 10, 15])
def test_scalar_and_vector_agree(n):
    seqs = enumerate_sequences(n)
    for k in range(1, 60):
        scalar = [find_tb_for_k(r, k) is not None for r in seqs]
        assert scalar == list(satisfied_mask(seqs, k))


def test_found_pair_realizes():
    seqs = enumerate_sequences(12)
    for row in seqs:
        T, B = find_tb_for_k(row, 41)
        assert [-((-(i * T - B)) // 41) for i in range(1, 13)] == [int(v) for v in row]


def test_satisfied_examples():
    assert is_satisfied_k(15, 64)
    assert not is_satisfied_k(15, 52)
    assert is_satisfied_k(15, 85)
    assert not is_satisfied_k(15, 84)


@pytest.mark.parametrize("n,kn", [(1, 1), (3, 2), (7, 9), (10, 22), (15, 51)])
def test_search_examples(n, kn):
    res = search_kn(ScaleSearchConfig(n))
    assert res.kn == kn
    assert res.sequence_count == enumerate_sequences(n).shape[0]


def test_list_examples():
    assert list_satisfied_k(15, 85) == SATISFIED_15
    assert list_satisfied_k(15, 85, shortcut=False) == SATISFIED_15
    assert list_satisfied_k(3, 4) == [2, 3, 4]
    assert list_satisfied_k(1, 3) == [1, 2, 3]
    assert list_satisfied_k(15, 69) == SATISFIED_15[:8]
    assert list_satisfied_k(31, 289) == [289]


def test_next_satisfied():
    assert next_satisfied_k(15, 52) == 61
    assert next_satisfied_k(15, 83) == 85
    assert next_satisfied_k(15, 200) == 201


def test_bounds_values():
    assert kn_bounds(15) == (49, 85)
    assert kn_bounds(31) == (241, 421)
    assert kn_bounds(63) == (993, 1861)
    assert kn_bounds(2) == (1, 1)
    with pytest.raises(ValueError):
        kn_bounds(0)


@pytest.mark.parametrize("n", range(5, 16))
def test_blanket_satisfaction(n):
    seqs = enumerate_sequences(n)
    top = blanket_threshold(n)
    for k in range(top + 1, top + 21):
        assert satisfied_mask(seqs, k).all()


@pytest.mark.parametrize("n", range(1, 14))
def test_minimality_certificate(n):
    kn = KN_GOLDEN[n - 1]
    assert certify_minimal(n, kn)
    if kn > 1:
        assert not certify_minimal(n, kn - 1)


def test_start_above_kn_is_caught():
    with pytest.raises(MinimalityError):
        search_kn(ScaleSearchConfig(15, k0=62))


@pytest.mark.parametrize("n", [4, 9, 14, 17, 20])
def test_window_size_does_not_change_result(n):
    a = search_kn(ScaleSearchConfig(n, window=1))
    b = search_kn(ScaleSearchConfig(n, window=100_000))
    c = search_kn(ScaleSearchConfig(n, window=13, workers=4))
    assert a.kn == b.kn == c.kn == KN_GOLDEN[n - 1]


def test_t_window_contains_pairwise_window():
    """Every T allowed by all index pairs lies in the first/last-term window."""
    for n in (6, 11, 15):
        for row in enumerate_sequences(n):
            s = [int(v) for v in row]
            for k in (13, 51, 64):
                lo, hi = t_window(s, k)
                for T in range(0, 2 * k):
                    pair_ok = all(
                        (s[i] - s[j] - 1) * k < (i - j) * T < (s[i] - s[j] + 1) * k
                        for i in range(n) for j in range(i)
                    )
                    if pair_ok:
                        assert lo <= T <= hi


def test_default_scales():
    assert default_scale(15) == 64
    assert default_scale(31) == 512
    assert default_scale(255) == 65536
    assert default_scale(3) == 4
    assert is_satisfied_k(7, default_scale(7))


def test_witness_counts_recorded():
    res = search_kn(ScaleSearchConfig(15))
    assert res.witness_counts[50] > 0
    assert res.as_dict()["kn"] == 51


@pytest.mark.parametrize("n", range(27, 32))
def test_quadratic_growth(n):
    kn = KN_GOLDEN[n - 1]
    assert search_kn(ScaleSearchConfig(n)).kn == kn
    assert n * n / 4 < kn < n * n / 2
