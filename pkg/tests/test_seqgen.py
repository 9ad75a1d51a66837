import math
import random
from fractions import Fraction

import numpy as np
import pytest

from bnquant.seqgen import (
    AffineReal,
    CeilSequence,
    NormalizedAffine,
    SequenceBudgetExceeded,
    enumerate_sequences,
    extend_sequences,
    feasible_offset_interval,
    is_realizable,
    iter_windows,
    make_sequence,
    normalize_affine,
    read_sequences,
    write_sequences,
)

from helpers import random_tb, witness_affine

COUNTS = [1, 2, 4, 8, 14, 24, 36, 54, 76, 104, 136, 178, 224, 282, 346]


def as_tuples(arr):
    return [tuple(int(v) for v in row) for row in arr]


def test_small_enumerations():
    assert as_tuples(enumerate_sequences(1)) == [(1,)]
    assert as_tuples(enumerate_sequences(2)) == [(1, 1), (1, 2)]
    assert as_tuples(enumerate_sequences(3)) == [(1, 1, 1), (1, 1, 2), (1, 2, 2), (1, 2, 3)]


@pytest.mark.parametrize("n,count", list(enumerate(COUNTS, 1)))
def test_enumeration_counts(n, count):
    assert enumerate_sequences(n).shape == (count, n)


def test_larger_counts():
    assert enumerate_sequences(31).shape[0] == 3018
    assert enumerate_sequences(63).shape[0] == 25346


def test_lexicographic_and_unique():
    rows = as_tuples(enumerate_sequences(14))
    assert rows == sorted(rows)
    assert len(set(rows)) == len(rows)


def test_golden_ratio_sequence():
    a = normalize_affine(AffineReal.parse("0.618", "0.198"))
    assert a.t == Fraction(618, 1000)
    assert str(make_sequence(a, 15)) == "1,2,2,3,3,4,5,5,6,6,7,8,8,9,10"


def test_normalize_golden_example_values():
    assert make_sequence(AffineReal.parse("0.618", "0.198"), 4).s == (1, 2, 2, 3)


def test_normalize_round_trip():
    rnd = random.Random(1)
    for _ in range(1000):
        t, b = random_tb(rnd, -5, 5, b_span=20)
        a = AffineReal(t, b)
        norm = normalize_affine(a)
        assert 0 <= norm.t < 1
        assert math.ceil(norm.t - norm.b) == 1
        assert norm.original() == a
        n = rnd.randint(1, 20)
        tp, bp = (-t, -b) if t < 0 else (t, b)
        direct = [math.ceil(i * tp - bp) for i in range(1, n + 1)]
        assert norm.original_sequence(n) == direct
        assert is_realizable(make_sequence(norm, n))


def test_normalized_rejects_bad_pairs():
    with pytest.raises(ValueError):
        NormalizedAffine(Fraction(3, 2), Fraction(0))
    with pytest.raises(ValueError):
        NormalizedAffine(Fraction(1, 2), Fraction(-3))


def test_affine_rejects_zero_slope():
    with pytest.raises(ValueError):
        AffineReal.parse(0, 1)


def test_step_shape():
    assert CeilSequence.of([1, 1, 2, 3]).has_step_shape()
    assert not CeilSequence.of([0, 1, 2]).has_step_shape()
    assert not CeilSequence.of([1, 3]).has_step_shape()
    assert not CeilSequence.of([1, 2, 1]).has_step_shape()


def test_non_realizable_example():
    # a flat run of three needs t < 1/2, two unit steps in a row need t > 1/2
    assert not is_realizable([1, 1, 1, 2, 3])
    assert not is_realizable([1, 2, 3, 3, 3])
    assert is_realizable([1, 2, 2, 2, 3])


@pytest.mark.parametrize("n", range(1, 13))
def test_prefix_closure_and_extension(n):
    rows = set(as_tuples(enumerate_sequences(n)))
    longer = as_tuples(enumerate_sequences(n + 1))
    assert {r[:-1] for r in longer} == rows
    for r in rows:
        assert any(x[:-1] == r for x in longer)
    for r in longer:
        assert r[0] == 1
        assert all(0 <= b - a <= 1 for a, b in zip(r, r[1:]))
        assert all(v <= i for i, v in enumerate(r, 1))


def test_extend_matches_enumerate():
    seqs = [CeilSequence.of(r) for r in as_tuples(enumerate_sequences(9))]
    assert [c.s for c in extend_sequences(seqs)] == as_tuples(enumerate_sequences(10))


def test_enumeration_covers_random_affines():
    rnd = random.Random(7)
    tables = {n: set(as_tuples(enumerate_sequences(n))) for n in range(1, 16)}
    for _ in range(10000):
        t, b = random_tb(rnd, 0, 1, b_span=3)
        n = rnd.randint(1, 15)
        norm = normalize_affine(AffineReal(t, b))
        assert make_sequence(norm, n).s in tables[n]


def test_every_enumerated_sequence_has_a_witness():
    for row in enumerate_sequences(13):
        t, b = witness_affine(row)
        assert [math.ceil(i * t - b) for i in range(1, 14)] == [int(v) for v in row]


def test_offset_interval_open_ends():
    assert feasible_offset_interval([1]) == (None, None)
    lo, hi = feasible_offset_interval([1, 2, 2])
    assert lo < hi


def test_budget():
    with pytest.raises(SequenceBudgetExceeded) as info:
        enumerate_sequences(20, budget=100)
    assert info.value.count > 100


def test_windows_cover_everything():
    seqs = enumerate_sequences(10)
    parts = list(iter_windows(seqs, 7))
    assert sum(p.shape[0] for p in parts) == seqs.shape[0]
    assert np.array_equal(np.concatenate(parts), seqs)


def test_dump_round_trip(tmp_path):
    seqs = enumerate_sequences(8)
    path = tmp_path / "s8.txt"
    assert write_sequences(path, seqs) == 54
    back = read_sequences(path)
    assert [c.s for c in back] == as_tuples(seqs)
